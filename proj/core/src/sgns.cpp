#include "incagg/sgns.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "incagg/error.hpp"

namespace incagg::embed {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

// -log sigmoid(x), stable for large |x|.
double neg_log_sigmoid(double x) { return x >= 0.0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x)); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

void check_dims(std::span<const double> center, std::span<const double> context,
                const std::vector<std::span<const double>>& negatives) {
  if (context.size() != center.size()) throw ValidationError("center and context dimensions differ");
  for (const auto& n : negatives) {
    if (n.size() != center.size()) throw ValidationError("negative dimension differs from center");
  }
}

// Element access that is plain in deterministic mode and relaxed-atomic when
// several workers share the tables.
double load(double& x, bool shared) {
  return shared ? std::atomic_ref<double>(x).load(std::memory_order_relaxed) : x;
}
void store(double& x, double v, bool shared) {
  if (shared) {
    std::atomic_ref<double>(x).store(v, std::memory_order_relaxed);
  } else {
    x = v;
  }
}

}  // namespace

SgnsGradients sgns_gradient(std::span<const double> center, std::span<const double> context,
                            const std::vector<std::span<const double>>& negatives) {
  check_dims(center, context, negatives);
  SgnsGradients g;
  const std::size_t d = center.size();
  g.center.assign(d, 0.0);
  const double pos = dot(center, context);
  g.loss = neg_log_sigmoid(pos);
  const double pos_coef = sigmoid(pos) - 1.0;
  for (std::size_t k = 0; k < d; ++k) g.center[k] += pos_coef * context[k];
  g.context.resize(d);
  for (std::size_t k = 0; k < d; ++k) g.context[k] = pos_coef * center[k];
  for (const auto& n : negatives) {
    const double s = dot(center, n);
    g.loss += neg_log_sigmoid(-s);
    const double coef = sigmoid(s);
    for (std::size_t k = 0; k < d; ++k) g.center[k] += coef * n[k];
    std::vector<double> gn(d);
    for (std::size_t k = 0; k < d; ++k) gn[k] = coef * center[k];
    g.negatives.push_back(std::move(gn));
  }
  return g;
}

double sgns_loss(std::span<const double> center, std::span<const double> context,
                 const std::vector<std::span<const double>>& negatives) {
  check_dims(center, context, negatives);
  double loss = neg_log_sigmoid(dot(center, context));
  for (const auto& n : negatives) loss += neg_log_sigmoid(-dot(center, n));
  return loss;
}

SgnsTrainer::SgnsTrainer(const WalkCorpus& corpus, const WalkConfig& cfg)
    : corpus_(&corpus), cfg_(cfg), dim_(static_cast<std::size_t>(cfg.dim)), rng_(cfg.seed) {
  validate(cfg_);
  const std::size_t vocab = corpus.type_names.size();
  present_.assign(vocab, 0);
  std::vector<double> counts(vocab, 0.0);
  for (const auto& seq : corpus.sequences) {
    for (TypeId t : seq) {
      if (t >= vocab) throw ValidationError("walk corpus references an unknown type id");
      present_[t] = 1;
      counts[t] += 1.0;
      ++total_tokens_;
    }
  }
  if (total_tokens_ == 0) throw ValidationError("walk corpus is empty");
  if (std::count(present_.begin(), present_.end(), 1) < 2) {
    throw ValidationError("walk corpus needs at least two distinct incident types");
  }

  center_.assign(vocab * dim_, 0.0);
  context_.assign(vocab * dim_, 0.0);
  const double half = 0.5 / static_cast<double>(dim_);
  std::uniform_real_distribution<double> init(-half, half);
  for (auto& x : center_) x = init(rng_);

  noise_cdf_.resize(vocab);
  double acc = 0.0;
  for (std::size_t t = 0; t < vocab; ++t) {
    acc += std::pow(counts[t], 0.75);
    noise_cdf_[t] = acc;
  }
  for (auto& c : noise_cdf_) c /= acc;
}

TypeId SgnsTrainer::draw_negative(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto it = std::upper_bound(noise_cdf_.begin(), noise_cdf_.end(), u(rng));
  const auto idx = static_cast<std::size_t>(it - noise_cdf_.begin());
  return static_cast<TypeId>(std::min(idx, noise_cdf_.size() - 1));
}

void SgnsTrainer::train_range(std::size_t first, std::size_t last, std::mt19937_64& rng, bool shared) {
  const double planned = static_cast<double>(total_tokens_) * cfg_.epochs;
  const auto window = static_cast<std::ptrdiff_t>(cfg_.window);
  const auto stride = shared ? static_cast<std::size_t>(cfg_.workers) : std::size_t{1};
  std::vector<double> grad_center(dim_);
  std::vector<double> c(dim_);
  std::size_t local_done = 0;
  std::uniform_int_distribution<std::ptrdiff_t> reach(1, window);

  auto run = [&]<bool Shared>() {
    for (std::size_t s = first; s < last; ++s) {
      const auto& seq = corpus_->sequences[s];
      const auto len = static_cast<std::ptrdiff_t>(seq.size());
      for (std::ptrdiff_t i = 0; i < len; ++i) {
        const double progress = static_cast<double>(processed_ + local_done * stride) / planned;
        const double lr = cfg_.learning_rate * std::max(1e-4, 1.0 - progress);
        ++local_done;
        double* crow = &center_[seq[static_cast<std::size_t>(i)] * dim_];
        const std::ptrdiff_t b = reach(rng);
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - b);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(len - 1, i + b);
        for (std::ptrdiff_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const TypeId target = seq[static_cast<std::size_t>(j)];
          for (std::size_t k = 0; k < dim_; ++k) c[k] = load(crow[k], Shared);
          std::fill(grad_center.begin(), grad_center.end(), 0.0);
          for (int n = 0; n <= cfg_.negatives; ++n) {
            TypeId out = target;
            double label = 1.0;
            if (n > 0) {
              out = draw_negative(rng);
              if (out == target) continue;
              label = 0.0;
            }
            double* orow = &context_[out * dim_];
            double score = 0.0;
            for (std::size_t k = 0; k < dim_; ++k) score += c[k] * load(orow[k], Shared);
            // Descent step on the logistic loss: (label - sigmoid) is the negated gradient coefficient.
            const double g = (label - sigmoid(score)) * lr;
            for (std::size_t k = 0; k < dim_; ++k) {
              const double o = load(orow[k], Shared);
              grad_center[k] += g * o;
              store(orow[k], o + g * c[k], Shared);
            }
          }
          for (std::size_t k = 0; k < dim_; ++k) store(crow[k], load(crow[k], Shared) + grad_center[k], Shared);
        }
      }
    }
  };
  if (shared) {
    run.template operator()<true>();
  } else {
    run.template operator()<false>();
    processed_ += local_done;
  }
}

void SgnsTrainer::train_epoch() {
  if (epochs_done_ >= cfg_.epochs) throw ValidationError("all planned epochs already trained");
  const std::size_t n = corpus_->sequences.size();
  if (cfg_.workers <= 1 || n < 2) {
    train_range(0, n, rng_, false);
  } else {
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(cfg_.workers), n);
    std::vector<std::mt19937_64> rngs;
    for (std::size_t w = 0; w < workers; ++w) rngs.emplace_back(rng_());
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([this, w, workers, n, &rngs] {
        train_range(w * n / workers, (w + 1) * n / workers, rngs[w], true);
      });
    }
    for (auto& t : pool) t.join();
    processed_ += total_tokens_;
  }
  ++epochs_done_;
}

std::vector<TrainingPair> SgnsTrainer::sample_pairs(std::size_t count, std::uint64_t seed) const {
  std::vector<std::size_t> usable;
  for (std::size_t s = 0; s < corpus_->sequences.size(); ++s) {
    if (corpus_->sequences[s].size() >= 2) usable.push_back(s);
  }
  if (usable.empty()) throw ValidationError("walk corpus has no sequence with two tokens");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_seq(0, usable.size() - 1);
  std::vector<TrainingPair> out;
  out.reserve(count);
  while (out.size() < count) {
    const auto& seq = corpus_->sequences[usable[pick_seq(rng)]];
    const auto len = static_cast<std::ptrdiff_t>(seq.size());
    std::uniform_int_distribution<std::ptrdiff_t> pick_pos(0, len - 1);
    const auto i = pick_pos(rng);
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - cfg_.window);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(len - 1, i + cfg_.window);
    std::uniform_int_distribution<std::ptrdiff_t> pick_ctx(lo, hi - 1);
    auto j = pick_ctx(rng);
    if (j >= i) ++j;
    TrainingPair p;
    p.center = seq[static_cast<std::size_t>(i)];
    p.context = seq[static_cast<std::size_t>(j)];
    for (int n = 0; n < cfg_.negatives; ++n) p.negatives.push_back(draw_negative(rng));
    out.push_back(std::move(p));
  }
  return out;
}

double SgnsTrainer::loss(std::span<const TrainingPair> batch) const {
  if (batch.empty()) return 0.0;
  double total = 0.0;
  for (const auto& p : batch) {
    std::vector<std::span<const double>> negs;
    for (TypeId n : p.negatives) negs.push_back(context_row(n));
    total += sgns_loss(center_row(p.center), context_row(p.context), negs);
  }
  return total / static_cast<double>(batch.size());
}

std::span<const double> SgnsTrainer::center_row(TypeId t) const {
  if (t >= present_.size()) throw LookupError("type id out of range");
  return {center_.data() + t * dim_, dim_};
}

std::span<const double> SgnsTrainer::context_row(TypeId t) const {
  if (t >= present_.size()) throw LookupError("type id out of range");
  return {context_.data() + t * dim_, dim_};
}

IncidentEmbedding SgnsTrainer::embedding() const {
  IncidentEmbedding emb(dim_);
  std::vector<float> row(dim_);
  for (std::size_t t = 0; t < present_.size(); ++t) {
    if (!present_[t]) continue;
    for (std::size_t k = 0; k < dim_; ++k) row[k] = static_cast<float>(center_[t * dim_ + k]);
    emb.add(corpus_->type_names[t], row);
  }
  return emb;
}

IncidentEmbedding train(const WalkCorpus& corpus, const WalkConfig& cfg) {
  SgnsTrainer trainer(corpus, cfg);
  for (int e = 0; e < cfg.epochs; ++e) trainer.train_epoch();
  return trainer.embedding();
}

}  // namespace incagg::embed
