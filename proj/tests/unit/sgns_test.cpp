#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "incagg/embedding.hpp"
#include "incagg/error.hpp"
#include "incagg/sgns.hpp"

namespace incagg::embed {
namespace {

using Vec = std::vector<double>;

double rel_error(const Vec& a, const Vec& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(na) + std::sqrt(nb);
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

double loss_of(const Vec& c, const Vec& o, const std::vector<Vec>& negs) {
  std::vector<std::span<const double>> spans(negs.begin(), negs.end());
  return sgns_loss(c, o, spans);
}

// Central differences of the loss with respect to every entry of `target`.
Vec numeric_gradient(Vec& target, const std::function<double()>& f) {
  const double h = 1e-5;
  Vec g(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double keep = target[i];
    target[i] = keep + h;
    const double up = f();
    target[i] = keep - h;
    const double down = f();
    target[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

TEST(SgnsGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> val(0.0, 0.7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 1 + rng() % 16;
    const std::size_t k = rng() % 6;
    Vec c(dim), o(dim);
    std::vector<Vec> negs(k, Vec(dim));
    for (auto& x : c) x = val(rng);
    for (auto& x : o) x = val(rng);
    for (auto& n : negs) {
      for (auto& x : n) x = val(rng);
    }
    std::vector<std::span<const double>> spans(negs.begin(), negs.end());
    const auto g = sgns_gradient(c, o, spans);
    EXPECT_NEAR(g.loss, loss_of(c, o, negs), 1e-12);
    auto f = [&] { return loss_of(c, o, negs); };
    EXPECT_LE(rel_error(g.center, numeric_gradient(c, f)), 1e-6) << "trial " << trial;
    EXPECT_LE(rel_error(g.context, numeric_gradient(o, f)), 1e-6) << "trial " << trial;
    ASSERT_EQ(g.negatives.size(), k);
    for (std::size_t j = 0; j < k; ++j) {
      EXPECT_LE(rel_error(g.negatives[j], numeric_gradient(negs[j], f)), 1e-6) << "trial " << trial;
    }
  }
}

TEST(SgnsGradient, ClosedFormAtTheOrigin) {
  const Vec zero(3, 0.0);
  const Vec o{1.0, 2.0, -1.0};
  const Vec n1{0.5, 0.0, 4.0};
  const Vec n2{-2.0, 1.0, 1.0};
  const auto g = sgns_gradient(zero, o, {n1, n2});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(g.center[i], -0.5 * o[i] + 0.5 * n1[i] + 0.5 * n2[i]);
  EXPECT_DOUBLE_EQ(g.loss, 3.0 * std::log(2.0));
}

TEST(SgnsGradient, SaturatedLossIsNearZero) {
  const Vec c{10.0, 10.0};
  const Vec o{10.0, 10.0};
  const Vec n{-10.0, -10.0};
  EXPECT_LT(sgns_loss(c, o, {n}), 1e-12);
  EXPECT_TRUE(std::isfinite(sgns_loss(c, Vec{-100.0, -100.0}, {Vec{100.0, 100.0}})));
}

TEST(Sigmoid, StableAtExtremes) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
}

IncidentEmbedding embedding_of(const std::vector<std::vector<float>>& rows) {
  IncidentEmbedding e(rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) e.add("t" + std::to_string(i), rows[i]);
  return e;
}

TEST(EmbSoftmax, NormalisedUniformAndSingleton) {
  std::mt19937_64 rng(3);
  std::normal_distribution<float> val(0.0f, 1.0f);
  std::vector<std::vector<float>> rows(12, std::vector<float>(6));
  for (auto& r : rows) {
    for (auto& x : r) x = val(rng);
  }
  const auto e = embedding_of(rows);
  for (const auto& i : e.types()) {
    double sum = 0.0;
    for (const auto& j : e.types()) sum += emb_softmax(e, i, j);
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
  const auto flat = embedding_of(std::vector<std::vector<float>>(4, {0.3f, -0.2f}));
  EXPECT_NEAR(emb_softmax(flat, "t0", "t3"), 0.25, 1e-12);
  EXPECT_DOUBLE_EQ(emb_softmax(embedding_of({{1.0f, 2.0f}}), "t0", "t0"), 1.0);
  EXPECT_THROW(emb_softmax(flat, "t0", "zz"), LookupError);
}

WalkConfig toy_config() {
  WalkConfig cfg;
  cfg.walk_length = 20;
  cfg.window = 5;
  cfg.dim = 16;
  cfg.epochs = 5;
  cfg.seed = 5;
  return cfg;
}

WalkCorpus alternating(const std::vector<std::string>& names, std::vector<std::pair<TypeId, TypeId>> pairs,
                       int per_pair) {
  WalkCorpus c;
  c.type_names = names;
  for (const auto& [x, y] : pairs) {
    for (int s = 0; s < per_pair; ++s) {
      std::vector<TypeId> seq(20);
      for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = i % 2 ? y : x;
      c.sequences.push_back(seq);
    }
  }
  return c;
}

TEST(Train, CoOccurringTypesAttract) {
  auto corpus = alternating({"A", "B", "C"}, {{0, 1}}, 200);
  corpus.sequences.push_back({2});
  const auto e = train(corpus, toy_config());
  ASSERT_EQ(e.types(), (std::vector<std::string>{"A", "B", "C"}));
  const double ab = cosine(e.vector("A"), e.vector("B"));
  EXPECT_GT(ab, 0.9);
  EXPECT_GT(ab, cosine(e.vector("A"), e.vector("C")));
}

TEST(Train, DisjointSubCorporaSeparate) {
  const auto corpus = alternating({"A", "B", "C", "D"}, {{0, 1}, {2, 3}}, 200);
  const auto e = train(corpus, toy_config());
  const double intra = (cosine(e.vector("A"), e.vector("B")) + cosine(e.vector("C"), e.vector("D"))) / 2;
  const double cross = (cosine(e.vector("A"), e.vector("C")) + cosine(e.vector("A"), e.vector("D")) +
                        cosine(e.vector("B"), e.vector("C")) + cosine(e.vector("B"), e.vector("D"))) /
                       4;
  EXPECT_GT(intra - cross, 0.5);
}

TEST(Train, FrozenBatchLossDropsOverTheFirstEpoch) {
  const auto corpus = alternating({"A", "B", "C", "D"}, {{0, 1}, {2, 3}}, 100);
  SgnsTrainer trainer(corpus, toy_config());
  const auto batch = trainer.sample_pairs(500, 77);
  const double before = trainer.loss(batch);
  trainer.train_epoch();
  EXPECT_LT(trainer.loss(batch), before);
}

TEST(Train, VocabularyIsTheCorpusTypes) {
  auto corpus = alternating({"A", "unused", "B"}, {{0, 2}}, 10);
  const auto e = train(corpus, toy_config());
  EXPECT_EQ(e.types(), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(e.dim(), 16u);
}

TEST(Train, DeterministicWithOneWorker) {
  const auto corpus = alternating({"A", "B", "C", "D"}, {{0, 1}, {2, 3}, {0, 3}}, 50);
  EXPECT_EQ(train(corpus, toy_config()), train(corpus, toy_config()));
  auto other = toy_config();
  other.seed = 6;
  EXPECT_FALSE(train(corpus, toy_config()) == train(corpus, other));
}

TEST(Train, ParallelWorkersProduceAUsableEmbedding) {
  const auto corpus = alternating({"A", "B", "C", "D"}, {{0, 1}, {2, 3}}, 200);
  auto cfg = toy_config();
  cfg.workers = 4;
  const auto e = train(corpus, cfg);
  EXPECT_GT(cosine(e.vector("A"), e.vector("B")), cosine(e.vector("A"), e.vector("C")));
}

TEST(Train, RejectsDegenerateCorpora) {
  EXPECT_THROW(SgnsTrainer(WalkCorpus{}, toy_config()), ValidationError);
  WalkCorpus one;
  one.type_names = {"A"};
  one.sequences = {{0, 0, 0}};
  EXPECT_THROW(SgnsTrainer(one, toy_config()), ValidationError);
  const auto corpus = alternating({"A", "B"}, {{0, 1}}, 2);
  SgnsTrainer trainer(corpus, toy_config());
  for (int e = 0; e < 5; ++e) trainer.train_epoch();
  EXPECT_THROW(trainer.train_epoch(), ValidationError);
  EXPECT_THROW(trainer.center_row(9), LookupError);
}

}  // namespace
}  // namespace incagg::embed
