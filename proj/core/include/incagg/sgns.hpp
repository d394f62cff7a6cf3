#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "incagg/embedding.hpp"
#include "incagg/walks.hpp"

namespace incagg::embed {

double sigmoid(double x);

/// Gradients of L = -log s(c.o) - sum_k log s(-c.n_k) with respect to the
/// center vector c, the context vector o and each negative n_k.
struct SgnsGradients {
  double loss = 0.0;
  std::vector<double> center;
  std::vector<double> context;
  std::vector<std::vector<double>> negatives;
};

SgnsGradients sgns_gradient(std::span<const double> center, std::span<const double> context,
                            const std::vector<std::span<const double>>& negatives);

double sgns_loss(std::span<const double> center, std::span<const double> context,
                 const std::vector<std::span<const double>>& negatives);

/// One (center, context) pair with its negatives.
struct TrainingPair {
  TypeId center = 0;
  TypeId context = 0;
  std::vector<TypeId> negatives;
};

/// Skip-gram trainer with separate center and context tables. Center rows
/// start uniform in [-0.5/dim, 0.5/dim], context rows at zero. Negatives are
/// drawn from unigram^0.75; the learning rate decays linearly over all
/// planned epochs. Each center uses a context reach drawn uniformly from
/// [1, window], so nearer neighbours are weighted more.
class SgnsTrainer {
 public:
  /// Throws ValidationError when the corpus is empty or has fewer than two
  /// distinct types.
  SgnsTrainer(const WalkCorpus& corpus, const WalkConfig& cfg);

  void train_epoch();
  int epochs_done() const noexcept { return epochs_done_; }

  /// Draws `count` pairs from the corpus with sampled negatives.
  std::vector<TrainingPair> sample_pairs(std::size_t count, std::uint64_t seed) const;
  /// Mean loss over `batch` at the current parameters.
  double loss(std::span<const TrainingPair> batch) const;

  /// Center vectors of every type that occurs in the corpus.
  IncidentEmbedding embedding() const;

  std::span<const double> center_row(TypeId t) const;
  std::span<const double> context_row(TypeId t) const;

 private:
  void train_range(std::size_t first, std::size_t last, std::mt19937_64& rng, bool shared);
  TypeId draw_negative(std::mt19937_64& rng) const;

  const WalkCorpus* corpus_;
  WalkConfig cfg_;
  std::size_t dim_;
  std::vector<char> present_;
  std::vector<double> center_;
  std::vector<double> context_;
  std::vector<double> noise_cdf_;
  std::size_t total_tokens_ = 0;
  std::size_t processed_ = 0;
  int epochs_done_ = 0;
  std::mt19937_64 rng_;
};

/// Runs cfg.epochs epochs and returns the center vectors.
IncidentEmbedding train(const WalkCorpus& corpus, const WalkConfig& cfg);

}  // namespace incagg::embed
