#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eel/core.hpp"
#include "eel/data.hpp"
#include "eel/genotype.hpp"
#include "eel/learners.hpp"
#include "eel/linalg.hpp"

namespace eel {

/// (f1, f2): accuracy (RMSE) and negative-correlation diversity, both minimized.
using Objectives = std::array<double, 2>;

struct EvaluatedIndividual {
  Genotype genotype;
  PipelineConfig config;
  Objectives f{0.0, 0.0};
  std::vector<double> predictions;  // out-of-fold, training-sample order
  std::uint64_t learner_seed = 0;
};

struct NormalizationFactors {
  Objectives z_tilde{1.0, 1.0};
};

inline constexpr double kFactorFloor = 1e-12;

/// Fold id per sample: a seeded permutation cut into near-equal contiguous chunks.
inline std::vector<std::size_t> make_folds(std::size_t sample_count, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("make_folds: need at least 2 folds");
  if (sample_count < folds) throw std::invalid_argument("make_folds: fewer samples than folds");
  std::vector<std::size_t> perm(sample_count);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> fold(sample_count);
  for (std::size_t j = 0; j < sample_count; ++j) fold[perm[j]] = j * folds / sample_count;
  return fold;
}

struct AccuracyResult {
  double f1 = 0.0;
  std::vector<double> predictions;
};

/// k-fold cross-validated RMSE. Each fold's learner is trained on the other
/// folds with the same spec (and seed); out-of-fold predictions are kept in
/// sample order.
inline AccuracyResult evaluate_accuracy(const SampleMatrix& train, const LearnerSpec& spec,
                                        std::span<const std::size_t> fold_of, std::size_t folds = 5) {
  const std::size_t s = train.rows();
  if (s < folds) throw std::invalid_argument("evaluate_accuracy: fewer samples than folds");
  if (fold_of.size() != s) throw std::invalid_argument("evaluate_accuracy: fold assignment length mismatch");

  AccuracyResult out;
  out.predictions.assign(s, 0.0);
  std::vector<std::size_t> fit_rows;
  std::vector<std::size_t> held_rows;
  for (std::size_t k = 0; k < folds; ++k) {
    fit_rows.clear();
    held_rows.clear();
    for (std::size_t i = 0; i < s; ++i) (fold_of[i] == k ? held_rows : fit_rows).push_back(i);
    if (held_rows.empty()) continue;
    const SampleMatrix fit = select_rows(train, fit_rows);
    const SampleMatrix held = select_rows(train, held_rows);
    const TrainedLearner model = eel::train(spec, fit.inputs, fit.targets);
    const Vector pred = model.predict(held.inputs);
    for (std::size_t j = 0; j < held_rows.size(); ++j) out.predictions[held_rows[j]] = pred(static_cast<Eigen::Index>(j));
  }
  out.f1 = rmse(out.predictions, as_span(train.targets));
  return out;
}

/// Negative-correlation diversity of `pred` against a population (M rows).
/// With `self_row`, `pred` is that member: the mean runs over the M rows and
/// the inner sum skips the member's own row. Without it, `pred` is an external
/// candidate: the mean also includes the candidate and the inner sum runs over
/// all M rows.
inline double ncl_diversity(std::span<const double> pred, const Matrix& population,
                            std::optional<std::size_t> self_row = std::nullopt) {
  const auto M = static_cast<std::size_t>(population.rows());
  if (M == 0) throw std::invalid_argument("ncl_diversity: empty population");
  if (static_cast<std::size_t>(population.cols()) != pred.size()) throw std::invalid_argument("ncl_diversity: length mismatch");
  if (self_row && *self_row >= M) throw std::out_of_range("ncl_diversity: member row out of range");

  double f2 = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    double mean = population.col(col).sum();
    mean = self_row ? mean / static_cast<double>(M) : (mean + pred[i]) / static_cast<double>(M + 1);
    double others = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      if (self_row && m == *self_row) continue;
      others += population(static_cast<Eigen::Index>(m), col) - mean;
    }
    f2 += (pred[i] - mean) * others;
  }
  return f2;
}

inline Objectives normalize(const Objectives& f, const NormalizationFactors& factors) {
  if (!(factors.z_tilde[0] > 0.0 && factors.z_tilde[1] > 0.0)) throw std::invalid_argument("normalize: non-positive factor");
  return {f[0] / factors.z_tilde[0], f[1] / factors.z_tilde[1]};
}

/// Per-objective max |f| over the population, floored at kFactorFloor.
inline NormalizationFactors update_factors(std::span<const Objectives> fitness) {
  if (fitness.empty()) throw std::invalid_argument("update_factors: empty population");
  NormalizationFactors out{{kFactorFloor, kFactorFloor}};
  for (const auto& f : fitness) {
    for (std::size_t k = 0; k < 2; ++k) out.z_tilde[k] = std::max(out.z_tilde[k], std::abs(f[k]));
  }
  return out;
}

inline NormalizationFactors update_factors(std::span<const EvaluatedIndividual> population) {
  std::vector<Objectives> f;
  f.reserve(population.size());
  for (const auto& ind : population) f.push_back(ind.f);
  return update_factors(std::span<const Objectives>(f));
}

/// Prediction-vector matrix (one row per individual).
inline Matrix prediction_matrix(std::span<const EvaluatedIndividual> population) {
  if (population.empty()) return {};
  const auto s = static_cast<Eigen::Index>(population.front().predictions.size());
  Matrix m(static_cast<Eigen::Index>(population.size()), s);
  for (std::size_t r = 0; r < population.size(); ++r) {
    const auto& p = population[r].predictions;
    if (static_cast<Eigen::Index>(p.size()) != s) throw std::invalid_argument("prediction vectors differ in length");
    m.row(static_cast<Eigen::Index>(r)) = Eigen::Map<const Vector>(p.data(), s).transpose();
  }
  return m;
}

/// The accuracy/diversity objective over a fixed training sample frame.
/// f1 is evaluated per individual; f2 couples the population and is refreshed
/// from a snapshot of the population's prediction matrix.
class PipelineProblem {
 public:
  PipelineProblem(const TimeSeriesDataset& data, GenotypeSpec spec, std::size_t history,
                  std::vector<std::size_t> train_rows, std::uint64_t fold_seed, std::size_t folds = 5)
      : data_(&data), spec_(std::move(spec)), history_(history), train_rows_(std::move(train_rows)), folds_(folds) {
    spec_.validate();
    if (spec_.channel_count != data.channel_count()) throw ConfigError("genotype spec channel count does not match dataset");
    fold_of_ = make_folds(train_rows_.size(), folds_, fold_seed);
  }

  std::size_t dimension() const { return spec_.dimension(); }
  const GenotypeSpec& spec() const { return spec_; }
  std::size_t history() const { return history_; }
  const std::vector<std::size_t>& train_rows() const { return train_rows_; }
  const std::vector<std::size_t>& fold_assignment() const { return fold_of_; }

  /// f1 and out-of-fold predictions; f2 is left at 0 until scored.
  EvaluatedIndividual evaluate(const Genotype& g, std::uint64_t learner_seed) const {
    EvaluatedIndividual ind;
    ind.genotype = g;
    ind.learner_seed = learner_seed;
    ind.config = decode(g, spec_, learner_seed);
    const SampleMatrix train = select_rows(build_samples(*data_, ind.config, history_), train_rows_);
    auto acc = evaluate_accuracy(train, ind.config.learner, fold_of_, folds_);
    ind.f = {acc.f1, 0.0};
    ind.predictions = std::move(acc.predictions);
    return ind;
  }

  /// Recompute every member's f2 against the population and take a new snapshot.
  void refresh(std::span<EvaluatedIndividual> population) {
    snapshot_ = prediction_matrix(population);
    for (std::size_t j = 0; j < population.size(); ++j) {
      population[j].f[1] = ncl_diversity(population[j].predictions, snapshot_, j);
    }
  }

  /// f2 of a candidate that is not (yet) a population member.
  void score_candidate(EvaluatedIndividual& candidate) const {
    candidate.f[1] = ncl_diversity(candidate.predictions, snapshot_);
  }

 private:
  const TimeSeriesDataset* data_;
  GenotypeSpec spec_;
  std::size_t history_;
  std::vector<std::size_t> train_rows_;
  std::size_t folds_;
  std::vector<std::size_t> fold_of_;
  Matrix snapshot_;
};

}  // namespace eel
