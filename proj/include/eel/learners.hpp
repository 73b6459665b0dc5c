#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>

#include "eel/core.hpp"
#include "eel/linalg.hpp"
#include "eel/pipeline.hpp"

namespace eel {

/// Width of the hidden representation H for a spec and input width.
inline std::size_t hidden_width(const LearnerSpec& spec, std::size_t input_width) {
  const auto p = [&](std::size_t i) { return static_cast<std::size_t>(spec.params.at(i)); };
  switch (spec.kind) {
    case LearnerKind::elm: return p(0);
    case LearnerKind::rvfl: return p(0) + (spec.params.at(1) ? input_width : 0);
    case LearnerKind::bls: return p(0) * p(1) + p(2);
  }
  return 0;
}

inline void validate(const LearnerSpec& spec) {
  if (spec.params.size() != param_arity(spec.kind)) {
    throw std::invalid_argument(std::string(to_string(spec.kind)) + " expects " +
                                std::to_string(param_arity(spec.kind)) + " hyperparameters");
  }
  switch (spec.kind) {
    case LearnerKind::elm:
      if (spec.params[0] < 1) throw std::invalid_argument("ELM hidden neuron count must be >= 1");
      break;
    case LearnerKind::rvfl:
      if (spec.params[0] < 1) throw std::invalid_argument("RVFL hidden neuron count must be >= 1");
      if (spec.params[1] != 0 && spec.params[1] != 1) throw std::invalid_argument("RVFL direct-link flag must be 0 or 1");
      break;
    case LearnerKind::bls:
      for (int v : spec.params) {
        if (v < 1) throw std::invalid_argument("BLS hyperparameters must be >= 1");
      }
      break;
  }
}

inline Matrix sigmoid(const Matrix& a) { return (1.0 + (-a.array()).exp()).inverse().matrix(); }

/// Closed-form random-weight network. Only the output weights are fitted;
/// the input-side weights are regenerated from `spec.seed`.
struct TrainedLearner {
  LearnerSpec spec;
  std::size_t input_width = 0;
  Vector input_mean;
  Vector input_scale;
  double target_mean = 0.0;

  // ELM/RVFL: input -> hidden. BLS: input -> mapped feature windows, stacked column-wise.
  Matrix input_weights;
  Vector input_bias;
  // BLS only: mapped features -> enhancement nodes.
  Matrix enhancement_weights;
  Vector enhancement_bias;

  Vector output_weights;

  Matrix standardize(const Matrix& x) const {
    if (static_cast<std::size_t>(x.cols()) != input_width) {
      throw std::invalid_argument("learner input width " + std::to_string(x.cols()) + " != trained width " +
                                  std::to_string(input_width));
    }
    return ((x.rowwise() - input_mean.transpose()).array().rowwise() / input_scale.transpose().array()).matrix();
  }

  /// Hidden representation of already standardized inputs.
  Matrix hidden(const Matrix& xs) const {
    Matrix first = xs * input_weights;
    first.rowwise() += input_bias.transpose();
    first = sigmoid(first);
    switch (spec.kind) {
      case LearnerKind::elm: return first;
      case LearnerKind::rvfl: {
        if (!spec.params[1]) return first;
        Matrix h(xs.rows(), first.cols() + xs.cols());
        h << first, xs;
        return h;
      }
      case LearnerKind::bls: {
        Matrix enh = first * enhancement_weights;
        enh.rowwise() += enhancement_bias.transpose();
        Matrix h(xs.rows(), first.cols() + enh.cols());
        h << first, sigmoid(enh);
        return h;
      }
    }
    return first;
  }

  Vector predict(const Matrix& x) const {
    return (hidden(standardize(x)) * output_weights).array() + target_mean;
  }
};

namespace detail {

inline void fill_uniform(Matrix& m, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
}

inline void fill_uniform(Vector& v, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = u(rng);
}

/// Draw order: input weights, input bias, then (BLS) enhancement weights and bias.
/// ELM and RVFL therefore share identical hidden layers for equal seeds.
inline void draw_random_weights(TrainedLearner& m) {
  Rng rng(m.spec.seed);
  const auto d = static_cast<Eigen::Index>(m.input_width);
  const auto p = [&](std::size_t i) { return static_cast<Eigen::Index>(m.spec.params[i]); };
  const Eigen::Index first = m.spec.kind == LearnerKind::bls ? p(0) * p(1) : p(0);
  m.input_weights.resize(d, first);
  m.input_bias.resize(first);
  fill_uniform(m.input_weights, rng);
  fill_uniform(m.input_bias, rng);
  if (m.spec.kind == LearnerKind::bls) {
    m.enhancement_weights.resize(first, p(2));
    m.enhancement_bias.resize(p(2));
    fill_uniform(m.enhancement_weights, rng);
    fill_uniform(m.enhancement_bias, rng);
  }
}

}  // namespace detail

/// Fit output weights B = pinv(H) * (y - mean(y)) on per-column standardized inputs.
inline TrainedLearner train(const LearnerSpec& spec, const Matrix& x, const Vector& y) {
  validate(spec);
  if (x.cols() == 0) throw std::invalid_argument("train: zero-width input");
  if (x.rows() == 0) throw std::invalid_argument("train: no samples");
  if (y.size() != x.rows()) throw std::invalid_argument("train: target length mismatch");

  TrainedLearner m;
  m.spec = spec;
  m.input_width = static_cast<std::size_t>(x.cols());
  const double n = static_cast<double>(x.rows());
  m.input_mean = x.colwise().mean().transpose();
  m.input_scale.resize(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double sd = std::sqrt((x.col(c).array() - m.input_mean(c)).square().sum() / n);
    m.input_scale(c) = sd > 1e-12 ? sd : 1.0;
  }
  m.target_mean = y.mean();
  detail::draw_random_weights(m);

  const Matrix h = m.hidden(m.standardize(x));
  m.output_weights = solve_min_norm(h, (y.array() - m.target_mean).matrix());
  return m;
}

inline Vector predict(const TrainedLearner& model, const Matrix& x) { return model.predict(x); }

/// Rebuild a trained learner from its serialized state.
inline TrainedLearner restore_learner(const LearnerSpec& spec, std::size_t input_width, Vector input_mean,
                                      Vector input_scale, double target_mean, Vector output_weights) {
  validate(spec);
  TrainedLearner m;
  m.spec = spec;
  m.input_width = input_width;
  m.input_mean = std::move(input_mean);
  m.input_scale = std::move(input_scale);
  m.target_mean = target_mean;
  m.output_weights = std::move(output_weights);
  if (static_cast<std::size_t>(m.input_mean.size()) != input_width ||
      static_cast<std::size_t>(m.input_scale.size()) != input_width ||
      static_cast<std::size_t>(m.output_weights.size()) != hidden_width(spec, input_width)) {
    throw std::invalid_argument("restore_learner: inconsistent learner state");
  }
  detail::draw_random_weights(m);
  return m;
}

}  // namespace eel
