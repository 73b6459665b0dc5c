#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "eel/data.hpp"
#include "eel/learners.hpp"
#include "eel/linalg.hpp"
#include "eel/moead.hpp"
#include "eel/pipeline.hpp"

namespace eel {

enum class CombineMethod { mean, ls, sbs_ls, sfs_ls };

inline std::string_view to_string(CombineMethod m) {
  switch (m) {
    case CombineMethod::mean: return "Mean";
    case CombineMethod::ls: return "LS";
    case CombineMethod::sbs_ls: return "SBS+LS";
    case CombineMethod::sfs_ls: return "SFS+LS";
  }
  return "?";
}

inline CombineMethod parse_combine_method(std::string_view s) {
  if (s == "Mean") return CombineMethod::mean;
  if (s == "LS") return CombineMethod::ls;
  if (s == "SBS+LS") return CombineMethod::sbs_ls;
  if (s == "SFS+LS") return CombineMethod::sfs_ls;
  throw std::invalid_argument("unknown combine method '" + std::string(s) + "'");
}

struct MemberSource {
  std::size_t ps = 0;
  std::size_t front_index = 0;
  friend bool operator==(const MemberSource&, const MemberSource&) = default;
};

/// A front member retrained on the full training split.
struct TrainedMember {
  PipelineConfig config;
  TrainedLearner learner;
  std::vector<double> train_predictions;
  MemberSource source;

  /// Prediction for every sample of the frame starting after `history` raw steps.
  Vector predict_frame(const TimeSeriesDataset& data, std::size_t history) const {
    return learner.predict(build_samples(data, config, history).inputs);
  }
};

inline TrainedMember train_member(const PipelineConfig& config, const TimeSeriesDataset& data, std::size_t history,
                                  std::span<const std::size_t> train_rows, MemberSource source = {}) {
  const SampleMatrix train = select_rows(build_samples(data, config, history), train_rows);
  TrainedMember m;
  m.config = config;
  m.learner = eel::train(config.learner, train.inputs, train.targets);
  const Vector pred = m.learner.predict(train.inputs);
  m.train_predictions.assign(pred.data(), pred.data() + pred.size());
  m.source = source;
  return m;
}

struct CandidatePool {
  std::vector<TrainedMember> members;

  std::size_t size() const { return members.size(); }

  /// s x K matrix with one column per member.
  Matrix prediction_matrix() const {
    if (members.empty()) return {};
    const auto s = static_cast<Eigen::Index>(members.front().train_predictions.size());
    Matrix t(s, static_cast<Eigen::Index>(members.size()));
    for (std::size_t k = 0; k < members.size(); ++k) {
      t.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Vector>(members[k].train_predictions.data(), s);
    }
    return t;
  }
};

/// Keep the first member of every group with bitwise-equal prediction vectors.
inline CandidatePool deduplicate(std::vector<TrainedMember> members) {
  CandidatePool pool;
  for (auto& m : members) {
    if (!pool.members.empty() && m.train_predictions.size() != pool.members.front().train_predictions.size()) {
      throw std::invalid_argument("deduplicate: prediction vectors differ in length");
    }
    const bool seen = std::any_of(pool.members.begin(), pool.members.end(), [&](const TrainedMember& o) {
      return std::memcmp(o.train_predictions.data(), m.train_predictions.data(), m.train_predictions.size() * sizeof(double)) == 0;
    });
    if (!seen) pool.members.push_back(std::move(m));
  }
  return pool;
}

struct FrontEntry {
  std::size_t ps = 0;
  ParetoFront front;
};

/// Retrain every front member on the training rows and drop duplicates, in
/// (front order, member order).
inline CandidatePool pool_fronts(std::span<const FrontEntry> fronts, const TimeSeriesDataset& data, std::size_t history,
                                 std::span<const std::size_t> train_rows) {
  std::vector<TrainedMember> all;
  for (const auto& f : fronts) {
    for (std::size_t i = 0; i < f.front.size(); ++i) {
      all.push_back(train_member(f.front[i].config, data, history, train_rows, {f.ps, i}));
    }
  }
  if (all.empty()) throw std::invalid_argument("pool_fronts: no front members");
  return deduplicate(std::move(all));
}

/// Unconstrained minimum-norm least-squares weights w = pinv(T) y.
inline Vector ls_combine(const Matrix& t, const Vector& y) {
  if (t.size() == 0) throw std::invalid_argument("ls_combine: empty prediction matrix");
  return solve_min_norm(t, y);
}

struct SelectionStep {
  std::size_t index;  // member added (SFS) or removed (SBS)
  double rmse;        // training RMSE after the step
};

struct Selection {
  std::vector<std::size_t> selected;  // pool indices; SFS in adoption order, otherwise ascending
  Vector weights;
  double train_rmse = std::numeric_limits<double>::infinity();
  std::vector<SelectionStep> trajectory;
};

namespace detail {

inline Matrix take_columns(const Matrix& t, std::span<const std::size_t> cols) {
  Matrix out(t.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = t.col(static_cast<Eigen::Index>(cols[j]));
  return out;
}

struct Fit {
  Vector w;
  double rmse;
};

inline Fit ls_fit(const Matrix& t, std::span<const std::size_t> cols, const Vector& y) {
  const Matrix sub = take_columns(t, cols);
  Vector w = ls_combine(sub, y);
  return {w, rmse(sub * w, y)};
}

/// Smallest RMSE decrease that counts as an improvement; decreases below
/// this are rounding noise of the least-squares solve.
inline double improvement_floor(const Vector& y) {
  const double scale = y.size() ? y.norm() / std::sqrt(static_cast<double>(y.size())) : 0.0;
  return 64.0 * std::numeric_limits<double>::epsilon() * std::max(scale, 1e-300);
}

}  // namespace detail

/// Greedy forward selection: each round tries every remaining member appended
/// to the selection, keeps the best LS fit only if it lowers the training
/// RMSE by more than the rounding floor. Ties go to the lowest pool index.
inline Selection sfs_ls(const Matrix& t, const Vector& y) {
  if (t.cols() == 0) throw std::invalid_argument("sfs_ls: empty pool");
  const auto k = static_cast<std::size_t>(t.cols());
  Selection sel;
  std::vector<bool> used(k, false);
  std::vector<std::size_t> trial;
  const double floor = detail::improvement_floor(y);
  while (sel.selected.size() < k) {
    double best = sel.train_rmse;
    std::size_t best_idx = k;
    Vector best_w;
    for (std::size_t c = 0; c < k; ++c) {
      if (used[c]) continue;
      trial = sel.selected;
      trial.push_back(c);
      auto fit = detail::ls_fit(t, trial, y);
      if (fit.rmse < best && (best_idx != k || fit.rmse < sel.train_rmse - floor)) {
        best = fit.rmse;
        best_idx = c;
        best_w = std::move(fit.w);
      }
    }
    if (best_idx == k) break;
    used[best_idx] = true;
    sel.selected.push_back(best_idx);
    sel.weights = std::move(best_w);
    sel.train_rmse = best;
    sel.trajectory.push_back({best_idx, best});
  }
  return sel;
}

/// Greedy backward elimination from the full LS fit: each round removes the
/// member whose removal gives the lowest RMSE, only if better by more than the
/// rounding floor; never below one member. Ties go to the lowest pool index.
inline Selection sbs_ls(const Matrix& t, const Vector& y) {
  if (t.cols() == 0) throw std::invalid_argument("sbs_ls: empty pool");
  Selection sel;
  sel.selected.resize(static_cast<std::size_t>(t.cols()));
  for (std::size_t i = 0; i < sel.selected.size(); ++i) sel.selected[i] = i;
  auto full = detail::ls_fit(t, sel.selected, y);
  sel.weights = std::move(full.w);
  sel.train_rmse = full.rmse;
  std::vector<std::size_t> trial;
  const double floor = detail::improvement_floor(y);
  while (sel.selected.size() > 1) {
    double best = sel.train_rmse;
    std::size_t best_pos = sel.selected.size();
    Vector best_w;
    for (std::size_t pos = 0; pos < sel.selected.size(); ++pos) {
      trial = sel.selected;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(pos));
      auto fit = detail::ls_fit(t, trial, y);
      if (fit.rmse < best && (best_pos != sel.selected.size() || fit.rmse < sel.train_rmse - floor)) {
        best = fit.rmse;
        best_pos = pos;
        best_w = std::move(fit.w);
      }
    }
    if (best_pos == sel.selected.size()) break;
    const std::size_t removed = sel.selected[best_pos];
    sel.selected.erase(sel.selected.begin() + static_cast<std::ptrdiff_t>(best_pos));
    sel.weights = std::move(best_w);
    sel.train_rmse = best;
    sel.trajectory.push_back({removed, best});
  }
  return sel;
}

/// Equal weights 1/N over all columns.
inline Selection mean_combine(const Matrix& t, const Vector& y) {
  if (t.cols() == 0) throw std::invalid_argument("mean_combine: empty subset");
  Selection sel;
  sel.selected.resize(static_cast<std::size_t>(t.cols()));
  for (std::size_t i = 0; i < sel.selected.size(); ++i) sel.selected[i] = i;
  sel.weights = Vector::Constant(t.cols(), 1.0 / static_cast<double>(t.cols()));
  sel.train_rmse = rmse(t * sel.weights, y);
  return sel;
}

/// LS weights over every column.
inline Selection ls_all(const Matrix& t, const Vector& y) {
  Selection sel;
  sel.selected.resize(static_cast<std::size_t>(t.cols()));
  for (std::size_t i = 0; i < sel.selected.size(); ++i) sel.selected[i] = i;
  auto fit = detail::ls_fit(t, sel.selected, y);
  sel.weights = std::move(fit.w);
  sel.train_rmse = fit.rmse;
  return sel;
}

inline Selection select_members(CombineMethod method, const Matrix& t, const Vector& y) {
  switch (method) {
    case CombineMethod::mean: return mean_combine(t, y);
    case CombineMethod::ls: return ls_all(t, y);
    case CombineMethod::sbs_ls: return sbs_ls(t, y);
    case CombineMethod::sfs_ls: return sfs_ls(t, y);
  }
  throw std::logic_error("unhandled combine method");
}

/// Deployable ensemble: the selected members, their weights and the channel
/// schema they were trained on. Row k of a prediction targets raw index
/// history + k of the input series.
struct EnsembleModel {
  CombineMethod method = CombineMethod::sfs_ls;
  std::vector<TrainedMember> members;
  std::vector<std::size_t> pool_indices;
  Vector weights;
  std::size_t history = 0;
  std::vector<std::string> channel_names;
  std::string target;
  double train_rmse = 0.0;
};

inline EnsembleModel build_ensemble(CombineMethod method, const CandidatePool& pool, const Vector& y,
                                    const TimeSeriesDataset& data, std::size_t history) {
  if (pool.size() == 0) throw std::invalid_argument("build_ensemble: empty pool");
  const Selection sel = select_members(method, pool.prediction_matrix(), y);
  EnsembleModel model;
  model.method = method;
  model.pool_indices = sel.selected;
  for (std::size_t idx : sel.selected) model.members.push_back(pool.members[idx]);
  model.weights = sel.weights;
  model.history = history;
  model.channel_names = data.channel_names();
  model.target = data.target().name;
  model.train_rmse = sel.train_rmse;
  return model;
}

/// Sum of w_i times each member's prediction, one value per frame sample.
inline Vector predict_ensemble(const EnsembleModel& model, const TimeSeriesDataset& data) {
  if (model.members.empty()) throw std::invalid_argument("predict_ensemble: model has no members");
  if (static_cast<std::size_t>(model.weights.size()) != model.members.size()) {
    throw std::invalid_argument("predict_ensemble: weight count does not match members");
  }
  if (data.length() <= model.history) {
    throw DataError("insufficient history: series has " + std::to_string(data.length()) + " rows, model needs more than " +
                    std::to_string(model.history));
  }
  Vector out = Vector::Zero(static_cast<Eigen::Index>(data.length() - model.history));
  for (std::size_t i = 0; i < model.members.size(); ++i) {
    out += model.weights(static_cast<Eigen::Index>(i)) * model.members[i].predict_frame(data, model.history);
  }
  return out;
}

}  // namespace eel
