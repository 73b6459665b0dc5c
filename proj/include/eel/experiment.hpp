#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <exception>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "eel/core.hpp"
#include "eel/data.hpp"
#include "eel/ensemble.hpp"
#include "eel/genotype.hpp"
#include "eel/moead.hpp"
#include "eel/objectives.hpp"
#include "eel/serialization.hpp"

namespace eel {

/// Experiment settings. Unset index sets fall back to the default search
/// space (see default_genotype_spec / default_param_sets).
struct ExperimentConfig {
  std::string data;
  std::string target;
  std::string timestamp;
  LearnerKind learner = LearnerKind::elm;
  std::vector<std::size_t> ps{30, 50, 80, 100, 120, 150};
  std::size_t neighborhood = 4;
  std::size_t max_fes = 25000;
  std::vector<int> tw_target = int_range(6, 96, 6);
  std::vector<int> tw_aux = int_range(6, 48, 2);
  std::vector<int> resolution = int_range(1, 15);
  std::vector<std::vector<int>> params;  // empty -> defaults for the learner kind
  double train_fraction = 2.0 / 3.0;
  std::size_t repetitions = 10;
  std::uint64_t seed = 1;
  std::size_t folds = 5;
  std::size_t jobs = 1;
  bool trace = false;
  std::string out;

  void validate() const {
    if (data.empty()) throw ConfigError("config: 'data' is required");
    if (target.empty()) throw ConfigError("config: 'target' is required");
    if (ps.empty()) throw ConfigError("config: 'ps' must list at least one population size");
    if (neighborhood < 2) throw ConfigError("config: 'neighborhood' must be >= 2");
    for (auto p : ps) {
      if (p < neighborhood) throw ConfigError("config: every population size must be >= neighborhood size");
      if (max_fes < p) throw ConfigError("config: max_fes must be >= every population size");
    }
    if (repetitions < 1) throw ConfigError("config: 'repetitions' must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("config: 'train_fraction' must lie in (0, 1)");
    if (folds < 2) throw ConfigError("config: 'folds' must be >= 2");
    if (!params.empty() && params.size() != param_arity(learner)) {
      throw ConfigError("config: " + std::string(to_string(learner)) + " takes " + std::to_string(param_arity(learner)) +
                        " parameter sets");
    }
  }

  std::vector<std::vector<int>> learner_params() const { return params.empty() ? default_param_sets(learner) : params; }

  GenotypeSpec genotype_spec(std::size_t auxiliary_channels) const {
    GenotypeSpec spec;
    spec.channel_count = auxiliary_channels + 1;
    spec.tw_sets.push_back(tw_target);
    for (std::size_t i = 0; i < auxiliary_channels; ++i) spec.tw_sets.push_back(tw_aux);
    spec.resolution_set = resolution;
    spec.learner_kind = learner;
    spec.param_sets = learner_params();
    spec.validate();
    return spec;
  }
};

namespace detail {

inline std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

/// "a:b:step", "a:b" or "v1,v2,...".
inline std::vector<int> parse_int_set(const std::string& key, const std::string& text) {
  try {
    if (text.find(':') != std::string::npos) {
      std::vector<int> parts;
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ':')) parts.push_back(std::stoi(item));
      if (parts.size() == 2) return int_range(parts[0], parts[1]);
      if (parts.size() == 3) return int_range(parts[0], parts[1], parts[2]);
      throw ConfigError("bad range");
    }
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(trim(item)));
    if (out.empty()) throw ConfigError("empty set");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse '" + key + "' value '" + text + "' as an integer set");
  }
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    T v{};
    if constexpr (std::is_floating_point_v<T>) {
      v = static_cast<T>(std::stod(text, &used));
    } else {
      if (!text.empty() && text.front() == '-') throw ConfigError("negative");
      // accept "2.5e4"-style integers
      const double d = std::stod(text, &used);
      if (d != std::floor(d) || d < 0) throw ConfigError("not an integer");
      v = static_cast<T>(d);
    }
    if (used != text.size()) throw ConfigError("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse '" + key + "' value '" + text + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw ConfigError("config: '" + key + "' expects a boolean");
}

}  // namespace detail

/// Flat `key = value` text, '#' starts a comment. Unknown keys are errors.
inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::string> seen;
  std::vector<std::pair<std::size_t, std::vector<int>>> param_overrides;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const auto key = detail::trim(t.substr(0, eq));
    const auto value = detail::trim(t.substr(eq + 1));
    if (!seen.emplace(key, value).second) throw ConfigError("config: duplicate key '" + key + "'");

    if (key == "data") cfg.data = value;
    else if (key == "target") cfg.target = value;
    else if (key == "timestamp") cfg.timestamp = value;
    else if (key == "learner") cfg.learner = parse_learner_kind(value);
    else if (key == "ps") {
      cfg.ps.clear();
      for (int v : detail::parse_int_set(key, value)) {
        if (v < 2) throw ConfigError("config: population sizes must be >= 2");
        cfg.ps.push_back(static_cast<std::size_t>(v));
      }
    }
    else if (key == "neighborhood") cfg.neighborhood = detail::parse_number<std::size_t>(key, value);
    else if (key == "max_fes") cfg.max_fes = detail::parse_number<std::size_t>(key, value);
    else if (key == "tw_target") cfg.tw_target = detail::parse_int_set(key, value);
    else if (key == "tw_aux") cfg.tw_aux = detail::parse_int_set(key, value);
    else if (key == "resolution") cfg.resolution = detail::parse_int_set(key, value);
    else if (key == "param1" || key == "param2" || key == "param3") {
      param_overrides.emplace_back(static_cast<std::size_t>(key.back() - '1'), detail::parse_int_set(key, value));
    }
    else if (key == "train_fraction") cfg.train_fraction = detail::parse_number<double>(key, value);
    else if (key == "repetitions") cfg.repetitions = detail::parse_number<std::size_t>(key, value);
    else if (key == "seed") cfg.seed = detail::parse_number<std::uint64_t>(key, value);
    else if (key == "folds") cfg.folds = detail::parse_number<std::size_t>(key, value);
    else if (key == "jobs") cfg.jobs = detail::parse_number<std::size_t>(key, value);
    else if (key == "trace") cfg.trace = detail::parse_bool(key, value);
    else if (key == "out") cfg.out = value;
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  if (!param_overrides.empty()) {
    cfg.params = default_param_sets(cfg.learner);
    for (auto& [idx, set] : param_overrides) {
      if (idx >= cfg.params.size()) throw ConfigError("config: " + std::string(to_string(cfg.learner)) + " has no param" + std::to_string(idx + 1));
      cfg.params[idx] = std::move(set);
    }
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in);
}

/// Canonical text form; its FNV-1a hash is the config hash in reports.
inline std::string to_config_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "data = " << c.data << '\n' << "target = " << c.target << '\n';
  if (!c.timestamp.empty()) os << "timestamp = " << c.timestamp << '\n';
  os << "learner = " << to_string(c.learner) << '\n';
  os << "ps = ";
  for (std::size_t i = 0; i < c.ps.size(); ++i) os << (i ? "," : "") << c.ps[i];
  os << '\n' << "neighborhood = " << c.neighborhood << '\n' << "max_fes = " << c.max_fes << '\n';
  os << "tw_target = " << detail::join_ints(c.tw_target) << '\n';
  os << "tw_aux = " << detail::join_ints(c.tw_aux) << '\n';
  os << "resolution = " << detail::join_ints(c.resolution) << '\n';
  const auto params = c.learner_params();
  for (std::size_t k = 0; k < params.size(); ++k) os << "param" << k + 1 << " = " << detail::join_ints(params[k]) << '\n';
  os << "train_fraction = " << std::setprecision(17) << c.train_fraction << '\n';
  os << "repetitions = " << c.repetitions << '\n' << "seed = " << c.seed << '\n' << "folds = " << c.folds << '\n';
  os << "trace = " << (c.trace ? "true" : "false") << '\n';
  return os.str();
}

struct ReportRow {
  std::size_t repetition = 0;
  std::string ps;  // population size, "pooled", or "-" on a diagnostic row
  std::string method;
  std::string status = "ok";
  std::size_t pool_size = 0;
  std::size_t selected = 0;
  double train_rmse = std::numeric_limits<double>::quiet_NaN();
  double test_rmse = std::numeric_limits<double>::quiet_NaN();
  double best_member_train_rmse = std::numeric_limits<double>::quiet_NaN();
  std::string model_file;
  double seconds = 0.0;
};

struct SearchRecord {
  std::size_t repetition = 0;
  std::size_t ps = 0;
  std::uint64_t moead_seed = 0;
  std::uint64_t fold_seed = 0;
  std::size_t front_size = 0;
  std::size_t evaluations = 0;
  std::size_t generations = 0;
  double seconds = 0.0;
  std::string error;
};

struct RepetitionRecord {
  std::size_t repetition = 0;
  std::uint64_t split_seed = 0;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
  std::string error;
};

struct RunReport {
  ExperimentConfig config;
  std::uint64_t config_hash = 0;
  std::size_t dropped_rows = 0;
  std::size_t dimension = 0;
  std::size_t history = 0;
  std::size_t sample_count = 0;
  std::vector<ReportRow> rows;
  std::vector<std::optional<EnsembleModel>> models;  // parallel to rows
  std::vector<SearchRecord> searches;
  std::vector<RepetitionRecord> repetitions;
  double total_seconds = 0.0;

  bool all_ok() const {
    return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.status == "ok"; });
  }
};

/// Run f(0..n-1) on up to `jobs` threads. Each call must write only its own slot.
template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F&& f) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  for (std::size_t w = 0; w < std::min(jobs, n); ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  }
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

inline std::string method_file_tag(CombineMethod m) {
  switch (m) {
    case CombineMethod::mean: return "mean";
    case CombineMethod::ls: return "ls";
    case CombineMethod::sbs_ls: return "sbs_ls";
    case CombineMethod::sfs_ls: return "sfs_ls";
  }
  return "x";
}

struct PoolEvaluation {
  std::vector<ReportRow> rows;
  std::vector<EnsembleModel> models;
};

/// Build every requested ensemble over one pool and score it on both splits.
inline PoolEvaluation evaluate_pool(const CandidatePool& pool, std::span<const CombineMethod> methods,
                                    const TimeSeriesDataset& data, std::size_t history, const TrainTestSplit& split,
                                    const Vector& y_frame, std::size_t repetition, const std::string& ps_label) {
  Vector y_train(static_cast<Eigen::Index>(split.train.size()));
  Vector y_test(static_cast<Eigen::Index>(split.test.size()));
  for (std::size_t i = 0; i < split.train.size(); ++i) y_train(static_cast<Eigen::Index>(i)) = y_frame(static_cast<Eigen::Index>(split.train[i]));
  for (std::size_t i = 0; i < split.test.size(); ++i) y_test(static_cast<Eigen::Index>(i)) = y_frame(static_cast<Eigen::Index>(split.test[i]));

  std::vector<Vector> frame_preds;
  frame_preds.reserve(pool.size());
  double best_member = std::numeric_limits<double>::infinity();
  for (const auto& m : pool.members) {
    frame_preds.push_back(m.predict_frame(data, history));
    best_member = std::min(best_member, rmse(m.train_predictions, as_span(y_train)));
  }
  const Matrix t = pool.prediction_matrix();

  PoolEvaluation out;
  for (CombineMethod method : methods) {
    const auto start = Clock::now();
    const Selection sel = select_members(method, t, y_train);
    EnsembleModel model;
    model.method = method;
    model.pool_indices = sel.selected;
    for (std::size_t idx : sel.selected) model.members.push_back(pool.members[idx]);
    model.weights = sel.weights;
    model.history = history;
    model.channel_names = data.channel_names();
    model.target = data.target().name;
    model.train_rmse = sel.train_rmse;

    Vector test_pred = Vector::Zero(y_test.size());
    for (std::size_t j = 0; j < sel.selected.size(); ++j) {
      const Vector& fp = frame_preds[sel.selected[j]];
      for (std::size_t i = 0; i < split.test.size(); ++i) {
        test_pred(static_cast<Eigen::Index>(i)) += sel.weights(static_cast<Eigen::Index>(j)) * fp(static_cast<Eigen::Index>(split.test[i]));
      }
    }

    ReportRow row;
    row.repetition = repetition;
    row.ps = ps_label;
    row.method = std::string(to_string(method));
    row.pool_size = pool.size();
    row.selected = sel.selected.size();
    row.train_rmse = sel.train_rmse;
    row.test_rmse = rmse(test_pred, y_test);
    row.best_member_train_rmse = best_member;
    row.model_file = "models/rep" + std::to_string(repetition) + "_" + (ps_label == "pooled" ? "pooled" : "ps" + ps_label) + "_" +
                     method_file_tag(method) + ".json";
    row.seconds = seconds_since(start);
    out.rows.push_back(std::move(row));
    out.models.push_back(std::move(model));
  }
  return out;
}

}  // namespace detail

inline constexpr std::array<CombineMethod, 4> kFrontMethods{CombineMethod::mean, CombineMethod::ls, CombineMethod::sbs_ls,
                                                            CombineMethod::sfs_ls};
inline constexpr std::array<CombineMethod, 3> kPooledMethods{CombineMethod::ls, CombineMethod::sbs_ls, CombineMethod::sfs_ls};

/// Full pipeline: per repetition a fresh split, one search per population
/// size, four ensembles per front and three over the pooled fronts. A failed
/// repetition yields one diagnostic row; the others still run.
inline RunReport run_experiment(const ExperimentConfig& config,
                                const std::function<void(const std::string&)>& log = {}) {
  const auto run_start = detail::Clock::now();
  config.validate();
  auto say = [&](const std::string& msg) {
    if (log) log(msg);
  };

  RunReport report;
  report.config = config;
  report.config_hash = fnv1a(to_config_text(config));

  const LoadResult loaded = load_csv(config.data, config.target, config.timestamp);
  const TimeSeriesDataset& data = loaded.dataset;
  report.dropped_rows = loaded.dropped_rows;
  const GenotypeSpec gspec = config.genotype_spec(data.auxiliary_count());
  report.dimension = gspec.dimension();
  report.history = gspec.max_history();
  if (report.history >= data.length()) {
    throw DataError("series of length " + std::to_string(data.length()) + " is too short for the maximal window history " +
                    std::to_string(report.history));
  }
  report.sample_count = data.length() - report.history;
  say("loaded " + std::to_string(data.length()) + " rows (" + std::to_string(loaded.dropped_rows) + " dropped), " +
      std::to_string(report.sample_count) + " samples, genotype dimension " + std::to_string(report.dimension));

  Vector y_frame(static_cast<Eigen::Index>(report.sample_count));
  for (std::size_t k = 0; k < report.sample_count; ++k) y_frame(static_cast<Eigen::Index>(k)) = data.target().values[report.history + k];

  const std::size_t R = config.repetitions;
  const std::size_t K = config.ps.size();
  std::vector<std::optional<TrainTestSplit>> splits(R);
  report.repetitions.resize(R);
  for (std::size_t r = 0; r < R; ++r) {
    auto& rec = report.repetitions[r];
    rec.repetition = r;
    rec.split_seed = derive_seed(config.seed, "split", r);
    try {
      splits[r] = split_train_test(report.sample_count, config.train_fraction, rec.split_seed);
      rec.train_samples = splits[r]->train.size();
      rec.test_samples = splits[r]->test.size();
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  }

  // Searches are independent and seeded per (repetition, ps).
  std::vector<ParetoFront> fronts(R * K);
  report.searches.resize(R * K);
  if (config.trace && !config.out.empty()) std::filesystem::create_directories(std::filesystem::path(config.out) / "traces");
  parallel_for(R * K, config.jobs, [&](std::size_t task) {
    const std::size_t r = task / K;
    const std::size_t k = task % K;
    auto& rec = report.searches[task];
    rec.repetition = r;
    rec.ps = config.ps[k];
    rec.moead_seed = derive_seed(config.seed, "moead", r, config.ps[k]);
    rec.fold_seed = derive_seed(config.seed, "folds", r, config.ps[k]);
    if (!splits[r]) {
      rec.error = "split failed";
      return;
    }
    const auto start = detail::Clock::now();
    try {
      PipelineProblem problem(data, gspec, report.history, splits[r]->train, rec.fold_seed, config.folds);
      MoeadConfig mc;
      mc.population_size = config.ps[k];
      mc.neighborhood_size = config.neighborhood;
      mc.max_fes = config.max_fes;
      mc.run_seed = rec.moead_seed;
      std::ofstream trace;
      if (config.trace && !config.out.empty()) {
        trace.open(std::filesystem::path(config.out) / "traces" / ("rep" + std::to_string(r) + "_ps" + std::to_string(config.ps[k]) + ".csv"));
        trace << std::setprecision(17);
        write_trace_header(trace);
        mc.on_generation = [&](const GenerationRecord& g) { write_trace_rows(trace, g); };
      }
      MoeadResult res = run(mc, problem);
      rec.front_size = res.front.size();
      rec.evaluations = res.evaluations;
      rec.generations = res.generations;
      fronts[task] = std::move(res.front);
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
    rec.seconds = detail::seconds_since(start);
  });
  for (const auto& s : report.searches) {
    say("rep " + std::to_string(s.repetition) + " ps " + std::to_string(s.ps) + ": " +
        (s.error.empty() ? "front of " + std::to_string(s.front_size) + " after " + std::to_string(s.evaluations) + " evaluations"
                         : "failed: " + s.error));
  }

  // Ensemble construction, one repetition per task.
  std::vector<detail::PoolEvaluation> per_rep(R);
  std::vector<std::string> rep_error(R);
  parallel_for(R, config.jobs, [&](std::size_t r) {
    try {
      if (!report.repetitions[r].error.empty()) throw std::runtime_error(report.repetitions[r].error);
      for (std::size_t k = 0; k < K; ++k) {
        if (!report.searches[r * K + k].error.empty()) {
          throw std::runtime_error("search ps=" + std::to_string(config.ps[k]) + " failed: " + report.searches[r * K + k].error);
        }
      }
      const TrainTestSplit& split = *splits[r];
      std::vector<TrainedMember> all_members;
      for (std::size_t k = 0; k < K; ++k) {
        const FrontEntry entry{config.ps[k], fronts[r * K + k]};
        CandidatePool pool = pool_fronts(std::span<const FrontEntry>(&entry, 1), data, report.history, split.train);
        auto ev = detail::evaluate_pool(pool, kFrontMethods, data, report.history, split, y_frame, r, std::to_string(config.ps[k]));
        for (std::size_t i = 0; i < ev.rows.size(); ++i) {
          per_rep[r].rows.push_back(std::move(ev.rows[i]));
          per_rep[r].models.push_back(std::move(ev.models[i]));
        }
        for (auto& m : pool.members) all_members.push_back(std::move(m));
      }
      const CandidatePool pooled = deduplicate(std::move(all_members));
      auto ev = detail::evaluate_pool(pooled, kPooledMethods, data, report.history, split, y_frame, r, "pooled");
      for (std::size_t i = 0; i < ev.rows.size(); ++i) {
        per_rep[r].rows.push_back(std::move(ev.rows[i]));
        per_rep[r].models.push_back(std::move(ev.models[i]));
      }
    } catch (const std::exception& e) {
      per_rep[r] = {};
      rep_error[r] = e.what();
    }
  });

  for (std::size_t r = 0; r < R; ++r) {
    if (!rep_error[r].empty()) {
      ReportRow diag;
      diag.repetition = r;
      diag.ps = "-";
      diag.method = "-";
      diag.status = "error: " + rep_error[r];
      report.rows.push_back(std::move(diag));
      report.models.emplace_back();
      say("rep " + std::to_string(r) + " aborted: " + rep_error[r]);
      continue;
    }
    for (std::size_t i = 0; i < per_rep[r].rows.size(); ++i) {
      report.rows.push_back(std::move(per_rep[r].rows[i]));
      report.models.emplace_back(std::move(per_rep[r].models[i]));
    }
  }
  report.total_seconds = detail::seconds_since(run_start);
  return report;
}

namespace detail {

inline std::string fmt_real(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

}  // namespace detail

inline constexpr const char* kReportColumns =
    "repetition,ps,method,status,pool_size,selected,train_rmse,test_rmse,best_member_train_rmse,model,seconds";

/// Report CSV; `seconds` is the only wall-clock column and is always last.
inline std::string report_csv(const RunReport& report, bool include_timing = true) {
  std::ostringstream os;
  std::string header = kReportColumns;
  if (!include_timing) header = header.substr(0, header.rfind(','));
  os << header << '\n';
  for (const auto& r : report.rows) {
    os << r.repetition << ',' << r.ps << ',' << r.method << ',' << detail::csv_escape(r.status) << ',' << r.pool_size << ','
       << r.selected << ',' << detail::fmt_real(r.train_rmse) << ',' << detail::fmt_real(r.test_rmse) << ','
       << detail::fmt_real(r.best_member_train_rmse) << ',' << r.model_file;
    if (include_timing) os << ',' << detail::fmt_real(r.seconds);
    os << '\n';
  }
  return os.str();
}

/// Machine-readable summary without wall-clock values.
inline json report_summary(const RunReport& report) {
  json searches = json::array();
  for (const auto& s : report.searches) {
    searches.push_back({{"repetition", s.repetition},
                        {"ps", s.ps},
                        {"moead_seed", s.moead_seed},
                        {"fold_seed", s.fold_seed},
                        {"front_size", s.front_size},
                        {"evaluations", s.evaluations},
                        {"generations", s.generations},
                        {"error", s.error}});
  }
  json reps = json::array();
  for (const auto& r : report.repetitions) {
    reps.push_back({{"repetition", r.repetition},
                    {"split_seed", r.split_seed},
                    {"train_samples", r.train_samples},
                    {"test_samples", r.test_samples},
                    {"error", r.error}});
  }
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"repetition", r.repetition},
                    {"ps", r.ps},
                    {"method", r.method},
                    {"status", r.status},
                    {"pool_size", r.pool_size},
                    {"selected", r.selected},
                    {"train_rmse", std::isnan(r.train_rmse) ? json(nullptr) : json(r.train_rmse)},
                    {"test_rmse", std::isnan(r.test_rmse) ? json(nullptr) : json(r.test_rmse)},
                    {"best_member_train_rmse", std::isnan(r.best_member_train_rmse) ? json(nullptr) : json(r.best_member_train_rmse)},
                    {"model", r.model_file}});
  }
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(report.config_hash));
  return {{"master_seed", report.config.seed},
          {"config_hash", hash},
          {"config", to_config_text(report.config)},
          {"seed_scheme", "stage seed = derive_seed(master, label, repetition, ps); labels: split, folds, moead, learner"},
          {"genotype_layout", layout_description()},
          {"genotype_dimension", report.dimension},
          {"history", report.history},
          {"samples", report.sample_count},
          {"dropped_rows", report.dropped_rows},
          {"train_fraction", report.config.train_fraction},
          {"repetitions", reps},
          {"searches", searches},
          {"rows", rows}};
}

inline json report_timing(const RunReport& report) {
  json searches = json::array();
  for (const auto& s : report.searches) searches.push_back({{"repetition", s.repetition}, {"ps", s.ps}, {"seconds", s.seconds}});
  return {{"total_seconds", report.total_seconds}, {"searches", searches}};
}

/// report.csv, summary.json, timing.json and one model file per ensemble row.
inline void write_report(const RunReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "models");
  auto write = [&](const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw DataError("cannot write '" + p.string() + "'");
    out << text;
  };
  write(fs::path(out_dir) / "report.csv", report_csv(report));
  write(fs::path(out_dir) / "summary.json", report_summary(report).dump(2) + "\n");
  write(fs::path(out_dir) / "timing.json", report_timing(report).dump(2) + "\n");
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    if (report.models[i]) save_model(*report.models[i], (fs::path(out_dir) / report.rows[i].model_file).string());
  }
}

}  // namespace eel
