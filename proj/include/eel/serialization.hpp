#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eel/core.hpp"
#include "eel/ensemble.hpp"
#include "eel/genotype.hpp"
#include "eel/learners.hpp"
#include "eel/pipeline.hpp"

namespace eel {

using json = nlohmann::json;

inline constexpr int kModelFormatVersion = 1;

inline json layout_description() {
  return "tw(d+1) | resolution(1) | cs(d) | fe(d+1) | fs(11*(d+1), order mean,maximum,minimum,std,W1..W4,PLA1..PLA3) | params(d_p)";
}

inline json to_json(const LearnerSpec& spec) {
  return {{"kind", std::string(to_string(spec.kind))}, {"params", spec.params}, {"seed", spec.seed}};
}

inline LearnerSpec learner_spec_from_json(const json& j) {
  LearnerSpec spec;
  spec.kind = parse_learner_kind(j.at("kind").get<std::string>());
  spec.params = j.at("params").get<std::vector<int>>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  return spec;
}

/// Resolved values only (window lengths, resolution, flags, learner), plus the learner seed.
inline json to_json(const PipelineConfig& cfg) {
  json fs = json::array();
  for (const auto& flags : cfg.fs) {
    json names = json::array();
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      if (flags.flags[f]) names.push_back(std::string(kFeatureNames[f]));
    }
    fs.push_back(names);
  }
  return {{"tw", cfg.tw},
          {"resolution", cfg.resolution},
          {"cs", std::vector<bool>(cfg.cs)},
          {"fe", std::vector<bool>(cfg.fe)},
          {"fs", fs},
          {"learner", to_json(cfg.learner)}};
}

inline PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig cfg;
  cfg.tw = j.at("tw").get<std::vector<int>>();
  cfg.resolution = j.at("resolution").get<int>();
  cfg.cs = j.at("cs").get<std::vector<bool>>();
  cfg.fe = j.at("fe").get<std::vector<bool>>();
  for (const auto& names : j.at("fs")) {
    FeatureFlags flags;
    for (const auto& n : names) {
      const auto name = n.get<std::string>();
      const auto it = std::find(kFeatureNames.begin(), kFeatureNames.end(), name);
      if (it == kFeatureNames.end()) throw std::invalid_argument("unknown feature '" + name + "'");
      flags.flags[static_cast<std::size_t>(it - kFeatureNames.begin())] = true;
    }
    cfg.fs.push_back(flags);
  }
  cfg.learner = learner_spec_from_json(j.at("learner"));
  return cfg;
}

namespace detail {

inline json vec_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vector vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

/// Everything needed to rebuild a member: random weights are regenerated from
/// the learner seed; standardization and output weights are stored.
inline json to_json(const TrainedMember& m) {
  return {{"config", to_json(m.config)},
          {"source", {{"ps", m.source.ps}, {"front_index", m.source.front_index}}},
          {"input_width", m.learner.input_width},
          {"input_mean", detail::vec_to_json(m.learner.input_mean)},
          {"input_scale", detail::vec_to_json(m.learner.input_scale)},
          {"target_mean", m.learner.target_mean},
          {"output_weights", detail::vec_to_json(m.learner.output_weights)}};
}

inline TrainedMember trained_member_from_json(const json& j) {
  TrainedMember m;
  m.config = pipeline_config_from_json(j.at("config"));
  m.source = {j.at("source").at("ps").get<std::size_t>(), j.at("source").at("front_index").get<std::size_t>()};
  m.learner = restore_learner(m.config.learner, j.at("input_width").get<std::size_t>(),
                              detail::vec_from_json(j.at("input_mean")), detail::vec_from_json(j.at("input_scale")),
                              j.at("target_mean").get<double>(), detail::vec_from_json(j.at("output_weights")));
  return m;
}

inline json to_json(const EnsembleModel& model) {
  json members = json::array();
  for (const auto& m : model.members) members.push_back(to_json(m));
  return {{"format_version", kModelFormatVersion},
          {"method", std::string(to_string(model.method))},
          {"history", model.history},
          {"channels", model.channel_names},
          {"target", model.target},
          {"train_rmse", model.train_rmse},
          {"pool_indices", model.pool_indices},
          {"weights", detail::vec_to_json(model.weights)},
          {"genotype_layout", layout_description()},
          {"members", members}};
}

inline EnsembleModel ensemble_model_from_json(const json& j) {
  if (j.at("format_version").get<int>() != kModelFormatVersion) throw DataError("unsupported model format version");
  EnsembleModel model;
  model.method = parse_combine_method(j.at("method").get<std::string>());
  model.history = j.at("history").get<std::size_t>();
  model.channel_names = j.at("channels").get<std::vector<std::string>>();
  model.target = j.at("target").get<std::string>();
  model.train_rmse = j.at("train_rmse").get<double>();
  model.pool_indices = j.at("pool_indices").get<std::vector<std::size_t>>();
  model.weights = detail::vec_from_json(j.at("weights"));
  for (const auto& m : j.at("members")) model.members.push_back(trained_member_from_json(m));
  if (static_cast<std::size_t>(model.weights.size()) != model.members.size()) throw DataError("model weight count mismatch");
  return model;
}

inline void save_model(const EnsembleModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << to_json(model).dump(2) << '\n';
}

inline EnsembleModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model '" + path + "'");
  try {
    return ensemble_model_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw DataError("malformed model '" + path + "': " + e.what());
  }
}

}  // namespace eel
