#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "eel/core.hpp"
#include "eel/features.hpp"

namespace eel {

enum class LearnerKind { elm, rvfl, bls };

inline std::string_view to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::elm: return "ELM";
    case LearnerKind::rvfl: return "RVFL";
    case LearnerKind::bls: return "BLS";
  }
  return "?";
}

inline LearnerKind parse_learner_kind(std::string_view text) {
  std::string up(text);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (up == "ELM") return LearnerKind::elm;
  if (up == "RVFL") return LearnerKind::rvfl;
  if (up == "BLS") return LearnerKind::bls;
  throw ConfigError("unknown learner kind '" + std::string(text) + "'");
}

/// Number of integer hyperparameters for a learner kind.
inline std::size_t param_arity(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::elm: return 1;   // hidden neurons
    case LearnerKind::rvfl: return 2;  // hidden neurons, direct link
    case LearnerKind::bls: return 3;   // mapped windows, nodes per window, enhancement nodes
  }
  return 0;
}

struct LearnerSpec {
  LearnerKind kind = LearnerKind::elm;
  std::vector<int> params;
  std::uint64_t seed = 0;

  friend bool operator==(const LearnerSpec&, const LearnerSpec&) = default;
};

/// A decoded genotype. Index 0 of every per-channel vector is the target
/// channel; indices 1..d are the auxiliary channels in dataset order.
struct PipelineConfig {
  std::vector<int> tw;                // window length per channel
  int resolution = 1;                 // target-history aggregation interval
  std::vector<bool> cs;               // d auxiliary selections
  std::vector<bool> fe;               // d+1 feature-extraction switches
  std::vector<FeatureFlags> fs;       // d+1 feature method selections
  LearnerSpec learner;

  std::size_t auxiliary_count() const { return cs.size(); }

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Raw steps of history a config consumes before its first sample.
inline std::size_t required_history(const PipelineConfig& config) {
  std::size_t h = static_cast<std::size_t>(config.tw.at(0)) * static_cast<std::size_t>(config.resolution);
  for (std::size_t i = 0; i < config.cs.size(); ++i) {
    if (config.cs[i]) h = std::max(h, static_cast<std::size_t>(config.tw.at(i + 1)));
  }
  return h;
}

}  // namespace eel
