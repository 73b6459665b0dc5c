#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "eel/core.hpp"
#include "eel/features.hpp"
#include "eel/pipeline.hpp"

namespace eel {

/// Evenly spaced integer set {first, first+step, ..., last}.
inline std::vector<int> int_range(int first, int last, int step = 1) {
  if (step <= 0 || last < first) throw ConfigError("invalid integer range");
  std::vector<int> out;
  for (int v = first; v <= last; v += step) out.push_back(v);
  return out;
}

/// Search-space description. Sets hold resolved values (actual window
/// lengths, neuron counts), not indices.
///
/// Layout of a genotype of dimension D, for d auxiliary channels:
///   [tw (d+1) | resolution (1) | cs (d) | fe (d+1) | fs (11 (d+1)) | params (d_p)]
struct GenotypeSpec {
  std::size_t channel_count = 0;                 // d + 1
  std::vector<std::vector<int>> tw_sets;         // per channel, target first
  std::vector<int> resolution_set;
  LearnerKind learner_kind = LearnerKind::elm;
  std::vector<std::vector<int>> param_sets;      // d_p sets

  std::size_t auxiliary_count() const { return channel_count - 1; }

  std::size_t dimension() const {
    const std::size_t c = channel_count;
    return c + 1 + (c - 1) + c + kFeatureCount * c + param_sets.size();
  }

  std::size_t tw_offset() const { return 0; }
  std::size_t resolution_offset() const { return channel_count; }
  std::size_t cs_offset() const { return channel_count + 1; }
  std::size_t fe_offset() const { return cs_offset() + channel_count - 1; }
  std::size_t fs_offset() const { return fe_offset() + channel_count; }
  std::size_t param_offset() const { return fs_offset() + kFeatureCount * channel_count; }

  void validate() const {
    if (channel_count < 2) throw ConfigError("genotype needs the target plus at least one auxiliary channel");
    if (tw_sets.size() != channel_count) throw ConfigError("one time-window set per channel is required");
    for (const auto& s : tw_sets) {
      if (s.empty()) throw ConfigError("empty time-window set");
      for (int v : s) if (v < 1) throw ConfigError("time windows must be >= 1");
    }
    if (resolution_set.empty()) throw ConfigError("empty resolution set");
    for (int v : resolution_set) if (v < 1) throw ConfigError("resolutions must be >= 1");
    if (param_sets.size() != param_arity(learner_kind)) {
      throw ConfigError(std::string(to_string(learner_kind)) + " needs " + std::to_string(param_arity(learner_kind)) +
                        " parameter sets");
    }
    for (const auto& s : param_sets) if (s.empty()) throw ConfigError("empty learner parameter set");
  }

  /// Raw history needed by the largest decodable configuration.
  std::size_t max_history() const {
    const auto mx = [](const std::vector<int>& s) { return static_cast<std::size_t>(*std::max_element(s.begin(), s.end())); };
    std::size_t h = mx(tw_sets[0]) * mx(resolution_set);
    for (std::size_t i = 1; i < tw_sets.size(); ++i) h = std::max(h, mx(tw_sets[i]));
    return h;
  }
};

/// Default learner parameter sets (hidden neurons 10..400 step 10; direct link
/// {0,1}; BLS windows 1..20, nodes per window 1..50, enhancement 10..1500 step 10).
inline std::vector<std::vector<int>> default_param_sets(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::elm: return {int_range(10, 400, 10)};
    case LearnerKind::rvfl: return {int_range(10, 400, 10), {0, 1}};
    case LearnerKind::bls: return {int_range(1, 20), int_range(1, 50), int_range(10, 1500, 10)};
  }
  return {};
}

/// Default search space: target windows 6..96 step 6, resolutions 1..15,
/// auxiliary windows 6..48 step 2.
inline GenotypeSpec default_genotype_spec(std::size_t auxiliary_channels, LearnerKind kind) {
  GenotypeSpec spec;
  spec.channel_count = auxiliary_channels + 1;
  spec.tw_sets.push_back(int_range(6, 96, 6));
  for (std::size_t i = 0; i < auxiliary_channels; ++i) spec.tw_sets.push_back(int_range(6, 48, 2));
  spec.resolution_set = int_range(1, 15);
  spec.learner_kind = kind;
  spec.param_sets = default_param_sets(kind);
  return spec;
}

struct Genotype {
  std::vector<double> values;
  friend bool operator==(const Genotype&, const Genotype&) = default;
};

/// D i.i.d. uniform [0, 1) components.
inline Genotype random_genotype(std::size_t dimension, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Genotype g;
  g.values.resize(dimension);
  for (double& v : g.values) v = u(rng);
  return g;
}

inline Genotype random_genotype(const GenotypeSpec& spec, Rng& rng) { return random_genotype(spec.dimension(), rng); }

inline Genotype random_genotype(const GenotypeSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  return random_genotype(spec, rng);
}

/// 1-based floor-and-clamp: v -> min(floor(v * n) + 1, n).
inline std::size_t decode_index(double v, std::size_t set_size) {
  const double scaled = std::floor(v * static_cast<double>(set_size));
  const auto idx = scaled < 0.0 ? std::size_t{1} : static_cast<std::size_t>(scaled) + 1;
  return std::min(idx, set_size);
}

inline bool decode_binary(double v) { return v >= 0.5; }

/// Clamp every component to [0, 1].
inline Genotype repair(Genotype g) {
  for (double& v : g.values) {
    if (!std::isfinite(v)) throw std::domain_error("repair: non-finite genotype component");
    v = std::clamp(v, 0.0, 1.0);
  }
  return g;
}

inline PipelineConfig decode(const Genotype& g, const GenotypeSpec& spec, std::uint64_t learner_seed = 0) {
  if (g.values.size() != spec.dimension()) {
    throw std::invalid_argument("decode: genotype has " + std::to_string(g.values.size()) + " dimensions, spec expects " +
                                std::to_string(spec.dimension()));
  }
  const auto pick = [](const std::vector<int>& set, double v) { return set[decode_index(v, set.size()) - 1]; };
  const std::size_t c = spec.channel_count;
  const auto& v = g.values;

  PipelineConfig cfg;
  for (std::size_t i = 0; i < c; ++i) cfg.tw.push_back(pick(spec.tw_sets[i], v[spec.tw_offset() + i]));
  cfg.resolution = pick(spec.resolution_set, v[spec.resolution_offset()]);
  for (std::size_t i = 0; i + 1 < c; ++i) cfg.cs.push_back(decode_binary(v[spec.cs_offset() + i]));
  for (std::size_t i = 0; i < c; ++i) cfg.fe.push_back(decode_binary(v[spec.fe_offset() + i]));
  for (std::size_t i = 0; i < c; ++i) {
    FeatureFlags flags;
    for (std::size_t f = 0; f < kFeatureCount; ++f) flags.flags[f] = decode_binary(v[spec.fs_offset() + i * kFeatureCount + f]);
    cfg.fs.push_back(flags);
  }
  cfg.learner.kind = spec.learner_kind;
  for (std::size_t k = 0; k < spec.param_sets.size(); ++k) {
    cfg.learner.params.push_back(pick(spec.param_sets[k], v[spec.param_offset() + k]));
  }
  cfg.learner.seed = learner_seed;
  return cfg;
}

}  // namespace eel
