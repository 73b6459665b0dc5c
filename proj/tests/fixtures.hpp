#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "eel/data.hpp"
#include "eel/genotype.hpp"
#include "eel/pipeline.hpp"
#include "oracles.hpp"

namespace fixture {

inline eel::TimeSeriesDataset dataset(std::vector<double> target, std::vector<std::vector<double>> aux) {
  std::vector<eel::Channel> ch{{"y", std::move(target)}};
  for (std::size_t i = 0; i < aux.size(); ++i) ch.push_back({"x" + std::to_string(i + 1), std::move(aux[i])});
  return eel::TimeSeriesDataset(std::move(ch), 0);
}

/// Random-walk-ish dataset with d auxiliary channels.
inline eel::TimeSeriesDataset random_dataset(std::size_t length, std::size_t d, std::uint64_t seed) {
  std::vector<std::vector<double>> aux;
  for (std::size_t i = 0; i < d; ++i) aux.push_back(oracle::random_series(length, seed * 31 + i));
  auto y = oracle::random_series(length, seed * 31 + 17);
  for (std::size_t t = 1; t < length; ++t) y[t] = 0.6 * y[t - 1] + 0.3 * y[t] + 0.2 * aux[0][t - 1];
  return dataset(std::move(y), std::move(aux));
}

/// Target-only raw-lag config for d auxiliary channels.
inline eel::PipelineConfig lag_config(std::size_t d, int tw0, int r = 1, int hidden = 10) {
  eel::PipelineConfig c;
  c.tw.assign(d + 1, 2);
  c.tw[0] = tw0;
  c.resolution = r;
  c.cs.assign(d, false);
  c.fe.assign(d + 1, false);
  c.fs.assign(d + 1, eel::FeatureFlags{});
  c.learner = {eel::LearnerKind::elm, {hidden}, 1};
  return c;
}

/// Compact search space for fast tests.
inline eel::GenotypeSpec small_spec(std::size_t d, eel::LearnerKind kind = eel::LearnerKind::elm) {
  eel::GenotypeSpec s;
  s.channel_count = d + 1;
  s.tw_sets.push_back(eel::int_range(2, 12, 2));
  for (std::size_t i = 0; i < d; ++i) s.tw_sets.push_back(eel::int_range(2, 12, 2));
  s.resolution_set = eel::int_range(1, 3);
  s.learner_kind = kind;
  switch (kind) {
    case eel::LearnerKind::elm: s.param_sets = {eel::int_range(5, 30, 5)}; break;
    case eel::LearnerKind::rvfl: s.param_sets = {eel::int_range(5, 30, 5), {0, 1}}; break;
    case eel::LearnerKind::bls: s.param_sets = {eel::int_range(1, 3), eel::int_range(2, 6), eel::int_range(5, 20, 5)}; break;
  }
  return s;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("eel_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(file(name)) << text;
    return file(name);
  }

 private:
  std::filesystem::path path_;
};

}  // namespace fixture
