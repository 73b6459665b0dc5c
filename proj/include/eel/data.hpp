#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eel/core.hpp"
#include "eel/features.hpp"
#include "eel/linalg.hpp"
#include "eel/pipeline.hpp"

namespace eel {

struct Channel {
  std::string name;
  std::vector<double> values;
};

/// Aligned multivariate series with one designated target channel.
class TimeSeriesDataset {
 public:
  TimeSeriesDataset(std::vector<Channel> channels, std::size_t target_index,
                    std::vector<std::string> timestamps = {})
      : channels_(std::move(channels)), target_index_(target_index), timestamps_(std::move(timestamps)) {
    if (channels_.empty()) throw DataError("dataset has no channels");
    if (target_index_ >= channels_.size()) throw DataError("target index out of range");
    const std::size_t len = channels_.front().values.size();
    if (len < 2) throw DataError("dataset needs at least 2 rows");
    for (const auto& c : channels_) {
      if (c.values.size() != len) throw DataError("channel '" + c.name + "' has mismatched length");
      for (double v : c.values) {
        if (!std::isfinite(v)) throw DataError("channel '" + c.name + "' contains a non-finite value");
      }
    }
    if (!timestamps_.empty() && timestamps_.size() != len) throw DataError("timestamp length mismatch");
  }

  std::size_t length() const { return channels_.front().values.size(); }
  std::size_t channel_count() const { return channels_.size(); }
  std::size_t auxiliary_count() const { return channels_.size() - 1; }
  std::size_t target_index() const { return target_index_; }
  const std::vector<Channel>& channels() const { return channels_; }
  const std::vector<std::string>& timestamps() const { return timestamps_; }
  const Channel& target() const { return channels_[target_index_]; }

  /// Auxiliary channel `i` in 0..d-1, i.e. dataset order with the target skipped.
  const Channel& auxiliary(std::size_t i) const { return channels_[i < target_index_ ? i : i + 1]; }

  std::vector<std::string> channel_names() const {
    std::vector<std::string> names;
    for (const auto& c : channels_) names.push_back(c.name);
    return names;
  }

 private:
  std::vector<Channel> channels_;
  std::size_t target_index_;
  std::vector<std::string> timestamps_;
};

struct LoadResult {
  TimeSeriesDataset dataset;
  std::size_t dropped_rows = 0;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_real(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline bool is_timestamp_name(std::string name) {
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return name == "t" || name == "time" || name == "timestamp" || name == "date" || name == "datetime";
}

}  // namespace detail

/// Read a headed CSV. Every column except the timestamp column becomes a
/// channel unless none of its cells parse as numbers. Rows with a missing or
/// non-numeric value in any channel are dropped and counted. An empty
/// `timestamp_column` selects the first column named t/time/timestamp/date.
inline LoadResult load_csv(const std::string& path, const std::string& target_column,
                           const std::string& timestamp_column = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    header = detail::split_csv_line(t);
    break;
  }
  if (header.empty()) throw DataError("'" + path + "' has no header row");

  std::optional<std::size_t> ts_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const bool match = timestamp_column.empty() ? detail::is_timestamp_name(header[c]) : header[c] == timestamp_column;
    if (match) {
      ts_col = c;
      break;
    }
  }
  if (!timestamp_column.empty() && !ts_col) throw DataError("timestamp column '" + timestamp_column + "' not found");

  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto cells = detail::split_csv_line(t);
    if (cells.size() != header.size()) {
      throw DataError("'" + path + "' line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    }
    rows.push_back(std::move(cells));
  }

  // A column is numeric when at least one cell parses.
  std::vector<std::size_t> numeric_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (ts_col && *ts_col == c) continue;
    const bool any = std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return detail::parse_real(r[c]).has_value(); });
    if (any || rows.empty()) numeric_cols.push_back(c);
  }
  const auto target_it = std::find_if(numeric_cols.begin(), numeric_cols.end(),
                                      [&](std::size_t c) { return header[c] == target_column; });
  if (target_it == numeric_cols.end()) throw DataError("target column '" + target_column + "' not found or not numeric");
  if (numeric_cols.size() < 2) throw DataError("need the target plus at least one auxiliary numeric column");

  std::vector<Channel> channels;
  for (std::size_t c : numeric_cols) channels.push_back({header[c], {}});
  std::vector<std::string> stamps;
  std::size_t dropped = 0;
  std::vector<double> parsed(numeric_cols.size());
  for (const auto& r : rows) {
    bool ok = true;
    for (std::size_t k = 0; k < numeric_cols.size() && ok; ++k) {
      const auto v = detail::parse_real(r[numeric_cols[k]]);
      if (!v) ok = false;
      else parsed[k] = *v;
    }
    if (!ok) {
      ++dropped;
      continue;
    }
    for (std::size_t k = 0; k < numeric_cols.size(); ++k) channels[k].values.push_back(parsed[k]);
    if (ts_col) stamps.push_back(r[*ts_col]);
  }
  if (channels.front().values.size() < 2) throw DataError("'" + path + "' has fewer than 2 usable rows");

  if (!stamps.empty()) {
    // Numeric stamps compare numerically, anything else lexicographically (ISO 8601 sorts that way).
    const bool numeric = std::all_of(stamps.begin(), stamps.end(), [](const auto& s) { return detail::parse_real(s).has_value(); });
    for (std::size_t i = 1; i < stamps.size(); ++i) {
      const bool ordered = numeric ? *detail::parse_real(stamps[i - 1]) <= *detail::parse_real(stamps[i])
                                   : stamps[i - 1] <= stamps[i];
      if (!ordered) throw DataError("timestamps are not monotone at row " + std::to_string(i));
    }
  }

  const auto target_index = static_cast<std::size_t>(target_it - numeric_cols.begin());
  return {TimeSeriesDataset(std::move(channels), target_index, std::move(stamps)), dropped};
}

/// Non-overlapping block means; a trailing partial block is discarded.
inline std::vector<double> aggregate_resolution(std::span<const double> series, int r) {
  if (r < 1) throw std::invalid_argument("aggregate_resolution: r must be >= 1");
  const auto block = static_cast<std::size_t>(r);
  if (block > series.size()) throw std::invalid_argument("aggregate_resolution: r exceeds series length");
  std::vector<double> out(series.size() / block);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double sum = 0.0;
    for (std::size_t j = 0; j < block; ++j) sum += series[k * block + j];
    out[k] = sum / static_cast<double>(r);
  }
  return out;
}

/// Columns produced for one channel. `channel` uses config indexing (0 = target).
struct ChannelBlock {
  std::size_t channel;
  std::size_t offset;
  std::size_t width;
  friend bool operator==(const ChannelBlock&, const ChannelBlock&) = default;
};

struct SampleMatrix {
  Matrix inputs;   // s x D_in
  Vector targets;  // s
  std::vector<ChannelBlock> layout;
  std::size_t history = 0;  // raw steps consumed before row 0; row k targets raw index history + k

  std::size_t rows() const { return static_cast<std::size_t>(targets.size()); }
  std::size_t width() const { return static_cast<std::size_t>(inputs.cols()); }
};

/// Feature-extraction callable used by build_samples by default: drops the
/// methods a segment is too short for, then extracts.
struct DefaultExtractor {
  std::vector<double> operator()(std::span<const double> segment, const FeatureFlags& flags) const {
    return extract(segment, applicable_flags(flags, segment.size()));
  }
};

/// Column layout a config produces, computed without touching data.
inline std::vector<ChannelBlock> sample_layout(const PipelineConfig& config) {
  std::vector<ChannelBlock> layout;
  std::size_t offset = 0;
  auto add = [&](std::size_t ch, std::size_t length) {
    const std::size_t w = config.fe.at(ch) ? extract_width(applicable_flags(config.fs.at(ch), length), length) : length;
    layout.push_back({ch, offset, w});
    offset += w;
  };
  add(0, static_cast<std::size_t>(config.tw.at(0)));
  for (std::size_t i = 0; i < config.cs.size(); ++i) {
    if (config.cs[i]) add(i + 1, static_cast<std::size_t>(config.tw.at(i + 1)));
  }
  return layout;
}

inline void validate_config_for(const TimeSeriesDataset& data, const PipelineConfig& config) {
  const std::size_t d = data.auxiliary_count();
  if (config.tw.size() != d + 1 || config.cs.size() != d || config.fe.size() != d + 1 || config.fs.size() != d + 1) {
    throw std::invalid_argument("pipeline config does not match the dataset's channel count");
  }
  if (config.resolution < 1) throw std::invalid_argument("resolution must be >= 1");
  for (int w : config.tw) {
    if (w < 1) throw std::invalid_argument("time windows must be >= 1");
  }
}

/// One sample per admissible time t: the input ends at raw index t and the
/// target is the target channel at t + 1. The target history is the last
/// tw[0] block means of the resolution-r aggregation of the preceding
/// tw[0] * r raw values; auxiliary channels contribute their raw last tw[i]
/// values or the extracted features of that segment. `min_history` aligns
/// configs on a common sample frame.
template <class Extractor = DefaultExtractor>
SampleMatrix build_samples(const TimeSeriesDataset& data, const PipelineConfig& config,
                           std::size_t min_history = 0, const Extractor& fx = {}) {
  validate_config_for(data, config);
  const std::size_t h = std::max(required_history(config), min_history);
  const std::size_t L = data.length();
  if (h >= L) {
    throw DataError("insufficient history: need more than " + std::to_string(h) + " rows, have " + std::to_string(L));
  }
  const std::size_t s = L - h;
  const auto layout = sample_layout(config);
  const std::size_t width = layout.back().offset + layout.back().width;

  SampleMatrix out;
  out.inputs.resize(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(width));
  out.targets.resize(static_cast<Eigen::Index>(s));
  out.layout = layout;
  out.history = h;

  const auto& target = data.target().values;
  const auto r = static_cast<std::size_t>(config.resolution);
  const auto tw0 = static_cast<std::size_t>(config.tw[0]);
  auto put = [&](std::size_t row, const ChannelBlock& block, std::span<const double> segment, std::size_t ch) {
    if (config.fe[ch]) {
      const auto feats = fx(segment, config.fs[ch]);
      if (feats.size() != block.width) throw std::logic_error("feature width disagrees with layout");
      for (std::size_t j = 0; j < feats.size(); ++j) {
        out.inputs(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(block.offset + j)) = feats[j];
      }
    } else {
      for (std::size_t j = 0; j < segment.size(); ++j) {
        out.inputs(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(block.offset + j)) = segment[j];
      }
    }
  };

  for (std::size_t k = 0; k < s; ++k) {
    const std::size_t end = h + k;  // one past the last input index t
    out.targets(static_cast<Eigen::Index>(k)) = target[end];
    const std::span<const double> raw(target.data() + end - tw0 * r, tw0 * r);
    const auto history = r == 1 ? std::vector<double>(raw.begin(), raw.end()) : aggregate_resolution(raw, config.resolution);
    put(k, layout[0], history, 0);
    std::size_t b = 1;
    for (std::size_t i = 0; i < config.cs.size(); ++i) {
      if (!config.cs[i]) continue;
      const auto& values = data.auxiliary(i).values;
      const auto tw = static_cast<std::size_t>(config.tw[i + 1]);
      put(k, layout[b++], std::span<const double>(values.data() + end - tw, tw), i + 1);
    }
  }
  return out;
}

/// Copy the given rows of a sample matrix.
inline SampleMatrix select_rows(const SampleMatrix& samples, std::span<const std::size_t> rows) {
  SampleMatrix out;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), samples.inputs.cols());
  out.targets.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(rows[i]);
    if (rows[i] >= samples.rows()) throw std::out_of_range("select_rows: row index out of range");
    out.inputs.row(static_cast<Eigen::Index>(i)) = samples.inputs.row(src);
    out.targets(static_cast<Eigen::Index>(i)) = samples.targets(src);
  }
  out.layout = samples.layout;
  out.history = samples.history;
  return out;
}

struct TrainTestSplit {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Uniform random partition of sample indices 0..n-1; the training part has
/// round(n * train_fraction) elements.
inline TrainTestSplit split_train_test(std::size_t sample_count, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw std::invalid_argument("train fraction must lie in (0, 1)");
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(sample_count) * train_fraction));
  if (n_train == 0 || n_train >= sample_count) throw DataError("split leaves an empty training or test part");
  std::vector<std::size_t> idx(sample_count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  TrainTestSplit split;
  split.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace eel
