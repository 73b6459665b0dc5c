#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eel {

inline constexpr std::size_t kFeatureCount = 11;

/// Canonical order of the feature bank. W1..W4 are Haar approximation levels,
/// PLA1..PLA3 are piecewise-linear fits with 2, 3 and 4 pieces.
enum class Feature : std::size_t {
  mean = 0,
  maximum,
  minimum,
  std_dev,
  w1,
  w2,
  w3,
  w4,
  pla1,
  pla2,
  pla3,
};

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "mean", "maximum", "minimum", "std", "W1", "W2", "W3", "W4", "PLA1", "PLA2", "PLA3"};

struct FeatureFlags {
  std::array<bool, kFeatureCount> flags{};

  bool operator[](Feature f) const { return flags[static_cast<std::size_t>(f)]; }
  bool& operator[](Feature f) { return flags[static_cast<std::size_t>(f)]; }
  bool any() const {
    for (bool b : flags) if (b) return true;
    return false;
  }
  friend bool operator==(const FeatureFlags&, const FeatureFlags&) = default;

  static FeatureFlags of(std::initializer_list<Feature> on) {
    FeatureFlags out;
    for (Feature f : on) out[f] = true;
    return out;
  }
};

struct StatFeatures {
  double mean;
  double maximum;
  double minimum;
  double std_dev;  // population
};

inline StatFeatures stat_features(std::span<const double> segment) {
  if (segment.empty()) throw std::invalid_argument("stat_features: empty segment");
  double sum = 0.0;
  double hi = segment[0];
  double lo = segment[0];
  for (double v : segment) {
    sum += v;
    hi = std::max(hi, v);
    lo = std::min(lo, v);
  }
  const double n = static_cast<double>(segment.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : segment) ss += (v - mean) * (v - mean);
  return {mean, hi, lo, std::sqrt(ss / n)};
}

inline std::size_t wavelet_width(std::size_t length, int level) {
  for (int i = 0; i < level; ++i) length = (length + 1) / 2;
  return std::max<std::size_t>(length, 1);
}

/// Haar approximation coefficients after `level` cascade steps. Odd-length
/// stages are extended by repeating their last value; a single coefficient ends
/// the cascade early.
inline std::vector<double> wavelet_features(std::span<const double> segment, int level) {
  if (level < 1 || level > 4) throw std::invalid_argument("wavelet_features: level must be in 1..4");
  if (segment.size() < 2) throw std::invalid_argument("wavelet_features: segment shorter than 2");
  static const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  std::vector<double> cur(segment.begin(), segment.end());
  for (int step = 0; step < level && cur.size() > 1; ++step) {
    if (cur.size() % 2 == 1) cur.push_back(cur.back());
    std::vector<double> next(cur.size() / 2);
    for (std::size_t k = 0; k < next.size(); ++k) next[k] = (cur[2 * k] + cur[2 * k + 1]) * inv_sqrt2;
    cur = std::move(next);
  }
  return cur;
}

/// Least-squares (slope, intercept) per contiguous piece, piece-major. Pieces
/// have near-equal length with the remainder on the leading pieces; the
/// abscissa restarts at 0 in each piece.
inline std::vector<double> pla_features(std::span<const double> segment, int pieces) {
  if (pieces < 2 || pieces > 4) throw std::invalid_argument("pla_features: pieces must be in 2..4");
  const auto k = static_cast<std::size_t>(pieces);
  if (segment.size() < 2 * k) throw std::invalid_argument("pla_features: segment shorter than 2k");
  const std::size_t base = segment.size() / k;
  const std::size_t rem = segment.size() % k;
  std::vector<double> out;
  out.reserve(2 * k);
  std::size_t start = 0;
  for (std::size_t p = 0; p < k; ++p) {
    const std::size_t m = base + (p < rem ? 1 : 0);
    const auto piece = segment.subspan(start, m);
    start += m;
    const double xbar = static_cast<double>(m - 1) / 2.0;
    double ybar = 0.0;
    for (double v : piece) ybar += v;
    ybar /= static_cast<double>(m);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double dx = static_cast<double>(i) - xbar;
      sxy += dx * (piece[i] - ybar);
      sxx += dx * dx;
    }
    const double slope = sxy / sxx;
    out.push_back(slope);
    out.push_back(ybar - slope * xbar);
  }
  return out;
}

/// Minimum segment length required by a single feature method.
inline std::size_t min_length(Feature f) {
  switch (f) {
    case Feature::mean:
    case Feature::maximum:
    case Feature::minimum:
    case Feature::std_dev: return 1;
    case Feature::w1:
    case Feature::w2:
    case Feature::w3:
    case Feature::w4: return 2;
    case Feature::pla1: return 4;
    case Feature::pla2: return 6;
    case Feature::pla3: return 8;
  }
  return 1;
}

inline std::size_t feature_width(Feature f, std::size_t length) {
  const auto idx = static_cast<std::size_t>(f);
  if (idx <= 3) return 1;
  if (idx <= 7) return wavelet_width(length, static_cast<int>(idx - 3));
  return 2 * (idx - 6);
}

/// Output width of extract(); the raw-segment fallback when nothing is enabled.
inline std::size_t extract_width(const FeatureFlags& flags, std::size_t length) {
  if (!flags.any()) return length;
  std::size_t width = 0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (flags.flags[i]) width += feature_width(static_cast<Feature>(i), length);
  }
  return width;
}

/// Concatenate every enabled method in canonical order; return the raw
/// segment when no flag is set.
inline std::vector<double> extract(std::span<const double> segment, const FeatureFlags& flags) {
  if (!flags.any()) return {segment.begin(), segment.end()};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (flags.flags[i] && segment.size() < min_length(static_cast<Feature>(i))) {
      throw std::invalid_argument("extract: segment too short for " + std::string(kFeatureNames[i]));
    }
  }
  std::vector<double> out;
  out.reserve(extract_width(flags, segment.size()));
  if (flags[Feature::mean] || flags[Feature::maximum] || flags[Feature::minimum] || flags[Feature::std_dev]) {
    const StatFeatures s = stat_features(segment);
    if (flags[Feature::mean]) out.push_back(s.mean);
    if (flags[Feature::maximum]) out.push_back(s.maximum);
    if (flags[Feature::minimum]) out.push_back(s.minimum);
    if (flags[Feature::std_dev]) out.push_back(s.std_dev);
  }
  for (int level = 1; level <= 4; ++level) {
    if (flags.flags[3 + static_cast<std::size_t>(level)]) {
      const auto w = wavelet_features(segment, level);
      out.insert(out.end(), w.begin(), w.end());
    }
  }
  for (int p = 0; p < 3; ++p) {
    if (flags.flags[8 + static_cast<std::size_t>(p)]) {
      const auto w = pla_features(segment, p + 2);
      out.insert(out.end(), w.begin(), w.end());
    }
  }
  return out;
}

/// Flags with every method whose length precondition fails on `length`
/// switched off. Used by sample construction, where short windows can be
/// decoded together with long-window methods.
inline FeatureFlags applicable_flags(const FeatureFlags& flags, std::size_t length) {
  FeatureFlags out = flags;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (out.flags[i] && length < min_length(static_cast<Feature>(i))) out.flags[i] = false;
  }
  return out;
}

}  // namespace eel
