#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eel/core.hpp"

namespace eel {

struct SyntheticSpec {
  std::size_t length = 2000;
  std::size_t channels = 3;  // auxiliary channels
  double noise = 0.05;
  std::uint64_t seed = 1;
  double coupling = 0.5;
  std::size_t period = 24;

  void validate() const {
    if (length < 200) throw ConfigError("synthetic length must be >= 200");
    if (channels < 1) throw ConfigError("synthetic data needs at least one auxiliary channel");
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("noise must be a finite non-negative number");
    if (!std::isfinite(coupling)) throw ConfigError("coupling must be finite");
    if (period < 2) throw ConfigError("period must be >= 2");
  }
};

struct SyntheticSeries {
  std::vector<double> target;
  std::vector<std::vector<double>> auxiliary;
};

/// y[t] = sin(2 pi t / P) + 0.5 sin(6 pi t / P) + (c / d) sum_j x_j[t - j] + noise * e[t]
/// x_j = exponentially smoothed Gaussian random walk (step sd 0.1, smoothing 0.9)
inline std::string generator_equation(const SyntheticSpec& spec) {
  std::ostringstream os;
  os << "y[t] = sin(2*pi*t/" << spec.period << ") + 0.5*sin(6*pi*t/" << spec.period << ") + (" << spec.coupling << "/"
     << spec.channels << ")*sum_j x_j[t-j] + " << spec.noise << "*N(0,1); "
     << "x_j[t] = 0.9*x_j[t-1] + 0.1*w_j[t], w_j[t] = w_j[t-1] + N(0,0.1^2); x_j[t<0] = x_j[0]";
  return os.str();
}

inline SyntheticSeries generate_series(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SyntheticSeries out;
  out.auxiliary.assign(spec.channels, std::vector<double>(spec.length));
  for (auto& x : out.auxiliary) {
    double walk = 0.0;
    double smooth = 0.0;
    for (std::size_t t = 0; t < spec.length; ++t) {
      walk += 0.1 * gauss(rng);
      smooth = t == 0 ? walk : 0.9 * smooth + 0.1 * walk;
      x[t] = smooth;
    }
  }
  out.target.resize(spec.length);
  const double w = 2.0 * std::numbers::pi / static_cast<double>(spec.period);
  for (std::size_t t = 0; t < spec.length; ++t) {
    const double td = static_cast<double>(t);
    double y = std::sin(w * td) + 0.5 * std::sin(3.0 * w * td);
    double coupled = 0.0;
    for (std::size_t j = 0; j < spec.channels; ++j) {
      const std::size_t lag = j + 1;
      coupled += out.auxiliary[j][t >= lag ? t - lag : 0];
    }
    y += spec.coupling / static_cast<double>(spec.channels) * coupled;
    y += spec.noise * gauss(rng);
    out.target[t] = y;
  }
  return out;
}

/// CSV with columns t, y, x1..xd and the generator equation in a '#' header comment.
inline void write_synthetic_csv(const SyntheticSpec& spec, const std::string& path) {
  const SyntheticSeries series = generate_series(spec);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "# synthetic multivariate series: " << generator_equation(spec) << '\n';
  out << "# length=" << spec.length << " channels=" << spec.channels << " noise=" << spec.noise
      << " coupling=" << spec.coupling << " period=" << spec.period << " seed=" << spec.seed << '\n';
  out << "t,y";
  for (std::size_t j = 0; j < spec.channels; ++j) out << ",x" << j + 1;
  out << '\n' << std::setprecision(17);
  for (std::size_t t = 0; t < spec.length; ++t) {
    out << t << ',' << series.target[t];
    for (const auto& x : series.auxiliary) out << ',' << x[t];
    out << '\n';
  }
}

}  // namespace eel
