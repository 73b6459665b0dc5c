#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace eel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Singular values at or below this are treated as zero:
/// machine epsilon * max(rows, cols) * sigma_max.
inline double pinv_cutoff(Eigen::Index rows, Eigen::Index cols, double sigma_max) {
  return std::numeric_limits<double>::epsilon() *
         static_cast<double>(std::max(rows, cols)) * sigma_max;
}

namespace detail {

inline void require_finite(const Matrix& a, const char* what) {
  if (a.size() == 0) throw std::invalid_argument(std::string(what) + ": empty matrix");
  if (!a.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

inline Vector inverted_spectrum(const Vector& sigma, double cutoff) {
  Vector inv(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    inv(i) = sigma(i) > cutoff ? 1.0 / sigma(i) : 0.0;
  }
  return inv;
}

}  // namespace detail

/// Moore-Penrose inverse via thin SVD with a relative singular-value cutoff.
inline Matrix pseudoinverse(const Matrix& a) {
  detail::require_finite(a, "pseudoinverse");
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  const double cutoff = pinv_cutoff(a.rows(), a.cols(), sigma.size() ? sigma(0) : 0.0);
  const Vector inv = detail::inverted_spectrum(sigma, cutoff);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Minimum-norm least-squares solution, pseudoinverse(a) * y, without forming
/// the inverse. Tall systems are reduced by Householder QR first; R has the
/// same singular values as a, so the cutoff is unchanged.
inline Vector solve_min_norm(const Matrix& a, const Vector& y) {
  detail::require_finite(a, "solve_min_norm");
  if (y.size() != a.rows()) throw std::invalid_argument("solve_min_norm: row mismatch");
  if (!y.allFinite()) throw std::invalid_argument("solve_min_norm: non-finite right-hand side");

  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (m >= n) {
    Eigen::HouseholderQR<Matrix> qr(a);
    const Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    const Vector qty = (qr.householderQ().adjoint() * y).head(n);
    Eigen::BDCSVD<Matrix> svd(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sigma = svd.singularValues();
    const Vector inv = detail::inverted_spectrum(sigma, pinv_cutoff(m, n, sigma(0)));
    return svd.matrixV() * (inv.asDiagonal() * (svd.matrixU().transpose() * qty));
  }
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  const Vector inv = detail::inverted_spectrum(sigma, pinv_cutoff(m, n, sigma(0)));
  return svd.matrixV() * (inv.asDiagonal() * (svd.matrixU().transpose() * y));
}

inline double rmse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("rmse: length mismatch");
  if (a.empty()) throw std::invalid_argument("rmse: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.size()));
}

inline double rmse(const Vector& a, const Vector& b) {
  return rmse(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
              std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace eel
