#pragma once
// Independent reference computations for the unit tests. Written from the
// definitions, deliberately without sharing code paths with the library.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

// Two-layer bias-free ReLU NTK, angle via atan2 (not acos) so rounding
// behaves differently from the library's clamped-cosine path.
inline double ntk(const Vec& z, const Vec& x) {
  const double nz = std::sqrt(dot(z, z)), nx = std::sqrt(dot(x, x));
  if (nz == 0.0 || nx == 0.0) return 0.0;
  // |z||x| sin(phi) = |z x^T - x z^T|_F / sqrt(2)
  double cross = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double t = z[i] * x[j] - x[i] * z[j];
      cross += t * t;
    }
  const double s = std::sqrt(cross / 2.0), c = dot(z, x);
  const double phi = std::atan2(s, c);
  const double pi = std::numbers::pi;
  return (2.0 * c * (pi - phi) + s) / pi;
}

inline Vec patch(const Vec& x, std::size_t i, std::size_t q) {
  Vec p(q);
  for (std::size_t k = 0; k < q; ++k) p[k] = x[(i + k) % x.size()];
  return p;
}

// (1/d^2) sum over all patch pairs; the library uses a shift shortcut at q = d.
inline double cntk(const Vec& z, const Vec& x, std::size_t q) {
  const std::size_t d = x.size();
  if (q == 0) q = d;
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) s += ntk(patch(z, i, q), patch(x, j, q));
  return s / static_cast<double>(d * d);
}

inline double fc_net(const Eigen::MatrixXd& w, const Eigen::VectorXd& v, const Vec& x) {
  double f = 0.0;
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    double pre = 0.0;
    for (Eigen::Index c = 0; c < w.cols(); ++c) pre += w(r, c) * x[c];
    f += v[r] * std::max(pre, 0.0);
  }
  return f;
}

inline double conv_net(const Eigen::MatrixXd& w, const Eigen::VectorXd& v, const Vec& x) {
  double f = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Vec p = patch(x, i, static_cast<std::size_t>(w.cols()));
    f += fc_net(w, v, p);
  }
  return f / static_cast<double>(x.size());
}

// Least-norm solution by SVD.
inline Eigen::VectorXd least_norm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return x.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
}

inline Vec gaussian(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec v(d);
  for (double& t : v) t = n(rng);
  return v;
}

}  // namespace oracle
