#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "signals.hpp"

namespace shiftlab {

// n points in R^d, entries i.i.d. N(0, 1/d), y_i = sign(x_i[0]).
struct GaussianDataset {
  Eigen::MatrixXd x;  // n x d, one point per row
  Eigen::VectorXd y;
  std::uint64_t seed = 0;

  std::size_t n() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(x.cols()); }
};

struct LinearInterpolant {
  Eigen::VectorXd w;
  double residual = 0.0;  // max_i |w^T x_i - y_i|
};

GaussianDataset sample_gaussian_dataset(std::size_t n, std::size_t d, std::uint64_t seed);

// Least-norm w with X w = y, via a Cholesky factorization of X X^T.
// Rejects d < n and numerically rank-deficient X.
LinearInterpolant min_norm_interpolant(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
LinearInterpolant min_norm_interpolant(const GaussianDataset& data);

// Plain gradient descent on (1/2) |X w - y|^2 starting from w0.
LinearInterpolant gd_interpolant(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& w0, double lr, std::size_t steps);

// Starting point for gd_interpolant: zero, or a seeded Gaussian vector with
// its component in span(X) removed when in_span is false.
Eigen::VectorXd gd_initial_point(const Eigen::MatrixXd& x, bool in_span, std::uint64_t seed);

struct Summary {
  double min = 0.0, mean = 0.0, max = 0.0;
  std::size_t count = 0;
};

struct OrthogonalityStats {
  double max_abs_inner = 0.0;  // max over i != j of |<x_i, x_j>|
  Summary pair_distance;       // |x_j - x_i| over opposite-label pairs
  Summary pair_cosine;         // <v_ij, v_ik>/(|v_ij||v_ik|), j, k != each other, opposite to i
};

OrthogonalityStats orthogonality_stats(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// sqrt(n) / (2 sin(pi/3)) = sqrt(n / 3).
double gradient_norm_prediction(std::size_t n);

struct LinearAttack {
  std::vector<double> point;
  double perturbation_norm = 0.0;
  bool success = false;
  double minimal_distance = 0.0;  // |w^T x| / |w|
};

// Moves x by epsilon along -y w/|w|.
LinearAttack epsilon_adversarial(std::span<const double> x, int y,
                                 const Eigen::VectorXd& w, double epsilon);

struct DirectionalReport {
  std::size_t pairs = 0;
  double max_abs_dev_from_two = 0.0;  // max |<w, v_ij>| - 2 deviation
  Summary unit_derivative;            // |<w, v_ij / |v_ij|>|
  double fraction_near_sqrt2 = 0.0;   // share of pairs with the above in (1.3, 1.6)
};

DirectionalReport directional_derivative_check(const Eigen::MatrixXd& x,
                                               const Eigen::VectorXd& y,
                                               const Eigen::VectorXd& w);

}  // namespace shiftlab
