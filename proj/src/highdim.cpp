#include "highdim.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "error.hpp"
#include "rng.hpp"

namespace shiftlab {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void add_sample(Summary& s, double v) {
  if (s.count == 0) {
    s.min = s.max = v;
  } else {
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean += v;
  ++s.count;
}

void finish(Summary& s) {
  if (s.count > 0) s.mean /= static_cast<double>(s.count);
}

void check_shapes(const MatrixXd& x, const VectorXd& y) {
  require(x.rows() == y.size(), ErrorCode::kShapeMismatch, "label count differs from point count");
  require(x.rows() >= 1, ErrorCode::kInvalidArgument, "dataset is empty");
}

}  // namespace

GaussianDataset sample_gaussian_dataset(std::size_t n, std::size_t d, std::uint64_t seed) {
  require(n >= 2 && d >= 2, ErrorCode::kInvalidArgument, "gaussian dataset needs n >= 2, d >= 2");
  GaussianDataset data{MatrixXd(static_cast<Index>(n), static_cast<Index>(d)),
                       VectorXd(static_cast<Index>(n)), seed};
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
  for (Index i = 0; i < data.x.rows(); ++i) {
    for (Index j = 0; j < data.x.cols(); ++j) data.x(i, j) = normal(rng);
    while (data.x(i, 0) == 0.0) data.x(i, 0) = normal(rng);
    data.y[i] = data.x(i, 0) > 0.0 ? 1.0 : -1.0;
  }
  return data;
}

LinearInterpolant min_norm_interpolant(const MatrixXd& x, const VectorXd& y) {
  check_shapes(x, y);
  require(x.cols() >= x.rows(), ErrorCode::kInvalidArgument,
          "min_norm_interpolant: d < n is not supported");
  const MatrixXd g = x * x.transpose();
  Eigen::LLT<MatrixXd> llt(g);
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const VectorXd diag = MatrixXd(llt.matrixL()).diagonal().array().square();
    ok = diag.minCoeff() > 1e-10 * diag.maxCoeff();
  }
  require(ok, ErrorCode::kSingular, "min_norm_interpolant: points are linearly dependent");
  LinearInterpolant out;
  out.w = x.transpose() * llt.solve(y);
  out.residual = (x * out.w - y).cwiseAbs().maxCoeff();
  return out;
}

LinearInterpolant min_norm_interpolant(const GaussianDataset& data) {
  return min_norm_interpolant(data.x, data.y);
}

LinearInterpolant gd_interpolant(const MatrixXd& x, const VectorXd& y, const VectorXd& w0,
                                 double lr, std::size_t steps) {
  check_shapes(x, y);
  require(w0.size() == x.cols(), ErrorCode::kShapeMismatch, "initial point has wrong dimension");
  require(std::isfinite(lr) && lr >= 0.0, ErrorCode::kInvalidArgument,
          "learning rate must be nonnegative");
  LinearInterpolant out{w0, 0.0};
  for (std::size_t s = 0; s < steps; ++s) {
    const VectorXd r = x * out.w - y;
    out.w -= lr * (x.transpose() * r);
    require(out.w.allFinite() && out.w.norm() < 1e12, ErrorCode::kDiverged,
            "gd_interpolant diverged at step " + std::to_string(s));
  }
  out.residual = (x * out.w - y).cwiseAbs().maxCoeff();
  return out;
}

VectorXd gd_initial_point(const MatrixXd& x, bool in_span, std::uint64_t seed) {
  if (in_span) return VectorXd::Zero(x.cols());
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd u(x.cols());
  for (Index j = 0; j < u.size(); ++j) u[j] = normal(rng);
  // Remove the row-space component: u - X^T (X X^T)^{-1} X u.
  const MatrixXd g = x * x.transpose();
  u -= x.transpose() * g.ldlt().solve(x * u);
  return u;
}

OrthogonalityStats orthogonality_stats(const MatrixXd& x, const VectorXd& y) {
  check_shapes(x, y);
  require(x.rows() >= 2, ErrorCode::kInvalidArgument, "orthogonality_stats needs n >= 2");
  const Index n = x.rows();
  const MatrixXd g = x * x.transpose();
  OrthogonalityStats st;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) st.max_abs_inner = std::max(st.max_abs_inner, std::abs(g(i, j)));

  // |x_j - x_i|^2 = G_jj - 2 G_ij + G_ii; <v_ij, v_ik> = G_jk - G_ij - G_ik + G_ii.
  auto dist2 = [&](Index i, Index j) { return g(j, j) - 2.0 * g(i, j) + g(i, i); };
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (y[i] != y[j]) add_sample(st.pair_distance, std::sqrt(dist2(i, j)));
    }
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (y[j] == y[i]) continue;
      for (Index k = j + 1; k < n; ++k) {
        if (y[k] == y[i]) continue;
        const double inner = g(j, k) - g(i, j) - g(i, k) + g(i, i);
        add_sample(st.pair_cosine, inner / std::sqrt(dist2(i, j) * dist2(i, k)));
      }
    }
  }
  finish(st.pair_distance);
  finish(st.pair_cosine);
  return st;
}

double gradient_norm_prediction(std::size_t n) {
  require(n >= 2, ErrorCode::kInvalidArgument, "gradient_norm_prediction needs n >= 2");
  return std::sqrt(static_cast<double>(n)) / (2.0 * std::sin(std::numbers::pi / 3.0));
}

LinearAttack epsilon_adversarial(std::span<const double> x, int y, const VectorXd& w,
                                 double epsilon) {
  require(static_cast<Index>(x.size()) == w.size(), ErrorCode::kShapeMismatch,
          "epsilon_adversarial: dimension mismatch");
  require(y == 1 || y == -1, ErrorCode::kInvalidArgument, "label must be +1 or -1");
  require(std::isfinite(epsilon) && epsilon >= 0.0, ErrorCode::kInvalidArgument,
          "epsilon must be nonnegative");
  const double wn = w.norm();
  require(wn > 0.0, ErrorCode::kInvalidArgument, "epsilon_adversarial: zero gradient");
  const Eigen::Map<const VectorXd> xv(x.data(), static_cast<Index>(x.size()));
  const double g = w.dot(xv);
  require(g * y > 0.0, ErrorCode::kInvalidArgument,
          "epsilon_adversarial: point is not classified as its label");

  LinearAttack out;
  const VectorXd z = xv - (static_cast<double>(y) * epsilon / wn) * w;
  out.point.assign(z.data(), z.data() + z.size());
  out.perturbation_norm = epsilon;
  out.minimal_distance = std::abs(g) / wn;
  const double gz = w.dot(z);
  out.success = (gz >= 0.0 ? 1 : -1) != y;
  return out;
}

DirectionalReport directional_derivative_check(const MatrixXd& x, const VectorXd& y,
                                               const VectorXd& w) {
  check_shapes(x, y);
  require(w.size() == x.cols(), ErrorCode::kShapeMismatch, "w has wrong dimension");
  DirectionalReport rep;
  std::size_t near = 0;
  for (Index i = 0; i < x.rows(); ++i) {
    if (y[i] <= 0.0) continue;
    for (Index j = 0; j < x.rows(); ++j) {
      if (y[j] > 0.0) continue;
      const VectorXd v = x.row(j) - x.row(i);
      const double along = std::abs(w.dot(v));
      const double unit = along / v.norm();
      rep.max_abs_dev_from_two = std::max(rep.max_abs_dev_from_two, std::abs(along - 2.0));
      add_sample(rep.unit_derivative, unit);
      if (unit > 1.3 && unit < 1.6) ++near;
      ++rep.pairs;
    }
  }
  require(rep.pairs > 0, ErrorCode::kData, "directional_derivative_check needs both labels");
  finish(rep.unit_derivative);
  rep.fraction_near_sqrt2 = static_cast<double>(near) / static_cast<double>(rep.pairs);
  return rep;
}

}  // namespace shiftlab
