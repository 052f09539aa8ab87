#include "margin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "error.hpp"

namespace shiftlab {

LabeledSet::LabeledSet(std::vector<Signal> pos, std::vector<Signal> neg)
    : pos_(std::move(pos)), neg_(std::move(neg)) {
  require(!pos_.empty() && !neg_.empty(), ErrorCode::kInvalidArgument,
          "labeled set needs at least one signal per class");
  const std::size_t d = pos_.front().dim();
  for (const auto* cls : {&pos_, &neg_}) {
    for (const Signal& s : *cls) {
      require(s.dim() == d, ErrorCode::kShapeMismatch,
              "labeled set signals must share one dimension");
    }
  }
}

const Signal& LabeledSet::point(std::size_t i) const {
  require(i < size(), ErrorCode::kInvalidArgument, "point index out of range");
  return i < pos_.size() ? pos_[i] : neg_[i - pos_.size()];
}

SeparatorReport orbit_margin(const LabeledSet& data) {
  const std::size_t d = data.dim();
  // The DC component is shift invariant, so the orbit extremes are the
  // extremes over the original signals.
  auto dc_range = [](const std::vector<Signal>& xs) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Signal& x : xs) {
      const double v = dc_component(x.values());
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return std::pair{lo, hi};
  };
  const auto [pos_lo, pos_hi] = dc_range(data.pos());
  const auto [neg_lo, neg_hi] = dc_range(data.neg());

  SeparatorReport report;
  const double unit = 1.0 / std::sqrt(static_cast<double>(d));
  report.normal.assign(d, unit);
  if (neg_hi < pos_lo) {
    report.separable = true;
    report.orientation = 1;
    report.margin = pos_lo - neg_hi;
    report.threshold = neg_hi + report.margin / 2.0;
  } else if (pos_hi < neg_lo) {
    report.separable = true;
    report.orientation = -1;
    report.margin = neg_lo - pos_hi;
    for (double& v : report.normal) v = -v;
    report.threshold = -(pos_hi + report.margin / 2.0);
  }
  return report;
}

std::vector<std::vector<double>> expand_orbits(const std::vector<Signal>& xs) {
  std::vector<std::vector<double>> out;
  for (const Signal& x : xs) {
    for (const Signal& s : shift_orbit(x)) out.push_back(s.vec());
  }
  return out;
}

double functional_gap(std::span<const double> normal,
                      const std::vector<std::vector<double>>& pos,
                      const std::vector<std::vector<double>>& neg) {
  double pos_min = std::numeric_limits<double>::infinity();
  double neg_max = -pos_min;
  for (const auto& p : pos) pos_min = std::min(pos_min, dot(normal, p));
  for (const auto& q : neg) neg_max = std::max(neg_max, dot(normal, q));
  return pos_min - neg_max;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct PairIndex {
  std::size_t pos;
  std::size_t neg;
  bool operator==(const PairIndex&) const = default;
};

// Minimum-norm point of conv{p_i - q_j}. The difference set is never
// materialized; the linear minimization over it splits into one argmin over
// pos and one argmax over neg.
class MinNormPoint {
 public:
  MinNormPoint(const MatrixXd& pos, const MatrixXd& neg, std::size_t max_iter)
      : pos_(pos), neg_(neg), max_iter_(max_iter) {}

  VectorXd solve() {
    init();
    double scale = 0.0;
    for (Eigen::Index i = 0; i < pos_.rows(); ++i) {
      for (Eigen::Index j = 0; j < neg_.rows(); ++j) {
        scale = std::max(scale, (pos_.row(i) - neg_.row(j)).squaredNorm());
      }
    }
    const double gap_tol = 1e-15 * std::max(scale, 1e-300);
    const double zero_tol = 1e-26 * std::max(scale, 1e-300);

    std::size_t iter = 0;
    while (true) {
      if (x_.squaredNorm() <= zero_tol) break;
      const PairIndex q = linear_oracle(x_);
      const VectorXd qv = vertex(q);
      if (x_.squaredNorm() - x_.dot(qv) <= gap_tol) break;
      if (std::find(corral_.begin(), corral_.end(), q) != corral_.end()) break;
      corral_.push_back(q);
      weights_.push_back(0.0);

      while (true) {
        require(++iter <= max_iter_, ErrorCode::kNotConverged,
                "max-margin oracle did not converge");
        const VectorXd alpha = affine_minimizer();
        if ((alpha.array() > 1e-14).all()) {
          for (std::size_t k = 0; k < weights_.size(); ++k) weights_[k] = alpha[k];
          break;
        }
        double theta = 1.0;
        for (std::size_t k = 0; k < weights_.size(); ++k) {
          if (alpha[k] <= 1e-14) {
            const double denom = weights_[k] - alpha[k];
            if (denom > 0.0) theta = std::min(theta, weights_[k] / denom);
          }
        }
        for (std::size_t k = 0; k < weights_.size(); ++k) {
          weights_[k] = theta * alpha[k] + (1.0 - theta) * weights_[k];
        }
        std::size_t write = 0;
        for (std::size_t k = 0; k < weights_.size(); ++k) {
          if (weights_[k] > 1e-14) {
            corral_[write] = corral_[k];
            weights_[write] = weights_[k];
            ++write;
          }
        }
        corral_.resize(write);
        weights_.resize(write);
        double total = 0.0;
        for (double w : weights_) total += w;
        for (double& w : weights_) w /= total;
      }
      x_ = combination();
    }
    return x_;
  }

 private:
  void init() {
    double best = std::numeric_limits<double>::infinity();
    PairIndex arg{0, 0};
    for (Eigen::Index i = 0; i < pos_.rows(); ++i) {
      for (Eigen::Index j = 0; j < neg_.rows(); ++j) {
        const double v = (pos_.row(i) - neg_.row(j)).squaredNorm();
        if (v < best) {
          best = v;
          arg = {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
        }
      }
    }
    corral_ = {arg};
    weights_ = {1.0};
    x_ = vertex(arg);
  }

  VectorXd vertex(PairIndex p) const {
    return (pos_.row(static_cast<Eigen::Index>(p.pos)) -
            neg_.row(static_cast<Eigen::Index>(p.neg)))
        .transpose();
  }

  PairIndex linear_oracle(const VectorXd& x) const {
    const VectorXd pv = pos_ * x;
    const VectorXd nv = neg_ * x;
    Eigen::Index i = 0;
    Eigen::Index j = 0;
    pv.minCoeff(&i);
    nv.maxCoeff(&j);
    return {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
  }

  // argmin ||S a|| subject to sum(a) = 1, via the bordered normal equations.
  VectorXd affine_minimizer() const {
    const auto k = static_cast<Eigen::Index>(corral_.size());
    MatrixXd s(pos_.cols(), k);
    for (Eigen::Index c = 0; c < k; ++c) s.col(c) = vertex(corral_[c]);
    MatrixXd system = MatrixXd::Zero(k + 1, k + 1);
    system.topLeftCorner(k, k) = s.transpose() * s;
    system.topRightCorner(k, 1).setOnes();
    system.bottomLeftCorner(1, k).setOnes();
    VectorXd rhs = VectorXd::Zero(k + 1);
    rhs[k] = 1.0;
    const VectorXd sol = system.fullPivLu().solve(rhs);
    return sol.head(k);
  }

  VectorXd combination() const {
    VectorXd x = VectorXd::Zero(pos_.cols());
    for (std::size_t k = 0; k < corral_.size(); ++k) {
      x += weights_[k] * vertex(corral_[k]);
    }
    return x;
  }

  const MatrixXd& pos_;
  const MatrixXd& neg_;
  std::size_t max_iter_;
  std::vector<PairIndex> corral_;
  std::vector<double> weights_;
  VectorXd x_;
};

MatrixXd to_matrix(const std::vector<std::vector<double>>& rows, std::size_t d) {
  MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].size() == d, ErrorCode::kShapeMismatch,
            "oracle points must share one dimension");
    for (std::size_t k = 0; k < d; ++k) {
      require(std::isfinite(rows[i][k]), ErrorCode::kInvalidArgument,
              "oracle points must be finite");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  return m;
}

}  // namespace

SeparatorReport oracle_max_margin(const std::vector<std::vector<double>>& pos,
                                  const std::vector<std::vector<double>>& neg,
                                  const OracleOptions& options) {
  require(!pos.empty() && !neg.empty(), ErrorCode::kInvalidArgument,
          "oracle needs points in both classes");
  const std::size_t total = pos.size() + neg.size();
  require(total <= options.max_points, ErrorCode::kInvalidArgument,
          "oracle size bound exceeded: " + std::to_string(total) + " points > " +
              std::to_string(options.max_points));
  const std::size_t d = pos.front().size();
  require(d >= 1 && d <= options.max_dim, ErrorCode::kInvalidArgument,
          "oracle dimension bound exceeded: d=" + std::to_string(d));

  const MatrixXd p = to_matrix(pos, d);
  const MatrixXd q = to_matrix(neg, d);
  const VectorXd x = MinNormPoint(p, q, options.max_iterations).solve();

  SeparatorReport report;
  const double len = x.norm();
  report.normal.assign(d, 0.0);
  if (len == 0.0) return report;
  for (std::size_t k = 0; k < d; ++k) {
    report.normal[k] = x[static_cast<Eigen::Index>(k)] / len;
  }
  const double gap = functional_gap(report.normal, pos, neg);
  double scale = 0.0;
  for (const auto* cls : {&pos, &neg}) {
    for (const auto& v : *cls) scale = std::max(scale, norm(v));
  }
  if (gap <= 1e-12 * std::max(scale, 1.0)) {
    report.normal.assign(d, 0.0);
    return report;
  }
  double pos_min = std::numeric_limits<double>::infinity();
  for (const auto& v : pos) pos_min = std::min(pos_min, dot(report.normal, v));
  report.separable = true;
  report.margin = gap;
  report.threshold = pos_min - gap / 2.0;
  const double dc_normal = dc_component(report.normal);
  report.orientation = dc_normal > 0.0 ? 1 : (dc_normal < 0.0 ? -1 : 0);
  return report;
}

bool max_margin_normal_unique(std::span<const double> normal,
                              const std::vector<std::vector<double>>& pos,
                              const std::vector<std::vector<double>>& neg,
                              double step) {
  const std::size_t d = normal.size();
  const double base = functional_gap(normal, pos, neg);
  std::vector<double> trial(d);
  for (std::size_t axis = 0; axis < d; ++axis) {
    // Component of e_axis orthogonal to the normal.
    std::vector<double> u(d, 0.0);
    u[axis] = 1.0;
    const double along = normal[axis];
    for (std::size_t k = 0; k < d; ++k) u[k] -= along * normal[k];
    const double len = norm(u);
    if (len < 1e-9) continue;
    for (double sign : {1.0, -1.0}) {
      for (std::size_t k = 0; k < d; ++k) trial[k] = normal[k] + sign * step * u[k] / len;
      const double tlen = norm(trial);
      for (double& v : trial) v /= tlen;
      if (functional_gap(trial, pos, neg) >= base) return false;
    }
  }
  return true;
}

double shift_average(std::span<const double> w, const Signal& x) {
  require(w.size() == x.dim(), ErrorCode::kShapeMismatch,
          "shift_average: dimension mismatch");
  double acc = 0.0;
  for (const Signal& s : shift_orbit(x)) acc += dot(w, s.values());
  return acc / static_cast<double>(x.dim());
}

Classifier linear_classifier(std::vector<double> normal, double threshold) {
  require(!normal.empty(), ErrorCode::kInvalidArgument, "empty normal");
  require(norm(normal) > 0.0, ErrorCode::kInvalidArgument,
          "linear classifier needs a nonzero normal");
  Classifier c;
  c.name = "linear";
  c.dim = normal.size();
  c.affine = true;
  c.decision = [normal, threshold](std::span<const double> z) {
    return dot(normal, z) - threshold;
  };
  c.gradient = [normal](std::span<const double>) { return normal; };
  return c;
}

}  // namespace shiftlab
