#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "error.hpp"

namespace shiftlab {

namespace {

std::size_t resolve_q(std::size_t q, std::size_t d) {
  std::size_t r = q == 0 ? d : q;
  require(r >= 1 && r <= d, ErrorCode::kInvalidArgument,
          "patch length q=" + std::to_string(q) + " out of range for d=" +
              std::to_string(d));
  return r;
}

double sum_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

}  // namespace

double ntk_fc_from_moments(double z_sq, double x_sq, double zx) {
  if (z_sq == 0.0 || x_sq == 0.0) return 0.0;
  // sqrt of the product (not product of sqrts) so that z == x gives c == 1.
  const double r = std::sqrt(z_sq * x_sq);
  const double c = std::clamp(zx / r, -1.0, 1.0);
  const double phi = std::acos(c);
  const double sin_phi = std::sqrt((1.0 - c) * (1.0 + c));
  return (2.0 * zx * (std::numbers::pi - phi) + r * sin_phi) / std::numbers::pi;
}

double ntk_fc(std::span<const double> z, std::span<const double> x) {
  require(z.size() == x.size(), ErrorCode::kShapeMismatch, "ntk_fc: dimension mismatch");
  const double z_sq = dot(z, z), x_sq = dot(x, x);
  if (z_sq == 0.0 || x_sq == 0.0) return 0.0;
  // |z||x| sin(phi) from the part of x orthogonal to z. Going through
  // acos(cos) loses half the digits when z and x are nearly (anti)parallel.
  const double zx = dot(z, x), t = zx / z_sq;
  double perp_sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = x[i] - t * z[i];
    perp_sq += e * e;
  }
  const double s = std::sqrt(z_sq * perp_sq);
  return (2.0 * zx * (std::numbers::pi - std::atan2(s, zx)) + s) / std::numbers::pi;
}

double cntk_gap(std::span<const double> z, std::span<const double> x, std::size_t q) {
  require(z.size() == x.size(), ErrorCode::kShapeMismatch, "cntk_gap: dimension mismatch");
  const std::size_t d = x.size();
  q = resolve_q(q, d);

  // Patch inner products, sums of q consecutive products with wrap-around.
  // P[i][j] = <patch_i(z), patch_j(x)>, patch norms from the squared signals.
  auto window = [&](std::span<const double> a, std::span<const double> b,
                    std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t t = 0; t < q; ++t) s += a[(i + t) % d] * b[(j + t) % d];
    return s;
  };

  std::vector<double> zsq(d), xsq(d);
  for (std::size_t i = 0; i < d; ++i) {
    zsq[i] = window(z, z, i, i);
    xsq[i] = window(x, x, i, i);
  }

  double total = 0.0;
  if (q == 1) {
    // Scalar patches are exactly parallel or antiparallel: 2ab or 0.
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) total += std::max(2.0 * z[i] * x[j], 0.0);
  } else if (q == d) {
    // Every patch is a rotation of the whole signal, so <patch_i(z), patch_j(x)>
    // depends only on (j - i) mod d.
    std::vector<double> cross(d);
    for (std::size_t o = 0; o < d; ++o) cross[o] = window(z, x, 0, o);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        total += ntk_fc_from_moments(zsq[i], xsq[j], cross[(j + d - i) % d]);
      }
    }
  } else {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        total += ntk_fc_from_moments(zsq[i], xsq[j], window(z, x, i, j));
      }
    }
  }
  return total / (static_cast<double>(d) * static_cast<double>(d));
}

double kernel(const KernelKind& kind, std::span<const double> z,
              std::span<const double> x) {
  require(z.size() == x.size(), ErrorCode::kShapeMismatch, "kernel: dimension mismatch");
  if (kind.variant == KernelKind::Variant::kFcNtk) return ntk_fc(z, x);
  return cntk_gap(z, x, kind.q);
}

GramMatrix gram(const KernelKind& kind, const std::vector<Signal>& points) {
  require(!points.empty(), ErrorCode::kInvalidArgument, "gram: no points");
  const std::size_t n = points.size();
  const std::size_t d = points.front().dim();
  for (const auto& p : points) {
    require(p.dim() == d, ErrorCode::kShapeMismatch, "gram: points differ in dimension");
  }
  if (kind.variant == KernelKind::Variant::kCntkGap) resolve_q(kind.q, d);

  GramMatrix g{Eigen::MatrixXd(n, n), kind, points};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      g.entries(i, j) = kernel(kind, points[i].values(), points[j].values());
    }
  }

  const double asym = (g.entries - g.entries.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-12, ErrorCode::kData,
          "gram: matrix not symmetric (max deviation " + std::to_string(asym) + ")");
  const double max_diag = g.entries.diagonal().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.entries, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  require(min_eig >= -1e-8 * max_diag, ErrorCode::kData,
          "gram: matrix not positive semidefinite (min eigenvalue " +
              std::to_string(min_eig) + ")");
  return g;
}

double KernelModel::predict(std::span<const double> z) const {
  double s = 0.0;
  for (std::size_t i = 0; i < gram.points.size(); ++i) {
    s += coefficients[static_cast<Eigen::Index>(i)] *
         kernel(gram.kind, z, gram.points[i].values());
  }
  return s;
}

KernelModel ridge_fit(const KernelKind& kind, const std::vector<Signal>& points,
                      std::span<const double> labels, double ridge) {
  require(std::isfinite(ridge) && ridge >= 0.0, ErrorCode::kInvalidArgument,
          "ridge_fit: ridge must be a nonnegative finite number");
  require(labels.size() == points.size(), ErrorCode::kShapeMismatch,
          "ridge_fit: label count differs from point count");

  KernelModel model;
  model.gram = gram(kind, points);
  model.ridge = ridge;
  const auto n = static_cast<Eigen::Index>(points.size());
  model.labels = Eigen::Map<const Eigen::VectorXd>(labels.data(), n);

  Eigen::MatrixXd a = model.gram.entries;
  a.diagonal().array() += ridge;

  if (ridge == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    require(lo > 0.0 && hi / lo <= kMaxConditionNumber, ErrorCode::kSingular,
            "ridge_fit: kernel matrix is singular at ridge 0 (condition estimate " +
                (lo > 0.0 ? std::to_string(hi / lo) : std::string("inf")) + ")");
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  require(ldlt.info() == Eigen::Success, ErrorCode::kSingular,
          "ridge_fit: factorization failed");
  model.coefficients = ldlt.solve(model.labels);
  require(model.coefficients.allFinite(), ErrorCode::kSingular,
          "ridge_fit: non-finite coefficients");
  return model;
}

Classifier kernel_classifier(KernelModel model) {
  Classifier c;
  c.name = model.gram.kind.variant == KernelKind::Variant::kFcNtk ? "ntk_ridge"
                                                                   : "cntk_ridge";
  c.dim = model.gram.points.front().dim();
  auto shared = std::make_shared<const KernelModel>(std::move(model));
  c.decision = [shared](std::span<const double> z) { return shared->predict(z); };
  return c;
}

Classifier antipodal_ntk_classifier(const Signal& x) {
  const double xx = dot(x.values(), x.values());
  require(xx > 0.0, ErrorCode::kInvalidArgument, "antipodal_ntk_classifier: zero signal");
  Classifier c;
  c.name = "ntk_antipodal";
  c.dim = x.dim();
  c.affine = true;
  auto xv = std::make_shared<const std::vector<double>>(x.vec());
  c.decision = [xv, xx](std::span<const double> z) { return dot(z, *xv) / xx; };
  c.gradient = [xv, xx](std::span<const double>) {
    std::vector<double> g(*xv);
    for (double& v : g) v /= xx;
    return g;
  };
  return c;
}

Classifier antipodal_cntk_classifier(const Signal& x, std::size_t q) {
  const std::size_t d = x.dim();
  q = resolve_q(q, d);
  const double x1 = sum_of(x.values());
  require(x1 != 0.0, ErrorCode::kSingular,
          "antipodal_cntk_classifier: <x,1> = 0 gives an identically zero classifier");

  std::vector<double> neg(x.vec());
  for (double& v : neg) v = -v;
  const double kxx = cntk_gap(x.values(), x.values(), q);
  const double kxn = cntk_gap(x.values(), neg, q);
  // Gram {{kxx, kxn}, {kxn, kxx}} is invertible iff kxx != |kxn|.
  require(kxx - kxn > 0.0 && kxx + kxn > 0.0, ErrorCode::kSingular,
          "antipodal_cntk_classifier: Gram of {x, -x} is singular");
  const double c = 1.0 / (kxx - kxn);
  const double dd = static_cast<double>(d);
  const double scale = 2.0 * c * static_cast<double>(q) / (dd * dd) * x1;

  Classifier out;
  out.name = "cntk_antipodal";
  out.dim = d;
  out.affine = true;
  out.decision = [scale](std::span<const double> z) { return scale * sum_of(z); };
  out.gradient = [scale, d](std::span<const double>) {
    return std::vector<double>(d, scale);
  };
  return out;
}

int two_point_sign_rule(const KernelKind& kind, const Signal& x1, const Signal& x2,
                        std::span<const double> z) {
  require(x1.dim() == x2.dim() && z.size() == x1.dim(), ErrorCode::kShapeMismatch,
          "two_point_sign_rule: dimension mismatch");
  const double k11 = kernel(kind, x1.values(), x1.values());
  const double k22 = kernel(kind, x2.values(), x2.values());
  require(std::abs(k11 - k22) <= 1e-10, ErrorCode::kInvalidArgument,
          "two_point_sign_rule: self-kernels differ");
  const double k12 = kernel(kind, x1.values(), x2.values());
  require(k11 - std::abs(k12) > 0.0, ErrorCode::kSingular,
          "two_point_sign_rule: Gram of {x1, x2} is singular");
  const double a = kernel(kind, z, x1.values());
  const double b = kernel(kind, z, x2.values());
  if (a > b) return 1;
  if (a < b) return -1;
  return 0;
}

}  // namespace shiftlab
