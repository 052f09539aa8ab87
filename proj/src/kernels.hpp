#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "classifier.hpp"
#include "signals.hpp"

namespace shiftlab {

// FC_NTK, or CNTK_GAP with cyclic patch length q. q == 0 means "q = d",
// resolved against the input dimension at evaluation time.
struct KernelKind {
  enum class Variant { kFcNtk, kCntkGap };
  Variant variant = Variant::kFcNtk;
  std::size_t q = 0;

  static KernelKind fc_ntk() { return {Variant::kFcNtk, 0}; }
  static KernelKind cntk_gap(std::size_t q = 0) { return {Variant::kCntkGap, q}; }
};

// Two-layer bias-free ReLU NTK:
//   k(z, x) = (1/pi) (2 <z,x> (pi - phi) + |z| |x| sin(phi)),
// with the cosine clamped to [-1, 1] and k = 0 when either input is zero.
double ntk_fc(std::span<const double> z, std::span<const double> x);

// Same kernel from precomputed squared norms and inner product.
double ntk_fc_from_moments(double z_sq, double x_sq, double zx);

// CNTK with global average pooling: mean of ntk_fc over all d^2 pairs of
// cyclic patches of length q.
double cntk_gap(std::span<const double> z, std::span<const double> x, std::size_t q);

double kernel(const KernelKind& kind, std::span<const double> z,
              std::span<const double> x);

struct GramMatrix {
  Eigen::MatrixXd entries;
  KernelKind kind;
  std::vector<Signal> points;
};

// Entries are assembled row-major, each independently. Throws kData when
// the result is not symmetric to 1e-12 or has an eigenvalue below
// -1e-8 * max diagonal.
GramMatrix gram(const KernelKind& kind, const std::vector<Signal>& points);

struct KernelModel {
  GramMatrix gram;
  Eigen::VectorXd coefficients;
  double ridge = 0.0;
  Eigen::VectorXd labels;

  double predict(std::span<const double> z) const;
};

// Largest accepted condition number for an unregularized (ridge = 0) solve.
inline constexpr double kMaxConditionNumber = 1e12;

// Solves (H + ridge I) alpha = y with a symmetric factorization. With
// ridge = 0 a condition number above kMaxConditionNumber is a kSingular
// error; no pseudo-inverse is substituted.
KernelModel ridge_fit(const KernelKind& kind, const std::vector<Signal>& points,
                      std::span<const double> labels, double ridge);

// Decision function of a fitted model (gradient by finite differences).
Classifier kernel_classifier(KernelModel model);

// Closed-form minimum-norm FC-NTK interpolant of {(x,+1), (-x,-1)}:
// g(z) = <z,x> / <x,x>.
Classifier antipodal_ntk_classifier(const Signal& x);

// Closed-form minimum-norm CNTK-GAP interpolant of {(x,+1), (-x,-1)}:
// g(z) = (2 c q / d^2) <z,1> <x,1>, c = 1 / (K(x,x) - K(x,-x)).
Classifier antipodal_cntk_classifier(const Signal& x, std::size_t q = 0);

// +1 if k(z,x1) > k(z,x2), -1 if smaller, 0 on a tie. Requires
// k(x1,x1) == k(x2,x2) to 1e-10 and an invertible 2x2 Gram.
int two_point_sign_rule(const KernelKind& kind, const Signal& x1, const Signal& x2,
                        std::span<const double> z);

}  // namespace shiftlab
