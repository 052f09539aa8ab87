#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace shiftlab {

// Real-valued binary scorer g. Label is +1 iff g(z) >= 0 (ties go to +1).
struct Classifier {
  using Decision = std::function<double(std::span<const double>)>;
  using Gradient = std::function<std::vector<double>(std::span<const double>)>;

  std::string name;
  std::size_t dim = 0;
  Decision decision;
  Gradient gradient;  // empty when no analytic gradient exists
  // Set by constructors that produce g(z) = <a, z> + b; attacks still verify it.
  bool affine = false;

  double operator()(std::span<const double> z) const { return decision(z); }
  int label(std::span<const double> z) const {
    return decision(z) >= 0.0 ? 1 : -1;
  }
  bool has_gradient() const { return static_cast<bool>(gradient); }
};

inline int label_of(double g) { return g >= 0.0 ? 1 : -1; }

}  // namespace shiftlab
