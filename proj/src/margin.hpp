#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "classifier.hpp"
#include "signals.hpp"

namespace shiftlab {

// Two-class training set: `pos` carries label +1, `neg` label -1.
class LabeledSet {
 public:
  LabeledSet(std::vector<Signal> pos, std::vector<Signal> neg);

  const std::vector<Signal>& pos() const noexcept { return pos_; }
  const std::vector<Signal>& neg() const noexcept { return neg_; }
  std::size_t dim() const noexcept { return pos_.front().dim(); }
  std::size_t size() const noexcept { return pos_.size() + neg_.size(); }

  // Flat view: positives first, then negatives.
  const Signal& point(std::size_t i) const;
  int label(std::size_t i) const { return i < pos_.size() ? 1 : -1; }

 private:
  std::vector<Signal> pos_;
  std::vector<Signal> neg_;
};

// Hyperplane {z : <normal, z> = threshold}, oriented so the positive class
// lies on the side where <normal, z> - threshold >= 0.
struct SeparatorReport {
  bool separable = false;
  double margin = 0.0;
  std::vector<double> normal;
  double threshold = 0.0;
  // +1: positive class has the larger DC; -1: negative class does; 0: no gap.
  int orientation = 0;
};

// Margin of the full shift orbits, computed from DC components alone. A zero
// gap is reported as non-separable.
SeparatorReport orbit_margin(const LabeledSet& data);

struct OracleOptions {
  std::size_t max_points = 64;
  std::size_t max_dim = 64;
  std::size_t max_iterations = 10000;
};

// Hard-margin maximum-margin hyperplane for explicit point sets, found as the
// minimum-norm point of conv(pos) - conv(neg) with Wolfe's algorithm. Does
// not expand orbits.
SeparatorReport oracle_max_margin(const std::vector<std::vector<double>>& pos,
                                  const std::vector<std::vector<double>>& neg,
                                  const OracleOptions& options = {});

// Every point of every orbit, as raw vectors, for feeding the oracle.
std::vector<std::vector<double>> expand_orbits(const std::vector<Signal>& xs);

// min over pos of <n, p> minus max over neg of <n, q>.
double functional_gap(std::span<const double> normal,
                      const std::vector<std::vector<double>>& pos,
                      const std::vector<std::vector<double>>& neg);

// True when every perturbation normalize(n + step * u), u a unit direction
// orthogonal to n built from the coordinate axes, strictly lowers the gap.
bool max_margin_normal_unique(std::span<const double> normal,
                              const std::vector<std::vector<double>>& pos,
                              const std::vector<std::vector<double>>& neg,
                              double step = 1e-3);

// (1/d) * sum_s <w, x^s>; equals dc(w) * dc(x).
double shift_average(std::span<const double> w, const Signal& x);

// g(z) = <normal, z> - threshold.
Classifier linear_classifier(std::vector<double> normal, double threshold);

}  // namespace shiftlab
