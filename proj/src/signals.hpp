#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace shiftlab {

// A 1-D cyclic image of length d. Immutable once built; all values finite.
class Signal {
 public:
  explicit Signal(std::vector<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vec() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const Signal&) const = default;

 private:
  std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

// out[i] = x[(i + s) mod d]. Requires s < d.
Signal circular_shift(const Signal& x, std::size_t s);

// (1/sqrt(d)) * sum(x), i.e. the projection onto the unit constant vector.
double dc_component(std::span<const double> x);

// All d shifts in order of s; duplicates are kept.
std::vector<Signal> shift_orbit(const Signal& x);

// d patches of length q, patch i = (x_i, x_{i+1}, ..., x_{i+q-1}) with wrap-around.
std::vector<std::vector<double>> cyclic_patches(std::span<const double> x,
                                                std::size_t q);

// out[i] = <w, patch_i(x)>, the stride-1 circular correlation used by the
// conv nets. Shift-equivariant.
Signal circular_convolve(std::span<const double> w, const Signal& x);

}  // namespace shiftlab
