#include "signals.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "error.hpp"

namespace shiftlab {

Signal::Signal(std::vector<double> values) : values_(std::move(values)) {
  require(!values_.empty(), ErrorCode::kInvalidArgument,
          "signal must have dimension >= 1");
  for (double v : values_) {
    require(std::isfinite(v), ErrorCode::kInvalidArgument,
            "signal values must be finite");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::kShapeMismatch,
          "dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Signal circular_shift(const Signal& x, std::size_t s) {
  const std::size_t d = x.dim();
  require(s < d, ErrorCode::kInvalidArgument,
          "shift " + std::to_string(s) + " out of range for d=" +
              std::to_string(d));
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = x[(i + s) % d];
  return Signal(std::move(out));
}

double dc_component(std::span<const double> x) {
  const double sum = std::accumulate(x.begin(), x.end(), 0.0);
  return sum / std::sqrt(static_cast<double>(x.size()));
}

std::vector<Signal> shift_orbit(const Signal& x) {
  std::vector<Signal> orbit;
  orbit.reserve(x.dim());
  for (std::size_t s = 0; s < x.dim(); ++s) orbit.push_back(circular_shift(x, s));
  return orbit;
}

std::vector<std::vector<double>> cyclic_patches(std::span<const double> x,
                                                std::size_t q) {
  const std::size_t d = x.size();
  require(q >= 1 && q <= d, ErrorCode::kInvalidArgument,
          "patch length q=" + std::to_string(q) + " must lie in [1, " +
              std::to_string(d) + "]");
  std::vector<std::vector<double>> patches(d, std::vector<double>(q));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < q; ++k) patches[i][k] = x[(i + k) % d];
  }
  return patches;
}

Signal circular_convolve(std::span<const double> w, const Signal& x) {
  const std::size_t d = x.dim();
  const std::size_t q = w.size();
  require(q >= 1 && q <= d, ErrorCode::kInvalidArgument,
          "filter length must lie in [1, d]");
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < q; ++k) acc += w[k] * x[(i + k) % d];
    out[i] = acc;
  }
  return Signal(std::move(out));
}

}  // namespace shiftlab
