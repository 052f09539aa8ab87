#include "datagen.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "error.hpp"
#include "format.hpp"
#include "rng.hpp"
#include "signals.hpp"

namespace shiftlab {

namespace {

using Vec = std::vector<double>;

void unit(Vec& v) {
  const double n = norm(v);
  for (double& x : v) x /= n;
}

}  // namespace

LabeledSet dots(std::size_t d) {
  require(d >= 1, ErrorCode::kInvalidArgument, "dots needs d >= 1");
  Vec p(d, 0.0), q(d, 0.0);
  p[0] = 1.0;
  q[0] = -1.0;
  return LabeledSet({Signal(p)}, {Signal(q)});
}

std::vector<Vec> random_orthonormal(std::size_t k, std::size_t d, std::uint64_t seed) {
  require(k <= d, ErrorCode::kInvalidArgument,
          "cannot draw " + std::to_string(k) + " orthonormal vectors in dimension " +
              std::to_string(d));
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vec> basis;
  basis.reserve(k);
  while (basis.size() < k) {
    Vec v(d);
    for (double& x : v) x = normal(rng);
    const double before = norm(v);
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vec& b : basis) {
        const double c = dot(v, b);
        for (std::size_t i = 0; i < d; ++i) v[i] -= c * b[i];
      }
    }
    // Redraw the (probability zero) nearly dependent case.
    if (norm(v) <= 1e-8 * before) continue;
    unit(v);
    basis.push_back(std::move(v));
  }
  return basis;
}

LabeledSet orth_vectors(std::size_t n, std::size_t d, std::uint64_t seed) {
  require(n >= 1 && 2 * n <= d, ErrorCode::kInvalidArgument,
          "orth_vectors needs 1 <= n and 2n <= d");
  auto basis = random_orthonormal(2 * n, d, seed);
  std::vector<Signal> pos, neg;
  for (std::size_t i = 0; i < 2 * n; ++i) {
    (i < n ? pos : neg).emplace_back(std::move(basis[i]));
  }
  return LabeledSet(std::move(pos), std::move(neg));
}

LabeledSet orth_frequencies(std::size_t n, std::size_t d) {
  require(n >= 1 && 4 * n < d, ErrorCode::kInvalidArgument,
          "orth_frequencies needs 4n < d so every frequency stays below Nyquist");
  std::vector<Signal> pos, neg;
  const double dd = static_cast<double>(d);
  for (std::size_t k = 1; k <= 2 * n; ++k) {
    Vec s(d), c(d);
    for (std::size_t t = 0; t < d; ++t) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k * t % d) / dd;
      s[t] = std::sin(a);
      c[t] = std::cos(a);
    }
    unit(s);
    unit(c);
    auto& cls = k % 2 == 1 ? pos : neg;
    cls.emplace_back(std::move(s));
    cls.emplace_back(std::move(c));
  }
  return LabeledSet(std::move(pos), std::move(neg));
}

std::vector<Vec> common_component_centres(std::size_t n, std::size_t d, std::uint64_t seed) {
  require(n >= 1 && 2 * n + 2 <= d, ErrorCode::kInvalidArgument,
          "common_component needs 2n + 2 <= d");
  auto basis = random_orthonormal(2 * n + 2, d, seed);
  basis.resize(2);
  return basis;
}

LabeledSet common_component(std::size_t n, std::size_t d, double p, std::uint64_t seed) {
  require(n >= 1 && 2 * n + 2 <= d, ErrorCode::kInvalidArgument,
          "common_component needs 2n + 2 <= d");
  require(std::isfinite(p) && p >= 0.0, ErrorCode::kInvalidArgument,
          "common_component needs p >= 0");
  const auto basis = random_orthonormal(2 * n + 2, d, seed);
  std::vector<Signal> pos, neg;
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const Vec& r = basis[2 + j * n + i];
      Vec x(d);
      for (std::size_t t = 0; t < d; ++t) x[t] = p * basis[j][t] + r[t];
      (j == 0 ? pos : neg).emplace_back(std::move(x));
    }
  }
  return LabeledSet(std::move(pos), std::move(neg));
}

GaussianDataset gaussian(std::size_t n, std::size_t d, std::uint64_t seed) {
  return sample_gaussian_dataset(n, d, seed);
}

void write_dataset_csv(const LabeledSet& data, std::ostream& out) {
  out << "# shiftlab-dataset v1 d=" << data.dim() << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.point(i).values()) out << format_double(v) << ',';
    out << data.label(i) << '\n';
  }
  require(static_cast<bool>(out), ErrorCode::kIo, "dataset write failed");
}

LabeledSet read_dataset_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kData, "dataset: empty input");
  const std::string prefix = "# shiftlab-dataset v1 d=";
  require(line.rfind(prefix, 0) == 0, ErrorCode::kData, "dataset: missing header line");
  const auto d = static_cast<std::size_t>(parse_double(line.substr(prefix.size())));
  require(d >= 1, ErrorCode::kData, "dataset: bad dimension in header");

  std::vector<Signal> pos, neg;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    Vec values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) values.push_back(parse_double(cell));
    require(values.size() == d + 1, ErrorCode::kData,
            "dataset line " + std::to_string(lineno) + ": expected " + std::to_string(d + 1) +
                " columns");
    const double label = values.back();
    values.pop_back();
    require(label == 1.0 || label == -1.0, ErrorCode::kData,
            "dataset line " + std::to_string(lineno) + ": label must be 1 or -1");
    (label > 0 ? pos : neg).emplace_back(std::move(values));
  }
  return LabeledSet(std::move(pos), std::move(neg));
}

}  // namespace shiftlab
