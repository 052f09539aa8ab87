#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "highdim.hpp"
#include "margin.hpp"

namespace shiftlab {

// +e_0 against -e_0.
LabeledSet dots(std::size_t d);

// 2n random orthonormal vectors (Gram-Schmidt on seeded Gaussian draws);
// the first n are the positive class. Requires 2n <= d.
LabeledSet orth_vectors(std::size_t n, std::size_t d, std::uint64_t seed);

// Unit-norm sin/cos at integer frequencies k = 1..2n on the grid t/d; odd k
// are the positive class, even k the negative one. Requires 4n < d.
LabeledSet orth_frequencies(std::size_t n, std::size_t d);

// x_i^j = p c_j + r_i^j with c_1, c_2, r_i^j mutually orthonormal; class 1 is
// positive. Requires 2n + 2 <= d and p >= 0.
LabeledSet common_component(std::size_t n, std::size_t d, double p, std::uint64_t seed);

// The shared directions (c_1, c_2) used by common_component for the same seed.
std::vector<std::vector<double>> common_component_centres(std::size_t n, std::size_t d,
                                                          std::uint64_t seed);

GaussianDataset gaussian(std::size_t n, std::size_t d, std::uint64_t seed);

// k orthonormal vectors in R^d from seeded Gaussian draws (modified
// Gram-Schmidt, two passes).
std::vector<std::vector<double>> random_orthonormal(std::size_t k, std::size_t d,
                                                    std::uint64_t seed);

// CSV with header "# shiftlab-dataset v1 d=<d>", then one row per signal:
// d values then the label.
void write_dataset_csv(const LabeledSet& data, std::ostream& out);
LabeledSet read_dataset_csv(std::istream& in);

}  // namespace shiftlab
