#include <doctest.h>

#include <cmath>
#include <random>

#include "error.hpp"
#include "oracles.hpp"
#include "signals.hpp"

using namespace shiftlab;
using V = std::vector<double>;

TEST_SUITE("signals") {

TEST_CASE("circular_shift examples") {
  const Signal x(V{1, 2, 3, 4});
  CHECK(circular_shift(x, 1).vec() == V{2, 3, 4, 1});
  CHECK(circular_shift(x, 0).vec() == V{1, 2, 3, 4});
  CHECK(circular_shift(x, 3).vec() == V{4, 1, 2, 3});
  CHECK_THROWS_AS(circular_shift(x, 4), Error);
}

TEST_CASE("signal rejects empty and non-finite values") {
  CHECK_THROWS_AS(Signal(V{}), Error);
  CHECK_THROWS_AS(Signal(V{1.0, NAN}), Error);
  CHECK_THROWS_AS(Signal(V{INFINITY}), Error);
}

TEST_CASE("dc_component examples") {
  CHECK(dc_component(V{1, 0, 0, 0}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(dc_component(V{1, 1, 1, 1}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(dc_component(V{1, -1, 0, 0}) == 0.0);
}

TEST_CASE("shift_orbit examples") {
  auto orbit_values = [](const Signal& x) {
    std::vector<V> out;
    for (const auto& s : shift_orbit(x)) out.push_back(s.vec());
    return out;
  };
  CHECK(orbit_values(Signal(V{1, 0})) == std::vector<V>{{1, 0}, {0, 1}});
  CHECK(orbit_values(Signal(V{2.5, 2.5})) == std::vector<V>{{2.5, 2.5}, {2.5, 2.5}});
  CHECK(orbit_values(Signal(V{1, 0, 0})) == std::vector<V>{{1, 0, 0}, {0, 0, 1}, {0, 1, 0}});
}

TEST_CASE("cyclic_patches examples") {
  const V x{1, 2, 3, 4};
  CHECK(cyclic_patches(x, 2) == std::vector<V>{{1, 2}, {2, 3}, {3, 4}, {4, 1}});
  CHECK(cyclic_patches(x, 1) == std::vector<V>{{1}, {2}, {3}, {4}});
  CHECK(cyclic_patches(V{1, 2, 3}, 3) == std::vector<V>{{1, 2, 3}, {2, 3, 1}, {3, 1, 2}});
  CHECK_THROWS_AS(cyclic_patches(x, 0), Error);
  CHECK_THROWS_AS(cyclic_patches(x, 5), Error);
}

TEST_CASE("circular_convolve examples") {
  CHECK(circular_convolve(V{1}, Signal(V{3, 4, 5})).vec() == V{3, 4, 5});
  CHECK(circular_convolve(V{1, 1}, Signal(V{1, 0, 0, 0})).vec() == V{1, 0, 0, 1});
  CHECK(circular_convolve(V{0, 0, 0}, Signal(V{3, 4, 5, 6})).vec() == V{0, 0, 0, 0});
}

TEST_CASE("properties on random signals") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const std::size_t d = 1 + t % 13;
    const Signal x(oracle::gaussian(d, rng));
    for (std::size_t s = 0; s < d; ++s) {
      const Signal y = circular_shift(x, s);
      // Entries are permuted, not recomputed.
      V a = x.vec(), b = y.vec();
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      CHECK(a == b);
      CHECK(dc_component(y.values()) == doctest::Approx(dc_component(x.values())).epsilon(1e-13));
      CHECK(norm(y.values()) == doctest::Approx(norm(x.values())).epsilon(1e-14));
      // Shift composition.
      CHECK(circular_shift(y, (d - s) % d) == x);
    }
    const std::size_t q = 1 + t % d;
    const V w = oracle::gaussian(q, rng);
    const Signal conv = circular_convolve(w, x);
    for (std::size_t i = 0; i < d; ++i)
      CHECK(conv[i] == doctest::Approx(oracle::dot(w, oracle::patch(x.vec(), i, q))).epsilon(1e-12));
  }
}

}  // TEST_SUITE
