#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "datagen.hpp"
#include "error.hpp"
#include "kernels.hpp"
#include "oracles.hpp"

using namespace shiftlab;
using V = std::vector<double>;

TEST_SUITE("kernels") {

TEST_CASE("ntk_fc examples") {
  const V x{0.6, 0.8};
  CHECK(ntk_fc(x, x) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(std::abs(ntk_fc(V{-0.6, -0.8}, x)) < 1e-15);
  CHECK(ntk_fc(V{0.8, -0.6}, x) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
  CHECK(ntk_fc(V{0, 0}, x) == 0.0);
  // Frozen value: 1/pi = 0.31830988618379069.
  CHECK(ntk_fc(V{1, 0}, V{0, 1}) == 0.31830988618379069);
}

TEST_CASE("ntk_fc against the atan2 reference") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 300; ++t) {
    const std::size_t d = 1 + t % 9;
    const V z = oracle::gaussian(d, rng), x = oracle::gaussian(d, rng);
    CHECK(ntk_fc(z, x) == doctest::Approx(oracle::ntk(z, x)).epsilon(1e-11));
  }
  // Nearly parallel inputs, where acos without clamping would produce NaN.
  const V x{1.0, 1e-9}, z{1.0, 1e-9 + 1e-17};
  CHECK(std::isfinite(ntk_fc(z, x)));
}

TEST_CASE("cntk_gap examples") {
  CHECK(cntk_gap(V{1, 0}, V{1, 0}, 1) == doctest::Approx(0.5).epsilon(1e-15));
  const V dot4{1, 0, 0, 0};
  double brute = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      brute += oracle::ntk(oracle::patch(dot4, i, 4), oracle::patch(dot4, j, 4));
  CHECK(cntk_gap(dot4, dot4, 4) == doctest::Approx(brute / 16.0).epsilon(1e-14));
  CHECK(cntk_gap(dot4, dot4, 0) == cntk_gap(dot4, dot4, 4));
  CHECK_THROWS_AS(cntk_gap(V{1, 0}, V{1, 0, 0}, 1), Error);
  CHECK_THROWS_AS(cntk_gap(V{1, 0}, V{1, 0}, 3), Error);
}

TEST_CASE("cntk_gap against the brute-force patch sum") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 60; ++t) {
    const std::size_t d = 2 + t % 8, q = 1 + t % d;
    const V z = oracle::gaussian(d, rng), x = oracle::gaussian(d, rng);
    CHECK(cntk_gap(z, x, q) == doctest::Approx(oracle::cntk(z, x, q)).epsilon(1e-11));
    CHECK(cntk_gap(z, x, d) == doctest::Approx(oracle::cntk(z, x, d)).epsilon(1e-11));
  }
}

TEST_CASE("kernel properties") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t d = 2 + t % 12;
    const V z = oracle::gaussian(d, rng), x = oracle::gaussian(d, rng);
    V nx(x);
    for (double& v : nx) v = -v;
    CHECK(std::abs(ntk_fc(z, x) - ntk_fc(x, z)) <= 1e-12);
    CHECK(std::abs(ntk_fc(z, x) - ntk_fc(z, nx) - 2.0 * oracle::dot(z, x)) <= 1e-10);
  }
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = 3 + t % 6, q = 1 + t % d;
    const Signal z(oracle::gaussian(d, rng)), x(oracle::gaussian(d, rng));
    const double base = cntk_gap(z.values(), x.values(), q);
    for (std::size_t s = 0; s < d; ++s)
      for (std::size_t u = 0; u < d; ++u)
        CHECK(std::abs(cntk_gap(circular_shift(z, s).values(), circular_shift(x, u).values(), q) -
                       base) <= 1e-10);
  }
}

TEST_CASE("gram examples") {
  const Signal x(V{0.6, 0.8}), nx(V{-0.6, -0.8});
  const auto g = gram(KernelKind::fc_ntk(), {x, nx});
  CHECK(g.entries(0, 0) == doctest::Approx(2.0));
  CHECK(std::abs(g.entries(0, 1)) < 1e-15);
  CHECK(g.entries(1, 1) == doctest::Approx(2.0));
  CHECK(gram(KernelKind::fc_ntk(), {x}).entries(0, 0) == doctest::Approx(2.0));
  const auto c = gram(KernelKind::cntk_gap(1), {Signal(V{1, 0}), Signal(V{0, 1})});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(c.entries(i, j) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("gram symmetry and PSD on random sets") {
  std::mt19937_64 rng(6);
  for (auto kind : {KernelKind::fc_ntk(), KernelKind::cntk_gap(2), KernelKind::cntk_gap()}) {
    std::vector<Signal> pts;
    for (int i = 0; i < 10; ++i) pts.emplace_back(oracle::gaussian(6, rng));
    const auto g = gram(kind, pts);
    CHECK((g.entries - g.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g.entries).eigenvalues()(0);
    CHECK(lmin >= -1e-8 * g.entries.diagonal().maxCoeff());
  }
}

TEST_CASE("ridge_fit examples") {
  const Signal x(V{0.6, 0.8}), nx(V{-0.6, -0.8});
  const V y{1, -1};
  const auto m = ridge_fit(KernelKind::fc_ntk(), {x, nx}, y, 0.0);
  CHECK(m.coefficients(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m.coefficients(1) == doctest::Approx(-0.5).epsilon(1e-14));

  const auto big = ridge_fit(KernelKind::fc_ntk(), {x, nx}, y, 1e8);
  CHECK(big.coefficients(0) == doctest::Approx(1e-8).epsilon(1e-6));
  CHECK(std::abs(big.predict(x.values())) < 1e-7);

  // Duplicate points make H singular; ridge 0 must refuse rather than pseudo-invert.
  try {
    ridge_fit(KernelKind::fc_ntk(), {x, x}, y, 0.0);
    FAIL("expected a singular-system error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSingular);
  }
  CHECK_THROWS_AS(ridge_fit(KernelKind::fc_ntk(), {x, nx}, y, -1.0), Error);
  CHECK_THROWS_AS(ridge_fit(KernelKind::fc_ntk(), {x, nx}, V{1}, 0.0), Error);
}

TEST_CASE("ridge_fit interpolates and converges as ridge goes to zero") {
  std::mt19937_64 rng(7);
  std::vector<Signal> pts;
  V y;
  for (int i = 0; i < 12; ++i) {
    pts.emplace_back(oracle::gaussian(10, rng));
    y.push_back(i % 3 ? 1.0 : -1.0);
  }
  for (auto kind : {KernelKind::fc_ntk(), KernelKind::cntk_gap(4)}) {
    const auto exact = ridge_fit(kind, pts, y, 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i)
      CHECK(std::abs(exact.predict(pts[i].values()) - y[i]) <= 1e-8);
    const V probe = oracle::gaussian(10, rng);
    double prev = INFINITY;
    for (double lam : {1e-1, 1e-3, 1e-5, 1e-7}) {
      const double gap = std::abs(ridge_fit(kind, pts, y, lam).predict(probe) - exact.predict(probe));
      CHECK(gap <= prev);
      prev = gap;
    }
    CHECK(prev < 1e-4);
  }
}

TEST_CASE("antipodal_ntk_classifier examples") {
  const Classifier g = antipodal_ntk_classifier(Signal(V{1, 0}));
  CHECK(g(V{0.5, 0.7}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g(V{1, 0}) == doctest::Approx(1.0));
  CHECK(g(V{-1, 0}) == doctest::Approx(-1.0));
  CHECK(g(V{0, 3}) == 0.0);
  CHECK(g.affine);
}

TEST_CASE("antipodal_cntk_classifier examples") {
  const std::size_t d = 16;
  const Signal x = dots(d).pos()[0];
  const Classifier g = antipodal_cntk_classifier(x);
  CHECK(g.label(V(d, 0.1)) == 1);
  V z(d, 0.0);
  z[0] = 1.0;
  z[1] = -1.0;
  CHECK(std::abs(g(z)) < 1e-15);

  // Sign agreement with the numerically fitted kernel model.
  V nx(x.vec());
  for (double& v : nx) v = -v;
  const auto model = ridge_fit(KernelKind::cntk_gap(), {x, Signal(nx)}, V{1, -1}, 0.0);
  std::mt19937_64 rng(8);
  int agree = 0;
  for (int t = 0; t < 1000; ++t) {
    const V p = oracle::gaussian(d, rng);
    agree += label_of(model.predict(p)) == g.label(p);
    CHECK(model.predict(p) == doctest::Approx(g(p)).epsilon(1e-8).scale(1.0));
  }
  CHECK(agree == 1000);

  // Zero-DC training point: the closed form is undefined.
  CHECK_THROWS_AS(antipodal_cntk_classifier(Signal(V{1, -1, 0, 0})), Error);
}

TEST_CASE("two_point_sign_rule examples") {
  std::mt19937_64 rng(9);
  const Signal x1(V{0.6, 0.8, 0.0}), x2(V{-0.6, -0.8, 0.0});
  for (int t = 0; t < 100; ++t) {
    const V z = oracle::gaussian(3, rng);
    const double s = oracle::dot(z, x1.vec());
    CHECK(two_point_sign_rule(KernelKind::fc_ntk(), x1, x2, z) == (s > 0 ? 1 : -1));
  }
  CHECK(two_point_sign_rule(KernelKind::fc_ntk(), x1, x2, x1.values()) == 1);
  CHECK(two_point_sign_rule(KernelKind::fc_ntk(), x1, x2, V{0, 0, 1}) == 0);
}

}  // TEST_SUITE
