#include <doctest.h>

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "datagen.hpp"
#include "error.hpp"
#include "oracles.hpp"

using namespace shiftlab;
using V = std::vector<double>;

namespace {

std::vector<V> all_points(const LabeledSet& s) {
  std::vector<V> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back(s.point(i).vec());
  return out;
}

double gram_identity_error(const std::vector<V>& pts) {
  double e = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      e = std::max(e, std::abs(oracle::dot(pts[i], pts[j]) - (i == j ? 1.0 : 0.0)));
  return e;
}

// Numerical rank of the matrix whose rows are the full shift orbits of xs.
Eigen::Index orbit_rank(const std::vector<Signal>& xs) {
  const std::size_t d = xs.front().dim();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size() * d), static_cast<Eigen::Index>(d));
  Eigen::Index r = 0;
  for (const auto& x : xs)
    for (const auto& s : shift_orbit(x)) {
      for (std::size_t c = 0; c < d; ++c) m(r, static_cast<Eigen::Index>(c)) = s[c];
      ++r;
    }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > 1e-8 * sv(0);
  return rank;
}

}  // namespace

TEST_SUITE("datagen") {

TEST_CASE("dots") {
  const LabeledSet s = dots(4);
  CHECK(s.pos()[0].vec() == V{1, 0, 0, 0});
  CHECK(s.neg()[0].vec() == V{-1, 0, 0, 0});
  CHECK(dc_component(s.pos()[0].values()) == doctest::Approx(0.5));
  CHECK(dc_component(s.neg()[0].values()) == doctest::Approx(-0.5));
  CHECK(orbit_margin(s).margin == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("orth_vectors") {
  CHECK(gram_identity_error(all_points(orth_vectors(8, 40, 1))) < 1e-10);
  const LabeledSet small = orth_vectors(1, 2, 2);
  CHECK(gram_identity_error(all_points(small)) < 1e-12);
  CHECK(orbit_rank({orth_vectors(4, 64, 3).pos()[0]}) > 4);
  CHECK_THROWS_AS(orth_vectors(3, 5, 0), Error);
  CHECK(all_points(orth_vectors(3, 10, 9)) == all_points(orth_vectors(3, 10, 9)));
}

TEST_CASE("orth_frequencies") {
  const LabeledSet s = orth_frequencies(3, 64);
  CHECK(s.pos().size() == 6);
  CHECK(gram_identity_error(all_points(s)) < 1e-10);

  // Shifts of the k = 1 sine stay in span{sin_1, cos_1}.
  const LabeledSet two = orth_frequencies(2, 64);
  const Signal& sin1 = two.pos()[0];
  const Signal& cos1 = two.pos()[1];
  for (std::size_t sft = 0; sft < 64; ++sft) {
    const V y = circular_shift(sin1, sft).vec();
    const double a = oracle::dot(y, sin1.vec()), b = oracle::dot(y, cos1.vec());
    double res = 0.0;
    for (std::size_t i = 0; i < 64; ++i) res = std::max(res, std::abs(y[i] - a * sin1[i] - b * cos1[i]));
    CHECK(res < 1e-10);
  }
  CHECK(orbit_rank(two.pos()) == 4);
  CHECK_FALSE(orbit_margin(s).separable);
  CHECK_THROWS_AS(orth_frequencies(4, 16), Error);
}

TEST_CASE("common_component") {
  const double p = 0.3;
  const LabeledSet s = common_component(6, 32, p, 4);
  const auto c = common_component_centres(6, 32, 4);
  V w(32);
  for (int i = 0; i < 32; ++i) w[i] = (c[0][i] - c[1][i]) / std::sqrt(2.0);
  std::vector<V> pos, neg;
  for (const auto& x : s.pos()) pos.push_back(x.vec());
  for (const auto& x : s.neg()) neg.push_back(x.vec());
  CHECK(std::abs(functional_gap(w, pos, neg) - std::sqrt(2.0) * p) <= 1e-12);
  for (std::size_t i = 0; i < s.size(); ++i)
    CHECK(norm(s.point(i).values()) == doctest::Approx(std::sqrt(1 + p * p)).epsilon(1e-14));

  const LabeledSet z = common_component(6, 32, 0.0, 4);
  CHECK(gram_identity_error(all_points(z)) < 1e-10);
  std::vector<V> zp, zn;
  for (const auto& x : z.pos()) zp.push_back(x.vec());
  for (const auto& x : z.neg()) zn.push_back(x.vec());
  CHECK(std::abs(functional_gap(w, zp, zn)) < 1e-12);
  CHECK_THROWS_AS(common_component(6, 13, 0.3, 4), Error);
  CHECK_THROWS_AS(common_component(6, 32, -0.1, 4), Error);
}

TEST_CASE("dataset CSV round trip") {
  const LabeledSet s = orth_vectors(3, 8, 5);
  std::stringstream io;
  write_dataset_csv(s, io);
  const LabeledSet back = read_dataset_csv(io);
  CHECK(all_points(back) == all_points(s));
  CHECK(back.pos().size() == 3);

  std::stringstream bad("# shiftlab-dataset v1 d=2\n1,2,1\n3,x,-1\n");
  CHECK_THROWS_AS(read_dataset_csv(bad), Error);
}

}  // TEST_SUITE
