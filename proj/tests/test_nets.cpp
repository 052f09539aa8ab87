#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "attacks.hpp"
#include "datagen.hpp"
#include "error.hpp"
#include "nets.hpp"
#include "oracles.hpp"

using namespace shiftlab;
using V = std::vector<double>;

namespace {

FcNet fc(std::initializer_list<std::initializer_list<double>> w, V v) {
  FcNet n;
  n.w.resize(static_cast<Eigen::Index>(w.size()), static_cast<Eigen::Index>(w.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : w) {
    Eigen::Index c = 0;
    for (double x : row) n.w(r, c++) = x;
    ++r;
  }
  n.v = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  return n;
}

// A probe is near a kink when some hidden unit's preactivation is tiny.
bool near_kink(const FcNet& n, const V& x) {
  for (Eigen::Index r = 0; r < n.w.rows(); ++r) {
    double pre = 0.0;
    for (Eigen::Index c = 0; c < n.w.cols(); ++c) pre += n.w(r, c) * x[c];
    if (std::abs(pre) < 1e-3) return true;
  }
  return false;
}

bool near_kink(const ConvGapNet& n, const V& x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    FcNet row{n.w, n.v};
    if (near_kink(row, oracle::patch(x, i, n.patch()))) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("nets") {

TEST_CASE("fc_forward examples") {
  CHECK(fc_forward(fc({{1, 0}}, {1}), V{2, -3}) == 2.0);
  CHECK(fc_forward(fc({{-1, 0}}, {1}), V{2, 0}) == 0.0);
  CHECK(fc_forward(fc({{1, 0}, {0, 1}}, {1, 1}), V{1, 1}) == 2.0);
  CHECK_THROWS_AS(fc_forward(fc({{1, 0}}, {1}), V{1, 2, 3}), Error);
}

TEST_CASE("conv_forward examples") {
  ConvGapNet n{Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1), 4};
  CHECK(conv_forward(n, V{1, 0, 0, 0}) == 0.25);
  std::mt19937_64 rng(1);
  ConvGapNet z = init_normal_conv(8, 3, 5, 2);
  z.v.setZero();
  for (int t = 0; t < 5; ++t) CHECK(conv_forward(z, oracle::gaussian(8, rng)) == 0.0);
}

TEST_CASE("forward passes match the naive reference") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = 3 + t % 9;
    const FcNet f = init_normal_fc(d, 7, rng());
    const ConvGapNet c = init_normal_conv(d, 1 + t % d, 7, rng());
    const V x = oracle::gaussian(d, rng);
    CHECK(fc_forward(f, x) == doctest::Approx(oracle::fc_net(f.w, f.v, x)).epsilon(1e-12));
    CHECK(conv_forward(c, x) == doctest::Approx(oracle::conv_net(c.w, c.v, x)).epsilon(1e-12));
    // Classifier wraps forward bit for bit.
    CHECK(net_classifier(f)(x) == fc_forward(f, x));
    CHECK(net_classifier(c)(x) == conv_forward(c, x));
  }
}

TEST_CASE("conv nets are exactly shift invariant") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 4 + t % 20, q = 1 + t % d;
    const ConvGapNet n = init_normal_conv(d, q, 8, rng());
    const Signal x(oracle::gaussian(d, rng));
    const double f = conv_forward(n, x.values());
    for (std::size_t s = 0; s < d; ++s)
      CHECK(std::abs(conv_forward(n, circular_shift(x, s).values()) - f) <= 1e-9 * (1 + std::abs(f)));
  }
}

TEST_CASE("init_normal determinism and moments") {
  const FcNet a = init_normal_fc(10, 4, 99), b = init_normal_fc(10, 4, 99);
  CHECK(a.w == b.w);
  CHECK(a.v == b.v);
  CHECK_FALSE(init_normal_fc(10, 4, 100).w == a.w);

  const FcNet big = init_normal_fc(1000, 1000, 7);
  const double mean = big.w.mean();
  const double var = (big.w.array() - mean).square().mean();
  CHECK(mean > -0.01);
  CHECK(mean < 0.01);
  CHECK(var > 0.99);
  CHECK(var < 1.01);
}

TEST_CASE("antithetic init pairs units and starts at zero output") {
  const FcNet n = init_antithetic_fc(6, 8, 5);
  for (Eigen::Index k = 0; k < 8; k += 2) {
    CHECK(n.w.row(k) == n.w.row(k + 1));
    CHECK(n.v(k) == -n.v(k + 1));
  }
  std::mt19937_64 rng(4);
  CHECK(std::abs(fc_forward(n, oracle::gaussian(6, rng))) < 1e-15);
  CHECK_THROWS_AS(init_antithetic_fc(6, 7, 5), Error);
  const ConvGapNet c = init_antithetic_conv(8, 3, 4, 6);
  CHECK(std::abs(conv_forward(c, oracle::gaussian(8, rng))) < 1e-15);
}

TEST_CASE("input and parameter gradients match central differences") {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 3 + t % 8;
    const FcNet f = init_normal_fc(d, 6, rng());
    const ConvGapNet c = init_normal_conv(d, 1 + t % d, 6, rng());
    const V x = oracle::gaussian(d, rng);
    const double h = 1e-6;
    if (!near_kink(f, x)) {
      const V g = fc_input_gradient(f, x);
      const V fd = finite_difference_gradient(net_classifier(f), x, h);
      for (std::size_t i = 0; i < d; ++i)
        CHECK(std::abs(g[i] - fd[i]) <= 1e-4 * (oracle::dot(g, g) > 0 ? std::sqrt(oracle::dot(g, g)) : 1.0));
      // Parameter gradient, first-layer entry (0,0) and output weight 0.
      const ParamGradient pg = fc_param_gradient(f, x);
      FcNet up = f, dn = f;
      up.w(0, 0) += h;
      dn.w(0, 0) -= h;
      CHECK(pg.w(0, 0) == doctest::Approx((fc_forward(up, x) - fc_forward(dn, x)) / (2 * h)).epsilon(1e-4));
      up = f, dn = f;
      up.v(0) += h;
      dn.v(0) -= h;
      CHECK(pg.v(0) == doctest::Approx((fc_forward(up, x) - fc_forward(dn, x)) / (2 * h)).epsilon(1e-4));
      ++checked;
    }
    if (!near_kink(c, x)) {
      const V g = conv_input_gradient(c, x);
      const V fd = finite_difference_gradient(net_classifier(c), x, h);
      const double gn = std::sqrt(oracle::dot(g, g));
      for (std::size_t i = 0; i < d; ++i) CHECK(std::abs(g[i] - fd[i]) <= 1e-4 * std::max(gn, 1e-12));
      const ParamGradient pg = conv_param_gradient(c, x);
      ConvGapNet up = c, dn = c;
      up.w(0, 0) += h;
      dn.w(0, 0) -= h;
      CHECK(pg.w(0, 0) == doctest::Approx((conv_forward(up, x) - conv_forward(dn, x)) / (2 * h)).epsilon(1e-4).scale(1.0));
      ++checked;
    }
  }
  CHECK(checked > 300);
}

TEST_CASE("train_full_batch") {
  const LabeledSet data(std::vector<Signal>{Signal(V{1.0, 0.5})},
                        std::vector<Signal>{Signal(V{-0.3, 1.0})});
  SUBCASE("zero steps leaves the net unchanged") {
    FcNet n = init_normal_fc(2, 8, 1);
    const FcNet before = n;
    TrainConfig cfg;
    cfg.steps = 0;
    train_full_batch(n, data, cfg);
    CHECK(n.w == before.w);
    CHECK(n.v == before.v);
  }
  SUBCASE("tiny problem converges") {
    FcNet n = init_normal_fc(2, 64, 2);
    const TrainTrace tr = train_full_batch(n, data, TrainConfig{1e-2, 500, 0.0, true});
    CHECK(tr.final_loss < 1e-3);
  }
  SUBCASE("small step gives a non-increasing loss") {
    FcNet n = init_normal_fc(2, 16, 3);
    const TrainTrace tr = train_full_batch(n, data, TrainConfig{1e-3, 200, 0.0, true});
    for (std::size_t i = 1; i < tr.loss.size(); ++i) CHECK(tr.loss[i] <= tr.loss[i - 1] + 1e-15);
  }
  SUBCASE("huge step diverges with an error") {
    FcNet n = init_normal_fc(2, 16, 4);
    try {
      train_full_batch(n, data, TrainConfig{1e6, 100, 0.0, true});
      FAIL("expected divergence");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kDiverged);
    }
  }
  SUBCASE("first-layer-only training keeps v") {
    ConvGapNet n = init_antithetic_conv(2, 2, 8, 5);
    const Eigen::VectorXd v0 = n.v;
    TrainConfig cfg;
    cfg.train_output_layer = false;
    cfg.learning_rate = suggest_learning_rate(n, data, false);
    cfg.steps = 50;
    train_full_batch(n, data, cfg);
    CHECK(n.v == v0);
  }
}

TEST_CASE("checkpoint round trip") {
  const FcNet f = init_normal_fc(5, 3, 8);
  std::stringstream a;
  save_checkpoint(f, a);
  const FcNet g = load_fc_checkpoint(a);
  CHECK(g.w == f.w);
  CHECK(g.v == f.v);

  const ConvGapNet c = init_normal_conv(9, 4, 3, 9);
  std::stringstream b;
  save_checkpoint(c, b);
  const ConvGapNet e = load_conv_checkpoint(b);
  CHECK(e.w == c.w);
  CHECK(e.d == 9);

  std::stringstream wrong;
  save_checkpoint(f, wrong);
  CHECK_THROWS_AS(load_conv_checkpoint(wrong), Error);
  std::stringstream junk("not a checkpoint");
  CHECK_THROWS_AS(load_fc_checkpoint(junk), Error);
}

}  // TEST_SUITE
