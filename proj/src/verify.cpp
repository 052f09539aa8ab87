#include "verify.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "attacks.hpp"
#include "datagen.hpp"
#include "error.hpp"
#include "highdim.hpp"
#include "kernels.hpp"
#include "nets.hpp"
#include "rng.hpp"
#include "signals.hpp"

namespace shiftlab {

namespace {

using Vec = std::vector<double>;

struct Outcome {
  double value = 0.0;  // observed error or statistic
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

// value <= tol passes.
Outcome at_most(double value, double tol, std::string note = {}) {
  return {value, tol, value <= tol, std::move(note)};
}

Outcome at_least(double value, double bound, std::string note = {}) {
  return {value, bound, value >= bound, std::move(note)};
}

struct Check {
  std::string module, name;
  std::function<Outcome(Rng&)> run;
};

Vec gaussian_vec(std::size_t d, Rng& rng, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Vec v(d);
  for (double& x : v) x = normal(rng);
  return v;
}

double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<Vec> raw(const std::vector<Signal>& xs) {
  std::vector<Vec> out;
  for (const auto& x : xs) out.push_back(x.vec());
  return out;
}

std::vector<Check> all_checks(const VerifyOptions& opts) {
  std::vector<Check> c;

  // ---- signals ----
  c.push_back({"signals", "shift_bijection", [](Rng& rng) {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const Signal x(gaussian_vec(1 + t % 9, rng));
      for (std::size_t s = 0; s < x.dim(); ++s) {
        const Signal back = circular_shift(circular_shift(x, s), (x.dim() - s) % x.dim());
        worst = std::max(worst, max_abs_diff(back.vec(), x.vec()));
      }
    }
    return at_most(worst, 0.0, "exact");
  }});
  c.push_back({"signals", "dc_and_norm_invariance", [](Rng& rng) {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const Signal x(gaussian_vec(2 + t % 11, rng));
      for (std::size_t s = 0; s < x.dim(); ++s) {
        const Signal y = circular_shift(x, s);
        worst = std::max(worst, std::abs(dc_component(y.values()) - dc_component(x.values())));
        worst = std::max(worst, std::abs(norm(y.values()) - norm(x.values())));
      }
    }
    return at_most(worst, 1e-15, "rounding of reordered sums");
  }});
  c.push_back({"signals", "convolution_equivariance", [](Rng& rng) {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const std::size_t d = 3 + t % 10, q = 1 + t % d;
      const Signal x(gaussian_vec(d, rng));
      const Vec w = gaussian_vec(q, rng);
      const Signal base = circular_convolve(w, x);
      for (std::size_t s = 0; s < d; ++s) {
        const Vec a = circular_convolve(w, circular_shift(x, s)).vec();
        const Vec b = circular_shift(base, s).vec();
        worst = std::max(worst, max_abs_diff(a, b) / (1.0 + norm(b)));
      }
    }
    return at_most(worst, 1e-12);
  }});
  c.push_back({"signals", "orbit_sum_constant", [](Rng& rng) {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const std::size_t d = 2 + t % 15;
      const Signal x(gaussian_vec(d, rng));
      Vec sum(d, 0.0);
      for (const Signal& y : shift_orbit(x))
        for (std::size_t i = 0; i < d; ++i) sum[i] += y[i];
      const double target = std::sqrt(static_cast<double>(d)) * dc_component(x.values());
      for (double v : sum) worst = std::max(worst, std::abs(v - target));
    }
    return at_most(worst, 1e-12);
  }});

  // ---- margin ----
  c.push_back({"margin", "shift_sum_identity", [](Rng& rng) {
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      const std::size_t d = 2 + t % 20;
      Vec w = gaussian_vec(d, rng);
      const double n = norm(w);
      for (double& v : w) v /= n;
      const Signal x(gaussian_vec(d, rng));
      worst = std::max(worst, std::abs(shift_average(w, x) - dc_component(w) * dc_component(x.values())));
    }
    return at_most(worst, 1e-10);
  }});
  c.push_back({"margin", "dot_orbit_margin", [](Rng&) {
    double worst = 0.0;
    for (std::size_t d : {4u, 16u, 64u, 256u}) {
      const auto r = orbit_margin(dots(d));
      worst = std::max(worst, std::abs(r.margin - 2.0 / std::sqrt(static_cast<double>(d))));
    }
    return at_most(worst, 1e-12, "2/sqrt(d)");
  }});
  c.push_back({"margin", "dot_margin_without_orbits", [](Rng&) {
    double worst = 0.0;
    for (std::size_t d : {4u, 16u, 64u}) {
      const LabeledSet data = dots(d);
      const auto r = oracle_max_margin(raw(data.pos()), raw(data.neg()));
      worst = std::max(worst, std::abs(r.margin - 2.0));
    }
    return at_most(worst, 1e-12, "margin 2");
  }});
  c.push_back({"margin", "oracle_matches_closed_form", [](Rng& rng) {
    double worst = 0.0;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int t = 0; t < 12; ++t) {
      const std::size_t d = 2 + t % 7;
      std::vector<Signal> pos, neg;
      SeparatorReport th;
      do {
        pos = {Signal(gaussian_vec(d, rng))};
        neg = {Signal(gaussian_vec(d, rng)), Signal(gaussian_vec(d, rng))};
        th = orbit_margin(LabeledSet(pos, neg));
      } while (!th.separable || th.margin < 0.1);
      const auto orc = oracle_max_margin(expand_orbits(pos), expand_orbits(neg));
      worst = std::max(worst, std::abs(orc.margin - th.margin));
    }
    return at_most(worst, 1e-4);
  }});
  c.push_back({"margin", "separable_iff_dc_gap", [](Rng& rng) {
    double mismatches = 0.0;
    for (int t = 0; t < 30; ++t) {
      const std::size_t d = 2 + t % 5;
      const std::vector<Signal> pos{Signal(gaussian_vec(d, rng)), Signal(gaussian_vec(d, rng))};
      const std::vector<Signal> neg{Signal(gaussian_vec(d, rng))};
      const auto th = orbit_margin(LabeledSet(pos, neg));
      const auto orc = oracle_max_margin(expand_orbits(pos), expand_orbits(neg));
      // The oracle works to 1e-8; skip near-ties it cannot resolve.
      if (th.separable && th.margin < 1e-6) continue;
      mismatches += th.separable != orc.separable;
    }
    return at_most(mismatches, 0.0, "instances that disagree");
  }});

  // ---- kernels ----
  const bool broken = opts.break_ntk_symmetry;
  c.push_back({"kernels", "symmetry", [broken](Rng& rng) {
    auto k = [broken](const Vec& z, const Vec& x) {
      return ntk_fc(z, x) + (broken ? 1e-6 * z[0] : 0.0);
    };
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
      const std::size_t d = 2 + t % 10;
      const Vec z = gaussian_vec(d, rng), x = gaussian_vec(d, rng);
      worst = std::max(worst, std::abs(k(z, x) - k(x, z)));
      worst = std::max(worst, std::abs(cntk_gap(z, x, 1 + t % d) - cntk_gap(x, z, 1 + t % d)));
    }
    return at_most(worst, 1e-12, broken ? "fault injected" : "");
  }});
  c.push_back({"kernels", "antipodal_identity", [](Rng& rng) {
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const std::size_t d = 2 + t % 16;
      const Vec z = gaussian_vec(d, rng), x = gaussian_vec(d, rng);
      Vec nx(x);
      for (double& v : nx) v = -v;
      worst = std::max(worst, std::abs(ntk_fc(z, x) - ntk_fc(z, nx) - 2.0 * dot(z, x)));
    }
    return at_most(worst, 1e-10);
  }});
  c.push_back({"kernels", "fc_homogeneity", [](Rng& rng) {
    double worst = 0.0;
    std::uniform_real_distribution<double> scale(0.1, 5.0);
    for (int t = 0; t < 100; ++t) {
      const std::size_t d = 2 + t % 8;
      Vec z = gaussian_vec(d, rng), x = gaussian_vec(d, rng);
      const double a = scale(rng), base = ntk_fc(z, x);
      for (double& v : z) v *= a;
      for (double& v : x) v *= a;
      worst = std::max(worst, std::abs(ntk_fc(z, x) - a * a * base) / (1.0 + a * a * std::abs(base)));
    }
    return at_most(worst, 1e-10);
  }});
  c.push_back({"kernels", "cntk_double_shift", [](Rng& rng) {
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const std::size_t d = 4 + t % 5, q = 1 + t % d;
      const Signal z(gaussian_vec(d, rng)), x(gaussian_vec(d, rng));
      const double base = cntk_gap(z.values(), x.values(), q);
      for (std::size_t s = 0; s < d; ++s)
        for (std::size_t u = 0; u < d; ++u)
          worst = std::max(worst, std::abs(cntk_gap(circular_shift(z, s).values(),
                                                    circular_shift(x, u).values(), q) - base));
    }
    return at_most(worst, 1e-10);
  }});
  c.push_back({"kernels", "gram_psd_and_interpolation", [](Rng& rng) {
    double worst = 0.0;
    for (auto kind : {KernelKind::fc_ntk(), KernelKind::cntk_gap(3), KernelKind::cntk_gap()}) {
      std::vector<Signal> pts;
      Vec y;
      for (int i = 0; i < 8; ++i) {
        pts.emplace_back(gaussian_vec(8, rng));
        y.push_back(i % 2 ? -1.0 : 1.0);
      }
      const KernelModel m = ridge_fit(kind, pts, y, 0.0);
      for (std::size_t i = 0; i < pts.size(); ++i)
        worst = std::max(worst, std::abs(m.predict(pts[i].values()) - y[i]));
    }
    return at_most(worst, 1e-8, "ridge 0 residual");
  }});
  c.push_back({"kernels", "antipodal_closed_forms", [](Rng& rng) {
    double worst = 0.0;
    for (int t = 0; t < 4; ++t) {
      const std::size_t d = 4 + 2 * t;
      Vec xv = gaussian_vec(d, rng);
      const Signal x(xv);
      Vec nx(xv);
      for (double& v : nx) v = -v;
      const std::vector<Signal> pts{x, Signal(nx)};
      const Vec y{1.0, -1.0};
      const auto fc = ridge_fit(KernelKind::fc_ntk(), pts, y, 0.0);
      const auto cn = ridge_fit(KernelKind::cntk_gap(), pts, y, 0.0);
      const auto fc_ridge = ridge_fit(KernelKind::fc_ntk(), pts, y, 1e-10);
      const Classifier a = antipodal_ntk_classifier(x), b = antipodal_cntk_classifier(x);
      for (int p = 0; p < 20; ++p) {
        const Vec z = gaussian_vec(d, rng);
        worst = std::max(worst, std::abs(fc.predict(z) - a(z)));
        worst = std::max(worst, std::abs(cn.predict(z) - b(z)));
        worst = std::max(worst, std::abs(fc_ridge.predict(z) - a(z)));
      }
    }
    return at_most(worst, 1e-6);
  }});
  c.push_back({"kernels", "antipodal_cntk_linearity", [](Rng& rng) {
    const Signal x(gaussian_vec(12, rng));
    const Classifier g = antipodal_cntk_classifier(x, 5);
    double worst = 0.0;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
      const Vec z = gaussian_vec(12, rng), w = gaussian_vec(12, rng);
      const double a = normal(rng), b = normal(rng);
      Vec mix(12);
      for (int i = 0; i < 12; ++i) mix[i] = a * z[i] + b * w[i];
      worst = std::max(worst, std::abs(g(mix) - a * g(z) - b * g(w)));
    }
    return at_most(worst, 1e-10);
  }});

  // ---- nets ----
  c.push_back({"nets", "conv_shift_invariance", [](Rng& rng) {
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const std::size_t d = 6 + t, q = 1 + t % d;
      const ConvGapNet net = init_normal_conv(d, q, 16, rng());
      const Signal x(gaussian_vec(d, rng));
      const double f = conv_forward(net, x.values());
      for (std::size_t s = 0; s < d; ++s)
        worst = std::max(worst, std::abs(conv_forward(net, circular_shift(x, s).values()) - f) /
                                    (1.0 + std::abs(f)));
    }
    return at_most(worst, 1e-9);
  }});
  c.push_back({"nets", "input_gradients", [](Rng& rng) {
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const std::size_t d = 5 + t;
      const Classifier fc = net_classifier(init_normal_fc(d, 12, rng()));
      const Classifier cv = net_classifier(init_normal_conv(d, 1 + t % d, 12, rng()));
      const Vec z = gaussian_vec(d, rng);
      for (const Classifier* c : {&fc, &cv}) {
        const Vec a = c->gradient(z), b = finite_difference_gradient(*c, z);
        worst = std::max(worst, max_abs_diff(a, b) / (1e-8 + norm(a)));
      }
    }
    return at_most(worst, 1e-4, "may fail only at a ReLU kink");
  }});
  c.push_back({"nets", "init_determinism", [](Rng& rng) {
    const std::uint64_t s = rng();
    const auto a = init_normal_conv(9, 4, 7, s), b = init_normal_conv(9, 4, 7, s);
    return at_most((a.w == b.w && a.v == b.v) ? 0.0 : 1.0, 0.0);
  }});
  c.push_back({"nets", "tiny_training_converges", [](Rng& rng) {
    const LabeledSet data(std::vector<Signal>{Signal(Vec{1.0, 0.5})},
                          std::vector<Signal>{Signal(Vec{-0.3, 1.0})});
    FcNet net = init_normal_fc(2, 64, rng());
    const TrainTrace tr = train_full_batch(net, data, TrainConfig{1e-2, 500, 0.0, true});
    return at_most(tr.final_loss, 1e-3, "final loss");
  }});
  c.push_back({"nets", "checkpoint_round_trip", [](Rng& rng) {
    const ConvGapNet a = init_normal_conv(8, 3, 5, rng());
    std::stringstream ss;
    save_checkpoint(a, ss);
    const ConvGapNet b = load_conv_checkpoint(ss);
    return at_most((a.w == b.w && a.v == b.v && a.d == b.d) ? 0.0 : 1.0, 0.0, "bit-exact");
  }});

  // ---- highdim ----
  c.push_back({"highdim", "interpolation_and_distance", [](Rng& rng) {
    const GaussianDataset data = sample_gaussian_dataset(32, 1024, rng());
    const LinearInterpolant li = min_norm_interpolant(data);
    double worst = li.residual;
    for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
      const Eigen::VectorXd xi = data.x.row(i).transpose();
      const auto r = epsilon_adversarial({xi.data(), static_cast<std::size_t>(xi.size())},
                                         data.y[i] > 0 ? 1 : -1, li.w, 0.0);
      worst = std::max(worst, std::abs(r.minimal_distance - 1.0 / li.w.norm()));
    }
    return at_most(worst, 1e-8);
  }});
  c.push_back({"highdim", "gd_span_invariance", [](Rng& rng) {
    const GaussianDataset data = sample_gaussian_dataset(8, 64, rng());
    const Eigen::VectorXd w0 = gd_initial_point(data.x, false, rng());
    const LinearInterpolant li = gd_interpolant(data.x, data.y, w0, 0.5, 500);
    return at_most(std::abs((li.w - w0).dot(w0)), 1e-8, "drift along the orthogonal start");
  }});
  c.push_back({"highdim", "interpolant_norm_concentration", [](Rng& rng) {
    // |w|^2 = y^T (X X^T)^{-1} y and X X^T ~ I for d >> n, so |w| ~ sqrt(n).
    const GaussianDataset data = sample_gaussian_dataset(64, 4096, rng());
    const double ratio = min_norm_interpolant(data).w.norm() / 8.0;
    return at_most(std::abs(ratio - 1.0), 0.15, "|w| / sqrt(n) - 1");
  }});

  // ---- attacks ----
  c.push_back({"attacks", "pgd_stays_in_ball", [](Rng& rng) {
    double worst = 0.0;
    const Classifier net = net_classifier(init_normal_fc(6, 10, rng()));
    for (int t = 0; t < 10; ++t) {
      const Vec x = gaussian_vec(6, rng);
      for (Norm n : {Norm::kL2, Norm::kLinf}) {
        AttackConfig ac;
        ac.norm = n;
        ac.epsilon = 0.3;
        ac.restarts = 2;
        ac.seed = rng();
        const AttackResult r = pgd(net, x, net.label(x), ac);
        worst = std::max(worst, r.perturbation_norm - ac.epsilon);
      }
    }
    return at_most(worst, 1e-9, "excess over epsilon");
  }});
  c.push_back({"attacks", "affine_pgd_and_search_tight", [](Rng& rng) {
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const Vec w = gaussian_vec(7, rng), x = gaussian_vec(7, rng);
      const Classifier g = linear_classifier(w, 0.3);
      const int y = g.label(x);
      const double exact = minimal_distance_linear(g, x);
      SearchConfig sc;
      sc.seed = rng();
      const AttackResult s = minimal_distance_search(g, x, y, sc);
      worst = std::max(worst, std::abs(s.perturbation_norm - exact));
      AttackConfig ac;
      ac.epsilon = exact * 1.001 + 1e-9;
      if (!pgd(g, x, y, ac).success) worst = std::max(worst, 1.0);
    }
    return at_most(worst, 1e-6);
  }});
  c.push_back({"attacks", "determinism", [](Rng& rng) {
    const Classifier net = net_classifier(init_normal_fc(5, 8, rng()));
    const Vec x = gaussian_vec(5, rng);
    AttackConfig ac;
    ac.epsilon = 0.5;
    ac.restarts = 3;
    ac.seed = 42;
    const AttackResult a = pgd(net, x, net.label(x), ac), b = pgd(net, x, net.label(x), ac);
    return at_most(a.adversarial_point == b.adversarial_point ? 0.0 : 1.0, 0.0);
  }});

  // ---- datagen ----
  c.push_back({"datagen", "orthonormal_generators", [](Rng& rng) {
    double worst = 0.0;
    auto gram_error = [&](const LabeledSet& s) {
      std::vector<Signal> all(s.pos());
      all.insert(all.end(), s.neg().begin(), s.neg().end());
      for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = 0; j < all.size(); ++j)
          worst = std::max(worst, std::abs(dot(all[i].values(), all[j].values()) - (i == j)));
    };
    gram_error(orth_vectors(8, 32, rng()));
    gram_error(orth_frequencies(4, 64));
    return at_most(worst, 1e-10);
  }});
  c.push_back({"datagen", "frequencies_not_orbit_separable", [](Rng&) {
    const LabeledSet s = orth_frequencies(3, 64);
    double dc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) dc = std::max(dc, std::abs(dc_component(s.point(i).values())));
    const bool sep = orbit_margin(s).separable;
    return at_most(sep ? 1.0 : dc, 1e-12, "max |dc|");
  }});
  c.push_back({"datagen", "common_component_witness", [](Rng& rng) {
    const std::uint64_t s = rng();
    const double p = 0.7;
    const LabeledSet data = common_component(5, 24, p, s);
    const auto c = common_component_centres(5, 24, s);
    Vec w(24);
    for (int i = 0; i < 24; ++i) w[i] = (c[0][i] - c[1][i]) / std::sqrt(2.0);
    return at_most(std::abs(functional_gap(w, raw(data.pos()), raw(data.neg())) - std::sqrt(2.0) * p),
                   1e-12, "gap - sqrt(2) p");
  }});

  // ---- experiments ----
  c.push_back({"experiments", "conv_consistency", [](Rng& rng) {
    const Classifier net = net_classifier(init_normal_conv(12, 5, 16, rng()));
    const double pct = shift_consistency(net, orth_vectors(3, 12, rng()), 64, rng()).percent;
    return at_least(pct, 100.0, "percent");
  }});
  c.push_back({"experiments", "figure1_exact_columns", [](Rng&) {
    Figure1Config fc;
    fc.dims = {16, 64};
    fc.threads = 1;
    const ExperimentReport r = run_figure1(fc);
    double worst = 0.0;
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      worst = std::max(worst, std::abs(r.number(i, "dist_cntk") - r.number(i, "inv_sqrt_d")));
      worst = std::max(worst, std::abs(r.number(i, "dist_ntk") - 1.0));
    }
    return at_most(worst, 1e-9);
  }});
  return c;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace

ExperimentReport run_verify(const VerifyOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport r;
  r.name = "verify";
  r.seed = opts.seed;
  r.parameters = {{"filter", opts.filter},
                  {"break_ntk_symmetry", opts.break_ntk_symmetry ? "true" : "false"}};
  r.columns = {"module", "check", "status", "value", "tolerance", "note"};
  const auto checks = all_checks(opts);
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const Check& ch = checks[i];
    const std::string id = ch.module + "/" + ch.name;
    if (!opts.filter.empty() && id.find(opts.filter) == std::string::npos) continue;
    Rng rng(mix_seed(opts.seed, i));
    Outcome o;
    try {
      o = ch.run(rng);
    } catch (const std::exception& e) {
      o = {std::nan(""), 0.0, false, std::string("error: ") + e.what()};
    }
    r.rows.push_back({Cell(ch.module), Cell(ch.name), Cell(std::string(o.pass ? "pass" : "fail")),
                      Cell(fmt(o.value)), Cell(fmt(o.tolerance)), Cell(o.note)});
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::size_t count_failures(const ExperimentReport& report) {
  std::size_t n = 0;
  const std::size_t col = report.column("status");
  for (const auto& row : report.rows) n += std::get<std::string>(row[col]) == "fail";
  return n;
}

}  // namespace shiftlab
