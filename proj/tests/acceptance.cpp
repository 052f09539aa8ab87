// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance            run all criteria
//   acceptance 3 5        run only criteria 3 and 5
// Exit status is nonzero when any selected criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "attacks.hpp"
#include "config.hpp"
#include "datagen.hpp"
#include "experiments.hpp"
#include "format.hpp"
#include "kernels.hpp"
#include "nets.hpp"
#include "report_io.hpp"
#include "verify.hpp"

using namespace shiftlab;
using V = std::vector<double>;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double time_limit;  // seconds, 0 = none
  std::function<Verdict()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(V v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

V gaussian(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  V v(d);
  for (double& x : v) x = n(rng);
  return v;
}

double rel_error(const V& a, const V& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += a[i] * a[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

// Smallest |preactivation| over all hidden units and the first `patches`
// cyclic patches of length q (one patch of length d for an FC net).
double kink_distance(const Eigen::MatrixXd& w, const V& x, std::size_t q, std::size_t patches) {
  const std::size_t d = x.size();
  double best = INFINITY;
  for (std::size_t i = 0; i < patches; ++i)
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      double pre = 0.0;
      for (std::size_t k = 0; k < q; ++k) pre += w(r, static_cast<Eigen::Index>(k)) * x[(i + k) % d];
      best = std::min(best, std::abs(pre));
    }
  return best;
}

// ---- criteria ----

Verdict figure1_exact() {
  Figure1Config cfg;
  cfg.dims = {16, 64, 256, 1024};
  const ExperimentReport r = run_figure1(cfg);
  double closed = 0.0, search = 0.0;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const double d = r.number(i, "d");
    closed = std::max({closed, std::abs(r.number(i, "dist_cntk") - 1.0 / std::sqrt(d)),
                       std::abs(r.number(i, "dist_ntk") - 1.0)});
    search = std::max({search, std::abs(r.number(i, "dist_cntk_search") - 1.0 / std::sqrt(d)),
                       std::abs(r.number(i, "dist_ntk_search") - 1.0)});
  }
  return {r.rows.size() == 4 && closed <= 1e-9 && search <= 1e-6,
          fmt("closed-form err %.2e (tol 1e-9), search err %.2e (tol 1e-6)", closed, search)};
}

Verdict orbit_oracle() {
  MarginConfig cfg;
  cfg.dims = {};
  cfg.instances = 50;
  const ExperimentReport r = run_margin(cfg);
  double worst = 0.0, worst_normal = 0.0;
  std::size_t unique = 0;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    worst = std::max(worst, r.number(i, "abs_diff"));
    if (r.number(i, "unique") == 1.0) {
      ++unique;
      worst_normal = std::max(worst_normal, r.number(i, "normal_linf_dev"));
    }
  }
  return {r.rows.size() == 50 && worst <= 1e-4 && worst_normal <= 1e-3,
          fmt("50 instances, margin err %.2e (tol 1e-4), normal dev %.2e over %zu unique (tol 1e-3)",
              worst, worst_normal, unique)};
}

Verdict dot_margins() {
  MarginConfig cfg;
  cfg.dims = {4, 16, 64, 256};
  cfg.instances = 0;
  const ExperimentReport r = run_margin(cfg);
  double raw = 0.0, orbit = 0.0;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const double d = r.number(i, "d");
    raw = std::max(raw, std::abs(r.number(i, "no_orbit_margin") - 2.0));
    orbit = std::max(orbit, std::abs(r.number(i, "orbit_margin") - 2.0 / std::sqrt(d)));
  }
  return {r.rows.size() == 4 && raw <= 1e-12 && orbit <= 1e-12,
          fmt("no-orbit err %.2e, orbit err %.2e (tol 1e-12)", raw, orbit)};
}

Verdict gradient_norm() {
  HighdimConfig cfg;
  cfg.d = 4096;
  cfg.ns = {64};
  cfg.seeds = 10;
  const ExperimentReport r = run_highdim(cfg);
  double lo = INFINITY, hi = -INFINITY, identity = 0.0;
  std::size_t seeds = 0;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    if (format_cell(r.at(i, "row")) != "seed") continue;
    ++seeds;
    const double ratio = r.number(i, "ratio");
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    identity = std::max(identity, std::abs(r.number(i, "dist_times_norm") - 1.0));
  }
  const bool ratio_ok = lo > 0.85 && hi < 1.15;
  return {seeds == 10 && ratio_ok && identity <= 1e-8,
          fmt("|w|/(8/sqrt3) in [%.4f, %.4f] (need (0.85, 1.15)); dist*|w| err %.2e (tol 1e-8)", lo,
              hi, identity)};
}

Verdict kernel_suite() {
  std::mt19937_64 rng(2024);
  double sym = 0.0, psd = INFINITY, interp = 0.0, eq = 0.0, dshift = 0.0;
  for (auto kind : {KernelKind::fc_ntk(), KernelKind::cntk_gap(3), KernelKind::cntk_gap()}) {
    std::vector<Signal> pts;
    V y;
    for (int i = 0; i < 16; ++i) {
      pts.emplace_back(gaussian(12, rng));
      y.push_back(i % 2 ? 1.0 : -1.0);
    }
    const auto g = gram(kind, pts);
    sym = std::max(sym, (g.entries - g.entries.transpose()).cwiseAbs().maxCoeff());
    const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g.entries).eigenvalues()(0);
    psd = std::min(psd, lmin / g.entries.diagonal().maxCoeff());
    const auto m = ridge_fit(kind, pts, y, 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i)
      interp = std::max(interp, std::abs(m.predict(pts[i].values()) - y[i]));
  }
  for (int t = 0; t < 1000; ++t) {
    const std::size_t d = 2 + t % 30;
    const V z = gaussian(d, rng), x = gaussian(d, rng);
    V nx(x);
    for (double& v : nx) v = -v;
    eq = std::max(eq, std::abs(ntk_fc(z, x) - ntk_fc(z, nx) - 2.0 * dot(z, x)));
  }
  for (int t = 0; t < 8; ++t) {
    const std::size_t d = 5 + t, q = 1 + (3 * t) % d;
    const Signal z(gaussian(d, rng)), x(gaussian(d, rng));
    const double base = cntk_gap(z.values(), x.values(), q);
    for (std::size_t s = 0; s < d; ++s)
      for (std::size_t u = 0; u < d; ++u)
        dshift = std::max(dshift, std::abs(cntk_gap(circular_shift(z, s).values(),
                                                    circular_shift(x, u).values(), q) - base));
  }
  const bool ok = sym <= 1e-12 && psd >= -1e-8 && interp <= 1e-8 && eq <= 1e-10 && dshift <= 1e-10;
  return {ok, fmt("sym %.1e, min eig/maxdiag %.2e, interp %.1e, antipodal identity %.1e, double shift %.1e",
                  sym, psd, interp, eq, dshift)};
}

Verdict gradient_checks() {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  std::size_t probes = 0, skipped = 0;
  while (probes < 200) {
    const std::size_t d = 4 + probes % 13;
    const V z = gaussian(d, rng);
    const Signal x(gaussian(d, rng));
    std::vector<std::pair<Classifier, double>> cs;  // classifier, kink distance
    const FcNet f = init_normal_fc(d, 16, rng());
    const ConvGapNet c = init_normal_conv(d, 1 + probes % d, 16, rng());
    cs.emplace_back(net_classifier(f), kink_distance(f.w, z, d, 1));
    cs.emplace_back(net_classifier(c), kink_distance(c.w, z, c.patch(), d));
    if (dot(x.values(), V(d, 1.0)) != 0.0) cs.emplace_back(antipodal_cntk_classifier(x), INFINITY);
    cs.emplace_back(antipodal_ntk_classifier(x), INFINITY);
    cs.emplace_back(linear_classifier(gaussian(d, rng), 0.2), INFINITY);
    bool used = false;
    for (const auto& [cl, kink] : cs) {
      if (kink < 1e-3) {
        ++skipped;
        continue;
      }
      worst = std::max(worst, rel_error(cl.gradient(z), finite_difference_gradient(cl, z)));
      used = true;
    }
    probes += used;
  }
  return {worst <= 1e-4, fmt("200 probes, worst relative error %.2e (tol 1e-4), %zu near-kink evaluations skipped",
                             worst, skipped)};
}

Verdict conv_invariance() {
  std::mt19937_64 rng(9);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 4 + t % 29, q = 1 + (7 * t) % d;
    const ConvGapNet n = init_normal_conv(d, q, 32, rng());
    const Signal x(gaussian(d, rng));
    const double f = conv_forward(n, x.values());
    for (std::size_t s = 0; s < d; ++s)
      worst = std::max(worst, std::abs(conv_forward(n, circular_shift(x, s).values()) - f) / (1.0 + std::abs(f)));
  }
  ConsistencyConfig cc;
  const ExperimentReport r = run_consistency(cc);
  double conv_pct = 100.0;
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    if (format_cell(r.at(i, "classifier")) == "conv_net") conv_pct = std::min(conv_pct, r.number(i, "percent"));
  return {worst <= 1e-9 && conv_pct == 100.0,
          fmt("max |f(x^s)-f(x)|/(1+|f|) = %.2e (tol 1e-9); conv_net consistency %.1f", worst, conv_pct)};
}

double median_of(const ExperimentReport& r, const std::map<std::string, std::string>& match,
                 const std::string& col) {
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    if (format_cell(r.at(i, "row")) != "median") continue;
    bool ok = true;
    for (const auto& [k, v] : match) ok = ok && format_cell(r.at(i, k)) == v;
    if (ok) return r.number(i, col);
  }
  return NAN;
}

V seed_values(const ExperimentReport& r, const std::map<std::string, std::string>& match,
              const std::string& col) {
  V out;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    if (format_cell(r.at(i, "row")) != "seed") continue;
    bool ok = true;
    for (const auto& [k, v] : match) ok = ok && format_cell(r.at(i, k)) == v;
    if (ok) out.push_back(r.number(i, col));
  }
  return out;
}

Verdict table3_trend() {
  SyntheticConfig cfg;  // d = 256, n = 16, 5 seeds
  const ExperimentReport r = run_synthetic(cfg);
  auto med = [&](const char* data, const char* model) {
    return median_of(r, {{"dataset", data}, {"model", model}, {"n", "16"}}, "mean_distance");
  };
  const double fc_v = med("orth_vectors", "fc_net"), cv_v = med("orth_vectors", "conv_net");
  const double cv_f = med("orth_frequencies", "conv_net"), fc_f = med("orth_frequencies", "fc_net");
  const V a = seed_values(r, {{"dataset", "orth_vectors"}, {"model", "conv_net"}}, "mean_distance");
  const V b = seed_values(r, {{"dataset", "orth_vectors"}, {"model", "fc_net"}}, "mean_distance");
  const V c = seed_values(r, {{"dataset", "orth_frequencies"}, {"model", "conv_net"}}, "mean_distance");
  int first = 0, second = 0;
  for (std::size_t s = 0; s < std::min({a.size(), b.size(), c.size()}); ++s) {
    first += a[s] < b[s];
    second += c[s] > a[s];
  }
  return {cv_v < fc_v && cv_f > cv_v,
          fmt("medians: vectors conv %.4f < fc %.4f; frequencies conv %.4f > vectors conv %.4f "
              "(fc on frequencies %.4f); per-seed %d/5 and %d/5",
              cv_v, fc_v, cv_f, cv_v, fc_f, first, second)};
}

Verdict table4_trend() {
  CommonConfig cfg;  // n in {16, 32}, p in {0, 0.3}, 5 seeds
  const ExperimentReport r = run_common_component(cfg);
  bool ok = true;
  std::string detail;
  double margin_err = 0.0;
  for (const char* n : {"16", "32"}) {
    const double at0 = median_of(r, {{"n", n}, {"p", "0"}}, "mean_distance");
    const double at3 = median_of(r, {{"n", n}, {"p", format_double(0.3)}}, "mean_distance");
    ok = ok && at3 > at0;
    detail += fmt("n=%s: p=0 %.4f, p=0.3 %.4f; ", n, at0, at3);
  }
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    if (format_cell(r.at(i, "row")) == "seed")
      margin_err = std::max(margin_err, std::abs(r.number(i, "margin") - std::sqrt(2.0) * r.number(i, "p")));
  ok = ok && margin_err <= 1e-12;
  return {ok, detail + fmt("margin err %.1e (tol 1e-12)", margin_err)};
}

Verdict bridge() {
  BridgeConfig cfg;  // d = 16, m = 4096, 200 probes, 5 seeds
  const ExperimentReport r = run_bridge(cfg);
  const V shares = seed_values(r, {{"width", "4096"}}, "agreement");
  const double med = median(shares);
  return {shares.size() == 5 && med >= 0.95,
          fmt("median sign agreement %.3f over %zu seeds (need >= 0.95), min %.3f", med, shares.size(),
              *std::min_element(shares.begin(), shares.end()))};
}

Verdict determinism() {
  // Small configurations of every experiment plus verify, each run twice.
  const std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> runs = {
      {"figure1", {{"dims", "16,64"}, {"nets", "true"}, {"width", "64"}}},
      {"margin", {{"dims", "4,16"}, {"instances", "8"}}},
      {"synthetic", {{"ns", "4"}, {"d", "32"}, {"seeds", "2"}, {"width", "32"}}},
      {"common", {{"ns", "4"}, {"d", "32"}, {"seeds", "2"}, {"width", "32"}}},
      {"highdim", {{"d", "512"}, {"ns", "16,32"}, {"seeds", "2"}}},
      {"consistency", {{"trials", "32"}}},
      {"bridge", {{"widths", "256"}, {"seeds", "2"}, {"probes", "50"}}},
      {"verify", {}},
  };
  std::string mismatched;
  for (const auto& [name, kv] : runs) {
    ExperimentSetup s(name);
    s.set("seed", "12345");
    for (const auto& [k, v] : kv) s.set(k, v);
    const std::string a = to_csv(s.run());
    if (s.accepts("threads")) s.set("threads", "1");
    const std::string b = to_csv(s.run());
    if (a != b || a.empty()) mismatched += name + " ";
  }
  return {mismatched.empty(), mismatched.empty()
                                  ? std::string("8 experiments byte-identical across two runs (threads varied)")
                                  : "differs: " + mismatched};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "figure1 scaling exact", 10, figure1_exact},
      {2, "orbit margin equals brute-force oracle", 60, orbit_oracle},
      {3, "dot-pair margins 2 and 2/sqrt(d)", 0, dot_margins},
      {4, "gradient-norm prediction", 60, gradient_norm},
      {5, "kernel correctness suite", 0, kernel_suite},
      {6, "gradient checks", 0, gradient_checks},
      {7, "exact conv invariance", 0, conv_invariance},
      {8, "synthetic robustness trend", 15 * 60, table3_trend},
      {9, "common-component trend", 10 * 60, table4_trend},
      {10, "wide-net to kernel bridge", 5 * 60, bridge},
      {11, "determinism", 0, determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit > 0 && secs > c.time_limit) {
      v.pass = false;
      v.detail += fmt("; runtime %.1f s over limit %.0f s", secs, c.time_limit);
    }
    failures += !v.pass;
    std::printf("criterion %2d %s  %s: %s [%.1f s]\n", c.id, v.pass ? "PASS" : "FAIL", c.title.c_str(),
                v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
