#include "experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>
#include <type_traits>

#include "datagen.hpp"
#include "error.hpp"
#include "format.hpp"
#include "highdim.hpp"
#include "kernels.hpp"
#include "nets.hpp"
#include "rng.hpp"
#include "signals.hpp"

namespace shiftlab {

namespace {

using Clock = std::chrono::steady_clock;
using Vec = std::vector<double>;

const std::string kNone;  // empty cell

Cell u(std::size_t v) { return Cell(static_cast<std::uint64_t>(v)); }
Cell i64(long long v) { return Cell(static_cast<std::int64_t>(v)); }
Cell num(double v) { return Cell(v); }
Cell str(std::string s) { return Cell(std::move(s)); }

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::ostringstream out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out << ',';
    if constexpr (std::is_same_v<T, double>) {
      out << format_double(xs[i]);
    } else {
      out << xs[i];
    }
  }
  return out.str();
}

std::string flag(bool b) { return b ? "true" : "false"; }

void add_net_params(ExperimentReport& r, const NetSettings& n) {
  r.parameters.emplace_back("width", std::to_string(n.width));
  r.parameters.emplace_back("q", std::to_string(n.q));
  r.parameters.emplace_back("max_steps", std::to_string(n.max_steps));
  r.parameters.emplace_back("target_loss", format_double(n.target_loss));
  r.parameters.emplace_back("learning_rate", format_double(n.learning_rate));
  r.parameters.emplace_back("train_output_layer", flag(n.train_output_layer));
  r.parameters.emplace_back("antithetic_init", flag(n.antithetic_init));
}

std::string strategy_name(SearchStrategy s) {
  switch (s) {
    case SearchStrategy::kGradientLine: return "line";
    case SearchStrategy::kPgdRefresh: return "pgd";
    case SearchStrategy::kCombined: return "combined";
  }
  return "combined";
}

void add_search_params(ExperimentReport& r, const SearchConfig& s) {
  r.parameters.emplace_back("search_strategy", strategy_name(s.strategy));
  r.parameters.emplace_back("max_radius", format_double(s.max_radius));
  r.parameters.emplace_back("tolerance", format_double(s.tolerance));
  r.parameters.emplace_back("pgd_steps", std::to_string(s.pgd_steps));
  r.parameters.emplace_back("pgd_restarts", std::to_string(s.pgd_restarts));
  r.parameters.emplace_back("radius_bisections", std::to_string(s.radius_bisections));
}

double median(Vec v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double clean_accuracy(const Classifier& c, const LabeledSet& data) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < data.size(); ++i) ok += c.label(data.point(i).values()) == data.label(i);
  return static_cast<double>(ok) / static_cast<double>(data.size());
}

// Outcome of one train-and-attack task.
struct FitOutcome {
  std::string status = "ok";
  std::size_t steps = 0;
  double final_loss = 0.0;
  double lr = 0.0;
  double train_accuracy = 0.0;
  DistanceSummary dist;
};

FitOutcome fit_and_attack(ModelKind kind, const LabeledSet& data, const NetSettings& net,
                          std::uint64_t init_seed, SearchConfig search) {
  FitOutcome out;
  try {
    TrainedModel m = train_model(kind, data, net, init_seed);
    out.steps = m.steps;
    out.final_loss = m.final_loss;
    out.lr = m.learning_rate;
    out.train_accuracy = clean_accuracy(m.classifier, data);
    search.seed = mix_seed(init_seed, 0xa77ac);
    out.dist = mean_adv_distance(m.classifier, data, DistanceMethod::kSearch, search);
  } catch (const Error& e) {
    out.status = e.what();
  }
  return out;
}

std::vector<Cell> fit_cells(const FitOutcome& f) {
  return {u(f.steps), num(f.final_loss), num(f.lr), num(f.train_accuracy), num(f.dist.mean),
          u(f.dist.found), u(f.dist.total), str(f.status)};
}

const std::vector<std::string> kFitColumns{"steps",  "final_loss", "learning_rate",
                                           "train_accuracy", "mean_distance", "flips",
                                           "points", "status"};

}  // namespace

ConsistencyReport shift_consistency(const Classifier& c, const LabeledSet& data,
                                    std::size_t trials, std::uint64_t seed) {
  require(trials >= 1, ErrorCode::kInvalidArgument, "shift_consistency needs trials >= 1");
  std::size_t same = 0, total = 0;
  const std::size_t d = data.dim();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Signal& x = data.point(i);
    const int base = c.label(x.values());
    Rng rng(mix_seed(seed, i));
    std::uniform_int_distribution<std::size_t> shift(0, d - 1);
    for (std::size_t t = 0; t < trials; ++t) {
      same += c.label(circular_shift(x, shift(rng)).values()) == base;
      ++total;
    }
  }
  return {100.0 * static_cast<double>(same) / static_cast<double>(total), trials, seed};
}

DistanceSummary mean_adv_distance(const Classifier& c, const LabeledSet& data,
                                  DistanceMethod method, const SearchConfig& search) {
  DistanceSummary s;
  s.total = data.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.point(i).values();
    if (method == DistanceMethod::kExactLinear) {
      acc += minimal_distance_linear(c, x);
      ++s.found;
      continue;
    }
    SearchConfig local = search;
    local.seed = mix_seed(search.seed, i);
    const AttackResult r = minimal_distance_search(c, x, data.label(i), local);
    if (r.success) {
      acc += r.perturbation_norm;
      ++s.found;
    }
  }
  s.mean = s.found ? acc / static_cast<double>(s.found) : std::nan("");
  return s;
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex mu;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(mu);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

std::size_t ExperimentReport::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  fail(ErrorCode::kInvalidArgument, "report '" + this->name + "' has no column '" + name + "'");
}

const Cell& ExperimentReport::at(std::size_t row, const std::string& col) const {
  return rows.at(row).at(column(col));
}

double ExperimentReport::number(std::size_t row, const std::string& col) const {
  const Cell& c = at(row, col);
  if (auto d = std::get_if<double>(&c)) return *d;
  if (auto i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  if (auto v = std::get_if<std::uint64_t>(&c)) return static_cast<double>(*v);
  fail(ErrorCode::kInvalidArgument, "column '" + col + "' is not numeric");
}

std::string to_string(ModelKind m) { return m == ModelKind::kFcNet ? "fc_net" : "conv_net"; }

std::string to_string(SyntheticKind k) {
  return k == SyntheticKind::kOrthVectors ? "orth_vectors" : "orth_frequencies";
}

TrainedModel train_model(ModelKind kind, const LabeledSet& data, const NetSettings& net,
                         std::uint64_t init_seed) {
  const std::size_t d = data.dim();
  auto fit = [&](auto model) {
    TrainConfig tc;
    tc.steps = net.max_steps;
    tc.target_loss = net.target_loss;
    tc.train_output_layer = net.train_output_layer;
    tc.learning_rate = net.learning_rate > 0.0
                           ? net.learning_rate
                           : suggest_learning_rate(model, data, net.train_output_layer);
    const TrainTrace tr = train_full_batch(model, data, tc);
    return TrainedModel{net_classifier(std::move(model)), tr.steps_run, tr.final_loss,
                        tc.learning_rate};
  };
  if (kind == ModelKind::kFcNet) {
    return fit(net.antithetic_init ? init_antithetic_fc(d, net.width, init_seed)
                                   : init_normal_fc(d, net.width, init_seed));
  }
  const std::size_t q = net.q == 0 ? d : net.q;
  return fit(net.antithetic_init ? init_antithetic_conv(d, q, net.width, init_seed)
                                 : init_normal_conv(d, q, net.width, init_seed));
}

ExperimentReport run_figure1(const Figure1Config& cfg) {
  require(!cfg.dims.empty(), ErrorCode::kInvalidArgument, "figure1 needs at least one dimension");
  const auto t0 = Clock::now();
  ExperimentReport r;
  r.name = "figure1";
  r.seed = cfg.seed;
  r.parameters = {{"dims", join(cfg.dims)}, {"q", std::to_string(cfg.q)},
                  {"nets", flag(cfg.nets)}};
  if (cfg.nets) {
    add_net_params(r, cfg.net);
    add_search_params(r, cfg.search);
  }
  r.columns = {"d",           "seed",        "dist_ntk",         "dist_cntk",
               "dist_ntk_search", "dist_cntk_search", "inv_sqrt_d", "dist_cntk_times_sqrt_d"};
  if (cfg.nets) {
    r.columns.push_back("dist_fc_net");
    r.columns.push_back("dist_conv_net");
  }
  r.rows.resize(cfg.dims.size());
  parallel_for(cfg.dims.size(), cfg.threads, [&](std::size_t k) {
    const std::size_t d = cfg.dims[k];
    const LabeledSet data = dots(d);
    const Signal& x = data.pos().front();
    const Classifier ntk = antipodal_ntk_classifier(x);
    const Classifier cntk = antipodal_cntk_classifier(x, cfg.q);
    SearchConfig line;
    line.strategy = SearchStrategy::kGradientLine;
    const double dn = minimal_distance_linear(ntk, x.values());
    const double dc = minimal_distance_linear(cntk, x.values());
    const AttackResult sn = minimal_distance_search(ntk, x.values(), 1, line);
    const AttackResult sc = minimal_distance_search(cntk, x.values(), 1, line);
    const double dd = static_cast<double>(d);
    std::vector<Cell> row{u(d),
                          Cell(cfg.seed),
                          num(dn),
                          num(dc),
                          num(sn.success ? sn.perturbation_norm : std::nan("")),
                          num(sc.success ? sc.perturbation_norm : std::nan("")),
                          num(1.0 / std::sqrt(dd)),
                          num(dc * std::sqrt(dd))};
    if (cfg.nets) {
      for (ModelKind kind : {ModelKind::kFcNet, ModelKind::kConvNet}) {
        const auto f = fit_and_attack(kind, data, cfg.net, mix_seed(cfg.seed, d), cfg.search);
        row.push_back(num(f.status == "ok" ? f.dist.mean : std::nan("")));
      }
    }
    r.rows[k] = std::move(row);
  });
  r.plot = {"d", {"dist_ntk", "dist_cntk"}, "", "", "", "minimal L2 distance"};
  if (cfg.nets) r.plot.y = {"dist_ntk", "dist_cntk", "dist_fc_net", "dist_conv_net"};
  r.wall_seconds = seconds_since(t0);
  return r;
}

ExperimentReport run_margin(const MarginConfig& cfg) {
  require(cfg.max_instance_dim >= 1 && cfg.max_per_class >= 1, ErrorCode::kInvalidArgument,
          "margin instances need max_instance_dim >= 1 and max_per_class >= 1");
  const auto t0 = Clock::now();
  ExperimentReport r;
  r.name = "margin";
  r.seed = cfg.seed;
  r.parameters = {{"dims", join(cfg.dims)},
                  {"instances", std::to_string(cfg.instances)},
                  {"max_instance_dim", std::to_string(cfg.max_instance_dim)},
                  {"max_per_class", std::to_string(cfg.max_per_class)},
                  {"min_gap", format_double(cfg.min_gap)}};
  r.columns = {"kind",          "index",     "d",          "seed",   "no_orbit_margin",
               "orbit_margin",  "oracle_orbit_margin", "predicted", "abs_diff",
               "normal_linf_dev", "unique"};

  const std::size_t nd = cfg.dims.size();
  r.rows.resize(nd + cfg.instances);
  parallel_for(nd + cfg.instances, cfg.threads, [&](std::size_t k) {
    if (k < nd) {
      const std::size_t d = cfg.dims[k];
      const LabeledSet data = dots(d);
      OracleOptions wide;
      wide.max_dim = std::max<std::size_t>(wide.max_dim, d);
      wide.max_points = std::max<std::size_t>(wide.max_points, 2 * d);
      const auto raw = oracle_max_margin({data.pos()[0].vec()}, {data.neg()[0].vec()}, wide);
      const SeparatorReport th = orbit_margin(data);
      const auto pe = expand_orbits(data.pos()), ne = expand_orbits(data.neg());
      const SeparatorReport orc = oracle_max_margin(pe, ne, wide);
      const double pred = 2.0 / std::sqrt(static_cast<double>(d));
      double dev = 0.0;
      for (double v : orc.normal) dev = std::max(dev, std::abs(std::abs(v) - 1.0 / std::sqrt(static_cast<double>(d))));
      r.rows[k] = {str("dots"), u(k), u(d), Cell(cfg.seed), num(raw.margin), num(th.margin),
                   num(orc.margin), num(pred), num(std::abs(th.margin - orc.margin)), num(dev),
                   i64(max_margin_normal_unique(orc.normal, pe, ne) ? 1 : 0)};
      return;
    }
    const std::size_t idx = k - nd;
    const std::uint64_t s = mix_seed(cfg.seed, idx);
    Rng rng(s);
    std::uniform_int_distribution<std::size_t> dim_pick(2, std::max<std::size_t>(2, cfg.max_instance_dim));
    std::uniform_int_distribution<std::size_t> count_pick(1, cfg.max_per_class);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t d = dim_pick(rng);
    auto draw = [&](std::size_t count) {
      std::vector<Signal> out;
      for (std::size_t i = 0; i < count; ++i) {
        Vec v(d);
        for (double& x : v) x = normal(rng);
        out.emplace_back(std::move(v));
      }
      return out;
    };
    std::vector<Signal> pos, neg;
    SeparatorReport th;
    do {
      pos = draw(count_pick(rng));
      neg = draw(count_pick(rng));
      th = orbit_margin(LabeledSet(pos, neg));
    } while (!th.separable || th.margin < cfg.min_gap);
    const LabeledSet data(pos, neg);
    const auto pe = expand_orbits(pos), ne = expand_orbits(neg);
    const SeparatorReport raw = oracle_max_margin(
        [&] { std::vector<Vec> v; for (auto& p : pos) v.push_back(p.vec()); return v; }(),
        [&] { std::vector<Vec> v; for (auto& p : neg) v.push_back(p.vec()); return v; }());
    const SeparatorReport orc = oracle_max_margin(pe, ne);
    const double wbar = 1.0 / std::sqrt(static_cast<double>(d));
    double dev_plus = 0.0, dev_minus = 0.0;
    for (double v : orc.normal) {
      dev_plus = std::max(dev_plus, std::abs(v - wbar));
      dev_minus = std::max(dev_minus, std::abs(v + wbar));
    }
    r.rows[k] = {str("random"), u(idx), u(d), Cell(s), num(raw.margin), num(th.margin),
                 num(orc.margin), str(kNone), num(std::abs(th.margin - orc.margin)),
                 num(std::min(dev_plus, dev_minus)),
                 i64(max_margin_normal_unique(orc.normal, pe, ne) ? 1 : 0)};
  });
  r.plot = {"d", {"orbit_margin", "no_orbit_margin"}, "", "kind", "dots", "margin"};
  r.wall_seconds = seconds_since(t0);
  return r;
}

ExperimentReport run_synthetic(const SyntheticConfig& cfg) {
  require(!cfg.kinds.empty() && !cfg.ns.empty() && !cfg.models.empty() && cfg.seeds >= 1,
          ErrorCode::kInvalidArgument, "synthetic needs kinds, ns, models and seeds >= 1");
  const auto t0 = Clock::now();
  ExperimentReport r;
  r.name = "synthetic";
  r.seed = cfg.seed;
  {
    std::vector<std::string> kinds, models;
    for (auto k : cfg.kinds) kinds.push_back(to_string(k));
    for (auto m : cfg.models) models.push_back(to_string(m));
    r.parameters = {{"kinds", join(kinds)}, {"ns", join(cfg.ns)}, {"d", std::to_string(cfg.d)},
                    {"models", join(models)}, {"seeds", std::to_string(cfg.seeds)}};
  }
  add_net_params(r, cfg.net);
  add_search_params(r, cfg.search);
  r.columns = {"row", "dataset", "n", "d", "model", "seed_index", "seed"};
  r.columns.insert(r.columns.end(), kFitColumns.begin(), kFitColumns.end());

  const std::size_t nk = cfg.kinds.size(), nn = cfg.ns.size(), nm = cfg.models.size();
  const std::size_t tasks = nk * nn * nm * cfg.seeds;
  std::vector<FitOutcome> out(tasks);
  auto decode = [&](std::size_t t) {
    const std::size_t s = t % cfg.seeds;
    const std::size_t m = (t / cfg.seeds) % nm;
    const std::size_t n = (t / (cfg.seeds * nm)) % nn;
    const std::size_t k = t / (cfg.seeds * nm * nn);
    return std::array<std::size_t, 4>{k, n, m, s};
  };
  parallel_for(tasks, cfg.threads, [&](std::size_t t) {
    const auto [k, n, m, s] = decode(t);
    try {
      const LabeledSet data = cfg.kinds[k] == SyntheticKind::kOrthVectors
                                  ? orth_vectors(cfg.ns[n], cfg.d, mix_seed(cfg.seed, 2 * s))
                                  : orth_frequencies(cfg.ns[n], cfg.d);
      out[t] = fit_and_attack(cfg.models[m], data, cfg.net, mix_seed(cfg.seed, 2 * s + 1),
                              cfg.search);
    } catch (const Error& e) {
      out[t].status = e.what();
    }
  });

  for (std::size_t t = 0; t < tasks; ++t) {
    const auto [k, n, m, s] = decode(t);
    std::vector<Cell> row{str("seed"), str(to_string(cfg.kinds[k])), u(cfg.ns[n]), u(cfg.d),
                          str(to_string(cfg.models[m])), u(s), Cell(mix_seed(cfg.seed, 2 * s + 1))};
    auto cells = fit_cells(out[t]);
    row.insert(row.end(), cells.begin(), cells.end());
    r.rows.push_back(std::move(row));
    if (s + 1 == cfg.seeds) {
      Vec dists;
      for (std::size_t j = t + 1 - cfg.seeds; j <= t; ++j)
        if (out[j].status == "ok" && out[j].dist.found > 0) dists.push_back(out[j].dist.mean);
      r.rows.push_back({str("median"), str(to_string(cfg.kinds[k])), u(cfg.ns[n]), u(cfg.d),
                        str(to_string(cfg.models[m])), str(kNone), Cell(cfg.seed), str(kNone),
                        str(kNone), str(kNone), str(kNone), num(median(dists)), str(kNone),
                        str(kNone), str(std::to_string(dists.size()) + "/" +
                                        std::to_string(cfg.seeds) + " seeds ok")});
    }
  }
  r.plot = {"n", {"mean_distance"}, "model", "row", "median", "mean L2 adversarial distance"};
  r.wall_seconds = seconds_since(t0);
  return r;
}

ExperimentReport run_common_component(const CommonConfig& cfg) {
  require(!cfg.ns.empty() && !cfg.ps.empty() && cfg.seeds >= 1, ErrorCode::kInvalidArgument,
          "common needs ns, ps and seeds >= 1");
  const auto t0 = Clock::now();
  ExperimentReport r;
  r.name = "common";
  r.seed = cfg.seed;
  r.parameters = {{"ns", join(cfg.ns)}, {"d", std::to_string(cfg.d)}, {"ps", join(cfg.ps)},
                  {"model", to_string(cfg.model)}, {"seeds", std::to_string(cfg.seeds)}};
  add_net_params(r, cfg.net);
  add_search_params(r, cfg.search);
  r.columns = {"row", "n", "d", "p", "model", "seed_index", "seed", "margin", "sqrt2_p"};
  r.columns.insert(r.columns.end(), kFitColumns.begin(), kFitColumns.end());

  const std::size_t nn = cfg.ns.size(), np = cfg.ps.size();
  const std::size_t tasks = nn * np * cfg.seeds;
  std::vector<FitOutcome> out(tasks);
  std::vector<double> margins(tasks, std::nan(""));
  parallel_for(tasks, cfg.threads, [&](std::size_t t) {
    const std::size_t s = t % cfg.seeds, p = (t / cfg.seeds) % np, n = t / (cfg.seeds * np);
    try {
      const std::uint64_t data_seed = mix_seed(cfg.seed, 2 * s);
      const LabeledSet data = common_component(cfg.ns[n], cfg.d, cfg.ps[p], data_seed);
      const auto c = common_component_centres(cfg.ns[n], cfg.d, data_seed);
      Vec w(cfg.d);
      for (std::size_t i = 0; i < cfg.d; ++i) w[i] = (c[0][i] - c[1][i]) / std::sqrt(2.0);
      std::vector<Vec> pv, nv;
      for (const auto& x : data.pos()) pv.push_back(x.vec());
      for (const auto& x : data.neg()) nv.push_back(x.vec());
      margins[t] = functional_gap(w, pv, nv);
      out[t] = fit_and_attack(cfg.model, data, cfg.net, mix_seed(cfg.seed, 2 * s + 1), cfg.search);
    } catch (const Error& e) {
      out[t].status = e.what();
    }
  });
  for (std::size_t t = 0; t < tasks; ++t) {
    const std::size_t s = t % cfg.seeds, p = (t / cfg.seeds) % np, n = t / (cfg.seeds * np);
    const double sqrt2p = std::sqrt(2.0) * cfg.ps[p];
    std::vector<Cell> row{str("seed"), u(cfg.ns[n]), u(cfg.d), num(cfg.ps[p]),
                          str(to_string(cfg.model)), u(s), Cell(mix_seed(cfg.seed, 2 * s + 1)),
                          num(margins[t]), num(sqrt2p)};
    auto cells = fit_cells(out[t]);
    row.insert(row.end(), cells.begin(), cells.end());
    r.rows.push_back(std::move(row));
    if (s + 1 == cfg.seeds) {
      Vec dists;
      for (std::size_t j = t + 1 - cfg.seeds; j <= t; ++j)
        if (out[j].status == "ok" && out[j].dist.found > 0) dists.push_back(out[j].dist.mean);
      r.rows.push_back({str("median"), u(cfg.ns[n]), u(cfg.d), num(cfg.ps[p]),
                        str(to_string(cfg.model)), str(kNone), Cell(cfg.seed), str(kNone),
                        num(sqrt2p), str(kNone), str(kNone), str(kNone), str(kNone),
                        num(median(dists)), str(kNone), str(kNone),
                        str(std::to_string(dists.size()) + "/" + std::to_string(cfg.seeds) +
                            " seeds ok")});
    }
  }
  r.plot = {"p", {"mean_distance"}, "n", "row", "median", "mean L2 adversarial distance"};
  r.wall_seconds = seconds_since(t0);
  return r;
}

ExperimentReport run_highdim(const HighdimConfig& cfg) {
  require(!cfg.ns.empty() && cfg.seeds >= 1, ErrorCode::kInvalidArgument,
          "highdim needs ns and seeds >= 1");
  for (std::size_t n : cfg.ns)
    require(n >= 2 && n <= cfg.d, ErrorCode::kInvalidArgument, "highdim needs 2 <= n <= d");
  const auto t0 = Clock::now();
  ExperimentReport r;
  r.name = "highdim";
  r.seed = cfg.seed;
  r.parameters = {{"d", std::to_string(cfg.d)}, {"ns", join(cfg.ns)},
                  {"seeds", std::to_string(cfg.seeds)}};
  r.columns = {"row",           "n",          "d",         "seed_index",          "seed",
               "norm_w",        "predicted_norm", "ratio", "mean_min_distance",   "dist_times_norm",
               "predicted_threshold", "residual", "max_abs_inner", "mean_pair_distance",
               "mean_pair_cosine", "mean_unit_derivative", "status"};
  const std::size_t tasks = cfg.ns.size() * cfg.seeds;
  std::vector<std::vector<Cell>> rows(tasks);
  std::vector<double> ratios(tasks, std::nan("")), norms(tasks, std::nan(""));
  parallel_for(tasks, cfg.threads, [&](std::size_t t) {
    const std::size_t s = t % cfg.seeds, n = cfg.ns[t / cfg.seeds];
    const std::uint64_t seed = mix_seed(cfg.seed, s);
    const double pred = gradient_norm_prediction(n);
    const double threshold = 2.0 * std::sin(std::numbers::pi / 3.0) / std::sqrt(static_cast<double>(n));
    std::vector<Cell> row{str("seed"), u(n), u(cfg.d), u(s), Cell(seed)};
    try {
      const GaussianDataset data = sample_gaussian_dataset(n, cfg.d, seed);
      const LinearInterpolant li = min_norm_interpolant(data);
      const double wn = li.w.norm();
      double dist = 0.0;
      for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
        const Eigen::VectorXd xi = data.x.row(i).transpose();
        dist += epsilon_adversarial(std::span<const double>(xi.data(), static_cast<std::size_t>(xi.size())),
                                    data.y[i] > 0 ? 1 : -1, li.w, 0.0)
                    .minimal_distance;
      }
      dist /= static_cast<double>(n);
      const OrthogonalityStats os = orthogonality_stats(data.x, data.y);
      const DirectionalReport dr = directional_derivative_check(data.x, data.y, li.w);
      ratios[t] = wn / pred;
      norms[t] = wn;
      row.insert(row.end(), {num(wn), num(pred), num(wn / pred), num(dist), num(dist * wn),
                             num(threshold), num(li.residual), num(os.max_abs_inner),
                             num(os.pair_distance.mean), num(os.pair_cosine.mean),
                             num(dr.unit_derivative.mean), str("ok")});
    } catch (const Error& e) {
      row.insert(row.end(), {str(kNone), num(pred), str(kNone), str(kNone), str(kNone),
                             num(threshold), str(kNone), str(kNone), str(kNone), str(kNone),
                             str(kNone), str(e.what())});
    }
    rows[t] = std::move(row);
  });
  for (std::size_t t = 0; t < tasks; ++t) {
    r.rows.push_back(std::move(rows[t]));
    if ((t + 1) % cfg.seeds == 0) {
      const std::size_t n = cfg.ns[t / cfg.seeds];
      Vec rs, ws;
      for (std::size_t j = t + 1 - cfg.seeds; j <= t; ++j) {
        if (std::isnan(ratios[j])) continue;
        rs.push_back(ratios[j]);
        ws.push_back(norms[j]);
      }
      std::vector<Cell> med{str("median"), u(n), u(cfg.d), str(kNone), Cell(cfg.seed)};
      for (std::size_t c = 5; c < r.columns.size(); ++c) med.push_back(str(kNone));
      med[r.column("predicted_norm")] = num(gradient_norm_prediction(n));
      med[r.column("norm_w")] = num(median(ws));
      med[r.column("ratio")] = num(median(rs));
      r.rows.push_back(std::move(med));
    }
  }
  r.plot = {"n", {"norm_w", "predicted_norm"}, "", "row", "median", "interpolant norm"};
  r.wall_seconds = seconds_since(t0);
  return r;
}

ExperimentReport run_consistency(const ConsistencyConfig& cfg) {
  require(cfg.trials >= 1, ErrorCode::kInvalidArgument, "consistency needs trials >= 1");
  const auto t0 = Clock::now();
  ExperimentReport r;
  r.name = "consistency";
  r.seed = cfg.seed;
  r.parameters = {{"d", std::to_string(cfg.d)}, {"n", std::to_string(cfg.n)},
                  {"trials", std::to_string(cfg.trials)}, {"width", std::to_string(cfg.net.width)},
                  {"q", std::to_string(cfg.net.q)}};
  r.columns = {"classifier", "dataset", "trials", "seed", "percent"};

  const std::size_t d = cfg.d;
  std::vector<std::pair<std::string, LabeledSet>> sets;
  sets.emplace_back("dots", dots(d));
  sets.emplace_back("orth_vectors", orth_vectors(cfg.n, d, mix_seed(cfg.seed, 1)));
  {
    Vec a(d, 0.5), b(d, -0.25);
    sets.emplace_back("constant", LabeledSet({Signal(a)}, {Signal(b)}));
  }
  Vec e1(d, 0.0);
  e1[0] = 1.0;
  const Signal dot = dots(d).pos().front();
  const std::size_t q = cfg.net.q == 0 ? d : cfg.net.q;
  std::vector<Classifier> cs{linear_classifier(e1, 0.0),
                             antipodal_ntk_classifier(dot),
                             antipodal_cntk_classifier(dot, cfg.net.q),
                             net_classifier(init_normal_fc(d, cfg.net.width, mix_seed(cfg.seed, 2))),
                             net_classifier(init_normal_conv(d, q, cfg.net.width, mix_seed(cfg.seed, 3)))};
  std::vector<std::string> names{"linear_e1", "ntk_antipodal", "cntk_antipodal", "fc_net", "conv_net"};
  for (std::size_t c = 0; c < cs.size(); ++c) {
    for (std::size_t k = 0; k < sets.size(); ++k) {
      const std::uint64_t s = mix_seed(cfg.seed, 100 + k);
      const ConsistencyReport cr = shift_consistency(cs[c], sets[k].second, cfg.trials, s);
      r.rows.push_back({str(names[c]), str(sets[k].first), u(cfg.trials), Cell(s), num(cr.percent)});
    }
  }
  r.plot = {};
  r.wall_seconds = seconds_since(t0);
  return r;
}

ExperimentReport run_bridge(const BridgeConfig& cfg) {
  require(!cfg.widths.empty() && cfg.seeds >= 1 && cfg.probes >= 1, ErrorCode::kInvalidArgument,
          "bridge needs widths, seeds >= 1 and probes >= 1");
  const auto t0 = Clock::now();
  ExperimentReport r;
  r.name = "bridge";
  r.seed = cfg.seed;
  r.parameters = {{"d", std::to_string(cfg.d)}, {"widths", join(cfg.widths)},
                  {"probes", std::to_string(cfg.probes)}, {"seeds", std::to_string(cfg.seeds)},
                  {"max_steps", std::to_string(cfg.max_steps)},
                  {"target_loss", format_double(cfg.target_loss)}};
  r.columns = {"row", "width", "seed_index", "seed", "steps", "final_loss", "agreement"};

  const LabeledSet data = dots(cfg.d);
  const Classifier cntk = antipodal_cntk_classifier(data.pos().front(), 0);
  const std::size_t tasks = cfg.widths.size() * cfg.seeds;
  std::vector<std::vector<Cell>> rows(tasks);
  std::vector<double> agree(tasks, std::nan(""));
  parallel_for(tasks, cfg.threads, [&](std::size_t t) {
    const std::size_t s = t % cfg.seeds, m = cfg.widths[t / cfg.seeds];
    const std::uint64_t seed = mix_seed(cfg.seed, s);
    NetSettings ns;
    ns.width = m;
    ns.max_steps = cfg.max_steps;
    ns.target_loss = cfg.target_loss;
    const TrainedModel tm = train_model(ModelKind::kConvNet, data, ns, seed);
    Rng rng(mix_seed(seed, 0xb41d6e));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::size_t same = 0;
    for (std::size_t p = 0; p < cfg.probes; ++p) {
      Vec z(cfg.d);
      for (double& v : z) v = normal(rng);
      const double len = norm(z);
      for (double& v : z) v /= len;
      same += tm.classifier.label(z) == cntk.label(z);
    }
    agree[t] = static_cast<double>(same) / static_cast<double>(cfg.probes);
    rows[t] = {str("seed"), u(m), u(s), Cell(seed), u(tm.steps), num(tm.final_loss), num(agree[t])};
  });
  for (std::size_t t = 0; t < tasks; ++t) {
    r.rows.push_back(std::move(rows[t]));
    if ((t + 1) % cfg.seeds == 0) {
      Vec a(agree.begin() + static_cast<std::ptrdiff_t>(t + 1 - cfg.seeds),
            agree.begin() + static_cast<std::ptrdiff_t>(t + 1));
      r.rows.push_back({str("median"), u(cfg.widths[t / cfg.seeds]), str(kNone), Cell(cfg.seed),
                        str(kNone), str(kNone), num(median(a))});
    }
  }
  r.plot = {"width", {"agreement"}, "", "row", "median", "sign agreement with CNTK"};
  r.wall_seconds = seconds_since(t0);
  return r;
}

}  // namespace shiftlab
