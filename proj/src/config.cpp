#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>

#include "error.hpp"
#include "format.hpp"

namespace shiftlab {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    out.push_back(trim(std::string_view(s).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  require(!v.empty() && res.ec == std::errc() && res.ptr == v.data() + v.size(),
          ErrorCode::kConfig, key + ": expected a non-negative integer, got '" + raw + "'");
  return out;
}

std::size_t to_positive(const std::string& key, const std::string& raw) {
  const auto v = to_uint(key, raw);
  require(v > 0, ErrorCode::kConfig, key + ": must be positive");
  return static_cast<std::size_t>(v);
}

double to_double(const std::string& key, const std::string& raw) {
  try {
    const double v = parse_double(raw);
    require(std::isfinite(v), ErrorCode::kConfig, key + ": must be finite");
    return v;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    fail(ErrorCode::kConfig, key + ": expected a number, got '" + raw + "'");
  }
}

double to_nonneg(const std::string& key, const std::string& raw) {
  const double v = to_double(key, raw);
  require(v >= 0.0, ErrorCode::kConfig, key + ": must be >= 0");
  return v;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(ErrorCode::kConfig, key + ": expected true or false, got '" + raw + "'");
}

std::vector<std::size_t> to_sizes(const std::string& key, const std::string& raw) {
  std::vector<std::size_t> out;
  for (const auto& part : split(raw)) out.push_back(to_positive(key, part));
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  for (const auto& part : split(raw)) out.push_back(to_double(key, part));
  return out;
}

ModelKind to_model(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "fc_net" || v == "fc") return ModelKind::kFcNet;
  if (v == "conv_net" || v == "conv") return ModelKind::kConvNet;
  fail(ErrorCode::kConfig, key + ": unknown model '" + raw + "' (fc_net, conv_net)");
}

SyntheticKind to_kind(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "orth_vectors") return SyntheticKind::kOrthVectors;
  if (v == "orth_frequencies") return SyntheticKind::kOrthFrequencies;
  fail(ErrorCode::kConfig,
       key + ": unknown dataset '" + raw + "' (orth_vectors, orth_frequencies)");
}

SearchStrategy to_strategy(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "line") return SearchStrategy::kGradientLine;
  if (v == "pgd") return SearchStrategy::kPgdRefresh;
  if (v == "combined") return SearchStrategy::kCombined;
  fail(ErrorCode::kConfig, key + ": unknown strategy '" + raw + "' (line, pgd, combined)");
}

template <class C>
using Setters = std::map<std::string, std::function<void(C&, const std::string&, const std::string&)>>;

// Shared key groups. `q` is registered by each experiment because figure1
// also uses it for the kernel.
template <class C>
void add_net_keys(Setters<C>& s) {
  s["width"] = [](C& c, auto& k, auto& v) { c.net.width = to_positive(k, v); };
  s["max_steps"] = [](C& c, auto& k, auto& v) { c.net.max_steps = to_positive(k, v); };
  s["target_loss"] = [](C& c, auto& k, auto& v) { c.net.target_loss = to_nonneg(k, v); };
  s["learning_rate"] = [](C& c, auto& k, auto& v) { c.net.learning_rate = to_nonneg(k, v); };
  s["train_output_layer"] = [](C& c, auto& k, auto& v) { c.net.train_output_layer = to_bool(k, v); };
  s["antithetic_init"] = [](C& c, auto& k, auto& v) { c.net.antithetic_init = to_bool(k, v); };
}

template <class C>
void add_search_keys(Setters<C>& s) {
  s["search_strategy"] = [](C& c, auto& k, auto& v) { c.search.strategy = to_strategy(k, v); };
  s["max_radius"] = [](C& c, auto& k, auto& v) {
    c.search.max_radius = to_nonneg(k, v);
    require(c.search.max_radius > 0.0, ErrorCode::kConfig, k + ": must be positive");
  };
  s["tolerance"] = [](C& c, auto& k, auto& v) {
    c.search.tolerance = to_nonneg(k, v);
    require(c.search.tolerance > 0.0, ErrorCode::kConfig, k + ": must be positive");
  };
  s["pgd_steps"] = [](C& c, auto& k, auto& v) { c.search.pgd_steps = to_positive(k, v); };
  s["pgd_restarts"] = [](C& c, auto& k, auto& v) { c.search.pgd_restarts = to_positive(k, v); };
  s["radius_bisections"] = [](C& c, auto& k, auto& v) {
    c.search.radius_bisections = to_uint(k, v);
  };
}

template <class C>
void add_run_keys(Setters<C>& s, bool threaded = true) {
  s["seed"] = [](C& c, auto& k, auto& v) { c.seed = to_uint(k, v); };
  if constexpr (requires(C c) { c.threads; }) {
    if (threaded) s["threads"] = [](C& c, auto& k, auto& v) { c.threads = to_uint(k, v); };
  }
}

const Setters<Figure1Config>& figure1_keys() {
  static const auto s = [] {
    Setters<Figure1Config> s;
    add_run_keys(s);
    add_net_keys(s);
    add_search_keys(s);
    s["dims"] = [](auto& c, auto& k, auto& v) { c.dims = to_sizes(k, v); };
    s["q"] = [](auto& c, auto& k, auto& v) { c.q = c.net.q = to_uint(k, v); };
    s["nets"] = [](auto& c, auto& k, auto& v) { c.nets = to_bool(k, v); };
    return s;
  }();
  return s;
}

const Setters<MarginConfig>& margin_keys() {
  static const auto s = [] {
    Setters<MarginConfig> s;
    add_run_keys(s);
    s["dims"] = [](auto& c, auto& k, auto& v) { c.dims = to_sizes(k, v); };
    s["instances"] = [](auto& c, auto& k, auto& v) { c.instances = to_uint(k, v); };
    s["max_instance_dim"] = [](auto& c, auto& k, auto& v) { c.max_instance_dim = to_positive(k, v); };
    s["max_per_class"] = [](auto& c, auto& k, auto& v) { c.max_per_class = to_positive(k, v); };
    s["min_gap"] = [](auto& c, auto& k, auto& v) { c.min_gap = to_nonneg(k, v); };
    return s;
  }();
  return s;
}

const Setters<SyntheticConfig>& synthetic_keys() {
  static const auto s = [] {
    Setters<SyntheticConfig> s;
    add_run_keys(s);
    add_net_keys(s);
    add_search_keys(s);
    s["q"] = [](auto& c, auto& k, auto& v) { c.net.q = to_uint(k, v); };
    s["kinds"] = [](auto& c, auto& k, auto& v) {
      c.kinds.clear();
      for (const auto& part : split(v)) c.kinds.push_back(to_kind(k, part));
    };
    s["ns"] = [](auto& c, auto& k, auto& v) { c.ns = to_sizes(k, v); };
    s["d"] = [](auto& c, auto& k, auto& v) { c.d = to_positive(k, v); };
    s["models"] = [](auto& c, auto& k, auto& v) {
      c.models.clear();
      for (const auto& part : split(v)) c.models.push_back(to_model(k, part));
    };
    s["seeds"] = [](auto& c, auto& k, auto& v) { c.seeds = to_positive(k, v); };
    return s;
  }();
  return s;
}

const Setters<CommonConfig>& common_keys() {
  static const auto s = [] {
    Setters<CommonConfig> s;
    add_run_keys(s);
    add_net_keys(s);
    add_search_keys(s);
    s["q"] = [](auto& c, auto& k, auto& v) { c.net.q = to_uint(k, v); };
    s["ns"] = [](auto& c, auto& k, auto& v) { c.ns = to_sizes(k, v); };
    s["d"] = [](auto& c, auto& k, auto& v) { c.d = to_positive(k, v); };
    s["ps"] = [](auto& c, auto& k, auto& v) { c.ps = to_doubles(k, v); };
    s["model"] = [](auto& c, auto& k, auto& v) { c.model = to_model(k, v); };
    s["seeds"] = [](auto& c, auto& k, auto& v) { c.seeds = to_positive(k, v); };
    return s;
  }();
  return s;
}

const Setters<HighdimConfig>& highdim_keys() {
  static const auto s = [] {
    Setters<HighdimConfig> s;
    add_run_keys(s);
    s["d"] = [](auto& c, auto& k, auto& v) { c.d = to_positive(k, v); };
    s["ns"] = [](auto& c, auto& k, auto& v) { c.ns = to_sizes(k, v); };
    s["seeds"] = [](auto& c, auto& k, auto& v) { c.seeds = to_positive(k, v); };
    return s;
  }();
  return s;
}

const Setters<ConsistencyConfig>& consistency_keys() {
  static const auto s = [] {
    Setters<ConsistencyConfig> s;
    add_run_keys(s);
    add_net_keys(s);
    s["q"] = [](auto& c, auto& k, auto& v) { c.net.q = to_uint(k, v); };
    s["d"] = [](auto& c, auto& k, auto& v) { c.d = to_positive(k, v); };
    s["n"] = [](auto& c, auto& k, auto& v) { c.n = to_positive(k, v); };
    s["trials"] = [](auto& c, auto& k, auto& v) { c.trials = to_positive(k, v); };
    return s;
  }();
  return s;
}

const Setters<BridgeConfig>& bridge_keys() {
  static const auto s = [] {
    Setters<BridgeConfig> s;
    add_run_keys(s);
    s["d"] = [](auto& c, auto& k, auto& v) { c.d = to_positive(k, v); };
    s["widths"] = [](auto& c, auto& k, auto& v) { c.widths = to_sizes(k, v); };
    s["probes"] = [](auto& c, auto& k, auto& v) { c.probes = to_positive(k, v); };
    s["seeds"] = [](auto& c, auto& k, auto& v) { c.seeds = to_positive(k, v); };
    s["max_steps"] = [](auto& c, auto& k, auto& v) { c.max_steps = to_positive(k, v); };
    s["target_loss"] = [](auto& c, auto& k, auto& v) { c.target_loss = to_nonneg(k, v); };
    return s;
  }();
  return s;
}

const Setters<VerifyOptions>& verify_keys() {
  static const auto s = [] {
    Setters<VerifyOptions> s;
    add_run_keys(s);
    s["filter"] = [](auto& c, auto&, auto& v) { c.filter = trim(v); };
    s["break_ntk_symmetry"] = [](auto& c, auto& k, auto& v) { c.break_ntk_symmetry = to_bool(k, v); };
    return s;
  }();
  return s;
}

template <class C>
const Setters<C>& keys_for();
template <> const Setters<Figure1Config>& keys_for() { return figure1_keys(); }
template <> const Setters<MarginConfig>& keys_for() { return margin_keys(); }
template <> const Setters<SyntheticConfig>& keys_for() { return synthetic_keys(); }
template <> const Setters<CommonConfig>& keys_for() { return common_keys(); }
template <> const Setters<HighdimConfig>& keys_for() { return highdim_keys(); }
template <> const Setters<ConsistencyConfig>& keys_for() { return consistency_keys(); }
template <> const Setters<BridgeConfig>& keys_for() { return bridge_keys(); }
template <> const Setters<VerifyOptions>& keys_for() { return verify_keys(); }

}  // namespace

const std::vector<std::string>& ExperimentSetup::experiment_names() {
  static const std::vector<std::string> names{"figure1", "margin",      "synthetic", "common",
                                              "highdim", "consistency", "bridge",    "verify"};
  return names;
}

ExperimentSetup::ExperimentSetup(const std::string& name) : name_(name) {
  if (name == "figure1") settings_ = Figure1Config{};
  else if (name == "margin") settings_ = MarginConfig{};
  else if (name == "synthetic") settings_ = SyntheticConfig{};
  else if (name == "common") settings_ = CommonConfig{};
  else if (name == "highdim") settings_ = HighdimConfig{};
  else if (name == "consistency") settings_ = ConsistencyConfig{};
  else if (name == "bridge") settings_ = BridgeConfig{};
  else if (name == "verify") settings_ = VerifyOptions{};
  else fail(ErrorCode::kConfig, "unknown experiment '" + name + "'");
}

void ExperimentSetup::set(const std::string& key, const std::string& value) {
  std::visit(
      [&](auto& cfg) {
        const auto& table = keys_for<std::decay_t<decltype(cfg)>>();
        const auto it = table.find(key);
        require(it != table.end(), ErrorCode::kConfig,
                "unknown key '" + key + "' for experiment " + name_);
        it->second(cfg, key, value);
      },
      settings_);
}

bool ExperimentSetup::accepts(const std::string& key) const {
  return std::visit(
      [&](const auto& cfg) { return keys_for<std::decay_t<decltype(cfg)>>().count(key) > 0; },
      settings_);
}

std::vector<std::string> ExperimentSetup::keys() const {
  return std::visit(
      [](const auto& cfg) {
        std::vector<std::string> out;
        for (const auto& [k, _] : keys_for<std::decay_t<decltype(cfg)>>()) out.push_back(k);
        return out;
      },
      settings_);
}

ExperimentReport ExperimentSetup::run() const {
  return std::visit(
      [](const auto& cfg) -> ExperimentReport {
        using C = std::decay_t<decltype(cfg)>;
        if constexpr (std::is_same_v<C, Figure1Config>) return run_figure1(cfg);
        else if constexpr (std::is_same_v<C, MarginConfig>) return run_margin(cfg);
        else if constexpr (std::is_same_v<C, SyntheticConfig>) return run_synthetic(cfg);
        else if constexpr (std::is_same_v<C, CommonConfig>) return run_common_component(cfg);
        else if constexpr (std::is_same_v<C, HighdimConfig>) return run_highdim(cfg);
        else if constexpr (std::is_same_v<C, ConsistencyConfig>) return run_consistency(cfg);
        else if constexpr (std::is_same_v<C, BridgeConfig>) return run_bridge(cfg);
        else return run_verify(cfg);
      },
      settings_);
}

}  // namespace shiftlab
