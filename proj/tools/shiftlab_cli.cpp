// shiftlab command-line front end. Talks to the library through the C API only.
#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shiftlab/shiftlab.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRun = 1;
constexpr int kExitConfig = 2;

struct ExperimentDeleter {
  void operator()(sl_experiment* e) const { sl_experiment_destroy(e); }
};
struct ReportDeleter {
  void operator()(sl_report* r) const { sl_report_destroy(r); }
};
using ExperimentPtr = std::unique_ptr<sl_experiment, ExperimentDeleter>;
using ReportPtr = std::unique_ptr<sl_report, ReportDeleter>;

// Thrown for bad configuration (exit 2); the message is printed as is.
struct ConfigError {
  std::string message;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

ExperimentPtr make_experiment(const std::string& name) {
  sl_experiment* raw = nullptr;
  if (sl_experiment_create(name.c_str(), &raw) != SL_OK) throw ConfigError{sl_last_error()};
  return ExperimentPtr(raw);
}

void apply(sl_experiment* exp, const std::string& key, const std::string& value,
           const std::string& where) {
  if (!sl_experiment_accepts(exp, key.c_str()))
    throw ConfigError{where + "unknown key '" + key + "'"};
  if (sl_experiment_set(exp, key.c_str(), value.c_str()) != SL_OK)
    throw ConfigError{where + sl_last_error()};
}

// `key = value` lines; '#' starts a comment.
void apply_config_file(sl_experiment* exp, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError{"cannot read config file " + path};
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError{where + "expected 'key = value'"};
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError{where + "missing key"};
    apply(exp, key, trim(line.substr(eq + 1)), where);
  }
}

std::string cell(const sl_report* r, std::size_t row, std::size_t col) {
  std::size_t n = 0;
  sl_report_cell(r, row, col, nullptr, 0, &n);
  std::string s(n + 1, '\0');
  sl_report_cell(r, row, col, s.data(), s.size(), &n);
  s.resize(n);
  return s;
}

std::string column_name(const sl_report* r, std::size_t col) {
  std::size_t n = 0;
  sl_report_column_name(r, col, nullptr, 0, &n);
  std::string s(n + 1, '\0');
  sl_report_column_name(r, col, s.data(), s.size(), &n);
  s.resize(n);
  return s;
}

void print_table(const sl_report* r) {
  const std::size_t cols = sl_report_columns(r), rows = sl_report_rows(r);
  std::vector<std::size_t> width(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    width[c] = column_name(r, c).size();
    for (std::size_t i = 0; i < rows; ++i) width[c] = std::max(width[c], cell(r, i, c).size());
  }
  auto emit = [&](auto get) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string s = get(c);
      std::cout << s << std::string(width[c] - s.size() + 2, ' ');
    }
    std::cout << '\n';
  };
  emit([&](std::size_t c) { return column_name(r, c); });
  for (std::size_t i = 0; i < rows; ++i) emit([&](std::size_t c) { return cell(r, i, c); });
}

struct Options {
  std::string config_path;
  std::string outdir = ".";
  bool plots = false;
  std::map<std::string, CLI::Option*> key_opts;
  std::map<std::string, std::vector<std::string>> values;
};

// Defaults, then SHIFTLAB_SEED, then the config file, then flags.
int run(const std::string& name, Options& o) {
  ExperimentPtr exp = make_experiment(name);
  if (const char* env = std::getenv("SHIFTLAB_SEED"); env && *env)
    apply(exp.get(), "seed", env, "SHIFTLAB_SEED: ");
  if (!o.config_path.empty()) apply_config_file(exp.get(), o.config_path);
  for (const auto& [key, opt] : o.key_opts) {
    if (opt->count() == 0) continue;
    const auto& v = o.values[key];
    // A bare flag (no value) switches a boolean setting on.
    apply(exp.get(), key, v.empty() || v.back().empty() ? "true" : v.back(), "");
  }

  std::error_code ec;
  fs::create_directories(o.outdir, ec);
  if (!fs::is_directory(o.outdir, ec))
    throw ConfigError{"output directory " + o.outdir + " is not usable"};
  const fs::path csv = fs::path(o.outdir) / (name + ".csv");
  const fs::path svg = fs::path(o.outdir) / (name + ".svg");

  sl_report* raw = nullptr;
  if (const sl_status st = sl_experiment_run(exp.get(), &raw); st != SL_OK) {
    std::cerr << "shiftlab " << name << ": " << sl_status_name(st) << ": " << sl_last_error()
              << '\n';
    return kExitRun;
  }
  ReportPtr report(raw);

  const bool want_svg = o.plots && sl_report_has_plot(report.get());
  sl_status st = sl_report_write_csv(report.get(), csv.string().c_str());
  if (st == SL_OK && want_svg) st = sl_report_write_svg(report.get(), svg.string().c_str());
  if (st != SL_OK) {
    const std::string msg = sl_last_error();
    fs::remove(csv, ec);
    fs::remove(svg, ec);
    std::cerr << "shiftlab " << name << ": " << msg << '\n';
    return kExitRun;
  }

  if (name == "verify") {
    print_table(report.get());
    const std::size_t failures = sl_report_failures(report.get());
    std::cout << sl_report_rows(report.get()) - failures << " passed, " << failures
              << " failed\n";
    if (failures) return kExitRun;
  } else {
    std::printf("wrote %s (%zu rows, %.1f s)%s\n", csv.string().c_str(),
                sl_report_rows(report.get()), sl_report_wall_seconds(report.get()),
                want_svg ? (" and " + svg.string()).c_str() : "");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shift-invariance and adversarial-robustness experiments"};
  app.set_version_flag("--version", std::string(sl_version()));
  app.require_subcommand(1);

  std::map<std::string, Options> opts;
  for (std::size_t i = 0; const char* name = sl_experiment_name_at(i); ++i) {
    Options& o = opts[name];
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", o.config_path, "key = value settings file");
    sub->add_option("--outdir", o.outdir, "directory for CSV and SVG output")->capture_default_str();
    sub->add_flag("--plots", o.plots, "also write an SVG plot");

    ExperimentPtr probe = make_experiment(name);
    for (std::size_t k = 0; const char* key = sl_experiment_key_at(probe.get(), k); ++k) {
      std::string flag = "--" + std::string(key);
      std::string dashed = flag;
      std::replace(dashed.begin() + 2, dashed.end(), '_', '-');
      if (dashed != flag) flag += "," + dashed;
      o.key_opts[key] = sub->add_option(flag, o.values[key], std::string("setting '") + key + "'")
                            ->expected(0, 1)
                            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return run(name, opts[name]);
  } catch (const ConfigError& e) {
    std::cerr << "shiftlab " << name << ": " << e.message << '\n';
    return kExitConfig;
  }
}
