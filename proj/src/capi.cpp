#include "shiftlab/shiftlab.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <functional>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "config.hpp"
#include "error.hpp"
#include "kernels.hpp"
#include "margin.hpp"
#include "report_io.hpp"
#include "signals.hpp"
#include "verify.hpp"

struct sl_experiment {
  shiftlab::ExperimentSetup setup;
  std::vector<std::string> keys;
};

struct sl_report {
  shiftlab::ExperimentReport report;
};

namespace {

using shiftlab::ErrorCode;

thread_local std::string g_last_error;

sl_status record(sl_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs fn and maps exceptions onto status codes.
template <class F>
sl_status guarded(F&& fn) {
  try {
    fn();
    return SL_OK;
  } catch (const shiftlab::Error& e) {
    return record(static_cast<sl_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return record(SL_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(SL_INTERNAL, e.what());
  } catch (...) {
    return record(SL_INTERNAL, "unknown error");
  }
}

sl_status null_arg(const char* what) {
  return record(SL_INVALID_ARGUMENT, std::string(what) + " is NULL");
}

sl_status copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size();
  if (buf && cap > 0) {
    const size_t n = std::min(cap - 1, s.size());
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
  }
  return SL_OK;
}

sl_status write_file(const char* path, const std::function<void(std::ostream&)>& body) {
  if (!path) return null_arg("path");
  return guarded([&] {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    shiftlab::require(static_cast<bool>(out), ErrorCode::kIo,
                      std::string("cannot open ") + path + " for writing");
    body(out);
    out.close();
    shiftlab::require(!out.fail(), ErrorCode::kIo, std::string("write to ") + path + " failed");
  });
}

std::vector<shiftlab::Signal> rows_of(const double* data, size_t n, size_t d) {
  std::vector<shiftlab::Signal> out;
  for (size_t i = 0; i < n; ++i) out.emplace_back(std::vector<double>(data + i * d, data + (i + 1) * d));
  return out;
}

}  // namespace

extern "C" {

const char* sl_version(void) { return shiftlab::kToolVersion; }

const char* sl_last_error(void) { return g_last_error.c_str(); }

const char* sl_status_name(sl_status status) {
  switch (status) {
    case SL_OK: return "ok";
    case SL_INVALID_ARGUMENT: return "invalid argument";
    case SL_SHAPE_MISMATCH: return "shape mismatch";
    case SL_SINGULAR: return "singular";
    case SL_NOT_CONVERGED: return "not converged";
    case SL_DIVERGED: return "diverged";
    case SL_DATA: return "data error";
    case SL_IO: return "i/o error";
    case SL_CONFIG: return "config error";
    case SL_UNSUPPORTED: return "unsupported";
    case SL_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* sl_experiment_name_at(size_t index) {
  const auto& names = shiftlab::ExperimentSetup::experiment_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

sl_status sl_experiment_create(const char* name, sl_experiment** out) {
  if (!name) return null_arg("name");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { shiftlab::ExperimentSetup setup(name);
    auto keys = setup.keys();
    *out = new sl_experiment{std::move(setup), std::move(keys)}; });
}

void sl_experiment_destroy(sl_experiment* exp) { delete exp; }

sl_status sl_experiment_set(sl_experiment* exp, const char* key, const char* value) {
  if (!exp) return null_arg("experiment");
  if (!key) return null_arg("key");
  if (!value) return null_arg("value");
  return guarded([&] { exp->setup.set(key, value); });
}

int sl_experiment_accepts(const sl_experiment* exp, const char* key) {
  return exp && key && exp->setup.accepts(key) ? 1 : 0;
}

const char* sl_experiment_key_at(const sl_experiment* exp, size_t index) {
  return exp && index < exp->keys.size() ? exp->keys[index].c_str() : nullptr;
}

sl_status sl_experiment_run(const sl_experiment* exp, sl_report** out) {
  if (!exp) return null_arg("experiment");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new sl_report{exp->setup.run()}; });
}

void sl_report_destroy(sl_report* report) { delete report; }

size_t sl_report_rows(const sl_report* report) { return report ? report->report.rows.size() : 0; }

size_t sl_report_columns(const sl_report* report) {
  return report ? report->report.columns.size() : 0;
}

double sl_report_wall_seconds(const sl_report* report) {
  return report ? report->report.wall_seconds : 0.0;
}

sl_status sl_report_column_name(const sl_report* report, size_t col, char* buf, size_t cap,
                                size_t* needed) {
  if (!report) return null_arg("report");
  if (col >= report->report.columns.size()) return record(SL_INVALID_ARGUMENT, "column out of range");
  return copy_out(report->report.columns[col], buf, cap, needed);
}

sl_status sl_report_cell(const sl_report* report, size_t row, size_t col, char* buf, size_t cap,
                         size_t* needed) {
  if (!report) return null_arg("report");
  const auto& r = report->report;
  if (row >= r.rows.size() || col >= r.rows[row].size())
    return record(SL_INVALID_ARGUMENT, "cell out of range");
  return copy_out(shiftlab::format_cell(r.rows[row][col]), buf, cap, needed);
}

sl_status sl_report_csv(const sl_report* report, char* buf, size_t cap, size_t* needed) {
  if (!report) return null_arg("report");
  std::string text;
  const sl_status s = guarded([&] { text = shiftlab::to_csv(report->report); });
  return s == SL_OK ? copy_out(text, buf, cap, needed) : s;
}

int sl_report_has_plot(const sl_report* report) {
  return report && !report->report.plot.x.empty() && !report->report.plot.y.empty() ? 1 : 0;
}

sl_status sl_report_write_csv(const sl_report* report, const char* path) {
  if (!report) return null_arg("report");
  return write_file(path, [&](std::ostream& out) { shiftlab::write_csv(report->report, out); });
}

sl_status sl_report_write_svg(const sl_report* report, const char* path) {
  if (!report) return null_arg("report");
  if (!sl_report_has_plot(report))
    return record(SL_UNSUPPORTED, "experiment '" + report->report.name + "' has no plot");
  return write_file(path, [&](std::ostream& out) { shiftlab::write_svg(report->report, out); });
}

size_t sl_report_failures(const sl_report* report) {
  if (!report) return 0;
  const auto& cols = report->report.columns;
  if (std::find(cols.begin(), cols.end(), "status") == cols.end()) return 0;
  size_t n = 0;
  const size_t col = report->report.column("status");
  for (const auto& row : report->report.rows) n += shiftlab::format_cell(row[col]) == "fail";
  return n;
}

sl_status sl_circular_shift(const double* x, size_t d, size_t s, double* out) {
  if (!x || !out) return null_arg("x or out");
  return guarded([&] {
    shiftlab::require(d > 0 && s < d, ErrorCode::kInvalidArgument, "shift must satisfy s < d");
    const auto y = shiftlab::circular_shift(shiftlab::Signal({x, x + d}), s);
    std::copy(y.vec().begin(), y.vec().end(), out);
  });
}

sl_status sl_dc_component(const double* x, size_t d, double* out) {
  if (!x || !out) return null_arg("x or out");
  return guarded([&] {
    shiftlab::require(d > 0, ErrorCode::kInvalidArgument, "empty signal");
    *out = shiftlab::dc_component({x, d});
  });
}

sl_status sl_ntk_fc(const double* z, const double* x, size_t d, double* out) {
  if (!z || !x || !out) return null_arg("z, x or out");
  return guarded([&] { *out = shiftlab::ntk_fc({z, d}, {x, d}); });
}

sl_status sl_cntk_gap(const double* z, const double* x, size_t d, size_t q, double* out) {
  if (!z || !x || !out) return null_arg("z, x or out");
  return guarded([&] { *out = shiftlab::cntk_gap({z, d}, {x, d}, q); });
}

sl_status sl_orbit_margin(const double* pos, size_t n_pos, const double* neg, size_t n_neg,
                          size_t d, int* separable, double* margin) {
  if (!pos || !neg || !separable || !margin) return null_arg("argument");
  return guarded([&] {
    const auto r = shiftlab::orbit_margin(
        shiftlab::LabeledSet(rows_of(pos, n_pos, d), rows_of(neg, n_neg, d)));
    *separable = r.separable ? 1 : 0;
    *margin = r.margin;
  });
}

}  // extern "C"
