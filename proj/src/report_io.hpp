#pragma once

#include <iosfwd>
#include <string>

#include "experiments.hpp"

namespace shiftlab {

inline constexpr const char* kToolVersion = "0.1.0";

// Comment header (tool version, experiment, seed, every resolved parameter),
// then a header row and one line per report row. Doubles use 17 significant
// digits; cells containing commas or quotes are quoted.
void write_csv(const ExperimentReport& report, std::ostream& out);
std::string to_csv(const ExperimentReport& report);

// Static line plot of report.plot: axes, ticks, one polyline per series.
// Log-log when every plotted x and y is positive.
void write_svg(const ExperimentReport& report, std::ostream& out);

std::string format_cell(const Cell& c);

}  // namespace shiftlab
