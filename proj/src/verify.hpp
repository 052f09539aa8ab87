#pragma once

#include <cstdint>
#include <string>

#include "experiments.hpp"

namespace shiftlab {

struct VerifyOptions {
  std::string filter;               // substring of "module/check"; empty runs all
  bool break_ntk_symmetry = false;  // fault injection for the harness self-test
  std::uint64_t seed = 0;
};

// Small-size property checks for every module. One row per check with
// columns module, check, status (pass/fail), value, tolerance, note.
ExperimentReport run_verify(const VerifyOptions& opts);

// Number of rows whose status is "fail".
std::size_t count_failures(const ExperimentReport& verify_report);

}  // namespace shiftlab
