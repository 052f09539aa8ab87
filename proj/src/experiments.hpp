#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "attacks.hpp"
#include "classifier.hpp"
#include "margin.hpp"

namespace shiftlab {

struct ConsistencyReport {
  double percent = 0.0;
  std::size_t trials = 0;  // per sample
  std::uint64_t seed = 0;
};

// For every sample and trial, draws s uniformly from {0..d-1} and checks that
// the label of x^s equals the label of x. Sample i uses mix_seed(seed, i).
ConsistencyReport shift_consistency(const Classifier& c, const LabeledSet& data,
                                    std::size_t trials, std::uint64_t seed);

enum class DistanceMethod { kExactLinear, kSearch };

struct DistanceSummary {
  double mean = 0.0;  // over points where a flip was found
  std::size_t found = 0;
  std::size_t total = 0;
};

// Mean minimal L2 adversarial distance over all points. kExactLinear requires
// an affine classifier (kUnsupported otherwise).
DistanceSummary mean_adv_distance(const Classifier& c, const LabeledSet& data,
                                  DistanceMethod method, const SearchConfig& search = {});

// Runs fn(0..count-1) on up to `threads` workers (0 = hardware concurrency).
// Each index is handled exactly once; callers write results by index.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

// ---- reports ----

// Empty string marks a cell that does not apply to the row.
using Cell = std::variant<std::int64_t, std::uint64_t, double, std::string>;

struct PlotSpec {
  std::string x;                 // column on the horizontal axis
  std::vector<std::string> y;    // one polyline per column (and per series value)
  std::string series;            // optional column that splits rows into lines
  std::string filter_column;     // optional: only rows whose cell equals filter_value
  std::string filter_value;
  std::string y_label;
};

struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::uint64_t seed = 0;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  double wall_seconds = 0.0;  // not written to the CSV
  PlotSpec plot;

  std::size_t column(const std::string& name) const;
  const Cell& at(std::size_t row, const std::string& col) const;
  double number(std::size_t row, const std::string& col) const;
};

// Training settings shared by the pipelines that fit finite nets.
struct NetSettings {
  std::size_t width = 256;
  std::size_t q = 0;  // conv patch length, 0 = d
  std::size_t max_steps = 2000;
  double target_loss = 1e-4;
  double learning_rate = 0.0;  // 0 = suggest_learning_rate
  bool train_output_layer = false;
  bool antithetic_init = true;
};

enum class ModelKind { kFcNet, kConvNet };
std::string to_string(ModelKind m);

// Trains a net of the given kind on data and returns its classifier plus the
// training summary.
struct TrainedModel {
  Classifier classifier;
  std::size_t steps = 0;
  double final_loss = 0.0;
  double learning_rate = 0.0;
};
TrainedModel train_model(ModelKind kind, const LabeledSet& data, const NetSettings& net,
                         std::uint64_t init_seed);

struct Figure1Config {
  std::vector<std::size_t> dims{16, 64, 256, 1024};
  std::size_t q = 0;
  bool nets = false;  // also train finite nets and search their distances
  NetSettings net;
  SearchConfig search;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};
ExperimentReport run_figure1(const Figure1Config& cfg);

struct MarginConfig {
  std::vector<std::size_t> dims{4, 16, 64, 256};
  std::size_t instances = 50;  // random small instances checked against the oracle
  std::size_t max_instance_dim = 8;
  std::size_t max_per_class = 2;
  double min_gap = 0.1;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};
ExperimentReport run_margin(const MarginConfig& cfg);

enum class SyntheticKind { kOrthVectors, kOrthFrequencies };
std::string to_string(SyntheticKind k);

struct SyntheticConfig {
  std::vector<SyntheticKind> kinds{SyntheticKind::kOrthVectors, SyntheticKind::kOrthFrequencies};
  std::vector<std::size_t> ns{16};
  std::size_t d = 256;
  std::vector<ModelKind> models{ModelKind::kFcNet, ModelKind::kConvNet};
  NetSettings net;
  SearchConfig search;
  std::size_t seeds = 5;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};
ExperimentReport run_synthetic(const SyntheticConfig& cfg);

struct CommonConfig {
  std::vector<std::size_t> ns{16, 32};
  std::size_t d = 256;
  std::vector<double> ps{0.0, 0.3};
  ModelKind model = ModelKind::kFcNet;
  NetSettings net;
  SearchConfig search;
  std::size_t seeds = 5;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};
ExperimentReport run_common_component(const CommonConfig& cfg);

struct HighdimConfig {
  std::size_t d = 4096;
  std::vector<std::size_t> ns{64};
  std::size_t seeds = 10;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};
ExperimentReport run_highdim(const HighdimConfig& cfg);

struct ConsistencyConfig {
  std::size_t d = 16;
  std::size_t n = 4;  // orth_vectors class size
  std::size_t trials = 256;
  NetSettings net;
  std::uint64_t seed = 0;
};
ExperimentReport run_consistency(const ConsistencyConfig& cfg);

struct BridgeConfig {
  std::size_t d = 16;
  std::vector<std::size_t> widths{4096};
  std::size_t probes = 200;
  std::size_t seeds = 5;
  std::size_t max_steps = 5000;
  double target_loss = 1e-4;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};
// Trained conv nets on the dot pair against the antipodal CNTK classifier:
// per seed, the share of probes (uniform on the unit sphere) with equal labels.
ExperimentReport run_bridge(const BridgeConfig& cfg);

}  // namespace shiftlab
