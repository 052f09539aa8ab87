#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "classifier.hpp"
#include "margin.hpp"

namespace shiftlab {

// f(x) = v^T relu(W x), W is m x d.
struct FcNet {
  Eigen::MatrixXd w;
  Eigen::VectorXd v;

  std::size_t dim() const { return static_cast<std::size_t>(w.cols()); }
  std::size_t width() const { return static_cast<std::size_t>(w.rows()); }
};

// f(x) = (1/d) sum_i v^T relu(W patch_i(x)), W is m x q (one filter per row).
struct ConvGapNet {
  Eigen::MatrixXd w;
  Eigen::VectorXd v;
  std::size_t d = 0;

  std::size_t dim() const { return d; }
  std::size_t patch() const { return static_cast<std::size_t>(w.cols()); }
  std::size_t width() const { return static_cast<std::size_t>(w.rows()); }
};

double fc_forward(const FcNet& net, std::span<const double> x);
double conv_forward(const ConvGapNet& net, std::span<const double> x);

// d f / d x, with relu'(0) = 0.
std::vector<double> fc_input_gradient(const FcNet& net, std::span<const double> x);
std::vector<double> conv_input_gradient(const ConvGapNet& net, std::span<const double> x);

// Gradients with respect to the parameters, same shapes as the net.
struct ParamGradient {
  Eigen::MatrixXd w;
  Eigen::VectorXd v;
};
ParamGradient fc_param_gradient(const FcNet& net, std::span<const double> x);
ParamGradient conv_param_gradient(const ConvGapNet& net, std::span<const double> x);

// All parameters i.i.d. N(0,1); W row-major first, then v.
FcNet init_normal_fc(std::size_t d, std::size_t m, std::uint64_t seed);
ConvGapNet init_normal_conv(std::size_t d, std::size_t q, std::size_t m,
                            std::uint64_t seed);

// Units come in adjacent pairs (w, v), (w, -v) with w, v ~ N(0,1), so every
// parameter is marginally standard normal and the initial function is 0.
// m must be even.
FcNet init_antithetic_fc(std::size_t d, std::size_t m, std::uint64_t seed);
ConvGapNet init_antithetic_conv(std::size_t d, std::size_t q, std::size_t m,
                                std::uint64_t seed);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t steps = 1000;
  // Stop early once the loss is at or below this value; 0 runs every step.
  double target_loss = 0.0;
  // false keeps v at its initial value and trains W only.
  bool train_output_layer = true;
};

struct TrainTrace {
  std::vector<double> loss;  // loss before each step, then the final loss
  std::size_t steps_run = 0;
  double final_loss = 0.0;
};

// Full-batch gradient descent on (1/n) sum (f(x_i) - y_i)^2. Throws kDiverged
// when the loss exceeds 1e12 or stops being finite.
TrainTrace train_full_batch(FcNet& net, const LabeledSet& data, const TrainConfig& cfg);
TrainTrace train_full_batch(ConvGapNet& net, const LabeledSet& data, const TrainConfig& cfg);

// 0.9 * n / lambda_max of the empirical tangent kernel of the trainable
// parameters: the largest step for which linearised GD on the loss above is
// stable, with a 10% safety factor.
double suggest_learning_rate(const FcNet& net, const LabeledSet& data,
                             bool train_output_layer);
double suggest_learning_rate(const ConvGapNet& net, const LabeledSet& data,
                             bool train_output_layer);

Classifier net_classifier(FcNet net);
Classifier net_classifier(ConvGapNet net);

// Checkpoints: a text header line "shiftlab-net v1 <fc|conv> d=.. q=.. m=.."
// followed by little-endian doubles, W row-major then v.
void save_checkpoint(const FcNet& net, std::ostream& out);
void save_checkpoint(const ConvGapNet& net, std::ostream& out);
void save_checkpoint(const FcNet& net, const std::string& path);
void save_checkpoint(const ConvGapNet& net, const std::string& path);
FcNet load_fc_checkpoint(std::istream& in);
ConvGapNet load_conv_checkpoint(std::istream& in);
FcNet load_fc_checkpoint(const std::string& path);
ConvGapNet load_conv_checkpoint(const std::string& path);

}  // namespace shiftlab
