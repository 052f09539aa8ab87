#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "classifier.hpp"
#include "margin.hpp"

namespace shiftlab {

// Analytic gradient when the classifier has one, else central differences.
std::vector<double> gradient(const Classifier& c, std::span<const double> z);

// Central differences with step h; h <= 0 picks 1e-5 * (1 + |z|).
std::vector<double> finite_difference_gradient(const Classifier& c,
                                               std::span<const double> z,
                                               double h = 0.0);

enum class Norm { kL2, kLinf };

struct AttackConfig {
  Norm norm = Norm::kL2;
  double epsilon = 0.0;
  std::size_t steps = 10;
  double step_size = 0.0;  // 0 means epsilon / 5
  std::size_t restarts = 1;
  std::uint64_t seed = 0;
};

struct AttackResult {
  std::vector<double> adversarial_point;
  double perturbation_norm = 0.0;
  bool success = false;
  std::size_t queries = 0;  // decision plus gradient evaluations
};

// Maximises -y * g(z) over the epsilon ball around x. Restart 0 starts at x,
// later restarts at a uniform random point of the ball. The restart with the
// largest final loss is returned.
AttackResult pgd(const Classifier& c, std::span<const double> x, int y,
                 const AttackConfig& cfg);

// |g(x)| / |grad g| for affine g. Affinity is checked on random probes first
// (kUnsupported if it fails); a zero gradient is kInvalidArgument.
double minimal_distance_linear(const Classifier& c, std::span<const double> x);

enum class SearchStrategy {
  kGradientLine,  // bisect along the unit descent direction at x
  kPgdRefresh,    // L2 PGD at bisected radii, then bisect along the found segment
  kCombined,      // both; the smaller flip radius wins
};

struct SearchConfig {
  SearchStrategy strategy = SearchStrategy::kCombined;
  double max_radius = 10.0;
  double tolerance = 1e-6;
  std::size_t pgd_steps = 10;
  // Restarts beyond the first start uniformly in the ball; they matter for
  // positively homogeneous nets, where descent from x tends to collapse toward 0.
  std::size_t pgd_restarts = 3;
  std::size_t radius_bisections = 8;
  std::uint64_t seed = 0;
};

// Smallest flip radius found; an upper bound on the true minimal L2 distance.
// The reported point lies on the flipped side of the crossing.
AttackResult minimal_distance_search(const Classifier& c, std::span<const double> x, int y,
                                     const SearchConfig& cfg = {});

// Share of points still classified correctly after pgd. Point i attacks with
// seed mix_seed(cfg.seed, i).
double robust_accuracy(const Classifier& c, const LabeledSet& data, const AttackConfig& cfg);

}  // namespace shiftlab
