#include "attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "error.hpp"
#include "rng.hpp"
#include "signals.hpp"

namespace shiftlab {

namespace {

using Vec = std::vector<double>;

void check_label(int y) {
  require(y == 1 || y == -1, ErrorCode::kInvalidArgument, "label must be +1 or -1");
}

void check_dim(const Classifier& c, std::span<const double> x) {
  require(c.dim == 0 || c.dim == x.size(), ErrorCode::kShapeMismatch,
          "input has dimension " + std::to_string(x.size()) + ", classifier expects " +
              std::to_string(c.dim));
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double linf_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Per-call query counter around a classifier.
struct Oracle {
  const Classifier& c;
  int y;
  std::size_t queries = 0;

  double loss(std::span<const double> z) {
    ++queries;
    const double g = c(z);
    require(std::isfinite(g), ErrorCode::kData, "classifier returned a non-finite value");
    return -static_cast<double>(y) * g;
  }
  bool flipped(std::span<const double> z) {
    ++queries;
    const double g = c(z);
    require(std::isfinite(g), ErrorCode::kData, "classifier returned a non-finite value");
    return label_of(g) != y;
  }
  Vec grad(std::span<const double> z) {
    ++queries;
    return gradient(c, z);
  }
};

void project(Vec& z, std::span<const double> x, Norm kind, double eps) {
  if (kind == Norm::kLinf) {
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::clamp(z[i], x[i] - eps, x[i] + eps);
    return;
  }
  const double r = distance(z, x);
  if (r > eps) {
    const double s = eps / r;
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] + (z[i] - x[i]) * s;
  }
}

Vec random_start(std::span<const double> x, Norm kind, double eps, Rng& rng) {
  const std::size_t d = x.size();
  Vec z(x.begin(), x.end());
  if (kind == Norm::kLinf) {
    std::uniform_real_distribution<double> u(-eps, eps);
    for (std::size_t i = 0; i < d; ++i) z[i] += u(rng);
    return z;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec dir(d);
  double len = 0.0;
  while (len == 0.0) {
    for (double& v : dir) v = normal(rng);
    len = norm(dir);
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = eps * std::pow(u(rng), 1.0 / static_cast<double>(d));
  for (std::size_t i = 0; i < d; ++i) z[i] += r * dir[i] / len;
  return z;
}

// Bisection on t in [lo, hi] for the point x + t * dir, with a flip at hi and
// none at lo. Returns the flipped end.
double bisect_line(Oracle& o, std::span<const double> x, const Vec& dir, double lo,
                   double hi, double tol) {
  Vec z(x.size());
  // Bracket to tol/4 so the returned (flipped) end is within tol of the crossing
  // with room to spare for rounding in the caller's distance.
  while (hi - lo > 0.25 * tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] + mid * dir[i];
    if (o.flipped(z)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

struct Flip {
  double radius = std::numeric_limits<double>::infinity();
  Vec point;
};

Flip along(std::span<const double> x, const Vec& dir, double t) {
  Flip f{t, Vec(x.size())};
  for (std::size_t i = 0; i < x.size(); ++i) f.point[i] = x[i] + t * dir[i];
  return f;
}

Flip gradient_line(Oracle& o, std::span<const double> x, const SearchConfig& cfg) {
  Vec g = o.grad(x);
  const double gn = norm(g);
  if (gn == 0.0) return {};
  Vec dir(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) dir[i] = -static_cast<double>(o.y) * g[i] / gn;

  // First guess: the linearised boundary distance.
  const double guess = std::abs(o.c(x)) / gn;
  double lo = 0.0;
  double hi = std::clamp(guess, cfg.tolerance, cfg.max_radius);
  Vec z(x.size());
  auto flips_at = [&](double t) {
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] + t * dir[i];
    return o.flipped(z);
  };
  while (!flips_at(hi)) {
    if (hi >= cfg.max_radius) return {};
    lo = hi;
    hi = std::min(2.0 * hi, cfg.max_radius);
  }
  return along(x, dir, bisect_line(o, x, dir, lo, hi, cfg.tolerance));
}

Flip pgd_refresh(const Classifier& c, Oracle& o, std::span<const double> x,
                 const SearchConfig& cfg, double known_flip) {
  AttackConfig ac;
  ac.norm = Norm::kL2;
  ac.steps = cfg.pgd_steps;
  ac.restarts = cfg.pgd_restarts;
  ac.seed = cfg.seed;

  Flip best;
  auto attempt = [&](double eps) {
    ac.epsilon = eps;
    ac.step_size = 0.0;
    AttackResult r = pgd(c, x, o.y, ac);
    o.queries += r.queries;
    if (!r.success) return false;
    // Tighten along the segment x -> adversarial point.
    const double len = distance(r.adversarial_point, x);
    if (len == 0.0) return true;
    Vec dir(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) dir[i] = (r.adversarial_point[i] - x[i]) / len;
    const double t = bisect_line(o, x, dir, 0.0, len, cfg.tolerance);
    if (t < best.radius) best = along(x, dir, t);
    return true;
  };

  double lo = 0.0;
  double hi;
  if (std::isfinite(known_flip)) {
    hi = known_flip;
  } else {
    hi = std::min(0.01 * (1.0 + norm(x)), cfg.max_radius);
    while (!attempt(hi)) {
      if (hi >= cfg.max_radius) return best;
      lo = hi;
      hi = std::min(2.0 * hi, cfg.max_radius);
    }
  }
  for (std::size_t k = 0; k < cfg.radius_bisections; ++k) {
    const double mid = 0.5 * (lo + std::min(hi, best.radius));
    if (attempt(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return best;
}

}  // namespace

std::vector<double> finite_difference_gradient(const Classifier& c, std::span<const double> z,
                                               double h) {
  check_dim(c, z);
  if (h <= 0.0) h = 1e-5 * (1.0 + norm(z));
  Vec p(z.begin(), z.end());
  Vec g(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double orig = p[i];
    p[i] = orig + h;
    const double up = c(p);
    p[i] = orig - h;
    const double down = c(p);
    p[i] = orig;
    g[i] = (up - down) / (2.0 * h);
    require(std::isfinite(g[i]), ErrorCode::kData, "non-finite finite-difference gradient");
  }
  return g;
}

std::vector<double> gradient(const Classifier& c, std::span<const double> z) {
  check_dim(c, z);
  if (!c.has_gradient()) return finite_difference_gradient(c, z);
  Vec g = c.gradient(z);
  require(g.size() == z.size(), ErrorCode::kShapeMismatch, "gradient has wrong dimension");
  for (double v : g) require(std::isfinite(v), ErrorCode::kData, "non-finite gradient");
  return g;
}

AttackResult pgd(const Classifier& c, std::span<const double> x, int y,
                 const AttackConfig& cfg) {
  check_label(y);
  check_dim(c, x);
  require(std::isfinite(cfg.epsilon) && cfg.epsilon >= 0.0, ErrorCode::kInvalidArgument,
          "epsilon must be nonnegative");
  require(cfg.steps >= 1 && cfg.restarts >= 1, ErrorCode::kInvalidArgument,
          "pgd needs steps >= 1 and restarts >= 1");
  const double step = cfg.step_size > 0.0 ? cfg.step_size : cfg.epsilon / 5.0;

  Oracle o{c, y};
  AttackResult res;
  res.adversarial_point.assign(x.begin(), x.end());
  if (o.flipped(x)) {
    res.success = true;
    res.queries = o.queries;
    return res;
  }
  if (cfg.epsilon == 0.0) {
    res.queries = o.queries;
    return res;
  }

  Rng rng(cfg.seed);
  double best_loss = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    Vec z = r == 0 ? Vec(x.begin(), x.end()) : random_start(x, cfg.norm, cfg.epsilon, rng);
    for (std::size_t s = 0; s < cfg.steps; ++s) {
      const Vec g = o.grad(z);
      if (cfg.norm == Norm::kLinf) {
        for (std::size_t i = 0; i < z.size(); ++i) {
          const double ascent = -static_cast<double>(y) * g[i];
          z[i] += step * static_cast<double>((ascent > 0.0) - (ascent < 0.0));
        }
      } else {
        const double gn = norm(g);
        if (gn == 0.0) break;
        for (std::size_t i = 0; i < z.size(); ++i) z[i] -= step * static_cast<double>(y) * g[i] / gn;
      }
      project(z, x, cfg.norm, cfg.epsilon);
    }
    const double loss = o.loss(z);
    if (loss > best_loss) {
      best_loss = loss;
      res.adversarial_point = z;
    }
  }
  res.success = label_of(-static_cast<double>(y) * best_loss) != y;
  res.perturbation_norm = cfg.norm == Norm::kLinf ? linf_distance(res.adversarial_point, x)
                                                  : distance(res.adversarial_point, x);
  res.queries = o.queries;
  return res;
}

double minimal_distance_linear(const Classifier& c, std::span<const double> x) {
  check_dim(c, x);
  const std::size_t d = x.size();
  // Affinity probe: g(x + a u + b v) - g(x) == a (g(x+u) - g(x)) + b (g(x+v) - g(x)).
  Rng rng(0x5eed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = 1.0 + norm(x);
  const double g0 = c(x);
  for (int trial = 0; trial < 4; ++trial) {
    Vec u(d), v(d), w(d);
    const double a = normal(rng), b = normal(rng);
    for (std::size_t i = 0; i < d; ++i) {
      u[i] = x[i] + scale * normal(rng);
      v[i] = x[i] + scale * normal(rng);
      w[i] = x[i] + a * (u[i] - x[i]) + b * (v[i] - x[i]);
    }
    const double gu = c(u) - g0, gv = c(v) - g0, gw = c(w) - g0;
    const double expect = a * gu + b * gv;
    const double tol = 1e-8 * (1.0 + std::abs(g0) + std::abs(a * gu) + std::abs(b * gv));
    require(std::abs(gw - expect) <= tol, ErrorCode::kUnsupported,
            "minimal_distance_linear: classifier '" + c.name + "' is not affine");
  }
  const Vec g = gradient(c, x);
  const double gn = norm(g);
  require(gn > 0.0, ErrorCode::kInvalidArgument, "minimal_distance_linear: zero gradient");
  return std::abs(g0) / gn;
}

AttackResult minimal_distance_search(const Classifier& c, std::span<const double> x, int y,
                                     const SearchConfig& cfg) {
  check_label(y);
  check_dim(c, x);
  require(cfg.max_radius > 0.0 && cfg.tolerance > 0.0, ErrorCode::kInvalidArgument,
          "search needs positive max_radius and tolerance");
  Oracle o{c, y};
  AttackResult res;
  res.adversarial_point.assign(x.begin(), x.end());
  if (o.flipped(x)) {
    res.success = true;
    res.queries = o.queries;
    return res;
  }

  Flip best;
  if (cfg.strategy != SearchStrategy::kPgdRefresh) best = gradient_line(o, x, cfg);
  if (cfg.strategy != SearchStrategy::kGradientLine) {
    Flip p = pgd_refresh(c, o, x, cfg, best.radius);
    if (p.radius < best.radius) best = std::move(p);
  }
  res.queries = o.queries;
  if (!std::isfinite(best.radius)) return res;
  res.success = true;
  res.adversarial_point = std::move(best.point);
  res.perturbation_norm = distance(res.adversarial_point, x);
  return res;
}

double robust_accuracy(const Classifier& c, const LabeledSet& data, const AttackConfig& cfg) {
  std::size_t kept = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.point(i).values();
    const int y = data.label(i);
    if (c.label(x) != y) continue;
    AttackConfig local = cfg;
    local.seed = mix_seed(cfg.seed, i);
    if (!pgd(c, x, y, local).success) ++kept;
  }
  return static_cast<double>(kept) / static_cast<double>(data.size());
}

}  // namespace shiftlab
