#pragma once

// The self-conformal measure: the fixed-point operator S, its distribution
// function C, interval masses, and level-k atomic approximations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "selfconf/errors.hpp"
#include "selfconf/ifs.hpp"

namespace selfconf {

/// Piecewise-linear function on [0,1] given by breakpoints with
/// non-decreasing x. A repeated x encodes a jump; the value at the jump is
/// the right limit.
struct PiecewiseLinear {
  std::vector<double> x, y;

  static PiecewiseLinear identity() { return {{0.0, 1.0}, {0.0, 1.0}}; }

  double operator()(double t) const {
    auto it = std::upper_bound(x.begin(), x.end(), t);
    if (it == x.begin()) return y.front();
    const std::size_t k = static_cast<std::size_t>(it - x.begin()) - 1;
    if (k + 1 >= x.size()) return y.back();
    return interpolate(k, t);
  }

  double left_limit(double t) const {
    auto it = std::lower_bound(x.begin(), x.end(), t);
    if (it == x.end()) return y.back();
    const std::size_t k = static_cast<std::size_t>(it - x.begin());
    if (k == 0) return y.front();
    if (x[k] == t) return y[k];
    return interpolate(k - 1, t);
  }

 private:
  double interpolate(std::size_t k, double t) const {
    const double dx = x[k + 1] - x[k];
    if (dx <= 0.0) return y[k + 1];
    return y[k] + (y[k + 1] - y[k]) * (t - x[k]) / dx;
  }
};

/// sup |f - g| over [0,1], including one-sided limits at jumps.
inline double sup_distance(const PiecewiseLinear& f, const PiecewiseLinear& g) {
  std::vector<double> pts;
  pts.reserve(f.x.size() + g.x.size());
  std::merge(f.x.begin(), f.x.end(), g.x.begin(), g.x.end(), std::back_inserter(pts));
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double d = 0.0;
  for (double t : pts) {
    d = std::max(d, std::abs(f(t) - g(t)));
    d = std::max(d, std::abs(f.left_limit(t) - g.left_limit(t)));
  }
  return d;
}

/// S(f) = sum_i ( chi_{phi_i([0,1])} (e_i + (-1)^{e_i} f o phi_i^{-1}) + chi_{x > phi_i(1-e_i)} ) rho_i.
/// Exact for affine maps; for curved maps each segment is subdivided so its
/// image is no longer than max_segment and the result is the interpolant.
inline PiecewiseLinear apply_S(const IFSystem& system, const PiecewiseLinear& f,
                               double max_segment = 1.0 / 4096.0) {
  PiecewiseLinear out;
  auto push = [&out](double x, double y) {
    out.x.push_back(x);
    out.y.push_back(y);
  };
  const std::size_t m = system.size();
  if (system.image(0).lo > 0.0) {
    push(0.0, 0.0);
    push(system.image(0).lo, 0.0);
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < m; ++i) {
    const Map& phi = system.map(i);
    const bool e = system.reverses(i);
    const double rho = system.weight(i), base = system.weight_before(i);
    xs.clear();
    ys.clear();
    for (std::size_t k = 0; k < f.x.size(); ++k) {
      if (!phi.is_affine() && k > 0 && f.x[k] > f.x[k - 1]) {
        const double span = std::abs(phi(f.x[k]) - phi(f.x[k - 1]));
        const int pieces = static_cast<int>(std::ceil(span / max_segment));
        for (int p = 1; p < pieces; ++p) {
          const double s = f.x[k - 1] + (f.x[k] - f.x[k - 1]) * p / pieces;
          const double v = f.y[k - 1] + (f.y[k] - f.y[k - 1]) * p / pieces;
          xs.push_back(phi(s));
          ys.push_back(base + rho * (e ? 1.0 - v : v));
        }
      }
      xs.push_back(phi(f.x[k]));
      ys.push_back(base + rho * (e ? 1.0 - f.y[k] : f.y[k]));
    }
    if (e) {
      std::reverse(xs.begin(), xs.end());
      std::reverse(ys.begin(), ys.end());
    }
    // pin the image endpoints exactly
    xs.front() = system.image(i).lo;
    xs.back() = system.image(i).hi;
    for (std::size_t k = 0; k < xs.size(); ++k) push(xs[k], ys[k]);
    const double after = base + rho;
    const double next_lo = (i + 1 < m) ? system.image(i + 1).lo : 1.0;
    if (next_lo > system.image(i).hi || i + 1 == m) {
      push(system.image(i).hi, after);
      if (next_lo > system.image(i).hi) push(next_lo, after);
    }
  }
  return out;
}

/// S(f)(t) for an arbitrary callable f.
inline double apply_S_at(const IFSystem& system, const std::function<double(double)>& f, double t) {
  double value = 0.0;
  for (std::size_t i = 0; i < system.size(); ++i) {
    const Interval& img = system.image(i);
    const bool e = system.reverses(i);
    if (img.contains(t)) {
      const double u = std::clamp(system.map(i).inverse(t), 0.0, 1.0);
      value += system.weight(i) * ((e ? 1.0 : 0.0) + (e ? -1.0 : 1.0) * f(u));
    }
    if (t > img.hi) value += system.weight(i);
  }
  return value;
}

/// C(t) within eps, by descent through the first-level images: inside
/// phi_i([0,1]) use C = sum_{j<i} rho_j + rho_i (e_i + (-1)^{e_i} C(phi_i^{-1} t)),
/// in a gap return the cumulative weight, stop once the remaining weight
/// factor is below eps and return the midpoint of the bracket.
inline double cdf_eval(const IFSystem& system, double t, double eps) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("cdf_eval: t must lie in [0,1]");
  if (!(eps > 0.0)) throw std::invalid_argument("cdf_eval: eps must be positive");
  double base = 0.0, factor = 1.0, u = t;
  const std::size_t m = system.size();
  while (std::abs(factor) >= eps) {
    if (u <= 0.0) return base;
    if (u >= 1.0) return base + factor;
    std::size_t i = 0;
    while (i < m && u > system.image(i).hi) ++i;
    if (i == m || u < system.image(i).lo) return base + factor * system.weight_before(i);
    const bool e = system.reverses(i);
    base += factor * (system.weight_before(i) + (e ? system.weight(i) : 0.0));
    factor *= e ? -system.weight(i) : system.weight(i);
    u = std::clamp(system.map(i).inverse(u), 0.0, 1.0);
  }
  return base + 0.5 * factor;
}

/// Distribution function of mu at a fixed tolerance.
class CdfApprox {
 public:
  CdfApprox(const IFSystem& system, double eps) : sys_(&system), eps_(eps) {}
  double operator()(double t) const { return cdf_eval(*sys_, t, eps_); }
  double tolerance() const { return eps_; }

 private:
  const IFSystem* sys_;
  double eps_;
};

/// mu([a,b]) = C(b) - C(a), clipped at 0.
inline double interval_mass(const IFSystem& system, double a, double b, double eps) {
  if (!(a >= 0.0 && b <= 1.0)) throw std::invalid_argument("interval_mass: endpoints must lie in [0,1]");
  if (a > b) throw std::invalid_argument("interval_mass: reversed endpoints");
  return std::max(0.0, cdf_eval(system, b, eps) - cdf_eval(system, a, eps));
}

/// |mu([a,b]) - sum_i rho_i mu(phi_i^{-1}([a,b] cap phi_i([0,1])))|
inline double invariance_residual(const IFSystem& system, double a, double b, double eps) {
  const double lhs = interval_mass(system, a, b, eps);
  double rhs = 0.0;
  for (std::size_t i = 0; i < system.size(); ++i) {
    const Interval& img = system.image(i);
    const double lo = std::max(a, img.lo), hi = std::min(b, img.hi);
    if (lo > hi) continue;
    const Map& phi = system.map(i);
    double p = std::clamp(phi.inverse(lo), 0.0, 1.0), q = std::clamp(phi.inverse(hi), 0.0, 1.0);
    if (p > q) std::swap(p, q);
    rhs += system.weight(i) * interval_mass(system, p, q, eps);
  }
  return std::abs(lhs - rhs);
}

/// Level-k discrete approximation: one atom per word at the midpoint of its image.
struct AtomicMeasure {
  std::vector<double> positions;
  std::vector<double> masses;
  int level = 0;

  std::size_t size() const { return positions.size(); }

  /// Atomic distribution function, right-continuous.
  double cdf(double t) const {
    auto it = std::upper_bound(positions.begin(), positions.end(), t);
    double s = 0.0;
    for (auto k = positions.begin(); k != it; ++k) s += masses[static_cast<std::size_t>(k - positions.begin())];
    return s;
  }
};

inline constexpr std::size_t default_atom_cap = std::size_t{1} << 22;

inline AtomicMeasure atomize(const IFSystem& system, int k, std::size_t cap = default_atom_cap) {
  if (k < 1) throw std::invalid_argument("atomize: level must be >= 1");
  auto cells = level_cells(system, k, cap);
  if (std::any_of(system.maps().begin(), system.maps().end(), [](const Map& m) { return m.reverses(); }))
    std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.lo < b.lo; });

  AtomicMeasure out;
  out.level = k;
  out.positions.reserve(cells.size());
  out.masses.reserve(cells.size());
  double sum = 0.0, carry = 0.0;  // Kahan
  for (const Cell& c : cells) {
    out.positions.push_back(0.5 * (c.lo + c.hi));
    out.masses.push_back(c.mass);
    const double y = c.mass - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  for (double& mass : out.masses) mass /= sum;
  for (std::size_t j = 1; j < out.positions.size(); ++j)
    if (!(out.positions[j] > out.positions[j - 1]))
      throw ResourceError("atomize: level " + std::to_string(k) + " cells are below floating-point resolution");
  return out;
}

}  // namespace selfconf
