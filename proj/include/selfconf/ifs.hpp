#pragma once

// Iterated function systems on [0,1]: words, compositions, fixed points,
// gaps and the validity conditions of a conformal IFS.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "selfconf/errors.hpp"
#include "selfconf/maps.hpp"

namespace selfconf {

/// Word (i_1, ..., i_k) with 0-based letters; phi_w = phi_{i_1} o ... o phi_{i_k}.
using Word = std::vector<std::size_t>;

struct Interval {
  double lo = 0.0, hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

class IFSystem {
 public:
  IFSystem() = default;
  IFSystem(std::vector<Map> maps, std::vector<double> weights)
      : maps_(std::move(maps)), weights_(std::move(weights)) {
    prefix_.assign(weights_.size() + 1, 0.0);
    for (std::size_t i = 0; i < weights_.size(); ++i) prefix_[i + 1] = prefix_[i] + weights_[i];
    for (const auto& m : maps_) {
      images_.push_back({m.image_lo(), m.image_hi()});
      reverses_.push_back(m.reverses());
    }
  }

  std::size_t size() const { return maps_.size(); }
  const std::vector<Map>& maps() const { return maps_; }
  const Map& map(std::size_t i) const { return maps_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }
  /// sum_{j < i} rho_j
  double weight_before(std::size_t i) const { return prefix_[i]; }
  const Interval& image(std::size_t i) const { return images_[i]; }
  bool reverses(std::size_t i) const { return reverses_[i]; }
  double max_weight() const {
    return weights_.empty() ? 0.0 : *std::max_element(weights_.begin(), weights_.end());
  }

  bool is_affine() const {
    return std::all_of(maps_.begin(), maps_.end(), [](const Map& m) { return m.is_affine(); });
  }

 private:
  std::vector<Map> maps_;
  std::vector<double> weights_;
  std::vector<double> prefix_;
  std::vector<Interval> images_;
  std::vector<bool> reverses_;
};

/// phi_w for a fixed word. Reduces to a single projective matrix when every
/// letter is Moebius-representable; otherwise evaluates by nesting.
/// Holds a pointer to the system, which must outlive it.
class ComposedMap {
 public:
  ComposedMap(const IFSystem& system, Word w) : sys_(&system), word_(std::move(w)) {
    MoebiusMatrix acc;
    for (std::size_t letter : word_) {
      auto m = sys_->map(letter).as_matrix();
      if (!m) return;
      acc = acc * *m;
    }
    closed_ = acc;
  }

  const Word& word() const { return word_; }
  bool has_closed_form() const { return closed_.has_value(); }

  double operator()(double x) const { return closed_ ? (*closed_)(x) : nested_value(x); }
  double derivative(double x) const { return closed_ ? closed_->derivative(x) : nested_derivative(x); }

  double nested_value(double x) const {
    for (auto it = word_.rbegin(); it != word_.rend(); ++it) x = sys_->map(*it)(x);
    return x;
  }

  double nested_derivative(double x) const {
    double d = 1.0;
    for (auto it = word_.rbegin(); it != word_.rend(); ++it) {
      const Map& m = sys_->map(*it);
      d *= m.derivative(x);
      x = m(x);
    }
    return d;
  }

  Interval image() const {
    const double a = (*this)(0.0), b = (*this)(1.0);
    return {std::min(a, b), std::max(a, b)};
  }

 private:
  const IFSystem* sys_;
  Word word_;
  std::optional<MoebiusMatrix> closed_;
};

inline ComposedMap compose(const IFSystem& system, Word w) { return ComposedMap(system, std::move(w)); }

/// x_w with phi_w(x_w) = x_w: plain iteration from 1/2, then one Newton step.
inline double fixed_point(const IFSystem& system, const Word& w) {
  if (w.empty()) throw std::invalid_argument("fixed_point needs a non-empty word");
  const ComposedMap phi(system, w);
  double x = 0.5;
  for (int it = 0; it < 100000; ++it) {
    const double next = phi(x);
    const bool done = std::abs(next - x) < 1e-15;
    x = next;
    if (done) break;
  }
  const double slope = phi.derivative(x);
  const double polished = x - (phi(x) - x) / (slope - 1.0);
  if (std::isfinite(polished) && std::abs(phi(polished) - polished) <= std::abs(phi(x) - x)) x = polished;
  return std::clamp(x, 0.0, 1.0);
}

/// U_i = (c_i, d_i) between consecutive first-level images.
struct Gap {
  double c = 0.0, d = 0.0;
  bool empty() const { return !(d > c); }
  double length() const { return empty() ? 0.0 : d - c; }
};

inline std::vector<Gap> gaps(const IFSystem& system) {
  std::vector<Gap> out;
  for (std::size_t i = 0; i + 1 < system.size(); ++i)
    out.push_back({system.image(i).hi, system.image(i + 1).lo});
  return out;
}

/// One level-k cell: the image phi_w([0,1]) and its weight rho_w.
struct Cell {
  double lo = 0.0, hi = 0.0, mass = 1.0;
};

/// All m^k cells in word order (first letter outermost).
inline std::vector<Cell> level_cells(const IFSystem& system, int k,
                                     std::size_t cap = std::size_t{1} << 22) {
  if (k < 0) throw std::invalid_argument("level must be non-negative");
  const double count = std::pow(static_cast<double>(system.size()), k);
  if (count > static_cast<double>(cap))
    throw ResourceError("level " + std::to_string(k) + " needs " + std::to_string(count) +
                        " cells, cap is " + std::to_string(cap));
  std::vector<Cell> cells{{0.0, 1.0, 1.0}};
  for (int level = 0; level < k; ++level) {
    std::vector<Cell> next;
    next.reserve(cells.size() * system.size());
    for (std::size_t i = 0; i < system.size(); ++i) {
      const Map& phi = system.map(i);
      for (const Cell& c : cells) {
        const double a = phi(c.lo), b = phi(c.hi);
        next.push_back({std::min(a, b), std::max(a, b), system.weight(i) * c.mass});
      }
    }
    cells = std::move(next);
  }
  return cells;
}

/// |Phi^k([0,1])|, the total length of the level-k images.
inline double image_union_length(const IFSystem& system, int k) {
  const auto cells = level_cells(system, k, std::size_t{1} << 26);
  double total = 0.0;
  for (const auto& c : cells) total += c.hi - c.lo;
  return total;
}

inline double alpha_sum(const IFSystem& system) {
  double s = 0.0;
  for (const auto& m : system.maps()) s += m.max_abs_derivative();
  return s;
}

struct Violation {
  std::string condition;
  std::string detail;
  double witness = std::numeric_limits<double>::quiet_NaN();
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }

  std::vector<std::string> lines() const {
    std::vector<std::string> out;
    for (const auto& v : violations) {
      std::ostringstream os;
      os << v.condition << ": " << v.detail;
      if (!std::isnan(v.witness)) os << " (at x = " << v.witness << ")";
      out.push_back(os.str());
    }
    return out;
  }
};

struct ValidationOptions {
  std::size_t grid = 1024;
  double weight_sum_tol = 1e-12;
  double inverse_tol = 1e-13;
};

namespace detail {

inline bool moebius_pole_free(const Moebius& m) {
  // c x + d keeps one sign on [0,1]
  const double d0 = m.d, d1 = m.c + m.d;
  return d0 != 0.0 && d1 != 0.0 && ((d0 > 0.0) == (d1 > 0.0));
}

inline void check_map(const Map& phi, std::size_t index, const ValidationOptions& opt,
                      std::vector<Violation>& out) {
  const std::string tag = "map " + std::to_string(index + 1);
  if (const auto* m = std::get_if<Moebius>(&phi.variant())) {
    if (!std::isfinite(m->a) || !std::isfinite(m->b) || !std::isfinite(m->c) || !std::isfinite(m->d)) {
      out.push_back({"finite", tag + " has non-finite coefficients"});
      return;
    }
    if (m->determinant() == 0.0) {
      out.push_back({"diffeomorphism", tag + " is degenerate (ad - bc = 0)"});
      return;
    }
    if (!moebius_pole_free(*m)) {
      out.push_back({"diffeomorphism", tag + " has a pole in [0,1]"});
      return;
    }
  }
  if (const auto* a = std::get_if<Affine>(&phi.variant())) {
    if (!std::isfinite(a->a) || !std::isfinite(a->b)) {
      out.push_back({"finite", tag + " has non-finite coefficients"});
      return;
    }
  }

  const double v0 = phi(0.0), v1 = phi(1.0);
  if (!std::isfinite(v0) || !std::isfinite(v1)) {
    out.push_back({"finite", tag + " is not finite at the endpoints"});
    return;
  }
  for (double x : {0.0, 1.0}) {
    const double v = phi(x);
    if (v < 0.0 || v > 1.0) out.push_back({"maps-into-unit", tag + " leaves [0,1]", x});
  }

  const std::size_t n = std::max<std::size_t>(opt.grid, 2);
  const double sign = (v1 >= v0) ? 1.0 : -1.0;
  bool derivative_reported = false, monotone_reported = false, inverse_reported = false;
  for (std::size_t k = 0; k <= n; ++k) {
    const double x = static_cast<double>(k) / static_cast<double>(n);
    const double d = phi.derivative(x);
    if (!derivative_reported && !(std::abs(d) > 0.0 && std::abs(d) < 1.0)) {
      std::ostringstream os;
      os << tag << " has |phi'| = " << std::abs(d) << " outside (0,1)";
      out.push_back({"contraction", os.str(), x});
      derivative_reported = true;
    }
    if (!monotone_reported && !(sign * d > 0.0)) {
      out.push_back({"monotone", tag + " is not strictly monotone", x});
      monotone_reported = true;
    }
    const double u = v0 + (v1 - v0) * x;
    const double back = phi(phi.inverse(u));
    if (!inverse_reported && !(std::abs(back - u) <= opt.inverse_tol)) {
      std::ostringstream os;
      os << tag << " inverse mismatch " << std::abs(back - u);
      out.push_back({"inverse-consistency", os.str(), u});
      inverse_reported = true;
    }
  }
}

}  // namespace detail

/// Checks m >= 2, weights positive summing to 1, each map a strictly monotone
/// contraction of [0,1] with consistent inverse, ordered non-overlapping
/// images, and sum_i ||phi_i'||_inf < 1.
inline ValidationReport validate(const IFSystem& system, const ValidationOptions& opt = {}) {
  ValidationReport r;
  auto& v = r.violations;
  if (system.size() < 2) v.push_back({"map-count", "need at least 2 maps"});
  if (system.weights().size() != system.size()) {
    v.push_back({"weight-count", std::to_string(system.weights().size()) + " weights for " +
                                     std::to_string(system.size()) + " maps"});
  }
  double total = 0.0;
  for (std::size_t i = 0; i < system.weights().size(); ++i) {
    const double w = system.weight(i);
    if (!(w > 0.0) || !std::isfinite(w))
      v.push_back({"weight-positive", "weight " + std::to_string(i + 1) + " is not a positive number"});
    total += w;
  }
  if (!(std::abs(total - 1.0) <= opt.weight_sum_tol)) {
    std::ostringstream os;
    os << "weights sum to " << total << ", not 1";
    v.push_back({"weight-sum", os.str()});
  }

  const std::size_t before = v.size();
  for (std::size_t i = 0; i < system.size(); ++i) detail::check_map(system.map(i), i, opt, v);
  if (v.size() != before) return r;  // geometry below assumes well-formed maps

  for (std::size_t i = 0; i + 1 < system.size(); ++i) {
    if (system.image(i).hi > system.image(i + 1).lo) {
      std::ostringstream os;
      os << "images of maps " << i + 1 << " and " << i + 2 << " overlap or are out of order";
      v.push_back({"ordering", os.str(), system.image(i + 1).lo});
    }
  }
  const double alpha = alpha_sum(system);
  if (!(alpha < 1.0)) {
    std::ostringstream os;
    os << "sum of ||phi_i'||_inf = " << alpha << " is not < 1";
    v.push_back({"condition-3", os.str()});
  }
  return r;
}

/// Validates and throws ValidationError on any violation.
inline const IFSystem& require_valid(const IFSystem& system, const ValidationOptions& opt = {}) {
  const auto report = validate(system, opt);
  if (!report.ok()) throw ValidationError("invalid iterated function system", report.lines());
  return system;
}

}  // namespace selfconf
