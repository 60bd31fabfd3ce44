#pragma once

// Krein string -y'' = lambda mu y for an atomic mu: tridiagonal stiffness /
// diagonal mass pencil, Sturm-sequence eigenvalue counts and bisection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "selfconf/errors.hpp"
#include "selfconf/ifs.hpp"
#include "selfconf/measure.hpp"

namespace selfconf {

enum class Boundary { neumann, dirichlet };

inline const char* to_string(Boundary bc) { return bc == Boundary::neumann ? "neumann" : "dirichlet"; }

/// K y = lambda M y with y the values at the atoms. Between atoms y is
/// affine; under Neumann y is constant outside the outermost atoms, under
/// Dirichlet it is clamped to 0 at both endpoints.
class StringPencil {
 public:
  StringPencil(std::vector<double> nodes, std::vector<double> masses, Boundary bc)
      : bc_(bc), nodes_(std::move(nodes)), masses_(std::move(masses)) {
    const std::size_t n = nodes_.size();
    if (n < 2) throw std::invalid_argument("string pencil needs at least 2 atoms");
    if (masses_.size() != n) throw std::invalid_argument("one mass per atom required");
    for (double m : masses_)
      if (!(m > 0.0)) throw std::invalid_argument("atom masses must be positive");
    coupling_.resize(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double h = nodes_[j + 1] - nodes_[j];
      if (!(h > 0.0)) throw std::invalid_argument("atom positions must be strictly increasing");
      coupling_[j] = 1.0 / h;
    }
    diag_.assign(n, 0.0);
    for (std::size_t j = 0; j + 1 < n; ++j) {
      diag_[j] += coupling_[j];
      diag_[j + 1] += coupling_[j];
    }
    if (bc_ == Boundary::dirichlet) {
      if (!(nodes_.front() > 0.0 && nodes_.back() < 1.0))
        throw std::invalid_argument("Dirichlet pencil needs atoms strictly inside (0,1)");
      diag_.front() += 1.0 / nodes_.front();
      diag_.back() += 1.0 / (1.0 - nodes_.back());
    }
  }

  Boundary boundary() const { return bc_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& masses() const { return masses_; }
  /// K_jj
  const std::vector<double>& stiffness_diagonal() const { return diag_; }
  /// -K_{j,j+1} = 1 / h_j
  const std::vector<double>& couplings() const { return coupling_; }

  /// Number of eigenvalues strictly below lambda: negative pivots of the
  /// LDL^T factorization of K - lambda M. A vanishing pivot (|d| < 1e-280)
  /// is replaced by +1e-280, i.e. evaluated just below lambda, so an exact
  /// eigenvalue hit is not counted.
  std::size_t count_below(double lambda) const {
    if (!(lambda > 0.0)) throw std::invalid_argument("count_below: lambda must be positive");
    constexpr double pivmin = 1e-280;
    std::size_t negatives = 0;
    double d = diag_[0] - lambda * masses_[0];
    for (std::size_t j = 0;; ++j) {
      if (std::abs(d) < pivmin) d = pivmin;
      if (d < 0.0) ++negatives;
      if (j + 1 == diag_.size()) break;
      d = diag_[j + 1] - lambda * masses_[j + 1] - coupling_[j] * (coupling_[j] / d);
    }
    return negatives;
  }

  /// Gershgorin bound on the largest eigenvalue of M^{-1} K.
  double spectral_upper_bound() const {
    double ub = 0.0;
    for (std::size_t j = 0; j < diag_.size(); ++j) {
      double row = diag_[j];
      if (j > 0) row += coupling_[j - 1];
      if (j + 1 < diag_.size()) row += coupling_[j];
      ub = std::max(ub, row / masses_[j]);
    }
    return ub;
  }

  /// lambda_n (0-based, ascending) by bisection on count_below to relative width 1e-12.
  double eigenvalue(std::size_t n) const {
    if (n >= size()) throw std::out_of_range("eigenvalue index " + std::to_string(n) + " out of range");
    if (bc_ == Boundary::neumann && n == 0) return 0.0;
    double lo = 0.0, hi = spectral_upper_bound() * (1.0 + 1e-12) + 1e-300;
    while (hi - lo > 1e-12 * hi) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (count_below(mid) > n) hi = mid; else lo = mid;
    }
    return 0.5 * (lo + hi);
  }

  /// Eigenvector for lambda by inverse iteration, scaled to max |y_j| = 1.
  std::vector<double> eigenvector(double lambda) const {
    const std::size_t n = size();
    const double shift = lambda + 1e-10 * std::max(1.0, std::abs(lambda));
    std::vector<double> y(n, 1.0), rhs(n), c(n), dd(n);
    for (int sweep = 0; sweep < 4; ++sweep) {
      for (std::size_t j = 0; j < n; ++j) rhs[j] = masses_[j] * y[j];
      // Thomas algorithm on K - shift M
      for (std::size_t j = 0; j < n; ++j) {
        double a = diag_[j] - shift * masses_[j];
        if (j > 0) {
          const double l = -coupling_[j - 1] / dd[j - 1];
          a -= l * c[j - 1];
          rhs[j] -= l * rhs[j - 1];
        }
        if (std::abs(a) < 1e-280) a = 1e-280;
        dd[j] = a;
        c[j] = (j + 1 < n) ? -coupling_[j] : 0.0;
      }
      for (std::size_t j = n; j-- > 0;) {
        double v = rhs[j];
        if (j + 1 < n) v -= c[j] * y[j + 1];
        y[j] = v / dd[j];
      }
      double scale = 0.0;
      for (double v : y) scale = std::max(scale, std::abs(v));
      for (double& v : y) v /= scale;
    }
    return y;
  }

  /// (K y)_j - lambda m_j y_j: the discrete weak-form residual against the hat function at node j.
  std::vector<double> weak_residual(const std::vector<double>& y, double lambda) const {
    const std::size_t n = size();
    std::vector<double> r(n);
    for (std::size_t j = 0; j < n; ++j) {
      double ky = diag_[j] * y[j];
      if (j > 0) ky -= coupling_[j - 1] * y[j - 1];
      if (j + 1 < n) ky -= coupling_[j] * y[j + 1];
      r[j] = ky - lambda * masses_[j] * y[j];
    }
    return r;
  }

 private:
  Boundary bc_;
  std::vector<double> nodes_, masses_;
  std::vector<double> coupling_, diag_;
};

inline StringPencil build_pencil(const AtomicMeasure& atoms, Boundary bc) {
  return StringPencil(atoms.positions, atoms.masses, bc);
}

/// Geometric grid from lmin to lmax (inclusive) with per_decade points per decade.
inline std::vector<double> geometric_grid(double lmin, double lmax, int per_decade) {
  if (!(lmin > 0.0 && lmax > lmin) || per_decade < 1)
    throw std::invalid_argument("geometric_grid: need 0 < lmin < lmax and per_decade >= 1");
  const double decades = std::log10(lmax / lmin);
  const auto steps = static_cast<long>(std::llround(decades * per_decade));
  std::vector<double> grid;
  for (long k = 0; k <= steps; ++k)
    grid.push_back(lmin * std::pow(10.0, static_cast<double>(k) / per_decade));
  grid.back() = lmax;
  return grid;
}

struct CountPoint {
  double lambda = 0.0;
  std::size_t count = 0;
  int level = 0;
  bool stable = true;
};

struct LevelPolicy {
  int start_level = 12;
  /// Stop at start_level without the stabilization check.
  bool fixed = false;
  std::size_t max_atoms = default_atom_cap;
};

/// Smallest level whose atom count reaches min_atoms.
inline int level_for_atoms(const IFSystem& system, std::size_t min_atoms) {
  int k = 1;
  double n = static_cast<double>(system.size());
  while (n < static_cast<double>(min_atoms)) {
    n *= static_cast<double>(system.size());
    ++k;
  }
  return k;
}

/// N(lambda, mu) along a grid. Each point is counted at levels k, k+1, ...
/// until two consecutive levels agree; the reported level is the lower one.
/// Points that never stabilize within the atom cap are marked unstable.
inline std::vector<CountPoint> counting_curve(const IFSystem& system, Boundary bc,
                                              const std::vector<double>& grid,
                                              const LevelPolicy& policy = {}) {
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (!(grid[j] > 0.0) || (j > 0 && !(grid[j] > grid[j - 1])))
      throw std::invalid_argument("counting_curve: grid must be positive and strictly increasing");

  std::map<int, std::optional<StringPencil>> pencils;
  auto pencil_at = [&](int k) -> const StringPencil* {
    auto it = pencils.find(k);
    if (it == pencils.end()) {
      std::optional<StringPencil> p;
      try {
        p.emplace(build_pencil(atomize(system, k, policy.max_atoms), bc));
      } catch (const ResourceError&) {
      }
      it = pencils.emplace(k, std::move(p)).first;
    }
    return it->second ? &*it->second : nullptr;
  };

  const StringPencil* first = pencil_at(policy.start_level);
  if (!first) throw ResourceError("start level exceeds the atom cap");

  std::vector<CountPoint> out;
  const int k = policy.start_level;
  for (double lambda : grid) {
    CountPoint pt{lambda, 0, k, false};
    if (policy.fixed) {
      pt.count = pencil_at(k)->count_below(lambda);
      pt.stable = true;
    } else {
      for (int level = k;; ++level) {
        const StringPencil* lo = pencil_at(level);
        const StringPencil* hi = pencil_at(level + 1);
        if (!lo) break;
        pt.count = lo->count_below(lambda);
        pt.level = level;
        if (!hi) break;
        if (hi->count_below(lambda) == pt.count) {
          pt.stable = true;
          break;
        }
      }
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace selfconf
