// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "pencil_oracle.hpp"
#include "systems.hpp"

using namespace selfconf;

namespace {

// Tolerances and budgets.
constexpr double kLebesgueEigenRel = 0.01;
constexpr double kLebesgueSlopeTol = 0.01;
constexpr double kLebesgueSeconds = 10.0;
constexpr double kPencilRel = 1e-9;
constexpr double kCantorSlopeTol = 0.02;
constexpr double kProfileRatio = 4.0;
constexpr double kCantorSeconds = 60.0;
constexpr double kModelExponentTol = 1e-10;
constexpr double kDeformedSlopeTol = 0.03;
constexpr double kBracketWiden = 0.02;
constexpr std::size_t kBracketCount = 200;
constexpr std::size_t kBoundaryGap = 2;
constexpr double kContractionTol = 1e-12;
constexpr double kInvarianceEps = 1e-10;
constexpr double kInvarianceTol = 1e-8;
constexpr double kUnitDistortionTol = 1e-14;
constexpr double kSbdpBound = 1.44 * 1.44 * 1.05;
constexpr double kGTol = 1e-12;
constexpr double kPushforwardTol = 1e-8;
constexpr double kTildeTol = 1e-9;

const double kCantorD = std::log(2.0) / std::log(6.0);

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::pair<double, double>> stable_fit_data(const IFSystem& s, double lmin, double lmax) {
  LevelPolicy policy;
  policy.start_level = 12;
  return drop_leading_decade(stable_pairs(counting_curve(s, Boundary::neumann, geometric_grid(lmin, lmax, 16),
                                                         policy)));
}

Outcome lebesgue() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = 2000;
  std::vector<double> x(n), m(n, 1.0 / n);
  for (std::size_t j = 0; j < n; ++j) x[j] = (j + 0.5) / n;
  const StringPencil p(x, m, Boundary::neumann);
  double worst = 0.0;
  for (std::size_t k = 1; k <= 20; ++k) {
    const double exact = std::pow(M_PI * static_cast<double>(k), 2.0);
    worst = std::max(worst, std::abs(p.eigenvalue(k) - exact) / exact);
  }
  std::vector<std::pair<double, double>> curve;
  for (double lambda : geometric_grid(1e3, 1e7, 16)) curve.emplace_back(lambda, p.count_below(lambda));
  const double slope = empirical_exponent(curve).slope;
  const double secs = seconds_since(t0);
  return {worst < kLebesgueEigenRel && std::abs(slope - 0.5) <= kLebesgueSlopeTol && secs < kLebesgueSeconds,
          fmt("max rel error %.2e, slope %.4f, %.2f s", worst, slope, secs)};
}

Outcome small_pencils() {
  bool ok = true;
  double worst = 0.0;
  std::size_t mismatches = 0;
  const auto check = [&](const std::vector<double>& nodes, const std::vector<double>& masses, bool clamped,
                         std::mt19937_64& rng) {
    const StringPencil p(nodes, masses, clamped ? Boundary::dirichlet : Boundary::neumann);
    const auto roots = oracle::pencil_eigenvalues(nodes, masses, clamped);
    if (roots.size() != p.size()) {
      ok = false;
      return;
    }
    for (std::size_t k = 0; k < roots.size(); ++k) {
      const double scale = std::max(std::abs(roots[k]), roots.back() * 1e-3);
      worst = std::max(worst, std::abs(p.eigenvalue(k) - roots[k]) / scale);
    }
    std::uniform_real_distribution<double> lam(0.0, 1.3 * roots.back());
    for (int j = 0; j < 50; ++j) {
      const double l = lam(rng);
      std::size_t exact = 0;
      for (double r : roots) exact += r < l ? 1 : 0;
      if (l > 0.0 && p.count_below(l) != exact) ++mismatches;
    }
  };
  std::mt19937_64 rng(7);
  check({0.25, 0.75}, {0.5, 0.5}, false, rng);
  check({0.25, 0.75}, {0.5, 0.5}, true, rng);
  const StringPencil hn({0.25, 0.75}, {0.5, 0.5}, Boundary::neumann);
  const StringPencil hd({0.25, 0.75}, {0.5, 0.5}, Boundary::dirichlet);
  ok = ok && hn.eigenvalue(0) == 0.0 && std::abs(hn.eigenvalue(1) - 8.0) < 8.0 * kPencilRel &&
       std::abs(hd.eigenvalue(0) - 8.0) < 8.0 * kPencilRel && std::abs(hd.eigenvalue(1) - 16.0) < 16.0 * kPencilRel;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> size(2, 6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = size(rng);
    std::vector<double> gaps(n + 1), nodes, masses(n);
    double total = 0.0, mass = 0.0;
    for (auto& g : gaps) total += (g = 0.3 + unit(rng));
    double x = 0.0;
    for (std::size_t j = 0; j < n; ++j) nodes.push_back(x += gaps[j] / total);
    for (auto& v : masses) mass += (v = 0.2 + unit(rng));
    for (auto& v : masses) v /= mass;
    check(nodes, masses, false, rng);
    check(nodes, masses, true, rng);
  }
  return {ok && worst < kPencilRel && mismatches == 0,
          fmt("max rel eigenvalue error %.2e, %g count mismatches", worst, static_cast<double>(mismatches))};
}

Outcome cantor_exponent() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto data = stable_fit_data(fixtures::cantor(), 1e2, 1e8);
  const double slope = empirical_exponent(data).slope;
  const auto profile = oscillation_profile(data, kCantorD);
  const double ratio = profile.max / profile.min;
  const double secs = seconds_since(t0);
  return {std::abs(slope - kCantorD) <= kCantorSlopeTol && ratio < kProfileRatio && secs < kCantorSeconds,
          fmt("slope %.5f vs %.6f, profile max/min %.3f", slope, kCantorD, ratio) + fmt(", %.2f s", secs)};
}

Outcome deformed_cantor() {
  const IFSystem s = generate_deformed_system(DeformationFamily(GFamily::moebius_s, 0.2), fixtures::cantor_model());
  const double D = solve_D(exponent_problem(s));
  const double slope = empirical_exponent(stable_fit_data(s, 1e2, 1e8)).slope;

  const auto g = build_g(s, build_affine_model(s));
  const auto lip = bilipschitz_estimate(g);
  const double q = lip.q * (1.0 - kBracketWiden), Q = lip.Q * (1.0 + kBracketWiden);
  std::size_t violations = 0;
  double lo_margin = 1e300, hi_margin = 1e300;
  for (Boundary bc : {Boundary::neumann, Boundary::dirichlet}) {
    const auto deformed = build_pencil(atomize(s, 12), bc);
    const auto model = build_pencil(atomize(fixtures::cantor(), 12), bc);
    for (std::size_t n = 0; n < kBracketCount; ++n) {
      const double l = deformed.eigenvalue(n), l0 = model.eigenvalue(n);
      if (l0 == 0.0 && l == 0.0) continue;
      if (!(q * l0 <= l && l <= Q * l0)) ++violations;
      lo_margin = std::min(lo_margin, l / l0);
      hi_margin = std::min(hi_margin, l0 / l);
    }
  }
  const bool ok = std::abs(D - kCantorD) <= kModelExponentTol && std::abs(slope - D) <= kDeformedSlopeTol &&
                  violations == 0;
  return {ok, fmt("|D - ln2/ln6| %.1e, slope %.5f, ", std::abs(D - kCantorD), slope) +
                  fmt("ratio range [%.4f, %.4f] inside [%.4f, ", lo_margin, 1.0 / hi_margin, q) +
                  fmt("%.4f], %g violations", Q, static_cast<double>(violations))};
}

Outcome boundary_conditions() {
  std::size_t worst = 0;
  for (const auto& s : fixtures::all()) {
    LevelPolicy policy;
    policy.start_level = level_for_atoms(s, 4096);
    policy.fixed = true;
    const auto grid = geometric_grid(1e2, 1e7, 16);
    const auto n = counting_curve(s, Boundary::neumann, grid, policy);
    const auto d = counting_curve(s, Boundary::dirichlet, grid, policy);
    for (std::size_t j = 0; j < grid.size(); ++j)
      worst = std::max(worst, n[j].count > d[j].count ? n[j].count - d[j].count : d[j].count - n[j].count);
  }
  return {worst <= kBoundaryGap, fmt("max |N_N - N_D| = %g", static_cast<double>(worst))};
}

Outcome contraction() {
  std::mt19937_64 rng(20);
  double worst = 0.0;
  for (const auto& s : {fixtures::cantor(), fixtures::cantor(0.3), fixtures::three_map(), fixtures::touching(),
                        fixtures::reversing()}) {
    for (int pair = 0; pair < 20; ++pair) {
      const auto [x1, y1] = oracle::random_monotone(rng, 9);
      const auto [x2, y2] = oracle::random_monotone(rng, 9);
      const PiecewiseLinear f1{x1, y1}, f2{x2, y2};
      const double ratio = sup_distance(apply_S(s, f1), apply_S(s, f2)) / sup_distance(f1, f2);
      worst = std::max(worst, std::abs(ratio - s.max_weight()));
    }
  }
  return {worst <= kContractionTol, fmt("max |ratio - max rho| = %.2e", worst)};
}

Outcome invariance() {
  std::mt19937_64 rng(100);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (const auto& s : {fixtures::cantor(), fixtures::deformed_cantor(0.2)}) {
    for (int k = 0; k < 100; ++k) {
      double a = unit(rng), b = unit(rng);
      if (a > b) std::swap(a, b);
      worst = std::max(worst, invariance_residual(s, a, b, kInvarianceEps));
    }
  }
  return {worst < kInvarianceTol, fmt("max residual %.2e", worst)};
}

Outcome distortion() {
  double affine = 0.0;
  for (const auto& s : {fixtures::cantor(), fixtures::three_map(), fixtures::touching(), fixtures::reversing()}) {
    affine = std::max(affine, std::abs(bdp_constant(s, 8).max_ratio - 1.0));
    affine = std::max(affine, std::abs(sbdp_constant(s, 8).max_ratio - 1.0));
  }
  const double sbdp = sbdp_constant(fixtures::deformed_cantor(0.2), 10).max_ratio;
  const auto built = example1_build(0.2, 0.1);
  const auto ratios = example1_verify(built.system, 5);
  bool certified = ratios.size() == 5;
  for (std::size_t k = 0; k < ratios.size(); ++k)
    certified = certified && ratios[k] <= std::pow(0.9, static_cast<double>(k + 1));
  return {affine <= kUnitDistortionTol && sbdp <= kSbdpBound && certified,
          fmt("affine |C - 1| %.1e, deformed SBDP %.4f <= %.4f", affine, sbdp, kSbdpBound) +
              (certified ? ", example certified" : ", example not certified")};
}

/// Nearest point of the attractor: descend through first-level images and
/// snap to the closer endpoint once t lands in a gap.
double project_to_attractor(const IFSystem& s, double t) {
  Word w;
  for (int depth = 0; depth < 60; ++depth) {
    double best = 1e300, snap = t;
    bool inside = false;
    for (std::size_t i = 0; i < s.size() && !inside; ++i) {
      Word v = w;
      v.push_back(i);
      const ComposedMap phi(s, v);
      double lo = phi(0.0), hi = phi(1.0);
      if (lo > hi) std::swap(lo, hi);
      if (t >= lo && t <= hi) {
        w = v;
        inside = true;
        if (hi - lo < 1e-15) return t;
      }
      for (double e : {lo, hi})
        if (std::abs(t - e) < best) best = std::abs(t - e), snap = e;
    }
    if (!inside) return snap;
  }
  return t;
}

Outcome round_trip() {
  const DeformationFamily gs(GFamily::moebius_s, 0.2);
  const IFSystem s = fixtures::deformed_cantor(0.2);
  const auto g = build_g(s, build_affine_model(s), kGTol);
  double on_support = 0.0, full_grid = 0.0;
  for (int j = 0; j <= 1000; ++j) {
    const double t = j / 1000.0;
    const double p = project_to_attractor(s, t);
    on_support = std::max(on_support, std::abs(g(p) - gs(p)));
    full_grid = std::max(full_grid, std::abs(g(t) - gs(t)));
  }
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Interval> intervals{{0.0, 1.0}};
  for (int k = 0; k < 100; ++k) {
    double a = unit(rng), b = unit(rng);
    if (a > b) std::swap(a, b);
    intervals.push_back({a, b});
  }
  const double push = pushforward_residual(g, intervals, 1e-10);
  const double tilde = tilde_phi_agreement(g, 6);
  return {on_support <= 2.0 * kGTol && push < kPushforwardTol && tilde < kTildeTol,
          fmt("|g - g_s| on supp mu %.1e (off support %.1e), ", on_support, full_grid) +
              fmt("pushforward %.1e, phi~ %.1e", push, tilde)};
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(SELFCONF_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("selfconf_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string data = SELFCONF_DATA;
  const std::vector<std::pair<std::string, std::string>> runs{
      {"spectrum --config " + data + "/deformed_cantor.json --out ", "spectrum.csv"},
      {"cdf --config " + data + "/three_map.json --atoms-level 4 --atoms-out {}.atoms --out ", "cdf.csv"},
      {"oscillation --config " + data + "/cantor.json --out ", "profile.csv"},
      {"distortion --config " + data + "/deformed_cantor.json --mode sbdp --seed 7 --witness ", "witness.json"},
  };
  std::size_t differing = 0, failed = 0;
  for (const auto& [cmd, name] : runs) {
    std::string texts[2];
    for (int r = 0; r < 2; ++r) {
      const fs::path target = dir / (std::to_string(r) + "_" + name);
      std::string args = cmd;
      const auto brace = args.find("{}");
      if (brace != std::string::npos) args.replace(brace, 2, target.string());
      if (run_cli(args + target.string()) != 0) ++failed;
      texts[r] = slurp(target);
      if (brace != std::string::npos) texts[r] += slurp(target.string() + ".atoms");
    }
    if (texts[0].empty() || texts[0] != texts[1]) ++differing;
  }
  fs::remove_all(dir);
  return {differing == 0 && failed == 0, fmt("%g of %g outputs differ, %g runs failed", static_cast<double>(differing),
                                             static_cast<double>(runs.size()), static_cast<double>(failed))};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"Lebesgue oracle", lebesgue},
      {"small-pencil oracle", small_pencils},
      {"Cantor exponent", cantor_exponent},
      {"deformed Cantor", deformed_cantor},
      {"Neumann/Dirichlet counts", boundary_conditions},
      {"contraction equality", contraction},
      {"Hutchinson invariance", invariance},
      {"distortion", distortion},
      {"deformation round trip", round_trip},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
