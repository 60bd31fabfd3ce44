// Command-line front end: validate, cdf, spectrum, exponent, oscillation,
// distortion and deform subcommands over JSON system definitions.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "selfconf/selfconf.hpp"

namespace {

using namespace selfconf;

constexpr int exit_config = 2;
constexpr int exit_validation = 3;
constexpr int exit_resources = 4;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Header comment carried by every emitted file.
std::string header(const std::string& command, const std::string& config_path, const std::string& params) {
  const std::string content = config_path.empty() ? std::string() : slurp(config_path);
  return "# selfconf " + command + " config-hash=" + hex64(fnv1a(content + '\n' + params)) + "\n";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

Boundary parse_bc(const std::string& s) {
  if (s == "neumann") return Boundary::neumann;
  if (s == "dirichlet") return Boundary::dirichlet;
  throw ConfigError("unknown boundary condition '" + s + "'");
}

json word_json(const Word& w) {
  json j = json::array();
  for (auto c : w) j.push_back(c + 1);
  return j;
}

struct SpectrumArgs {
  std::string config;
  std::string bc = "neumann";
  int level = 0;
  bool auto_level = false;
  double lmin = 1e2, lmax = 1e8;
  int per_decade = 16;
  std::size_t max_atoms = default_atom_cap;
  bool strict = false;

  std::string describe() const {
    std::ostringstream os;
    os << "bc=" << bc << " level=" << level << " auto=" << auto_level << " lmin=" << format_double(lmin)
       << " lmax=" << format_double(lmax) << " per_decade=" << per_decade << " max_atoms=" << max_atoms;
    return os.str();
  }

  void add_to(CLI::App* app) {
    app->add_option("--config", config, "system definition (JSON)")->required();
    app->add_option("--bc", bc, "boundary condition")->check(CLI::IsMember({"neumann", "dirichlet"}));
    app->add_option("--level", level, "atomization level (default: first level with >= 4096 atoms)");
    app->add_option("--lmin", lmin, "smallest lambda");
    app->add_option("--lmax", lmax, "largest lambda");
    app->add_option("--per-decade", per_decade, "grid points per decade");
    app->add_option("--max-atoms", max_atoms, "atom cap");
    app->add_flag("--strict", strict, "fail when a grid point does not stabilize");
  }

  std::vector<CountPoint> run(const IFSystem& system, bool stabilize) const {
    LevelPolicy policy;
    policy.start_level = level > 0 ? level : level_for_atoms(system, 4096);
    policy.fixed = !stabilize;
    policy.max_atoms = max_atoms;
    auto curve = counting_curve(system, parse_bc(bc), geometric_grid(lmin, lmax, per_decade), policy);
    std::size_t unstable = 0;
    for (const auto& p : curve) unstable += p.stable ? 0 : 1;
    if (unstable > 0) {
      std::cerr << "warning: " << unstable << " grid points did not stabilize within the atom cap\n";
      if (strict) throw ResourceError("unstable counting points under --strict");
    }
    return curve;
  }
};

void write_profile(const std::string& path, const std::string& head, const OscillationProfile& profile,
                   double D) {
  auto out = open_out(path);
  out << head << "lnlambda,profile\n";
  for (const auto& [x, v] : profile.points) out << format_double(x) << ',' << format_double(v) << '\n';
  auto gp = open_out(path + ".gp");
  gp << "# renders " << path << " without recomputation\n"
     << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set xlabel 'ln lambda'\n"
     << "set ylabel 'N(lambda) lambda^{-D}, D = " << format_double(D) << "'\n"
     << "set terminal pngcairo size 900,500\n"
     << "set output '" << path << ".png'\n"
     << "plot '" << path << "' using 1:2 with linespoints\n";
}

struct ExponentResult {
  double D = 0.0;
  PowerFit fit;
  OscillationProfile profile;
};

ExponentResult exponent_pipeline(const IFSystem& system, const SpectrumArgs& args) {
  const auto curve = args.run(system, true);
  ExponentResult r;
  r.D = solve_D(exponent_problem(system));
  const auto pairs = drop_leading_decade(stable_pairs(curve));
  r.fit = empirical_exponent(pairs);
  r.profile = oscillation_profile(pairs, r.D);
  return r;
}

int run_validate(const std::string& config) {
  const IFSystem s = parse_system(read_json_file(config));
  const auto report = validate(s);
  if (report.ok()) {
    std::cout << "OK\n";
    return 0;
  }
  for (const auto& line : report.lines()) std::cout << "violation: " << line << '\n';
  return exit_validation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-conformal measures and the spectral asymptotics of their strings"};
  app.require_subcommand(1);

  std::string config;
  auto* validate_cmd = app.add_subcommand("validate", "check the IFS conditions");
  validate_cmd->add_option("--config", config, "system definition (JSON)")->required();

  std::string cdf_out, atoms_out;
  std::size_t cdf_samples = 1025;
  double cdf_eps = 1e-12;
  int atoms_level = 0;
  auto* cdf_cmd = app.add_subcommand("cdf", "sample the distribution function C");
  cdf_cmd->add_option("--config", config, "system definition (JSON)")->required();
  cdf_cmd->add_option("--samples", cdf_samples, "uniform samples of t in [0,1]");
  cdf_cmd->add_option("--eps", cdf_eps, "evaluation tolerance");
  cdf_cmd->add_option("--out", cdf_out, "CSV output (t,C)")->required();
  cdf_cmd->add_option("--atoms-level", atoms_level, "also dump the level-k atoms");
  cdf_cmd->add_option("--atoms-out", atoms_out, "CSV output (x,mass)");

  SpectrumArgs spectrum;
  std::string spectrum_out;
  auto* spectrum_cmd = app.add_subcommand("spectrum", "eigenvalue counting function on a lambda grid");
  spectrum.add_to(spectrum_cmd);
  spectrum_cmd->add_flag("--auto-level", spectrum.auto_level, "raise the level until counts stabilize");
  spectrum_cmd->add_option("--out", spectrum_out, "CSV output (lambda,count,level)")->required();

  SpectrumArgs exponent;
  std::string profile_out;
  auto* exponent_cmd = app.add_subcommand("exponent", "theoretical and empirical spectral exponent");
  exponent.add_to(exponent_cmd);
  exponent_cmd->add_option("--profile", profile_out, "CSV output (lnlambda,profile) plus gnuplot script");

  SpectrumArgs oscillation;
  std::string oscillation_out;
  auto* oscillation_cmd = app.add_subcommand("oscillation", "emit the profile N(lambda) lambda^{-D}");
  oscillation.add_to(oscillation_cmd);
  oscillation_cmd->add_option("--out", oscillation_out, "CSV output (lnlambda,profile)")->required();

  std::string mode = "sbdp", witness_out;
  std::size_t max_len = 8, k_max = 5;
  SamplingOptions sampling;
  double ex_a = 0.2, ex_eps = 0.1;
  auto* distortion_cmd = app.add_subcommand("distortion", "bounded distortion constants");
  distortion_cmd->add_option("--config", config, "system definition (JSON); not used by example1");
  distortion_cmd->add_option("--mode", mode)->check(CLI::IsMember({"bdp", "sbdp", "example1"}));
  distortion_cmd->add_option("--max-len", max_len, "longest sampled word");
  distortion_cmd->add_option("--grid", sampling.grid, "points per derivative scan");
  distortion_cmd->add_option("--seed", sampling.seed, "sampling seed");
  distortion_cmd->add_option("--witness", witness_out, "JSON output with the witness");
  distortion_cmd->add_option("--a", ex_a, "example1: slope of phi_1");
  distortion_cmd->add_option("--epsilon", ex_eps, "example1: margin");
  distortion_cmd->add_option("--k-max", k_max, "example1: iterate count");

  std::string model_out, generate, generate_out;
  bool verify = false;
  double deform_eps = 1e-10, deform_tol = 1e-12;
  std::uint64_t deform_seed = 42;
  auto* deform_cmd = app.add_subcommand("deform", "affine model, conjugacy g and ground-truth synthesis");
  deform_cmd->add_option("--config", config, "system definition (JSON)")->required();
  deform_cmd->add_option("--emit-model", model_out, "write the affine model (JSON)");
  deform_cmd->add_flag("--verify", verify, "pushforward, phi-agreement and bi-Lipschitz checks");
  deform_cmd->add_option("--generate", generate, "family:param, e.g. moebius_s:0.2");
  deform_cmd->add_option("--out", generate_out, "generated system (JSON)");
  deform_cmd->add_option("--eps", deform_eps, "measure tolerance");
  deform_cmd->add_option("--tol", deform_tol, "g evaluation tolerance");
  deform_cmd->add_option("--seed", deform_seed, "seed for the random test intervals");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    if (*validate_cmd) return run_validate(config);

    if (*cdf_cmd) {
      const IFSystem s = load_system(config);
      std::ostringstream params;
      params << "samples=" << cdf_samples << " eps=" << format_double(cdf_eps) << " atoms=" << atoms_level;
      const std::string head = header("cdf", config, params.str());
      auto out = open_out(cdf_out);
      out << head << "t,C\n";
      const std::size_t n = std::max<std::size_t>(cdf_samples, 2);
      for (std::size_t j = 0; j < n; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(n - 1);
        out << format_double(t) << ',' << format_double(cdf_eval(s, t, cdf_eps)) << '\n';
      }
      if (atoms_level > 0) {
        if (atoms_out.empty()) throw ConfigError("--atoms-level needs --atoms-out");
        const auto atoms = atomize(s, atoms_level);
        auto a = open_out(atoms_out);
        a << head << "x,mass\n";
        for (std::size_t j = 0; j < atoms.size(); ++j)
          a << format_double(atoms.positions[j]) << ',' << format_double(atoms.masses[j]) << '\n';
      }
      return 0;
    }

    if (*spectrum_cmd) {
      const IFSystem s = load_system(config = spectrum.config);
      const auto curve = spectrum.run(s, spectrum.auto_level);
      auto out = open_out(spectrum_out);
      out << header("spectrum", config, spectrum.describe()) << "lambda,count,level\n";
      for (const auto& p : curve)
        out << format_double(p.lambda) << ',' << p.count << ',' << p.level << '\n';
      return 0;
    }

    if (*exponent_cmd) {
      const IFSystem s = load_system(config = exponent.config);
      const auto r = exponent_pipeline(s, exponent);
      std::printf("theoretical D     %.9f\n", r.D);
      std::printf("empirical slope   %.9f\n", r.fit.slope);
      std::printf("intercept         %.9f\n", r.fit.intercept);
      std::printf("max residual      %.9f\n", r.fit.max_residual);
      std::printf("fit points        %zu\n", r.fit.points);
      std::printf("profile min (C1)  %.9f\n", r.profile.min);
      std::printf("profile max (C2)  %.9f\n", r.profile.max);
      if (!profile_out.empty())
        write_profile(profile_out, header("exponent", config, exponent.describe()), r.profile, r.D);
      return 0;
    }

    if (*oscillation_cmd) {
      const IFSystem s = load_system(config = oscillation.config);
      const auto curve = oscillation.run(s, true);
      const double D = solve_D(exponent_problem(s));
      const auto profile = oscillation_profile(stable_pairs(curve), D);
      write_profile(oscillation_out, header("oscillation", config, oscillation.describe()), profile, D);
      std::printf("D %.9f  profile in [%.9f, %.9f]\n", D, profile.min, profile.max);
      return 0;
    }

    if (*distortion_cmd) {
      json out;
      if (mode == "example1") {
        const auto built = example1_build(ex_a, ex_eps);
        const auto ratios = example1_verify(built.system, k_max);
        json rows = json::array();
        bool ok = true;
        for (std::size_t k = 0; k < ratios.size(); ++k) {
          const double bound = std::pow(1.0 - ex_eps, static_cast<double>(k + 1));
          ok = ok && ratios[k] <= bound;
          rows.push_back({{"k", k + 1}, {"ratio", ratios[k]}, {"bound", bound}});
          std::printf("k=%zu  ratio %.12f  bound (1-eps)^k %.12f\n", k + 1, ratios[k], bound);
        }
        std::printf("strong bounded distortion %s\n", ok ? "violated (certified)" : "not certified");
        out = {{"mode", mode}, {"a", ex_a}, {"epsilon", ex_eps}, {"ratios", rows},
               {"certified", ok}, {"system", to_json(built.system)}};
      } else {
        if (config.empty()) throw ConfigError("--config is required for bdp/sbdp");
        const IFSystem s = load_system(config);
        const auto rep = mode == "bdp" ? bdp_constant(s, max_len, sampling) : sbdp_constant(s, max_len, sampling);
        std::printf("%s constant   %.12f\n", mode.c_str(), rep.max_ratio);
        std::printf("reciprocal       %.12f\n", rep.min_ratio);
        std::printf("words sampled    %zu\n", rep.words_sampled);
        for (std::size_t L = 0; L < rep.per_length_max.size(); ++L)
          std::printf("  |w| = %zu  max ratio %.12f\n", L + 1, rep.per_length_max[L]);
        if (!rep.permutations_exhaustive) std::printf("note: permutations sampled beyond |w| = 6\n");
        if (rep.suspected_unbounded) std::printf("note: growth trend does not flatten\n");
        out = {{"mode", mode},
               {"max_ratio", rep.max_ratio},
               {"min_ratio", rep.min_ratio},
               {"witness", {{"word", word_json(rep.witness.word)}, {"other", word_json(rep.witness.other)},
                            {"x", rep.witness.x}, {"y", rep.witness.y}}},
               {"per_length_max", rep.per_length_max},
               {"words_sampled", rep.words_sampled},
               {"grid", rep.grid},
               {"seed", sampling.seed},
               {"permutations_exhaustive", rep.permutations_exhaustive},
               {"suspected_unbounded", rep.suspected_unbounded}};
      }
      if (!witness_out.empty()) open_out(witness_out) << out.dump(2) << '\n';
      return 0;
    }

    if (*deform_cmd) {
      const IFSystem s = load_system(config);
      const AffineModel model = build_affine_model(s);
      if (!model_out.empty()) open_out(model_out) << to_json(model.system()).dump(2) << '\n';

      if (!generate.empty()) {
        const auto colon = generate.find(':');
        if (colon == std::string::npos) throw ConfigError("--generate expects family:param");
        json g = {{"family", generate.substr(0, colon)}};
        try {
          g["s"] = std::stod(generate.substr(colon + 1));
        } catch (const std::exception&) {
          throw ConfigError("--generate parameter is not a number");
        }
        const IFSystem generated = generate_deformed_system(detail::parse_family(g), model);
        const std::string text = to_json(generated).dump(2) + '\n';
        if (generate_out.empty()) std::cout << text;
        else open_out(generate_out) << text;
      }

      if (verify) {
        const DeformationMap g = build_g(s, model, deform_tol);
        std::mt19937_64 rng(deform_seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<Interval> intervals{{0.0, 1.0}};
        for (int k = 0; k < 100; ++k) {
          double a = unit(rng), b = unit(rng);
          if (a > b) std::swap(a, b);
          intervals.push_back({a, b});
        }
        const auto lip = bilipschitz_estimate(g);
        std::printf("pushforward residual  %.3e\n", pushforward_residual(g, intervals, deform_eps));
        std::printf("phi~ agreement        %.3e\n", tilde_phi_agreement(g, 6));
        std::printf("bi-Lipschitz q        %.9f\n", lip.q);
        std::printf("bi-Lipschitz Q        %.9f\n", lip.Q);
        if (!lip.bi_lipschitz()) std::printf("note: g is not bi-Lipschitz on the sampled grid\n");
      }
      if (model_out.empty() && generate.empty() && !verify)
        std::cout << to_json(model.system()).dump(2) << '\n';
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    for (const auto& d : e.details()) std::cerr << "  " << d << '\n';
    return exit_validation;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return exit_resources;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
