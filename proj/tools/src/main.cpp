#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "hs/error.hpp"
#include "hs/experiments.hpp"
#include "hs/fixed_point.hpp"
#include "hs/io.hpp"
#include "hs/parallel.hpp"
#include "hs/profiles.hpp"
#include "hs/random_spectra.hpp"
#include "hs/stieltjes.hpp"
#include "hs/tightness.hpp"

namespace {

using hs::cli::ProfileOptions;
using hs::cli::RunInfo;
using hs::cli::UsageError;

struct SolverOptions {
  double tol = 1e-12;
  std::size_t max_iter = 10000;
  double damping = 1.0;
  bool no_newton = false;
  bool no_continuation = false;

  hs::SolverConfig config() const {
    hs::SolverConfig cfg;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    cfg.damping = damping;
    cfg.newton = !no_newton;
    cfg.continuation = !no_continuation;
    return cfg;
  }
};

void add_profile_options(CLI::App* sub, ProfileOptions& p, std::uint64_t& seed) {
  sub->add_option("--profile", p.profile,
                  "CSV file, or ones | constant:c | block:a,b/c,d | uniform:lo,hi | spiked:k,h")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::Join)
      ->capture_default_str();
  sub->add_option("--n", p.n, "rows of a generated profile")->check(CLI::PositiveNumber);
  sub->add_option("--N", p.N, "columns of a generated profile")->check(CLI::PositiveNumber);
  sub->add_option("--seed", seed, "seed for random profiles and samples");
}

void add_solver_options(CLI::App* sub, SolverOptions& s) {
  sub->add_option("--tol", s.tol, "fixed-point residual target")->capture_default_str();
  sub->add_option("--max-iter", s.max_iter, "iteration cap")->capture_default_str();
  sub->add_option("--damping", s.damping, "initial relaxation weight in (0, 1]")->capture_default_str();
  sub->add_flag("--no-newton", s.no_newton, "plain damped iteration only");
  sub->add_flag("--no-continuation", s.no_continuation, "cold start every point");
}

bool flag_on_command_line(const std::vector<std::string>& argv, const std::string& name) {
  return std::any_of(argv.begin() + 1, argv.end(),
                     [&](const std::string& a) { return a == name || a.rfind(name + "=", 0) == 0; });
}

hs::cli::SeedChoice seed_for(CLI::App* sub, const std::vector<std::string>& argv, std::uint64_t value,
                             std::optional<std::uint64_t> fallback = std::nullopt) {
  const bool on_cli = flag_on_command_line(argv, "--seed");
  if (!on_cli && sub->get_option("--seed")->count() > 0) fallback = value;
  return hs::cli::resolve_seed(on_cli, value, fallback);
}

nlohmann::json seed_json(const hs::cli::SeedChoice& s) { return {{"value", s.value}, {"source", s.source}}; }

nlohmann::json profile_json(const ProfileOptions& p, const hs::WeightProfile& D) {
  return {{"profile", p.profile}, {"n", D.rows()}, {"N", D.cols()}};
}

// Closed-form Stieltjes transform for the all-ones profile with ratio c = n / N.
std::complex<double> mp_closed_form(double c, std::complex<double> z) {
  const std::complex<double> a = c * z;
  const std::complex<double> b = z + c - 1.0;
  const std::complex<double> disc = std::sqrt(b * b - 4.0 * a);
  const std::complex<double> r1 = (-b + disc) / (2.0 * a);
  const std::complex<double> r2 = (-b - disc) / (2.0 * a);
  return r1.imag() > 0.0 ? r1 : r2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic equivalents for variance-profiled random matrices", "hs"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI file; one section per subcommand");
  unsigned threads = hs::default_threads();
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  std::vector<std::string> args(argv, argv + argc);
  RunInfo run;

  // solve
  ProfileOptions solve_p;
  std::uint64_t solve_seed = 0;
  SolverOptions solve_s;
  std::vector<std::string> solve_z;
  double solve_xmin = -1.0, solve_xmax = 5.0, solve_v = 0.1;
  std::size_t solve_points = 0;
  std::string solve_out;
  bool solve_no_certify = false;
  auto* solve = app.add_subcommand("solve", "solve the fixed-point system at points z");
  add_profile_options(solve, solve_p, solve_seed);
  add_solver_options(solve, solve_s);
  solve->add_option("--z", solve_z, "spectral point x+vi (repeatable)");
  solve->add_option("--points", solve_points, "horizontal grid size, used when --z is absent");
  solve->add_option("--xmin", solve_xmin, "grid start")->capture_default_str();
  solve->add_option("--xmax", solve_xmax, "grid end")->capture_default_str();
  solve->add_option("--v", solve_v, "grid height")->capture_default_str();
  solve->add_flag("--no-certify", solve_no_certify, "skip the contraction certificate");
  solve->add_option("--output", solve_out, "CSV path, stdout when absent");

  // density
  ProfileOptions dens_p;
  std::uint64_t dens_seed = 0;
  SolverOptions dens_s;
  std::optional<double> dens_xmin, dens_xmax;
  std::size_t dens_points = 0;
  std::vector<double> dens_eta{1e-2, 5e-3, 2.5e-3};
  std::string dens_extrap = "richardson";
  bool dens_no_atom = false;
  std::size_t dens_stride = 1;
  std::string dens_out;
  auto* density = app.add_subcommand("density", "recover the limiting density on a grid");
  add_profile_options(density, dens_p, dens_seed);
  add_solver_options(density, dens_s);
  density->add_option("--xmin", dens_xmin, "grid start, default from the norm bound");
  density->add_option("--xmax", dens_xmax, "grid end, default from the norm bound");
  density->add_option("--points", dens_points, "grid size, default resolves the smallest eta");
  density->add_option("--eta", dens_eta, "descending heights")->delimiter(',')->capture_default_str();
  density->add_option("--extrapolation", dens_extrap, "richardson | last")
      ->check(CLI::IsMember({"richardson", "last"}))
      ->capture_default_str();
  density->add_flag("--no-atom", dens_no_atom, "skip the atom at zero");
  density->add_option("--certify-stride", dens_stride, "certify every k-th point, 0 disables")
      ->capture_default_str();
  density->add_option("--output", dens_out, "CSV path, stdout when absent");

  // simulate
  ProfileOptions sim_p;
  std::uint64_t sim_seed = 0;
  std::string sim_family = "rademacher";
  bool sim_complex = false;
  std::size_t sim_trials = 1;
  bool sim_pipeline = false;
  double sim_eta_n = 1.0;
  bool sim_no_center = false, sim_no_rescale = false;
  std::string sim_dir, sim_spec;
  auto* simulate = app.add_subcommand("simulate", "sample spectra of B");
  add_profile_options(simulate, sim_p, sim_seed);
  simulate->add_option("--spec", sim_spec, "experiment INI file; replaces the profile and sampler flags")
      ->check(CLI::ExistingFile);
  simulate->add_option("--family", sim_family, "rademacher | uniform_pm | gaussian | two_point_asym")
      ->capture_default_str();
  simulate->add_flag("--complex", sim_complex, "complex entries");
  simulate->add_option("--trials", sim_trials, "number of matrices")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_flag("--pipeline", sim_pipeline, "truncate, center and rescale entries");
  simulate->add_option("--eta-n", sim_eta_n, "truncation level factor")->capture_default_str();
  simulate->add_flag("--no-center", sim_no_center, "skip centering in the pipeline");
  simulate->add_flag("--no-rescale", sim_no_rescale, "skip rescaling in the pipeline");
  simulate->add_option("--out-dir", sim_dir, "directory for spectrum CSVs")->required();

  // compare
  std::string cmp_spec, cmp_out, cmp_json;
  std::uint64_t cmp_seed = 0;
  auto* compare = app.add_subcommand("compare", "compare simulated spectra with the deterministic equivalent");
  compare->add_option("--spec", cmp_spec, "experiment INI file")->required()->check(CLI::ExistingFile);
  compare->add_option("--seed", cmp_seed, "overrides the spec seed");
  compare->add_option("--output", cmp_out, "CSV report path, stdout when absent");
  compare->add_option("--json", cmp_json, "JSON report path");

  // certify
  ProfileOptions cert_p;
  std::uint64_t cert_seed = 0;
  SolverOptions cert_s;
  std::string cert_z, cert_out;
  auto* certify = app.add_subcommand("certify", "contraction certificate at one point");
  add_profile_options(certify, cert_p, cert_seed);
  add_solver_options(certify, cert_s);
  certify->add_option("--z", cert_z, "spectral point x+vi")->required();
  certify->add_option("--output", cert_out, "JSON path, stdout when absent");

  // truncate
  ProfileOptions tr_p;
  std::uint64_t tr_seed = 0;
  double tr_eps = 0.0;
  bool tr_no_refine = false;
  std::string tr_out, tr_profile_out;
  auto* truncate = app.add_subcommand("truncate", "plan the removal of heavy rows and columns");
  add_profile_options(truncate, tr_p, tr_seed);
  truncate->add_option("--epsilon", tr_eps, "fraction of lines that may be removed")->required();
  truncate->add_flag("--no-refine", tr_no_refine, "line peeling only");
  truncate->add_option("--output", tr_out, "plan JSON path, stdout when absent");
  truncate->add_option("--profile-out", tr_profile_out, "write the truncated profile as CSV");

  // mp-check
  double mp_c = 0.5;
  std::vector<std::string> mp_z{"-1+0.1i", "0.5+0.1i", "1+0.01i", "2+0.5i", "4+1i"};
  auto* mpcheck = app.add_subcommand("mp-check", "solver against the closed form for the all-ones profile");
  mpcheck->add_option("--c", mp_c, "ratio n / N")->check(CLI::PositiveNumber)->capture_default_str();
  mpcheck->add_option("--z", mp_z, "spectral points x+vi")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  run.argv = args;
  run.threads = threads;
  run.config_text = app.config_to_str(true, false);

  try {
    if (*solve) {
      run.command = "solve";
      const auto seed = seed_for(solve, args, solve_seed);
      const hs::WeightProfile D = hs::cli::load_profile(solve_p, seed.value);
      std::vector<hs::SpectralPoint> pts;
      for (const auto& t : solve_z) pts.push_back(hs::cli::parse_z(t));
      if (pts.empty()) {
        if (solve_points < 2) throw UsageError("solve needs --z or --points >= 2");
        if (!(solve_v > 0.0)) throw UsageError("--v must be positive");
        pts = hs::ZGrid::horizontal(solve_xmin, solve_xmax, solve_points, solve_v).points();
      }
      hs::SolverConfig cfg = solve_s.config();
      cfg.certify = !solve_no_certify;
      const auto sols = hs::solve_grid(D, hs::ZGrid(pts), cfg);
      auto extra = profile_json(solve_p, D);
      extra["seed"] = seed_json(seed);
      hs::cli::emit(run, solve_out, hs::solutions_csv(sols), extra);
      const auto failed = std::count_if(sols.begin(), sols.end(), [](const auto& s) { return !s.converged; });
      if (failed > 0) {
        std::cerr << "hs solve: " << failed << " of " << sols.size() << " points did not converge\n";
        return 1;
      }
    } else if (*density) {
      run.command = "density";
      const auto seed = seed_for(density, args, dens_seed);
      const hs::WeightProfile D = hs::cli::load_profile(dens_p, seed.value);
      auto [lo, hi] = hs::default_x_range(D);
      if (dens_xmin) lo = *dens_xmin;
      if (dens_xmax) hi = *dens_xmax;
      if (!(hi > lo)) throw UsageError("--xmax must exceed --xmin");
      hs::InversionConfig inv;
      inv.eta_sequence = dens_eta;
      inv.extrapolation = dens_extrap == "last" ? hs::Extrapolation::last_value : hs::Extrapolation::richardson;
      inv.detect_atom = !dens_no_atom;
      inv.certify_stride = dens_stride;
      inv.threads = threads;
      if (dens_eta.empty()) throw UsageError("--eta needs at least one height");
      const std::size_t count =
          dens_points > 0 ? dens_points
                          : hs::InversionConfig::resolving_point_count(lo, hi, *std::min_element(dens_eta.begin(), dens_eta.end()));
      inv.x_grid = hs::InversionConfig::uniform_grid(lo, hi, count);
      const hs::DensityCurve curve = hs::density_curve(D, inv, dens_s.config());
      auto extra = profile_json(dens_p, D);
      extra["seed"] = seed_json(seed);
      extra["atom_at_zero"] = curve.atom_at_zero;
      extra["total_mass"] = curve.total_mass();
      extra["gap_count"] = curve.gap_count;
      hs::cli::emit(run, dens_out, hs::density_curve_csv(curve), extra);
      if (curve.partial) {
        std::cerr << "hs density: " << curve.gap_count << " grid points did not converge\n";
        return 1;
      }
    } else if (*simulate) {
      run.command = "simulate";
      struct Batch {
        hs::WeightProfile D;
        std::uint64_t seed;
        std::string subdir;
      };
      std::vector<Batch> batches;
      hs::EntrySampler sampler;
      std::optional<hs::TruncationPipelineConfig> pipeline;
      std::size_t trials = sim_trials;
      hs::cli::SeedChoice seed;
      nlohmann::json extra;
      if (!sim_spec.empty()) {
        // Seeds follow compare.
        const hs::ExperimentSpec spec = hs::load_experiment_spec(sim_spec);
        seed = seed_for(simulate, args, sim_seed, spec.master_seed);
        sampler = spec.sampler;
        pipeline = spec.pipeline;
        trials = spec.trials;
        for (std::size_t s = 0; s < spec.sizes.size(); ++s) {
          const auto [n, N] = spec.sizes[s];
          batches.push_back({spec.profile.generate(n, N, seed.value), hs::derive_seed(seed.value, s),
                             std::to_string(n) + "x" + std::to_string(N)});
        }
        extra["spec"] = sim_spec;
      } else {
        seed = seed_for(simulate, args, sim_seed);
        try {
          sampler.family = hs::parse_family(sim_family);
        } catch (const hs::Error& e) {
          throw UsageError(std::string("--family: ") + e.what());
        }
        sampler.complex_entries = sim_complex;
        if (sim_pipeline) pipeline = hs::TruncationPipelineConfig{sim_eta_n, !sim_no_center, !sim_no_rescale};
        const hs::WeightProfile D = hs::cli::load_profile(sim_p, seed.value);
        batches.push_back({D, seed.value, ""});
        extra = profile_json(sim_p, D);
      }
      std::vector<std::string> paths, payloads;
      nlohmann::json records = nlohmann::json::array();
      for (const Batch& b : batches) {
        const auto spectra = hs::empirical_spectrum(b.D, sampler, pipeline, trials, b.seed, threads);
        for (std::size_t t = 0; t < spectra.size(); ++t) {
          char name[32];
          std::snprintf(name, sizeof name, "trial_%04zu.csv", t);
          const std::string path = (std::filesystem::path(sim_dir) / b.subdir / name).string();
          std::string payload = hs::spectrum_csv(spectra[t]);
          hs::atomic_write(path, payload);
          records.push_back({{"path", path}, {"n", b.D.rows()}, {"N", b.D.cols()}, {"trial", t},
                             {"seed", hs::derive_seed(b.seed, t)}});
          paths.push_back(path);
          payloads.push_back(std::move(payload));
        }
      }
      extra["seed"] = seed_json(seed);
      extra["family"] = hs::family_name(sampler.family);
      extra["complex"] = sampler.complex_entries;
      extra["pipeline"] = pipeline ? nlohmann::json{{"eta_n", pipeline->eta_n}, {"center", pipeline->apply_center},
                                                    {"rescale", pipeline->apply_rescale}}
                                   : nlohmann::json(nullptr);
      extra["trials"] = records;
      hs::cli::write_manifest(run, (std::filesystem::path(sim_dir) / "manifest.json").string(), paths, payloads,
                              extra);
    } else if (*compare) {
      run.command = "compare";
      hs::ExperimentSpec spec = hs::load_experiment_spec(cmp_spec);
      const auto seed = seed_for(compare, args, cmp_seed, spec.master_seed);
      spec.master_seed = seed.value;
      if (app.get_option("--threads")->count() > 0) spec.threads = threads;
      const hs::ComparisonReport report = hs::run_experiment(spec);
      nlohmann::json extra{{"spec", cmp_spec}, {"seed", seed_json(seed)}};
      extra["ladder_epsilon"] = std::isfinite(report.ladder_epsilon) ? nlohmann::json(report.ladder_epsilon)
                                                                     : nlohmann::json(nullptr);
      hs::cli::emit(run, cmp_out, hs::report_csv(report), extra);
      if (!cmp_json.empty()) hs::cli::emit(run, cmp_json, hs::report_json(report), extra);
      std::size_t errors = 0;
      for (const auto& r : report.rows) errors += r.error.empty() ? 0 : 1;
      for (const auto& s : report.sizes) errors += s.error.empty() ? 0 : 1;
      if (errors > 0) {
        std::cerr << "hs compare: " << errors << " sizes or trials failed, see the report\n";
        return 1;
      }
    } else if (*certify) {
      run.command = "certify";
      const auto seed = seed_for(certify, args, cert_seed);
      const hs::WeightProfile D = hs::cli::load_profile(cert_p, seed.value);
      const hs::SpectralPoint z = hs::cli::parse_z(cert_z);
      hs::SolverConfig cfg = cert_s.config();
      cfg.certify = true;
      const hs::FixedPointSolution sol = hs::solve_e0(D, z, cfg);
      if (!sol.converged) {
        throw hs::Error(hs::Errc::convergence_failure,
                        "no convergence at z = " + cert_z + " (residual " + hs::format_double(sol.residual) + ")");
      }
      const hs::ContractionDiagnostics diag = hs::build_certificate(D, sol);
      auto extra = profile_json(cert_p, D);
      extra["seed"] = seed_json(seed);
      hs::cli::emit(run, cert_out, hs::certificate_json(sol, diag) + "\n", extra);
    } else if (*truncate) {
      run.command = "truncate";
      if (!(tr_eps > 0.0 && tr_eps < 1.0)) throw UsageError("--epsilon must lie in (0, 1)");
      const auto seed = seed_for(truncate, args, tr_seed);
      const hs::WeightProfile D = hs::cli::load_profile(tr_p, seed.value);
      const hs::TruncationPlan plan = hs::plan_truncation(D, tr_eps, hs::PlanOptions{!tr_no_refine});
      auto extra = profile_json(tr_p, D);
      extra["seed"] = seed_json(seed);
      hs::cli::emit(run, tr_out, hs::plan_json(plan) + "\n", extra);
      if (!tr_profile_out.empty()) {
        hs::cli::emit(run, tr_profile_out, hs::profile_to_csv(hs::truncate_profile(D, plan.M)), extra);
      }
    } else if (*mpcheck) {
      run.command = "mp-check";
      // c = n / N realised with N = 1000 columns.
      const std::size_t N = 1000;
      const double n_real = mp_c * static_cast<double>(N);
      const auto n = static_cast<std::size_t>(std::llround(n_real));
      if (n == 0 || std::abs(n_real - static_cast<double>(n)) > 1e-9) {
        throw UsageError("--c must be a positive multiple of 1/1000");
      }
      const hs::WeightProfile D = hs::ProfileGenerator::parse("ones").generate(n, N, 0);
      hs::SolverConfig cfg;
      cfg.certify = false;
      double worst = 0.0;
      std::printf("z,re_g,im_g,re_closed,im_closed,abs_error\n");
      for (const auto& t : mp_z) {
        const hs::SpectralPoint z = hs::cli::parse_z(t);
        const hs::FixedPointSolution sol = hs::solve_e0(D, z, cfg);
        const std::complex<double> ref = mp_closed_form(mp_c, z.z());
        const double err = sol.converged ? std::abs(sol.g - ref) : INFINITY;
        worst = std::max(worst, err);
        std::printf("%s,%s,%s,%s,%s,%s\n", t.c_str(), hs::format_double(sol.g.real()).c_str(),
                    hs::format_double(sol.g.imag()).c_str(), hs::format_double(ref.real()).c_str(),
                    hs::format_double(ref.imag()).c_str(), hs::format_double(err).c_str());
      }
      if (!(worst <= 1e-10)) {
        std::cerr << "hs mp-check: max error " << hs::format_double(worst) << " above 1e-10\n";
        return 1;
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "hs " << run.command << ": " << e.what() << "\n";
    return 2;
  } catch (const hs::Error& e) {
    std::cerr << "hs " << run.command << ": " << hs::errc_name(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "hs " << run.command << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
