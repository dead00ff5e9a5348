#include "hs/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hs/error.hpp"
#include "hs/io.hpp"
#include "hs/metrics.hpp"

namespace hs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string where(const std::string& key) { return "experiment spec key '" + key + "'"; }

double to_double(const std::string& key, const std::string& s) {
  double x = 0.0;
  if (!parse_double(s, x)) throw Error(Errc::parse_error, where(key) + ": bad number '" + s + "'");
  return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(s, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size() || s.front() == '-') {
    throw Error(Errc::parse_error, where(key) + ": bad unsigned integer '" + s + "'");
  }
  return x;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw Error(Errc::parse_error, where(key) + ": bad flag '" + s + "'");
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double median(std::vector<double> xs) {
  if (xs.empty()) return kNaN;
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

struct Curve {
  DensityCurve curve;
  double runtime_s = 0.0;
  bool trusted = false;
};

Curve invert(const WeightProfile& profile, const ExperimentSpec& spec) {
  const auto [auto_lo, auto_hi] = default_x_range(profile);
  InversionConfig inv = spec.inversion;
  inv.threads = spec.threads;
  inv.x_grid = InversionConfig::uniform_grid(spec.xmin.value_or(auto_lo), spec.xmax.value_or(auto_hi), spec.grid_points);
  const auto start = Clock::now();
  Curve c;
  c.curve = density_curve(profile, inv, spec.solver);
  c.runtime_s = seconds_since(start);
  // Every grid point converged (residual within the solver target) and the
  // certified spectral radius stayed below one.
  c.trusted = c.curve.gap_count == 0 && std::isfinite(c.curve.rho_max) && c.curve.rho_max < 1.0;
  return c;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (sizes.empty()) throw Error(Errc::invalid_argument, "experiment needs at least one size");
  for (const auto& [n, N] : sizes) {
    if (n == 0 || N == 0) throw Error(Errc::invalid_argument, "sizes must be positive");
  }
  if (trials < 1) throw Error(Errc::invalid_argument, "trials must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(Errc::invalid_argument, "epsilon must lie in (0, 1)");
  if (i_max < 1) throw Error(Errc::invalid_argument, "i_max must be at least 1");
  if (grid_points < 2) throw Error(Errc::invalid_argument, "grid needs at least two points");
  if (xmin && xmax && !(*xmax > *xmin)) throw Error(Errc::invalid_argument, "xmax must exceed xmin");
  if (pipeline) pipeline->validate();
  solver.validate();
  InversionConfig probe = inversion;
  probe.x_grid = {0.0, 1.0};
  probe.validate();
}

ExperimentSpec parse_experiment_spec(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::parse_error, std::string("experiment spec: ") + e.what());
  }

  ExperimentSpec spec;
  std::set<std::string> pipeline_keys;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw Error(Errc::parse_error, "experiment spec key '" + section + "' must sit inside a section");
    }
    for (const auto& [key, node] : body) {
      const std::string name = section + "." + key;
      const std::string value = trim(node.data());
      if (section == "experiment") {
        if (key == "profile") {
          spec.profile = ProfileGenerator::parse(value);
        } else if (key == "sizes") {
          spec.sizes.clear();
          for (const std::string& item : split(value, ',')) {
            const auto x = item.find('x');
            if (x == std::string::npos) throw Error(Errc::parse_error, where(name) + ": expected NxM, got '" + item + "'");
            spec.sizes.emplace_back(to_u64(name, trim(item.substr(0, x))), to_u64(name, trim(item.substr(x + 1))));
          }
        } else if (key == "family") {
          spec.sampler.family = parse_family(value);
        } else if (key == "complex") {
          spec.sampler.complex_entries = to_bool(name, value);
        } else if (key == "epsilon") {
          spec.epsilon = to_double(name, value);
        } else if (key == "trials") {
          spec.trials = to_u64(name, value);
        } else if (key == "seed") {
          spec.master_seed = to_u64(name, value);
        } else if (key == "i_max") {
          spec.i_max = to_u64(name, value);
        } else if (key == "ladder_depth") {
          spec.ladder_depth = to_u64(name, value);
        } else if (key == "threads") {
          spec.threads = static_cast<unsigned>(to_u64(name, value));
        } else {
          throw Error(Errc::parse_error, "unknown " + where(name));
        }
      } else if (section == "pipeline") {
        pipeline_keys.insert(key);
        TruncationPipelineConfig cfg = spec.pipeline.value_or(TruncationPipelineConfig{});
        if (key == "enabled") {
          if (!to_bool(name, value)) {
            spec.pipeline.reset();
            continue;
          }
        } else if (key == "eta_n") {
          cfg.eta_n = to_double(name, value);
        } else if (key == "center") {
          cfg.apply_center = to_bool(name, value);
        } else if (key == "rescale") {
          cfg.apply_rescale = to_bool(name, value);
        } else {
          throw Error(Errc::parse_error, "unknown " + where(name));
        }
        spec.pipeline = cfg;
      } else if (section == "inversion") {
        if (key == "eta") {
          spec.inversion.eta_sequence.clear();
          for (const std::string& item : split(value, ',')) spec.inversion.eta_sequence.push_back(to_double(name, item));
        } else if (key == "points") {
          spec.grid_points = to_u64(name, value);
        } else if (key == "xmin") {
          spec.xmin = to_double(name, value);
        } else if (key == "xmax") {
          spec.xmax = to_double(name, value);
        } else if (key == "extrapolation") {
          if (value == "richardson") {
            spec.inversion.extrapolation = Extrapolation::richardson;
          } else if (value == "last") {
            spec.inversion.extrapolation = Extrapolation::last_value;
          } else {
            throw Error(Errc::parse_error, where(name) + ": expected 'richardson' or 'last'");
          }
        } else if (key == "edge_tolerance") {
          spec.inversion.edge_tolerance = to_double(name, value);
        } else if (key == "certify_stride") {
          spec.inversion.certify_stride = to_u64(name, value);
        } else if (key == "detect_atom") {
          spec.inversion.detect_atom = to_bool(name, value);
        } else {
          throw Error(Errc::parse_error, "unknown " + where(name));
        }
      } else if (section == "solver") {
        if (key == "tol") {
          spec.solver.tol = to_double(name, value);
        } else if (key == "max_iter") {
          spec.solver.max_iter = to_u64(name, value);
        } else if (key == "damping") {
          spec.solver.damping = to_double(name, value);
        } else if (key == "newton") {
          spec.solver.newton = to_bool(name, value);
        } else if (key == "continuation") {
          spec.solver.continuation = to_bool(name, value);
        } else {
          throw Error(Errc::parse_error, "unknown " + where(name));
        }
      } else {
        throw Error(Errc::parse_error, "unknown experiment spec section '" + section + "'");
      }
    }
  }
  // `enabled = false` wins regardless of key order.
  if (pipeline_keys.count("enabled") && !to_bool("pipeline.enabled", trim(tree.get<std::string>("pipeline.enabled")))) {
    spec.pipeline.reset();
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open experiment spec '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_spec(buf.str());
}

std::string experiment_spec_text(const ExperimentSpec& spec) {
  std::string out = "[experiment]\nprofile = " + spec.profile.to_string() + "\nsizes = ";
  for (std::size_t k = 0; k < spec.sizes.size(); ++k) {
    out += (k ? ", " : "") + std::to_string(spec.sizes[k].first) + "x" + std::to_string(spec.sizes[k].second);
  }
  out += "\nfamily = " + std::string(family_name(spec.sampler.family));
  out += "\ncomplex = " + std::string(spec.sampler.complex_entries ? "true" : "false");
  out += "\nepsilon = " + fmt(spec.epsilon);
  out += "\ntrials = " + std::to_string(spec.trials);
  out += "\nseed = " + std::to_string(spec.master_seed);
  out += "\ni_max = " + std::to_string(spec.i_max);
  out += "\nladder_depth = " + std::to_string(spec.ladder_depth);
  out += "\nthreads = " + std::to_string(spec.threads);
  out += "\n\n[pipeline]\nenabled = " + std::string(spec.pipeline ? "true" : "false");
  if (spec.pipeline) {
    out += "\neta_n = " + fmt(spec.pipeline->eta_n);
    out += "\ncenter = " + std::string(spec.pipeline->apply_center ? "true" : "false");
    out += "\nrescale = " + std::string(spec.pipeline->apply_rescale ? "true" : "false");
  }
  out += "\n\n[inversion]\neta = ";
  for (std::size_t k = 0; k < spec.inversion.eta_sequence.size(); ++k) {
    out += (k ? ", " : "") + fmt(spec.inversion.eta_sequence[k]);
  }
  out += "\npoints = " + std::to_string(spec.grid_points);
  if (spec.xmin) out += "\nxmin = " + fmt(*spec.xmin);
  if (spec.xmax) out += "\nxmax = " + fmt(*spec.xmax);
  out += "\nextrapolation = " +
         std::string(spec.inversion.extrapolation == Extrapolation::richardson ? "richardson" : "last");
  out += "\nedge_tolerance = " + fmt(spec.inversion.edge_tolerance);
  out += "\ncertify_stride = " + std::to_string(spec.inversion.certify_stride);
  out += "\ndetect_atom = " + std::string(spec.inversion.detect_atom ? "true" : "false");
  out += "\n\n[solver]\ntol = " + fmt(spec.solver.tol);
  out += "\nmax_iter = " + std::to_string(spec.solver.max_iter);
  out += "\ndamping = " + fmt(spec.solver.damping);
  out += "\nnewton = " + std::string(spec.solver.newton ? "true" : "false");
  out += "\ncontinuation = " + std::string(spec.solver.continuation ? "true" : "false");
  out += "\n";
  return out;
}

std::pair<double, double> default_x_range(const WeightProfile& profile) {
  const Eigen::MatrixXd& d2 = profile.squared();
  const double N = static_cast<double>(profile.cols());
  // ||B|| <= (sqrt(max row sum) + sqrt(max column sum))^2 / N for the
  // variance profile, up to fluctuations.
  const double row = d2.rowwise().sum().maxCoeff() / N;
  const double col = d2.colwise().sum().maxCoeff() / N;
  const double bound = std::pow(std::sqrt(row) + std::sqrt(col), 2);
  return {-0.05 * bound, 1.25 * bound};
}

ComparisonReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ComparisonReport report;
  report.ladder_epsilon = kNaN;

  std::vector<EmpiricalDistribution> last_spectra;
  std::optional<WeightProfile> last_profile;

  for (std::size_t s = 0; s < spec.sizes.size(); ++s) {
    const auto [n, N] = spec.sizes[s];
    SizeSummary summary;
    summary.n = n;
    summary.N = N;
    summary.median_ks = kNaN;
    summary.median_d = kNaN;
    const std::uint64_t size_seed = derive_seed(spec.master_seed, s);

    auto fail_rows = [&](const std::string& cause) {
      summary.error = cause;
      for (std::size_t t = 0; t < spec.trials; ++t) {
        ComparisonRow row;
        row.n = n;
        row.N = N;
        row.trial = t;
        row.seed = derive_seed(size_seed, t);
        row.d_value = row.d_tail = row.ks = row.rho_max = row.residual_max = kNaN;
        row.error = cause;
        report.rows.push_back(row);
      }
    };

    std::optional<WeightProfile> profile;
    Curve curve;
    try {
      profile = spec.profile.generate(n, N, spec.master_seed);
      const TruncationPlan plan = plan_truncation(*profile, spec.epsilon);
      summary.M = plan.M;
      summary.rows_removed = plan.rows_removed.size();
      summary.cols_removed = plan.cols_removed.size();
      const WeightProfile truncated = truncate_profile(*profile, plan.M);
      curve = invert(truncated, spec);
    } catch (const Error& e) {
      fail_rows(e.what());
      report.sizes.push_back(summary);
      continue;
    }
    summary.atom_at_zero = curve.curve.atom_at_zero;
    summary.total_mass = curve.curve.total_mass();
    summary.gap_count = curve.curve.gap_count;
    summary.curve_runtime_s = curve.runtime_s;

    std::vector<EmpiricalDistribution> spectra;
    std::vector<double> trial_runtime(spec.trials, 0.0);
    try {
      const auto start = Clock::now();
      spectra = empirical_spectrum(*profile, spec.sampler, spec.pipeline, spec.trials, size_seed, spec.threads);
      const double each = seconds_since(start) / static_cast<double>(spec.trials);
      std::fill(trial_runtime.begin(), trial_runtime.end(), each);
    } catch (const Error& e) {
      fail_rows(e.what());
      report.sizes.push_back(summary);
      continue;
    }

    std::vector<double> ks_values, d_values;
    for (std::size_t t = 0; t < spec.trials; ++t) {
      const auto start = Clock::now();
      ComparisonRow row;
      row.n = n;
      row.N = N;
      row.trial = t;
      row.seed = derive_seed(size_seed, t);
      row.ks = ks_distance(spectra[t], curve.curve);
      const DMetricValue d = d_metric(spectra[t], curve.curve, spec.i_max);
      row.d_value = d.value;
      row.d_tail = d.tail_bound;
      row.rho_max = curve.curve.rho_max;
      row.residual_max = curve.curve.residual_max;
      row.trusted = curve.trusted;
      row.runtime_s = trial_runtime[t] + seconds_since(start);
      if (row.trusted) {
        ks_values.push_back(row.ks);
        d_values.push_back(row.d_value);
        ++summary.trusted_trials;
      }
      report.rows.push_back(row);
    }
    summary.median_ks = median(ks_values);
    summary.median_d = median(d_values);
    report.sizes.push_back(summary);
    last_spectra = std::move(spectra);
    last_profile = std::move(profile);
  }

  // Epsilon ladder on the largest size, reusing its spectra; the
  // deterministic equivalent is recomputed only when the bound M changes.
  if (spec.ladder_depth > 0 && last_profile) {
    std::map<double, Curve> curves;
    double eps = 1.0;
    for (std::size_t k = 1; k <= spec.ladder_depth; ++k) {
      eps *= 0.5;
      LadderEntry entry;
      entry.epsilon = eps;
      entry.median_d = kNaN;
      const TruncationPlan plan = plan_truncation(*last_profile, eps);
      entry.M = plan.M;
      try {
        auto it = curves.find(plan.M);
        if (it == curves.end()) {
          it = curves.emplace(plan.M, invert(truncate_profile(*last_profile, plan.M), spec)).first;
        }
        entry.feasible = true;
        std::vector<double> ds;
        for (const EmpiricalDistribution& F : last_spectra) ds.push_back(d_metric(F, it->second.curve, spec.i_max).value);
        entry.median_d = median(ds);
        entry.passed = it->second.trusted && entry.median_d <= eps;
      } catch (const Error&) {
        entry.feasible = false;
      }
      if (entry.passed) report.ladder_epsilon = eps;
      report.ladder.push_back(entry);
    }
  }
  return report;
}

}  // namespace hs
