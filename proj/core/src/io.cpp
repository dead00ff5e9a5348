#include "hs/io.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <unistd.h>

#include "hs/error.hpp"

namespace hs {

namespace {

using nlohmann::json;

// JSON has no NaN or infinity; those become null.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

bool parse_double(const std::string& text, double& out) {
  if (text.empty() || std::isspace(static_cast<unsigned char>(text.front()))) return false;
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) return false;
  // ERANGE also flags underflow to a subnormal, which is a valid value.
  if (errno == ERANGE && std::abs(x) > std::numeric_limits<double>::min()) return false;
  out = x;
  return true;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

void atomic_write(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(Errc::io_error, "write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::io_error, "cannot rename onto '" + path + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string profile_to_csv(const WeightProfile& profile) {
  std::string out;
  for (std::size_t i = 0; i < profile.rows(); ++i) {
    for (std::size_t j = 0; j < profile.cols(); ++j) {
      if (j) out += ',';
      out += format_double(profile(i, j));
    }
    out += '\n';
  }
  return out;
}

WeightProfile profile_from_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const std::string line = trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    ++line_no;
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      const std::string cell = trim(std::string_view(line).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
      double x = 0.0;
      if (!parse_double(cell, x)) {
        throw Error(Errc::parse_error, "profile CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
      row.push_back(x);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  return WeightProfile::validate(rows);
}

WeightProfile read_profile_csv(const std::string& path) { return profile_from_csv(read_file(path)); }

std::string density_curve_csv(const DensityCurve& curve) {
  std::string out = "x,density,cdf,eta_used\n";
  for (std::size_t k = 0; k < curve.xs.size(); ++k) {
    out += format_double(curve.xs[k]) + ',' + format_double(curve.density[k]) + ',' + format_double(curve.cdf[k]) + ',' +
           format_double(curve.eta_used[k]) + '\n';
  }
  return out;
}

std::string solutions_csv(const std::vector<FixedPointSolution>& solutions) {
  std::size_t N = 0;
  for (const auto& s : solutions) N = std::max(N, s.e0.size());
  std::string out = "x,v,re_g,im_g,residual,rho_C0,identity_defect,iterations,converged";
  for (std::size_t k = 0; k < N; ++k) out += ",re_e0_" + std::to_string(k) + ",im_e0_" + std::to_string(k);
  out += '\n';
  for (const auto& s : solutions) {
    out += format_double(s.z.x()) + ',' + format_double(s.z.v()) + ',' + format_double(s.g.real()) + ',' +
           format_double(s.g.imag()) + ',' + format_double(s.residual) + ',' + format_double(s.rho_C0) + ',' +
           format_double(s.identity_defect) + ',' + std::to_string(s.iterations) + ',' + (s.converged ? "1" : "0");
    for (std::size_t k = 0; k < N; ++k) {
      if (k < s.e0.size()) {
        out += ',' + format_double(s.e0[k].real()) + ',' + format_double(s.e0[k].imag());
      } else {
        out += ",nan,nan";
      }
    }
    out += '\n';
  }
  return out;
}

std::string spectrum_csv(const EmpiricalDistribution& F) {
  std::string out = "eigenvalue\n";
  for (double x : F.atoms()) out += format_double(x) + '\n';
  return out;
}

std::string report_csv(const ComparisonReport& report) {
  std::string out = "n,N,trial,seed,d_value,d_tail,ks,rho_max,residual_max,trusted,error\n";
  for (const auto& r : report.rows) {
    std::string err = r.error;
    for (char& c : err) {
      if (c == ',' || c == '\n') c = ';';
    }
    out += std::to_string(r.n) + ',' + std::to_string(r.N) + ',' + std::to_string(r.trial) + ',' + std::to_string(r.seed) +
           ',' + format_double(r.d_value) + ',' + format_double(r.d_tail) + ',' + format_double(r.ks) + ',' +
           format_double(r.rho_max) + ',' + format_double(r.residual_max) + ',' + (r.trusted ? "1" : "0") + ',' + err +
           '\n';
  }
  return out;
}

std::string plan_json(const TruncationPlan& plan) {
  json j;
  j["epsilon"] = num(plan.epsilon);
  j["M"] = num(plan.M);
  j["rows"] = plan.rows_removed;
  j["cols"] = plan.cols_removed;
  j["budget"] = plan.budget;
  j["greedy_M"] = num(plan.greedy_M);
  j["refined"] = plan.refined;
  return j.dump(2) + "\n";
}

std::string certificate_json(const FixedPointSolution& sol, const ContractionDiagnostics& diag) {
  json j;
  j["x"] = num(sol.z.x());
  j["v"] = num(sol.z.v());
  j["g"] = {num(sol.g.real()), num(sol.g.imag())};
  j["residual"] = num(sol.residual);
  j["iterations"] = sol.iterations;
  j["converged"] = sol.converged;
  j["rho"] = num(diag.rho);
  j["rho_upper"] = num(diag.rho_upper);
  j["identity_defect"] = num(diag.identity_defect);
  j["power_iterations"] = diag.power_iterations;
  j["power_stalled"] = diag.power_stalled;
  json b0 = json::array(), e2 = json::array();
  for (Eigen::Index k = 0; k < diag.b0.size(); ++k) {
    b0.push_back(num(diag.b0(k)));
    e2.push_back(num(diag.e2(k)));
  }
  j["b0"] = b0;
  j["e2"] = e2;
  return j.dump(2) + "\n";
}

std::string report_json(const ComparisonReport& report) {
  json j;
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"n", r.n},
                    {"N", r.N},
                    {"trial", r.trial},
                    {"seed", r.seed},
                    {"d_value", num(r.d_value)},
                    {"d_tail", num(r.d_tail)},
                    {"ks", num(r.ks)},
                    {"rho_max", num(r.rho_max)},
                    {"residual_max", num(r.residual_max)},
                    {"runtime_s", num(r.runtime_s)},
                    {"trusted", r.trusted},
                    {"error", r.error}});
  }
  json sizes = json::array();
  for (const auto& s : report.sizes) {
    sizes.push_back({{"n", s.n},
                     {"N", s.N},
                     {"M", num(s.M)},
                     {"rows_removed", s.rows_removed},
                     {"cols_removed", s.cols_removed},
                     {"atom_at_zero", num(s.atom_at_zero)},
                     {"total_mass", num(s.total_mass)},
                     {"gap_count", s.gap_count},
                     {"trusted_trials", s.trusted_trials},
                     {"median_ks", num(s.median_ks)},
                     {"median_d", num(s.median_d)},
                     {"curve_runtime_s", num(s.curve_runtime_s)},
                     {"error", s.error}});
  }
  json ladder = json::array();
  for (const auto& l : report.ladder) {
    ladder.push_back({{"epsilon", num(l.epsilon)},
                      {"M", num(l.M)},
                      {"feasible", l.feasible},
                      {"median_d", num(l.median_d)},
                      {"passed", l.passed}});
  }
  j["rows"] = rows;
  j["sizes"] = sizes;
  j["ladder"] = ladder;
  j["ladder_epsilon"] = num(report.ladder_epsilon);
  return j.dump(2) + "\n";
}

}  // namespace hs
