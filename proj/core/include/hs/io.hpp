#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hs/core.hpp"
#include "hs/experiments.hpp"
#include "hs/fixed_point.hpp"
#include "hs/metrics.hpp"
#include "hs/tightness.hpp"

namespace hs {

/// Shortest text that round-trips (17 significant digits, '.' decimal).
std::string format_double(double x);

/// Whole-string decimal parse; subnormal values are accepted.
bool parse_double(const std::string& text, double& out);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t x);

/// Writes to a sibling temporary file, then renames over `path`.
void atomic_write(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);

/// One profile row per line, comma separated, no header.
std::string profile_to_csv(const WeightProfile& profile);
WeightProfile profile_from_csv(std::string_view text);
WeightProfile read_profile_csv(const std::string& path);

/// Header "x,density,cdf,eta_used"; gaps are written as "nan".
std::string density_curve_csv(const DensityCurve& curve);

/// Header "x,v,re_g,im_g,residual,rho_C0,identity_defect,iterations,converged"
/// then re_e0_k,im_e0_k for every k.
std::string solutions_csv(const std::vector<FixedPointSolution>& solutions);

/// Header "eigenvalue", one value per line.
std::string spectrum_csv(const EmpiricalDistribution& F);

/// Header "n,N,trial,seed,d_value,d_tail,ks,rho_max,residual_max,trusted,error".
/// Runtimes are left out so that reruns give identical bytes.
std::string report_csv(const ComparisonReport& report);

std::string plan_json(const TruncationPlan& plan);
std::string certificate_json(const FixedPointSolution& sol, const ContractionDiagnostics& diag);
std::string report_json(const ComparisonReport& report);

}  // namespace hs
