#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "openness/certify.h"
#include "openness/rate.h"

namespace openness {

/// Exit codes beyond the verdict codes 0/1/2.
inline constexpr int kExitConfigError = 3;
inline constexpr int kExitResourceError = 4;
inline constexpr int kExitDivergence = 5;

/// pow:kappa:beta | const:c | table:path (CSV s,d).
GainClass ParseGainSpec(std::string_view spec);
/// lip:L | power:L:eta | table:path (CSV r,h).
InverseGrowthBound ParseHSpec(std::string_view spec);
/// pow:C:gamma.
PowerLaw ParsePowerLawSpec(std::string_view spec);
/// Comma-separated reals.
std::vector<double> ParseVector(std::string_view text);

/// Runs the command line `args` (without the program name). Returns the
/// process exit code.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace openness
