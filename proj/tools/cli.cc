#include "openness/cli.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "openness/errors.h"
#include "openness/estimates.h"
#include "openness/geometry.h"
#include "openness/simulate.h"
#include "openness/systems.h"

namespace openness {
namespace {

std::vector<std::string_view> Split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double ParseReal(std::string_view text, std::string_view what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw InputError("cannot parse '" + std::string(text) + "' as a number in " +
                     std::string(what));
  }
  return value;
}

// Two-column CSV; a non-numeric first line is taken as a header.
std::pair<std::vector<double>, std::vector<double>> ReadTwoColumnCsv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open table '" + path + "'");
  std::vector<double> x, y;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = Split(line, ',');
    if (cols.size() != 2) {
      throw InputError("table '" + path + "': expected two columns in '" + line +
                       "'");
    }
    if (first) {
      first = false;
      double probe = 0.0;
      const auto c = cols[0];
      if (std::from_chars(c.data(), c.data() + c.size(), probe).ec !=
          std::errc()) {
        continue;
      }
    }
    x.push_back(ParseReal(cols[0], path));
    y.push_back(ParseReal(cols[1], path));
  }
  return {std::move(x), std::move(y)};
}

std::string JoinReals(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += FormatDouble(v[i]);
  }
  return s;
}

// Replaces `--config file.json` by the equivalent flags, placed right after the
// subcommand so that flags given explicitly on the command line win.
std::vector<std::string> ExpandConfig(std::vector<std::string> args) {
  auto it = std::find_if(args.begin(), args.end(), [](const std::string& a) {
    return a == "--config" || a.starts_with("--config=");
  });
  if (it == args.end()) return args;
  std::string path;
  if (*it == "--config") {
    if (it + 1 == args.end()) throw InputError("--config needs a path");
    path = *(it + 1);
    args.erase(it, it + 2);
  } else {
    path = it->substr(std::string("--config=").size());
    args.erase(it);
  }
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  nlohmann::json config;
  try {
    config = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("config '" + path + "': " + e.what());
  }
  if (!config.is_object()) throw InputError("config must be a JSON object");

  std::vector<std::string> flags;
  for (const auto& [key, value] : config.items()) {
    if (key == "command") continue;
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (value.is_boolean()) {
      if (value.get<bool>()) flags.push_back(flag);
    } else if (value.is_string()) {
      flags.push_back(flag);
      flags.push_back(value.get<std::string>());
    } else if (value.is_number_integer()) {
      flags.push_back(flag);
      flags.push_back(std::to_string(value.get<long long>()));
    } else if (value.is_number()) {
      flags.push_back(flag);
      flags.push_back(FormatDouble(value.get<double>()));
    } else if (value.is_array()) {
      std::vector<double> v;
      for (const auto& x : value) v.push_back(x.get<double>());
      flags.push_back(flag);
      flags.push_back(JoinReals(v));
    } else {
      throw InputError("config key '" + key + "' has an unsupported type");
    }
  }
  std::size_t at = args.empty() ? 0 : 1;
  if (args.empty() && config.contains("command")) {
    args.push_back(config["command"].get<std::string>());
    at = 1;
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), flags.begin(),
              flags.end());
  return args;
}

struct SystemChoice {
  std::string name;
  std::string descriptor;
};

std::pair<System, std::string> LoadSystem(const SystemChoice& c) {
  if (!c.name.empty() && !c.descriptor.empty()) {
    throw InputError("give either --system or --descriptor, not both");
  }
  if (!c.descriptor.empty()) {
    return {LoadDescriptor(c.descriptor), c.descriptor};
  }
  if (c.name.empty()) throw InputError("a system is required (--system NAME)");
  return {Builtin(c.name), c.name};
}

struct TableFlags {
  std::string norm = "linf";
  double r_min = 0.01;
  double r_max = 1.0;
  int points = 16;
  std::optional<double> delta;
  std::optional<double> epsilon;
  std::size_t max_points = 1'000'000;
  std::size_t max_cells = 8'000'000;
};

RateOptions MakeRateOptions(const TableFlags& f, const std::string& id) {
  if (f.delta && !(*f.delta > 0.0)) throw InputError("--delta must be > 0");
  if (f.epsilon && !(*f.epsilon > 0.0)) throw InputError("--epsilon must be > 0");
  if (f.max_points == 0 || f.max_cells == 0) {
    throw InputError("--max-points and --max-cells must be positive");
  }
  RateOptions o;
  o.max_points = f.max_points;
  o.max_cells = f.max_cells;
  o.spacing_fraction = f.delta;
  o.cell_fraction = f.epsilon;
  o.system_id = id;
  return o;
}

std::string DefaultsLine(const TableFlags& f) {
  return "max_points=" + std::to_string(f.max_points) +
         " max_cells=" + std::to_string(f.max_cells) + " delta=" +
         (f.delta ? FormatDouble(*f.delta) + "*r" : std::string("budget")) +
         " epsilon=" +
         (f.epsilon ? FormatDouble(*f.epsilon) + "*r" : std::string("delta"));
}

void AddTableFlags(CLI::App* cmd, TableFlags& f, bool with_grid) {
  cmd->add_option("--norm", f.norm, "linf or l2")->capture_default_str();
  if (with_grid) {
    cmd->add_option("--r-min", f.r_min, "smallest radius")->capture_default_str();
    cmd->add_option("--r-max", f.r_max, "largest radius")->capture_default_str();
    cmd->add_option("--points", f.points, "log-spaced grid points")
        ->capture_default_str();
  }
  cmd->add_option("--delta", f.delta,
                  "domain net covering radius as a fraction of r "
                  "(default: from --max-points)");
  cmd->add_option("--epsilon", f.epsilon,
                  "image cell size as a fraction of r (default: the net "
                  "covering radius)");
  cmd->add_option("--max-points", f.max_points, "domain net budget per radius")
      ->capture_default_str();
  cmd->add_option("--max-cells", f.max_cells, "image grid cell cap")
      ->capture_default_str();
}

std::ostream& OpenOutput(const std::string& path, std::ofstream& file,
                         std::ostream& fallback) {
  if (path.empty()) return fallback;
  file.open(path, std::ios::binary);
  if (!file) throw InputError("cannot write '" + path + "'");
  return file;
}

// rate ------------------------------------------------------------------------

struct RateFlags {
  SystemChoice system;
  TableFlags table;
  std::string out;
  std::string format = "csv";
};

void WriteRateJson(const RateTable& t, std::ostream& os) {
  nlohmann::ordered_json j;
  j["system"] = t.system_id;
  j["norm"] = ToString(t.norm);
  auto rows = nlohmann::ordered_json::array();
  for (const auto& e : t.entries) {
    rows.push_back({{"r", e.r},
                    {"g_lower", e.g_lower},
                    {"g_upper", e.g_upper},
                    {"delta", e.delta},
                    {"epsilon", e.epsilon},
                    {"lambda", e.lambda},
                    {"method", e.method},
                    {"lower_rigorous", e.lower_rigorous}});
  }
  j["entries"] = std::move(rows);
  os << j.dump(2) << '\n';
}

int CmdRate(const RateFlags& f, std::ostream& out, std::ostream& err) {
  const auto [sys, id] = LoadSystem(f.system);
  const Norm norm = ParseNorm(f.table.norm);
  if (f.table.points < 2) throw InputError("--points must be >= 2");
  if (!(f.table.r_min > 0.0) || !(f.table.r_max > f.table.r_min)) {
    throw InputError("need 0 < --r-min < --r-max");
  }
  if (f.format != "csv" && f.format != "json") {
    throw InputError("--format must be csv or json");
  }
  const auto grid = LogSpacedGrid(f.table.r_min, f.table.r_max, f.table.points);
  const RateTable table =
      OpennessRateTable(sys, grid, norm, MakeRateOptions(f.table, id));

  std::ofstream file;
  std::ostream& data = OpenOutput(f.out, file, out);
  if (f.format == "csv") {
    WriteRateCsv(table, data);
  } else {
    WriteRateJson(table, data);
  }
  std::ostream& summary = f.out.empty() ? err : out;
  summary << "# rate: system=" << id << " norm=" << ToString(norm) << " r=["
          << FormatDouble(f.table.r_min) << ", " << FormatDouble(f.table.r_max)
          << "] points=" << f.table.points << ' ' << DefaultsLine(f.table)
          << '\n';
  try {
    const PowerLawFit fit = FitPowerLaw(table, Column::kUpper);
    summary << "fit (upper column): g(r) ~ C r^gamma with C = "
            << FormatDouble(fit.law.coefficient)
            << ", gamma = " << FormatDouble(fit.law.exponent)
            << ", max relative residual = "
            << FormatDouble(fit.max_relative_residual) << '\n';
  } catch (const FitError& e) {
    summary << "fit: unavailable (" << e.what() << ")\n";
  }
  const bool zero_like =
      std::all_of(table.entries.begin(), table.entries.end(),
                  [](const RateEntry& e) {
                    return e.method != "linear" && e.g_upper <= 2.0 * e.slack();
                  });
  if (zero_like) {
    summary << "rate consistent with zero: every g_upper is within twice the "
               "discretisation slack\n";
  }
  return 0;
}

// certify ---------------------------------------------------------------------

struct CertifyFlags {
  SystemChoice system;
  TableFlags table;
  std::string method = "main";
  std::string gain;
  std::string h;
  std::string envelope;
  std::string closed_loop;
  double r_min = 1e-3;
  double r_max = 1e-1;
  int points = 16;
  std::string out;
};

RateTable TableAt(const System& sys, std::vector<double> radii, Norm norm,
                  const RateOptions& options) {
  if (radii.empty()) {
    RateTable empty;
    empty.system_id = options.system_id;
    empty.norm = norm;
    return empty;
  }
  return OpennessRateTable(sys, radii, norm, options);
}

int CmdCertify(const CertifyFlags& f, std::ostream& out, std::ostream&) {
  if (f.gain.empty() || f.h.empty()) {
    throw InputError("certify needs --gain and --h");
  }
  const GainClass d = ParseGainSpec(f.gain);
  const InverseGrowthBound h = ParseHSpec(f.h);
  const Norm norm = ParseNorm(f.table.norm);
  const RRange range{f.r_min, f.r_max, f.points};
  CheckGrid(range);

  Verdict v;
  std::string system_id = "none";
  if (f.method == "symbolic") {
    PowerLaw env;
    if (!f.envelope.empty()) {
      env = ParsePowerLawSpec(f.envelope);
      v = CheckNogoSymbolic(env, d, h);
      v.provenance.emplace_back("envelope_source", "--g-envelope");
    } else {
      const auto [sys, id] = LoadSystem(f.system);
      system_id = id;
      const auto grid = CheckGrid(range);
      const RateTable t = OpennessRateTable(sys, grid, norm,
                                            MakeRateOptions(f.table, id));
      const PowerLawFit fit = FitPowerLaw(t, Column::kUpper);
      v = CheckNogoSymbolic(fit.law, d, h);
      v.provenance.emplace_back(
          "envelope_source",
          "fitted to the upper column on the check range (max relative "
          "residual " + FormatDouble(fit.max_relative_residual) + ")");
      v.notes.push_back("the envelope is a least-squares fit, not a proven bound");
    }
  } else if (f.method == "main" || f.method == "strong" ||
             f.method == "supnorm") {
    const auto [sys, id] = LoadSystem(f.system);
    system_id = id;
    const RateOptions options = MakeRateOptions(f.table, id);
    if (f.method == "main") {
      const RateTable g =
          TableAt(sys, RequiredRhoRadii(d, h, range), norm, options);
      v = CheckNogo(g, d, h, range);
    } else if (f.method == "strong") {
      if (f.closed_loop.empty()) {
        throw InputError("--method strong needs --closed-loop NAME");
      }
      const System fu = ClosedLoopMap(f.closed_loop);
      RateOptions fu_options = options;
      fu_options.system_id = f.closed_loop;
      const RateTable g_f =
          TableAt(sys, RequiredRhoRadii(d, h, range), norm, options);
      const RateTable g_fu =
          TableAt(fu, RequiredHRadii(h, range), norm, fu_options);
      v = CheckNogoStrong(g_f, g_fu, d, h, range);
    } else {
      const double delta =
          f.table.delta ? *f.table.delta
                        : SpacingForBudget(
                              std::max<int>(1, static_cast<int>(
                                                   ActiveVariables(sys).size())),
                              1.0, norm, f.table.max_points);
      v = CheckNormBoundNogo(sys, d, h, range, delta, norm);
    }
    v.provenance.emplace_back("table_defaults", DefaultsLine(f.table));
  } else {
    throw InputError("--method must be main, symbolic, strong or supnorm");
  }
  v.provenance.emplace_back("system", system_id);
  v.provenance.emplace_back("norm", std::string(ToString(norm)));
  v.provenance.emplace_back("method", f.method);
  v.provenance.emplace_back(
      "r_range", "[" + FormatDouble(f.r_min) + ", " + FormatDouble(f.r_max) + "]");

  std::ofstream file;
  std::ostream& dest = OpenOutput(f.out, file, out);
  dest << VerdictJson(v) << '\n';
  return ExitCode(v.outcome);
}

// simulate --------------------------------------------------------------------

struct SimulateFlags {
  std::string loop;
  std::string x0;
  double dt = 1e-3;
  double horizon = 20.0;
  bool linearize = false;
  double step = 1e-5;
  bool no_basin_check = false;
  std::string out;
};

int CmdSimulate(const SimulateFlags& f, std::ostream& out, std::ostream& err) {
  const ClosedLoopField field = ClosedLoop(f.loop);
  const std::vector<double> x0v = ParseVector(f.x0);
  const Eigen::VectorXd x0 =
      Eigen::Map<const Eigen::VectorXd>(x0v.data(), static_cast<Eigen::Index>(x0v.size()));
  IntegrateOptions options;
  options.check_basin = !f.no_basin_check;
  const Trajectory traj = Integrate(field, x0, f.dt, f.horizon, options);

  std::ofstream file;
  std::ostream& data = OpenOutput(f.out, file, out);
  WriteTrajectoryCsv(traj, data);
  std::ostream& summary = f.out.empty() ? err : out;
  summary << "# simulate: loop=" << field.name << " dt=" << FormatDouble(f.dt)
          << " T=" << FormatDouble(f.horizon) << " method=rk4\n";
  summary << "final ||x|| = " << FormatDouble(traj.norms.back()) << " at t = "
          << FormatDouble(traj.times.back()) << '\n';
  if (traj.decay_fit) {
    summary << "decay rate (final half) = " << FormatDouble(traj.decay_fit->rate)
            << '\n';
  }
  if (f.linearize) {
    const Linearization lin =
        Linearize(field, Eigen::VectorXd::Zero(field.state_dim), f.step);
    summary << "jacobian at 0:";
    for (Eigen::Index i = 0; i < lin.jacobian.rows(); ++i) {
      summary << (i ? "; " : " [");
      for (Eigen::Index j = 0; j < lin.jacobian.cols(); ++j) {
        summary << (j ? ", " : "") << FormatDouble(lin.jacobian(i, j));
      }
    }
    summary << "]\neigenvalues:";
    for (const auto& z : lin.eigenvalues) {
      summary << ' ' << FormatDouble(z.real());
      if (z.imag() != 0.0) {
        summary << (z.imag() < 0 ? "-" : "+") << FormatDouble(std::abs(z.imag()))
                << 'i';
      }
    }
    summary << '\n';
  }
  if (traj.status == IntegrationStatus::kDiverged) {
    err << "error: " << traj.message << '\n';
    return kExitDivergence;
  }
  return 0;
}

// examples --------------------------------------------------------------------

int CmdExamples(std::ostream& out) {
  out << "systems:\n";
  for (const auto& e : BuiltinCatalog()) {
    out << "  " << e.name << "  " << e.description << '\n';
  }
  out << "closed loops (simulate --loop, certify --closed-loop):\n"
      << "  threshold_alpha  cubic2d with u = cbrt(-2 x2 - x1/2 - x1 x2 - x2^2)\n"
      << "  counterexample:p  x' = x + u with u = -x - x^p (p odd >= 3)\n";
  return 0;
}

}  // namespace

GainClass ParseGainSpec(std::string_view spec) {
  const auto parts = Split(spec, ':');
  const std::string_view kind = parts[0];
  if (kind == "pow" && parts.size() == 3) {
    return GainClass::PowerLaw(ParseReal(parts[1], spec), ParseReal(parts[2], spec));
  }
  if (kind == "const" && parts.size() == 2) {
    return GainClass::Constant(ParseReal(parts[1], spec));
  }
  if (kind == "table" && parts.size() >= 2) {
    auto [s, d] = ReadTwoColumnCsv(std::string(spec.substr(6)));
    return GainClass::Tabulated(std::move(s), std::move(d));
  }
  throw InputError("bad gain spec '" + std::string(spec) +
                   "' (expected pow:kappa:beta, const:c or table:path)");
}

InverseGrowthBound ParseHSpec(std::string_view spec) {
  const auto parts = Split(spec, ':');
  const std::string_view kind = parts[0];
  if (kind == "lip" && parts.size() == 2) {
    return InverseGrowthBound::Lipschitz(ParseReal(parts[1], spec));
  }
  if (kind == "power" && parts.size() == 3) {
    return InverseGrowthBound::Power(ParseReal(parts[1], spec),
                                     ParseReal(parts[2], spec));
  }
  if (kind == "table" && parts.size() >= 2) {
    auto [r, h] = ReadTwoColumnCsv(std::string(spec.substr(6)));
    return InverseGrowthBound::Tabulated(std::move(r), std::move(h));
  }
  throw InputError("bad h spec '" + std::string(spec) +
                   "' (expected lip:L, power:L:eta or table:path)");
}

PowerLaw ParsePowerLawSpec(std::string_view spec) {
  const auto parts = Split(spec, ':');
  if (parts.size() != 3 || parts[0] != "pow") {
    throw InputError("bad envelope spec '" + std::string(spec) +
                     "' (expected pow:C:gamma)");
  }
  PowerLaw law{ParseReal(parts[1], spec), ParseReal(parts[2], spec)};
  if (!(law.coefficient > 0.0) || !(law.exponent > 0.0)) {
    throw InputError("envelope needs C > 0 and gamma > 0");
  }
  return law;
}

std::vector<double> ParseVector(std::string_view text) {
  if (text.empty()) throw InputError("empty vector");
  std::vector<double> v;
  for (auto part : Split(text, ',')) v.push_back(ParseReal(part, text));
  return v;
}

int RunCli(const std::vector<std::string>& raw_args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Openness-rate toolkit: rate tables, no-go certificates and "
               "closed-loop simulation"};
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  RateFlags rate_flags;
  auto* rate = app.add_subcommand("rate", "tabulate bounds on the openness rate g(r)");
  rate->add_option("--system", rate_flags.system.name, "built-in system name");
  rate->add_option("--descriptor", rate_flags.system.descriptor,
                   "polynomial system descriptor (JSON)");
  AddTableFlags(rate, rate_flags.table, true);
  rate->add_option("--out", rate_flags.out, "table file (default: stdout)");
  rate->add_option("--format", rate_flags.format, "csv or json")
      ->capture_default_str();
  rate->add_option("--config", "JSON file of flag values");

  CertifyFlags cert_flags;
  auto* certify = app.add_subcommand(
      "certify",
      "check a no-go inequality. --h is an asserted model of the closed-loop "
      "inverse growth (e.g. lip:L for bi-Lipschitz feedback); it is not "
      "measured");
  certify->add_option("--method", cert_flags.method,
                      "main, symbolic, strong or supnorm")
      ->capture_default_str();
  certify->add_option("--system", cert_flags.system.name, "built-in system name");
  certify->add_option("--descriptor", cert_flags.system.descriptor,
                      "polynomial system descriptor (JSON)");
  certify->add_option("--gain", cert_flags.gain,
                      "gain class: pow:kappa:beta, const:c or table:path");
  certify->add_option("--h", cert_flags.h,
                      "inverse growth model: lip:L, power:L:eta or table:path");
  certify->add_option("--g-envelope", cert_flags.envelope,
                      "symbolic mode: pow:C:gamma (default: fit the system)");
  certify->add_option("--closed-loop", cert_flags.closed_loop,
                      "strong mode: threshold_alpha or counterexample:p");
  certify->add_option("--r-min", cert_flags.r_min, "check range start")
      ->capture_default_str();
  certify->add_option("--r-max", cert_flags.r_max, "check range end")
      ->capture_default_str();
  certify->add_option("--points", cert_flags.points, "log-spaced check radii")
      ->capture_default_str();
  AddTableFlags(certify, cert_flags.table, false);
  certify->add_option("--out", cert_flags.out, "verdict file (default: stdout)");
  certify->add_option("--config", "JSON file of flag values");

  SimulateFlags sim_flags;
  auto* simulate = app.add_subcommand("simulate", "integrate a closed loop with RK4");
  simulate->add_option("--loop", sim_flags.loop,
                       "threshold_alpha or counterexample:p")
      ->required();
  simulate->add_option("--x0", sim_flags.x0, "initial state, comma separated")
      ->required();
  simulate->add_option("--dt", sim_flags.dt, "step")->capture_default_str();
  simulate->add_option("--T", sim_flags.horizon, "horizon")->capture_default_str();
  simulate->add_flag("--linearize", sim_flags.linearize,
                     "print the Jacobian at 0 and its eigenvalues");
  simulate->add_option("--step", sim_flags.step, "finite-difference increment")
      ->capture_default_str();
  simulate->add_flag("--no-basin-check", sim_flags.no_basin_check,
                     "allow ||x0|| above the basin-check radius 0.1");
  simulate->add_option("--out", sim_flags.out, "trajectory CSV (default: stdout)");
  simulate->add_option("--config", "JSON file of flag values");

  auto* examples = app.add_subcommand("examples", "list built-in systems and loops");

  try {
    std::vector<std::string> args = ExpandConfig(raw_args);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? 0 : kExitConfigError;
    }
    if (rate->parsed()) return CmdRate(rate_flags, out, err);
    if (certify->parsed()) return CmdCertify(cert_flags, out, err);
    if (simulate->parsed()) return CmdSimulate(sim_flags, out, err);
    if (examples->parsed()) return CmdExamples(out);
    return kExitConfigError;
  } catch (const ResourceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitResourceError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

}  // namespace openness
