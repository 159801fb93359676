#include "openness/certify.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "openness/errors.h"
#include "openness/estimates.h"

namespace openness {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBorderlineTolerance = 1e-12;

void CheckTable(const std::vector<double>& x, const std::vector<double>& y,
                const std::string& what) {
  if (x.empty() || x.size() != y.size()) {
    throw InputError(what + ": table columns must be nonempty and equal length");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]) || x[i] < 0.0 ||
        y[i] < 0.0) {
      throw InputError(what + ": entries must be finite and nonnegative");
    }
    if (i > 0 && (x[i] <= x[i - 1] || y[i] < y[i - 1])) {
      throw InputError(what + ": table must be increasing in s and "
                              "nondecreasing in value (row " +
                       std::to_string(i) + ")");
    }
  }
}

double StepUp(const std::vector<double>& x, const std::vector<double>& y,
              double s) {
  const auto it = std::lower_bound(x.begin(), x.end(), s * (1.0 - 1e-12));
  if (it == x.end()) return kInf;
  return y[static_cast<std::size_t>(it - x.begin())];
}

std::string Num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string RangeText(const std::vector<double>& grid) {
  return "[" + Num(grid.front()) + ", " + Num(grid.back()) + "]";
}

// Shared aggregation of per-row results into a numeric verdict.
Verdict Aggregate(const std::vector<double>& grid, std::vector<Witness> rows,
                  const std::vector<double>& uncovered, const std::string& need) {
  Verdict v;
  v.mode = Mode::kNumericGrid;
  v.checked_range = {grid.front(), grid.back()};
  for (const Witness& w : rows) {
    if (w.lhs > w.rhs) v.witnesses.push_back(w);
  }
  v.rows = std::move(rows);
  if (!uncovered.empty()) {
    v.outcome = Outcome::kInconclusive;
    v.notes.push_back("range: " + std::to_string(uncovered.size()) +
                      " grid radii need " + need + " beyond the table (first r = " +
                      Num(uncovered.front()) + ")");
    return v;
  }
  const std::size_t failing = v.witnesses.size();
  if (failing == v.rows.size()) {
    v.outcome = Outcome::kObstructionCertified;
    v.notes.push_back("the necessary inequality fails at every grid radius in " +
                      RangeText(grid) +
                      "; this numeric certificate covers that range only, "
                      "asymptotic claims need the symbolic mode");
  } else if (failing == 0) {
    v.outcome = Outcome::kNoObstruction;
    const Witness& w = v.rows.front();
    v.notes.push_back("the necessary inequality holds at every grid radius; "
                      "e.g. r = " + Num(w.r) + ": lhs " + Num(w.lhs) +
                      " <= rhs " + Num(w.rhs));
    v.notes.push_back("a necessary condition only: no stabilizer is asserted");
  } else {
    v.outcome = Outcome::kInconclusive;
    double last_fail = 0.0, first_pass = kInf;
    for (const Witness& w : v.rows) {
      const bool fails = w.lhs > w.rhs;
      if (fails) last_fail = std::max(last_fail, w.r);
      if (!fails) first_pass = std::min(first_pass, w.r);
    }
    v.notes.push_back("mixed: inequality fails at " + std::to_string(failing) +
                      " of " + std::to_string(v.rows.size()) +
                      " grid radii (largest failing r = " + Num(last_fail) +
                      ", smallest passing r = " + Num(first_pass) + ")");
  }
  return v;
}

void AddCommonProvenance(Verdict& v, const GainClass& d,
                         const InverseGrowthBound& h) {
  v.provenance.emplace_back("gain", d.Describe());
  v.provenance.emplace_back("h", h.Describe());
}

void AddRangeProvenance(Verdict& v, const RRange& range) {
  v.provenance.emplace_back("grid_points", std::to_string(range.points));
  v.provenance.emplace_back("grid_spacing", "log");
}

}  // namespace

// GainClass -------------------------------------------------------------------

GainClass GainClass::PowerLaw(double kappa, double beta) {
  if (!(kappa > 0.0) || !(beta > 0.0) || !std::isfinite(kappa) ||
      !std::isfinite(beta)) {
    throw InputError("power-law gain: kappa and beta must be positive");
  }
  GainClass g;
  g.kind_ = Kind::kPowerLaw;
  g.a_ = kappa;
  g.b_ = beta;
  return g;
}

GainClass GainClass::Constant(double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw InputError("constant gain: c must be finite and >= 0");
  }
  GainClass g;
  g.kind_ = Kind::kConstant;
  g.a_ = c;
  return g;
}

GainClass GainClass::Tabulated(std::vector<double> s, std::vector<double> d) {
  CheckTable(s, d, "tabulated gain");
  if (s.front() != 0.0 || d.front() != 0.0) {
    throw InputError("tabulated gain: first row must be s = 0, d = 0");
  }
  GainClass g;
  g.kind_ = Kind::kTabulated;
  g.s_ = std::move(s);
  g.d_ = std::move(d);
  return g;
}

double GainClass::operator()(double s) const {
  switch (kind_) {
    case Kind::kPowerLaw:
      return a_ * std::pow(s, b_);
    case Kind::kConstant:
      return a_;
    case Kind::kTabulated:
      return StepUp(s_, d_, s);
  }
  return kInf;
}

std::string GainClass::Describe() const {
  switch (kind_) {
    case Kind::kPowerLaw:
      return "pow:" + FormatDouble(a_) + ":" + FormatDouble(b_);
    case Kind::kConstant:
      return "const:" + FormatDouble(a_);
    case Kind::kTabulated:
      return "table(" + std::to_string(s_.size()) + " rows)";
  }
  return "";
}

// InverseGrowthBound ----------------------------------------------------------

InverseGrowthBound InverseGrowthBound::Lipschitz(double lip) {
  if (!(lip > 0.0) || !std::isfinite(lip)) {
    throw InputError("lipschitz h: L must be positive");
  }
  InverseGrowthBound h;
  h.kind_ = Kind::kLipschitz;
  h.lip_ = lip;
  h.eta_ = 1.0;
  return h;
}

InverseGrowthBound InverseGrowthBound::Power(double lip, double eta) {
  if (!(lip > 0.0) || !std::isfinite(lip)) {
    throw InputError("power h: L must be positive");
  }
  if (!(eta > 0.0) || eta > 1.0) {
    throw InputError("power h: eta must lie in (0, 1]");
  }
  InverseGrowthBound h;
  h.kind_ = Kind::kPower;
  h.lip_ = lip;
  h.eta_ = eta;
  return h;
}

InverseGrowthBound InverseGrowthBound::Tabulated(std::vector<double> r,
                                                 std::vector<double> h) {
  CheckTable(r, h, "tabulated h");
  InverseGrowthBound out;
  out.kind_ = Kind::kTabulated;
  out.r_ = std::move(r);
  out.h_ = std::move(h);
  return out;
}

double InverseGrowthBound::operator()(double r) const {
  switch (kind_) {
    case Kind::kLipschitz:
      return lip_ * r;
    case Kind::kPower:
      return lip_ * std::pow(r, eta_);
    case Kind::kTabulated:
      return StepUp(r_, h_, r);
  }
  return kInf;
}

std::string InverseGrowthBound::Describe() const {
  switch (kind_) {
    case Kind::kLipschitz:
      return "lip:" + FormatDouble(lip_);
    case Kind::kPower:
      return "power:" + FormatDouble(lip_) + ":" + FormatDouble(eta_);
    case Kind::kTabulated:
      return "table(" + std::to_string(r_.size()) + " rows)";
  }
  return "";
}

// Numeric checks --------------------------------------------------------------

double Rho(double r, const GainClass& d) {
  if (!(r >= 0.0)) throw InputError("rho: r must be >= 0");
  return std::hypot(r, d(r));
}

std::vector<double> CheckGrid(const RRange& range) {
  if (!(range.lo > 0.0) || !(range.hi > range.lo) || !std::isfinite(range.hi)) {
    throw InputError("r range must satisfy 0 < r_min < r_max");
  }
  if (range.points < 2) throw InputError("r range needs at least 2 points");
  return LogSpacedGrid(range.lo, range.hi, range.points);
}

std::vector<double> RequiredRhoRadii(const GainClass& d,
                                     const InverseGrowthBound& h,
                                     const RRange& range) {
  std::vector<double> out;
  for (double r : CheckGrid(range)) {
    const double rho = Rho(h(r), d);
    if (std::isfinite(rho) && rho > 0.0) out.push_back(rho);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> RequiredHRadii(const InverseGrowthBound& h,
                                   const RRange& range) {
  std::vector<double> out;
  for (double r : CheckGrid(range)) {
    const double hr = h(r);
    if (std::isfinite(hr) && hr > 0.0) out.push_back(hr);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Verdict CheckNogo(const RateTable& g, const GainClass& d,
                  const InverseGrowthBound& h, const RRange& range) {
  const std::vector<double> grid = CheckGrid(range);
  std::vector<Witness> rows;
  std::vector<double> uncovered;
  for (double r : grid) {
    const double rho = Rho(h(r), d);
    const std::optional<double> rhs =
        std::isfinite(rho) ? ReadStepUp(g, rho, Column::kUpper) : std::nullopt;
    if (!rhs) {
      uncovered.push_back(r);
      continue;
    }
    rows.push_back({r, r, *rhs});
  }
  Verdict v = Aggregate(grid, std::move(rows), uncovered, "g at rho(h(r))");
  v.provenance.emplace_back("check", "main");
  v.provenance.emplace_back("table", g.system_id + " (" +
                                         std::string(ToString(g.norm)) +
                                         ", upper column, step-up)");
  AddCommonProvenance(v, d, h);
  AddRangeProvenance(v, range);
  return v;
}

Verdict CheckNogoStrong(const RateTable& g_f, const RateTable& g_fu,
                        const GainClass& d, const InverseGrowthBound& h,
                        const RRange& range) {
  const std::vector<double> grid = CheckGrid(range);
  std::vector<Witness> rows;
  std::vector<double> uncovered;
  std::vector<std::string> inconsistent;
  for (double r : grid) {
    const double hr = h(r);
    const double rho = Rho(hr, d);
    const std::optional<double> rhs =
        std::isfinite(rho) ? ReadStepUp(g_f, rho, Column::kUpper) : std::nullopt;
    const std::optional<double> fu_upper =
        std::isfinite(hr) ? ReadStepUp(g_fu, hr, Column::kUpper) : std::nullopt;
    if (!rhs || !fu_upper) {
      uncovered.push_back(r);
      continue;
    }
    if (*fu_upper < r) {
      inconsistent.push_back("r = " + Num(r) + ": g_Fu(h(r)) <= " +
                             Num(*fu_upper));
    }
    const double lhs = std::max(ReadStepDown(g_fu, hr, Column::kLower), r);
    rows.push_back({r, lhs, *rhs});
  }
  Verdict v = Aggregate(grid, std::move(rows), uncovered,
                        "g_f at rho(h(r)) or g_Fu at h(r)");
  if (!inconsistent.empty()) {
    std::string note = "h model inconsistent with g_Fu(h(r)) >= r at " +
                       std::to_string(inconsistent.size()) + " rows (" +
                       inconsistent.front() + ")";
    v.notes.push_back(note);
  }
  v.provenance.emplace_back("check", "strong");
  v.provenance.emplace_back("table_f", g_f.system_id);
  v.provenance.emplace_back("table_Fu", g_fu.system_id);
  AddCommonProvenance(v, d, h);
  AddRangeProvenance(v, range);
  return v;
}

Verdict CheckNormBoundNogo(const System& sys, const GainClass& d,
                           const InverseGrowthBound& h, const RRange& range,
                           double delta_fraction, Norm norm) {
  if (!(delta_fraction > 0.0)) {
    throw InputError("supnorm check: delta must be > 0");
  }
  const std::vector<double> grid = CheckGrid(range);
  std::vector<Witness> rows;
  std::vector<double> uncovered;
  for (double r : grid) {
    const double rho = Rho(h(r), d);
    if (!std::isfinite(rho)) {
      uncovered.push_back(r);
      continue;
    }
    const SupNorm s = SupNormOnBall(sys, rho, norm, delta_fraction * rho);
    rows.push_back({r, r, s.upper()});
  }
  Verdict v = Aggregate(grid, std::move(rows), uncovered, "a finite rho");
  v.notes.push_back("sup-norm route: may be weaker than the rate-table check");
  v.provenance.emplace_back("check", "supnorm");
  v.provenance.emplace_back("norm", std::string(ToString(norm)));
  v.provenance.emplace_back("delta_fraction", FormatDouble(delta_fraction));
  AddCommonProvenance(v, d, h);
  AddRangeProvenance(v, range);
  return v;
}

// Symbolic calculus -----------------------------------------------------------

double ObstructionExponent(double gamma, double eta, double beta) {
  return gamma * eta * std::min(beta, 1.0);
}

double ThresholdBeta(double alpha) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw InputError("threshold_beta: alpha must be > 1");
  }
  return 1.0 / alpha;
}

Verdict CheckNogoSymbolic(const PowerLaw& g_env, const GainClass& d,
                          const InverseGrowthBound& h) {
  if (!(g_env.coefficient > 0.0) || !(g_env.exponent > 0.0)) {
    throw InputError("symbolic check: envelope needs C > 0 and gamma > 0");
  }
  if (d.kind() != GainClass::Kind::kPowerLaw) {
    throw InputError("symbolic check: gain must be a power law pow:kappa:beta");
  }
  if (h.kind() == InverseGrowthBound::Kind::kTabulated) {
    throw InputError("symbolic check: h must be lip:L or power:L:eta");
  }
  const double c = g_env.coefficient, gamma = g_env.exponent;
  const double kappa = d.kappa(), beta = d.beta();
  const double lip = h.lip(), eta = h.eta();
  const double e = ObstructionExponent(gamma, eta, beta);

  Verdict v;
  v.mode = Mode::kSymbolicPowerLaw;
  v.provenance.emplace_back("check", "symbolic");
  v.provenance.emplace_back("envelope", "C=" + FormatDouble(c) +
                                            " gamma=" + FormatDouble(gamma));
  AddCommonProvenance(v, d, h);
  v.provenance.emplace_back("exponent", FormatDouble(e));

  if (std::abs(e - 1.0) <= kBorderlineTolerance) {
    double coeff = 0.0;
    std::string formula;
    if (std::abs(beta - 1.0) <= kBorderlineTolerance) {
      coeff = c * std::pow(lip, gamma) * std::pow(kappa * kappa + 1.0, gamma / 2);
      formula = "C L^gamma (kappa^2+1)^(gamma/2)";
    } else if (beta > 1.0) {
      coeff = c * std::pow(lip, gamma);
      formula = "C L^gamma";
    } else {
      coeff = c * std::pow(kappa, gamma) * std::pow(lip, gamma * beta);
      formula = "C kappa^gamma L^(gamma beta)";
    }
    v.outcome = Outcome::kInconclusive;
    v.notes.push_back("borderline exponent e = 1: obstruction requires " +
                      formula + " < 1; here it equals " + Num(coeff) +
                      (coeff < 1.0 ? " (condition met)" : " (condition not met)"));
    v.notes.push_back("equivalently a lower bound on kappa depending on C and L");
    return v;
  }
  if (e > 1.0) {
    v.outcome = Outcome::kObstructionCertified;
    v.notes.push_back("e = " + Num(e) +
                      " > 1: r <= C' r^e fails for all sufficiently small r");
  } else {
    v.outcome = Outcome::kNoObstruction;
    v.notes.push_back("e = " + Num(e) + " < 1: the estimate yields no obstruction");
  }
  return v;
}

// Export ----------------------------------------------------------------------

std::string_view ToString(Outcome outcome) {
  switch (outcome) {
    case Outcome::kObstructionCertified:
      return "ObstructionCertified";
    case Outcome::kNoObstruction:
      return "NoObstruction";
    case Outcome::kInconclusive:
      return "Inconclusive";
  }
  return "";
}

std::string_view ToString(Mode mode) {
  return mode == Mode::kNumericGrid ? "numeric_grid" : "symbolic_power_law";
}

int ExitCode(Outcome outcome) {
  switch (outcome) {
    case Outcome::kObstructionCertified:
      return 0;
    case Outcome::kNoObstruction:
      return 1;
    case Outcome::kInconclusive:
      return 2;
  }
  return 2;
}

std::string VerdictJson(const Verdict& v) {
  nlohmann::ordered_json j;
  j["outcome"] = ToString(v.outcome);
  j["mode"] = ToString(v.mode);
  j["checked_range"] = v.checked_range;
  auto witnesses = nlohmann::ordered_json::array();
  for (const Witness& w : v.witnesses) {
    witnesses.push_back({{"r", w.r}, {"lhs", w.lhs}, {"rhs", w.rhs}});
  }
  j["witnesses"] = std::move(witnesses);
  j["notes"] = v.notes;
  auto provenance = nlohmann::ordered_json::object();
  for (const auto& [key, value] : v.provenance) provenance[key] = value;
  j["provenance"] = std::move(provenance);
  return j.dump(2);
}

}  // namespace openness
