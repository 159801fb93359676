#pragma once

#include <string>
#include <utility>
#include <vector>

#include "openness/rate.h"
#include "openness/systems.h"

namespace openness {

/// Radial bound ||u(x)|| <= d(||x||) on admissible feedbacks.
class GainClass {
 public:
  enum class Kind { kPowerLaw, kConstant, kTabulated };

  static GainClass PowerLaw(double kappa, double beta);
  static GainClass Constant(double c);
  /// Step table s -> d(s), read at the next grid point up (+infinity past the
  /// end). Requires s[0] = 0, d[0] = 0 and both columns nondecreasing.
  static GainClass Tabulated(std::vector<double> s, std::vector<double> d);

  Kind kind() const { return kind_; }
  double kappa() const { return a_; }
  double beta() const { return b_; }
  double constant() const { return a_; }

  double operator()(double s) const;
  std::string Describe() const;

 private:
  Kind kind_ = Kind::kConstant;
  double a_ = 0.0;
  double b_ = 0.0;
  std::vector<double> s_, d_;
};

/// Asserted model of h(r), the sup of the closed-loop inverse over the r-ball.
class InverseGrowthBound {
 public:
  enum class Kind { kLipschitz, kPower, kTabulated };

  static InverseGrowthBound Lipschitz(double lip);
  static InverseGrowthBound Power(double lip, double eta);
  static InverseGrowthBound Tabulated(std::vector<double> r,
                                      std::vector<double> h);

  Kind kind() const { return kind_; }
  double lip() const { return lip_; }
  double eta() const { return eta_; }

  double operator()(double r) const;
  std::string Describe() const;

 private:
  Kind kind_ = Kind::kLipschitz;
  double lip_ = 1.0;
  double eta_ = 1.0;
  std::vector<double> r_, h_;
};

/// sqrt(r^2 + d(r)^2).
double Rho(double r, const GainClass& d);

struct RRange {
  double lo = 1e-3;
  double hi = 1e-1;
  int points = 16;
};

/// The log-spaced radii a numeric check visits; throws InputError when the
/// range is malformed.
std::vector<double> CheckGrid(const RRange& range);

/// Sorted radii rho(h(r), d) a g_f table must contain for an exact read.
std::vector<double> RequiredRhoRadii(const GainClass& d,
                                     const InverseGrowthBound& h,
                                     const RRange& range);
/// Sorted radii h(r) a g_Fu table must contain for an exact read.
std::vector<double> RequiredHRadii(const InverseGrowthBound& h,
                                   const RRange& range);

enum class Outcome { kObstructionCertified, kNoObstruction, kInconclusive };
enum class Mode { kNumericGrid, kSymbolicPowerLaw };

std::string_view ToString(Outcome outcome);
std::string_view ToString(Mode mode);

struct Witness {
  double r = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct Verdict {
  Outcome outcome = Outcome::kInconclusive;
  Mode mode = Mode::kNumericGrid;
  /// Empty in symbolic mode (the certificate is asymptotic).
  std::vector<double> checked_range;
  /// Rows where the necessary inequality fails.
  std::vector<Witness> witnesses;
  /// Every evaluated row, failing or not.
  std::vector<Witness> rows;
  std::vector<std::string> notes;
  std::vector<std::pair<std::string, std::string>> provenance;
};

/// r <= g(rho(h(r))) with g read from the upper column, step-up.
Verdict CheckNogo(const RateTable& g, const GainClass& d,
                  const InverseGrowthBound& h, const RRange& range);

/// g_Fu(h(r)) <= g_f(rho(h(r))). The left side is the larger of the g_Fu lower
/// column (step-down) and r; the latter is valid whenever h is, since then
/// g_Fu(h(r)) >= r.
Verdict CheckNogoStrong(const RateTable& g_f, const RateTable& g_fu,
                        const GainClass& d, const InverseGrowthBound& h,
                        const RRange& range);

/// r <= ||f|| sup over the closed rho(h(r))-ball, using the certified upper
/// bound (net max plus Lambda*delta) with spacing `delta_fraction * rho`.
Verdict CheckNormBoundNogo(const System& sys, const GainClass& d,
                           const InverseGrowthBound& h, const RRange& range,
                           double delta_fraction, Norm norm);

/// Exponent calculus for g(rho) <= C rho^gamma, d = kappa s^beta,
/// h = L r^eta: obstruction iff gamma * eta * min(beta, 1) > 1.
Verdict CheckNogoSymbolic(const PowerLaw& g_env, const GainClass& d,
                          const InverseGrowthBound& h);

/// gamma * eta * min(beta, 1).
double ObstructionExponent(double gamma, double eta, double beta);

/// 1 / alpha for alpha > 1.
double ThresholdBeta(double alpha);

/// {outcome, mode, checked_range, witnesses, notes, provenance}.
std::string VerdictJson(const Verdict& v);

/// 0 certified, 1 no obstruction, 2 inconclusive.
int ExitCode(Outcome outcome);

}  // namespace openness
