#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "openness/systems.h"

namespace openness {

/// x -> f(x, u(x)) for a named feedback.
struct ClosedLoopField {
  std::string name;
  int state_dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> evaluate;
  /// Initial states must satisfy ||x0|| <= basin_radius (l2); none for custom
  /// fields.
  std::optional<double> basin_radius;
};

/// "threshold_alpha" or "counterexample:p" (also counterexample_p, p odd >= 3).
ClosedLoopField ClosedLoop(std::string_view name);

/// cubic2d under u = cbrt(-2 x2 - x1/2 - x1 x2 - x2^2).
ClosedLoopField ThresholdAlphaLoop();

/// x' = x + u with u_p(x) = -x - x^p, i.e. x' = -x^p.
ClosedLoopField CounterexampleLoop(int p);

/// The closed-loop map F_u as a state-only system: "threshold_alpha" gives
/// (x1^2 + x2^2 + x2, -x1/2 - 2 x2), "counterexample:p" gives -x^p.
PolynomialSystem ClosedLoopMap(std::string_view name);

/// x' = A x.
ClosedLoopField LinearField(const Eigen::MatrixXd& a);

struct DecayFit {
  double rate = 0.0;       // lambda in ||x(t)|| ~ c exp(-lambda t)
  double intercept = 0.0;  // log c
};

enum class IntegrationStatus { kCompleted, kDiverged };

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<double> norms;
  std::optional<DecayFit> decay_fit;
  IntegrationStatus status = IntegrationStatus::kCompleted;
  std::string message;
};

struct IntegrateOptions {
  double divergence_norm = 1e6;
  bool check_basin = true;
};

/// Classical fixed-step RK4 from t = 0 to T (the last step is shortened to
/// land on T). A norm above `divergence_norm` or a NaN stops the run and
/// returns the partial trajectory with status kDiverged.
Trajectory Integrate(const ClosedLoopField& field, const Eigen::VectorXd& x0,
                     double dt, double horizon, const IntegrateOptions& options = {});

/// Least squares on log ||x(t)|| over the final half; nullopt unless every norm
/// is positive.
std::optional<DecayFit> FitDecay(const Trajectory& traj);

struct Linearization {
  Eigen::MatrixXd jacobian;
  /// Sorted by real part, then imaginary part.
  std::vector<std::complex<double>> eigenvalues;
};

/// Central differences with increment `step` per column.
Linearization Linearize(const ClosedLoopField& field, const Eigen::VectorXd& x,
                        double step);

/// Eigenvalues from the characteristic polynomial for n <= 3, Eigen's
/// eigensolver above; sorted as in Linearization.
std::vector<std::complex<double>> Eigenvalues(const Eigen::MatrixXd& a);

struct InverseGrowthResult {
  double value = 0.0;        // r^(1/p)
  double brute_force = 0.0;  // max |F^{-1}(y)| over a net of [-r, r]
  bool cross_check = false;  // |value - brute_force| <= 1e-6
};

/// h_p(r) = sup{|x| : |x^p| <= r} = r^(1/p) for the closed loop F = -x^p.
InverseGrowthResult InverseGrowth(int p, double r);

struct GainEnvelopeReport {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  bool holds = false;  // ratios within [3/4, 5/4]
};

/// |u_p(x)| / |x| on a 10^4-point net of [-cap, cap] (zero excluded).
GainEnvelopeReport GainEnvelopeCheck(int p, double radius_cap = 0.5);

/// Smallest odd p in [3, p_max] with h_p(e^-p) = e^-1 > H(e^-p).
std::optional<int> DefeatScan(const std::function<double(double)>& h_candidate,
                              int p_max = 41);

/// CSV t,x1,...,xn,norm.
void WriteTrajectoryCsv(const Trajectory& traj, std::ostream& out);

}  // namespace openness
