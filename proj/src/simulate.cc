#include "openness/simulate.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "openness/errors.h"
#include "openness/rate.h"
#include "openness/systems.h"

namespace openness {
namespace {

constexpr double kBasinRadius = 0.1;

void CheckOddP(int p) {
  if (p < 3 || p % 2 == 0) {
    throw InputError("counterexample family needs an odd integer p >= 3, got " +
                     std::to_string(p));
  }
}

// Odd integer power by repeated multiplication.
double IntPow(double x, int p) {
  double y = 1.0;
  for (int i = 0; i < p; ++i) y *= x;
  return y;
}

Eigen::VectorXd Rk4Step(const ClosedLoopField& field, const Eigen::VectorXd& x,
                        double h) {
  const Eigen::VectorXd k1 = field.evaluate(x);
  const Eigen::VectorXd k2 = field.evaluate(x + 0.5 * h * k1);
  const Eigen::VectorXd k3 = field.evaluate(x + 0.5 * h * k2);
  const Eigen::VectorXd k4 = field.evaluate(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

bool EigenLess(const std::complex<double>& a, const std::complex<double>& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

// One Newton polish of a root of the monic cubic t^3 + a t^2 + b t + c.
std::complex<double> Polish(std::complex<double> t, double a, double b,
                            double c) {
  for (int it = 0; it < 3; ++it) {
    const std::complex<double> f = ((t + a) * t + b) * t + c;
    const std::complex<double> df = (3.0 * t + 2.0 * a) * t + b;
    if (std::abs(df) == 0.0) break;
    t -= f / df;
  }
  return t;
}

std::vector<std::complex<double>> CubicRoots(double a, double b, double c) {
  using C = std::complex<double>;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const C disc = std::sqrt(C(q * q / 4.0 + p * p * p / 27.0));
  C u = std::pow(-q / 2.0 + disc, 1.0 / 3.0);
  if (std::abs(u) < 1e-300) u = std::pow(-q / 2.0 - disc, 1.0 / 3.0);
  const C omega(-0.5, std::sqrt(3.0) / 2.0);
  std::vector<C> roots;
  for (int k = 0; k < 3; ++k) {
    C t;
    if (std::abs(u) < 1e-300) {
      t = 0.0;
    } else {
      const C uk = u * std::pow(omega, k);
      t = uk - p / (3.0 * uk);
    }
    roots.push_back(Polish(t - a / 3.0, a, b, c));
  }
  return roots;
}

// Snap numerically real roots onto the real axis.
void CleanRoots(std::vector<std::complex<double>>& roots, double scale) {
  for (auto& z : roots) {
    if (std::abs(z.imag()) <= 1e-10 * std::max(1.0, scale)) z = z.real();
  }
}

std::optional<int> ParseCounterexampleName(std::string_view name) {
  constexpr std::string_view stem = "counterexample";
  if (!name.starts_with(stem)) return std::nullopt;
  std::string_view rest = name.substr(stem.size());
  if (rest.empty() || (rest.front() != ':' && rest.front() != '_')) {
    return std::nullopt;
  }
  rest.remove_prefix(1);
  int p = 0;
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), p);
  if (ec != std::errc() || ptr != rest.data() + rest.size()) {
    throw InputError("malformed loop name '" + std::string(name) + "'");
  }
  return p;
}

}  // namespace

ClosedLoopField ThresholdAlphaLoop() {
  const System plant = Builtin("cubic2d");
  ClosedLoopField f;
  f.name = "threshold_alpha";
  f.state_dim = 2;
  f.basin_radius = kBasinRadius;
  f.evaluate = [plant](const Eigen::VectorXd& x) {
    const double u =
        std::cbrt(-2.0 * x(1) - 0.5 * x(0) - x(0) * x(1) - x(1) * x(1));
    Eigen::VectorXd z(3);
    z << x(0), x(1), u;
    return Evaluate(plant, z);
  };
  return f;
}

ClosedLoopField CounterexampleLoop(int p) {
  CheckOddP(p);
  ClosedLoopField f;
  f.name = "counterexample:" + std::to_string(p);
  f.state_dim = 1;
  f.basin_radius = kBasinRadius;
  f.evaluate = [p](const Eigen::VectorXd& x) {
    const double u = -x(0) - IntPow(x(0), p);
    Eigen::VectorXd dx(1);
    dx(0) = x(0) + u;
    return dx;
  };
  return f;
}

ClosedLoopField LinearField(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw InputError("linear field: matrix must be square and nonempty");
  }
  ClosedLoopField f;
  f.name = "linear";
  f.state_dim = static_cast<int>(a.rows());
  f.evaluate = [a](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x; };
  return f;
}

PolynomialSystem ClosedLoopMap(std::string_view name) {
  if (name == "threshold_alpha") {
    return PolynomialSystem(
        2, 0,
        {{Term{1, {2, 0}}, Term{1, {0, 2}}, Term{1, {0, 1}}},
         {Term{-0.5, {1, 0}}, Term{-2, {0, 1}}}});
  }
  if (auto p = ParseCounterexampleName(name)) return CounterexampleMap(*p);
  throw CatalogError("unknown closed loop '" + std::string(name) +
                     "' (known: threshold_alpha, counterexample:p)");
}

ClosedLoopField ClosedLoop(std::string_view name) {
  if (name == "threshold_alpha") return ThresholdAlphaLoop();
  if (auto p = ParseCounterexampleName(name)) return CounterexampleLoop(*p);
  throw CatalogError("unknown closed loop '" + std::string(name) +
                     "' (known: threshold_alpha, counterexample:p)");
}

Trajectory Integrate(const ClosedLoopField& field, const Eigen::VectorXd& x0,
                     double dt, double horizon, const IntegrateOptions& options) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("integrate: dt must be > 0");
  if (!(horizon >= dt) || !std::isfinite(horizon)) {
    throw InputError("integrate: horizon T must be >= dt");
  }
  if (x0.size() != field.state_dim) {
    throw InputError("integrate: x0 has dimension " + std::to_string(x0.size()) +
                     ", field '" + field.name + "' has " +
                     std::to_string(field.state_dim));
  }
  if (options.check_basin && field.basin_radius &&
      x0.norm() > *field.basin_radius) {
    throw InputError("integrate: ||x0|| = " + FormatDouble(x0.norm()) +
                     " exceeds the basin-check radius " +
                     FormatDouble(*field.basin_radius) + " of '" + field.name +
                     "'");
  }
  const long steps = static_cast<long>(std::ceil(horizon / dt * (1.0 - 1e-12)));
  Trajectory traj;
  traj.times.reserve(static_cast<std::size_t>(steps) + 1);
  traj.states.reserve(static_cast<std::size_t>(steps) + 1);
  traj.norms.reserve(static_cast<std::size_t>(steps) + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  traj.norms.push_back(x0.norm());

  Eigen::VectorXd x = x0;
  for (long k = 1; k <= steps; ++k) {
    const double t_prev = double(k - 1) * dt;
    const double t = k == steps ? horizon : double(k) * dt;
    x = Rk4Step(field, x, t - t_prev);
    const double n = x.norm();
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.norms.push_back(n);
    if (!std::isfinite(n) || n > options.divergence_norm) {
      traj.status = IntegrationStatus::kDiverged;
      traj.message = "diverged at t = " + FormatDouble(t) + " (||x|| = " +
                     FormatDouble(n) + ")";
      return traj;
    }
  }
  traj.decay_fit = FitDecay(traj);
  return traj;
}

std::optional<DecayFit> FitDecay(const Trajectory& traj) {
  if (traj.norms.size() < 4) return std::nullopt;
  for (double n : traj.norms) {
    if (!(n > 0.0)) return std::nullopt;
  }
  const double t_mid = traj.times.back() / 2.0;
  double sn = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    if (t < t_mid) continue;
    const double y = std::log(traj.norms[i]);
    sn += 1;
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  const double denom = sn * stt - st * st;
  if (sn < 2 || denom == 0.0) return std::nullopt;
  const double slope = (sn * sty - st * sy) / denom;
  return DecayFit{-slope, (sy - slope * st) / sn};
}

std::vector<std::complex<double>> Eigenvalues(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw InputError("eigenvalues: matrix must be square and nonempty");
  }
  std::vector<std::complex<double>> roots;
  const Eigen::Index n = a.rows();
  const double scale = a.cwiseAbs().maxCoeff();
  if (n == 1) {
    roots = {a(0, 0)};
  } else if (n == 2) {
    const double tr = a.trace(), det = a.determinant();
    const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr / 4.0 - det));
    roots = {tr / 2.0 - disc, tr / 2.0 + disc};
  } else if (n == 3) {
    const double tr = a.trace();
    const double minors = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0) +
                          a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0) +
                          a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
    roots = CubicRoots(-tr, minors, -a.determinant());
  } else {
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
    const auto values = solver.eigenvalues();
    roots.assign(values.data(), values.data() + values.size());
  }
  CleanRoots(roots, scale);
  std::sort(roots.begin(), roots.end(), EigenLess);
  return roots;
}

Linearization Linearize(const ClosedLoopField& field, const Eigen::VectorXd& x,
                        double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw InputError("linearize: step must be > 0");
  }
  if (x.size() != field.state_dim) {
    throw InputError("linearize: point has wrong dimension");
  }
  const Eigen::Index n = x.size();
  Linearization lin;
  lin.jacobian.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd plus = x, minus = x;
    plus(j) += step;
    minus(j) -= step;
    const double width = plus(j) - minus(j);
    if (!(width > 0.0)) {
      throw InputError("linearize: step " + FormatDouble(step) +
                       " underflows at coordinate " + std::to_string(j));
    }
    lin.jacobian.col(j) = (field.evaluate(plus) - field.evaluate(minus)) / width;
  }
  lin.eigenvalues = Eigenvalues(lin.jacobian);
  return lin;
}

InverseGrowthResult InverseGrowth(int p, double r) {
  CheckOddP(p);
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw InputError("inverse_growth: r must be > 0");
  }
  InverseGrowthResult result;
  result.value = std::pow(r, 1.0 / double(p));

  // Invert F(x) = -x^p by bisection at each net point of [-r, r].
  constexpr int kNet = 10'000;
  const double bracket = std::max(1.0, r);
  for (int i = 0; i < kNet; ++i) {
    const double y = -r + 2.0 * r * double(i) / double(kNet - 1);
    double lo = -bracket, hi = bracket;  // -x^p is decreasing
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      if (-IntPow(mid, p) > y) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    result.brute_force = std::max(result.brute_force, std::abs(0.5 * (lo + hi)));
  }
  result.cross_check = std::abs(result.brute_force - result.value) <= 1e-6;
  return result;
}

GainEnvelopeReport GainEnvelopeCheck(int p, double radius_cap) {
  CheckOddP(p);
  if (!(radius_cap > 0.0)) throw InputError("gain envelope: cap must be > 0");
  constexpr int kNet = 10'000;
  GainEnvelopeReport report;
  report.min_ratio = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kNet; ++i) {
    const double x = -radius_cap + 2.0 * radius_cap * double(i) / double(kNet - 1);
    if (x == 0.0) continue;
    const double ratio = std::abs(-x - IntPow(x, p)) / std::abs(x);
    report.min_ratio = std::min(report.min_ratio, ratio);
    report.max_ratio = std::max(report.max_ratio, ratio);
  }
  report.holds = report.min_ratio >= 0.75 && report.max_ratio <= 1.25 + 1e-12;
  return report;
}

std::optional<int> DefeatScan(const std::function<double(double)>& h_candidate,
                              int p_max) {
  for (int p = 3; p <= p_max; p += 2) {
    const double r = std::exp(-double(p));
    if (InverseGrowth(p, r).value > h_candidate(r)) return p;
  }
  return std::nullopt;
}

void WriteTrajectoryCsv(const Trajectory& traj, std::ostream& out) {
  const std::size_t n =
      traj.states.empty() ? 0 : static_cast<std::size_t>(traj.states.front().size());
  out << 't';
  for (std::size_t j = 1; j <= n; ++j) out << ",x" << j;
  out << ",norm\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out << FormatDouble(traj.times[i]);
    for (Eigen::Index j = 0; j < traj.states[i].size(); ++j) {
      out << ',' << FormatDouble(traj.states[i](j));
    }
    out << ',' << FormatDouble(traj.norms[i]) << '\n';
  }
}

}  // namespace openness
