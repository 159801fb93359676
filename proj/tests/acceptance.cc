// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance                 run every criterion
//   acceptance --criterion N   run criterion N only
//
// Exit status is 0 when every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "generators.h"
#include "openness/certify.h"
#include "openness/cli.h"
#include "openness/estimates.h"
#include "openness/geometry.h"
#include "openness/rate.h"
#include "openness/simulate.h"
#include "openness/systems.h"

namespace openness {
namespace {

struct Result {
  bool pass = true;
  std::vector<std::string> details;

  void Check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    details.push_back(std::string(ok ? "ok " : "FAILED ") + what);
  }
};

std::string Fmt(const char* format, double a, double b = 0, double c = 0,
                double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// 1. Cubic openness rate.
Result CubicRate() {
  Result res;
  const auto start = std::chrono::steady_clock::now();
  const RateTable t = OpennessRateTable(Builtin("cubic_scalar"),
                                        LogSpacedGrid(0.05, 0.8, 16), Norm::kLinf);
  const PowerLawFit fit = FitPowerLaw(t, Column::kUpper);
  const double secs = Seconds(start);
  const double c = fit.law.coefficient, gamma = fit.law.exponent;
  res.Check(c >= 1.8 && c <= 2.2, Fmt("C = %.6g in [1.8, 2.2]", c));
  res.Check(gamma >= 2.9 && gamma <= 3.1, Fmt("gamma = %.6g in [2.9, 3.1]", gamma));
  res.Check(secs < 30, Fmt("runtime %.2f s < 30 s", secs));
  return res;
}

// 2. Unicycle obstruction.
Result Unicycle() {
  Result res;
  const auto start = std::chrono::steady_clock::now();
  const RateTable t =
      OpennessRateTable(Builtin("unicycle"), DefaultRateGrid(), Norm::kLinf);
  double worst = 0.0;
  bool bounded = true;
  for (const RateEntry& e : t.entries) {
    const double allowance = 2 * (e.lambda * e.delta + e.epsilon * std::sqrt(3.0));
    bounded &= e.g_upper <= allowance;
    worst = std::max(worst, e.g_upper / allowance);
  }
  res.Check(bounded, Fmt("g_upper <= 2(Lambda delta + eps sqrt3) on 16 radii "
                         "(largest ratio %.3g)", worst));

  // Gains vanishing at 0, as feedbacks with u(0) = 0 require.
  const std::string table_path =
      (std::filesystem::temp_directory_path() / "openness_acceptance_gain.csv")
          .string();
  {
    std::ofstream table(table_path);
    table << "s,d\n0,0\n";
    for (double s : LogSpacedGrid(1e-4, 2.0, 60)) {
      table << FormatDouble(s) << ',' << FormatDouble(2 * s) << '\n';
    }
  }
  const std::vector<std::string> gains = {"pow:1:1", "pow:10:1", "pow:1:0.5",
                                          "pow:3:2", "table:" + table_path};
  for (const std::string& gain : gains) {
    std::ostringstream out, err;
    const int code = RunCli(
        {"certify", "--system", "unicycle", "--method", "main", "--gain", gain,
         "--h", "lip:1"},
        out, err);
    res.Check(code == 0, "certify --gain " + gain + " exit " + std::to_string(code));
  }
  std::filesystem::remove(table_path);
  const double secs = Seconds(start);
  res.Check(secs < 60, Fmt("runtime %.2f s < 60 s", secs));
  return res;
}

// 3. Banach constant.
Result Banach() {
  Result res;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 0) = 2;
  a(1, 1) = 1;
  const double b = BanachConstant(a);
  res.Check(std::abs(b - 1) <= 1e-8, Fmt("banach_constant(diag(2,1)) = %.12g", b));
  return res;
}

// 4. Norm estimates.
Result NormEstimates() {
  Result res;
  const Norm linf = Norm::kLinf, l2 = Norm::kL2;
  {
    const std::vector<double> center = {1.0};
    Box k;
    k.lo = {0.0};
    k.hi = {2.0};
    const double radius = InradiusBoxOracle(k, center);
    const System sys = Builtin("affine1d");
    const RateTable rate = OpennessRateTable(Recentered(sys, center),
                                             LogSpacedGrid(0.01, 1.0, 16), linf);
    const NormBound b = NormLowerBound(sys, center, radius, rate, linf);
    res.Check(std::abs(b.value - 7) <= 1e-12 && b.value_at_center == 5,
              Fmt("affine1d: Gamma = %.6g, bound %.15g = %.6g + %.6g", radius,
                  b.value, b.value_at_center, b.rate_term));
    const SupNorm s = SupNormOnBall(sys, radius, linf, 1e-3, center);
    res.Check(s.value <= 7 + 1e-12 && s.upper() >= 7,
              Fmt("affine1d: measured sup %.12g (+%.3g slack) matches 7", s.value,
                  s.slack));
  }
  {
    const std::vector<double> center = {0.0, 0.0};
    const System sys = Builtin("affine2d");
    const RateTable rate = OpennessRateTable(Recentered(sys, center),
                                             LogSpacedGrid(0.01, 1.0, 16), l2);
    const NormBound b = NormLowerBound(sys, center, 1.0, rate, l2);
    res.Check(std::abs(b.value - 6) <= 1e-12,
              Fmt("affine2d: bound %.15g = %.6g + %.6g", b.value,
                  b.value_at_center, b.rate_term));
    double oracle = 0.0;
    for (int k = 0; k < 100'000; ++k) {
      const double th = 2 * M_PI * k / 100'000;
      oracle = std::max(oracle, std::hypot(2 * std::cos(th) + 3, std::sin(th) + 4));
    }
    const SupNorm s = SupNormOnBall(sys, 1.0, l2, 1e-3);
    res.Check(s.upper() >= oracle - 1e-9 && s.value <= oracle + 1e-9 &&
                  s.value >= b.value,
              Fmt("affine2d: measured sup %.8g (+%.3g slack), boundary oracle "
                  "%.8g, >= bound 6",
                  s.value, s.slack, oracle));
  }
  return res;
}

// 5. Eigenvalue check.
Result EigenvalueCheck() {
  Result res;
  const ClosedLoopField f = ClosedLoop("threshold_alpha");
  const Linearization lin = Linearize(f, Eigen::VectorXd::Zero(2), 1e-5);
  const double e0 = lin.eigenvalues[0].real(), e1 = lin.eigenvalues[1].real();
  const bool eig = std::abs(e0 - (-1 - std::sqrt(0.5))) <= 1e-3 &&
                   std::abs(e1 - (-1 + std::sqrt(0.5))) <= 1e-3 &&
                   lin.eigenvalues[0].imag() == 0 && lin.eigenvalues[1].imag() == 0;
  res.Check(eig, Fmt("eigenvalues %.6f, %.6f vs -1 -/+ sqrt(1/2)", e0, e1));
  Eigen::VectorXd x0(2);
  x0 << 0.05, 0.05;
  const Trajectory t = Integrate(f, x0, 1e-3, 20.0);
  res.Check(t.norms.back() < 1e-6, Fmt("||x(20)|| = %.4g < 1e-6", t.norms.back()));
  const double rate = t.decay_fit ? t.decay_fit->rate : -1;
  res.Check(rate >= 0.25 && rate <= 0.35,
            Fmt("decay rate %.6g in [0.25, 0.35]", rate));
  return res;
}

// 6. Counterexample family.
Result Counterexample() {
  Result res;
  double worst = 0.0;
  bool cross = true;
  for (int p = 3; p <= 41; p += 2) {
    const InverseGrowthResult g = InverseGrowth(p, std::exp(-double(p)));
    worst = std::max(worst, std::abs(g.value - std::exp(-1.0)));
    cross &= g.cross_check;
  }
  res.Check(worst <= 1e-10 && cross,
            Fmt("inverse_growth(p, e^-p) = e^-1 for odd p in [3, 41] (max error "
                "%.3g, brute-force cross-check ",
                worst) + (cross ? "ok)" : "failed)"));
  for (int p : {3, 101}) {
    const GainEnvelopeReport r = GainEnvelopeCheck(p, 0.5);
    res.Check(r.holds, "p = " + std::to_string(p) +
                           Fmt(": |u_p(x)|/|x| in [%.6g, %.6g] within [3/4, 5/4]",
                               r.min_ratio, r.max_ratio));
  }
  const auto p = DefeatScan([](double r) { return std::sqrt(r); });
  res.Check(p.has_value(), p ? "H(r) = r^(1/2) defeated at p = " + std::to_string(*p)
                             : std::string("H(r) = r^(1/2) not defeated"));
  return res;
}

// 7. Threshold calculus.
Result Threshold() {
  Result res;
  test::Gen gen(7007);
  int agree = 0;
  for (int k = 0; k < 200; ++k) {
    const double c = gen.LogUniform(0.01, 100), gamma = gen.Uniform(0.5, 5);
    const double kappa = gen.LogUniform(0.01, 100), beta = gen.Uniform(0.05, 3);
    const double lip = gen.LogUniform(0.01, 100), eta = gen.Uniform(0.05, 1);
    const Verdict v = CheckNogoSymbolic(PowerLaw{c, gamma}, GainClass::PowerLaw(kappa, beta),
                                        InverseGrowthBound::Power(lip, eta));
    const bool strict = ObstructionExponent(gamma, eta, beta) > 1;
    agree += (v.outcome == Outcome::kObstructionCertified) == strict;
  }
  res.Check(agree == 200, "symbolic certifies iff e > 1 on " +
                              std::to_string(agree) + "/200 random cases");
  res.Check(std::abs(ThresholdBeta(3) - 1.0 / 3) <= 1e-15,
            Fmt("threshold_beta(3) = %.15g", ThresholdBeta(3)));

  // Symbolic (fitted envelope) against numeric on cubic_scalar.
  const RRange range;  // [1e-3, 1e-1], 16 radii
  const System cubic = Builtin("cubic_scalar");
  const PowerLawFit fit = FitPowerLaw(
      OpennessRateTable(cubic, CheckGrid(range), Norm::kLinf), Column::kUpper);
  int matches = 0, draws = 0;
  std::string misses;
  while (draws < 20) {
    const double kappa = gen.LogUniform(0.1, 10), beta = gen.Uniform(0.1, 2);
    const double lip = gen.LogUniform(0.1, 10), eta = gen.Uniform(0.1, 1);
    const double e = ObstructionExponent(fit.law.exponent, eta, beta);
    if (std::abs(e - 1) < 0.1) continue;
    ++draws;
    const GainClass d = GainClass::PowerLaw(kappa, beta);
    const auto h = InverseGrowthBound::Power(lip, eta);
    const Verdict sym = CheckNogoSymbolic(fit.law, d, h);
    const RateTable g = OpennessRateTable(cubic, RequiredRhoRadii(d, h, range),
                                          Norm::kLinf);
    const Verdict num = CheckNogo(g, d, h, range);
    if (sym.outcome == num.outcome) {
      ++matches;
    } else {
      misses += Fmt(" [e=%.3g kappa=%.3g L=%.3g beta=%.3g", e, kappa, lip, beta) +
                Fmt(" eta=%.3g: ", eta) + std::string(ToString(sym.outcome)) +
                " vs " + std::string(ToString(num.outcome)) + "]";
    }
  }
  res.Check(matches == 20, "symbolic/numeric agreement on cubic_scalar " +
                               std::to_string(matches) + "/20" + misses);
  return res;
}

// 8. Property suites.
Result Properties() {
  Result res;
  test::Gen gen(88);

  // Galois inverse and monotone repair on random tables.
  bool galois = true, idempotent = true;
  for (int trial = 0; trial < 200; ++trial) {
    RateTable t;
    const int n = gen.Int(2, 30);
    for (int i = 0; i < n; ++i) {
      RateEntry e;
      e.r = 0.01 * (i + 1);
      e.g_lower = gen.Uniform(0, 1);
      e.g_upper = e.g_lower + gen.Uniform(0, 0.2);
      t.entries.push_back(e);
    }
    const RateTable once = EnforceMonotone(t);
    const RateTable twice = EnforceMonotone(once);
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      idempotent &= once.entries[k].g_lower == twice.entries[k].g_lower &&
                    once.entries[k].g_upper == twice.entries[k].g_upper;
    }
    for (const RateEntry& e : once.entries) {
      galois &= GeneralizedInverse(once, e.g_upper, Column::kUpper) <= e.r;
    }
    for (int k = 0; k < 20; ++k) {
      const double s = gen.Uniform(0, once.entries.back().g_upper);
      const double inv = GeneralizedInverse(once, s, Column::kUpper);
      galois &= ReadStepUp(once, inv, Column::kUpper).value_or(-1) >= s;
    }
  }
  {
    const RateTable cubic = OpennessRateTable(Builtin("cubic_scalar"),
                                              DefaultRateGrid(), Norm::kLinf);
    for (const RateEntry& e : cubic.entries) {
      galois &= GeneralizedInverse(cubic, e.g_upper, Column::kUpper) <= e.r;
      const double inv = GeneralizedInverse(cubic, e.g_upper * 0.9, Column::kUpper);
      galois &= ReadStepUp(cubic, inv, Column::kUpper).value_or(-1) >= e.g_upper * 0.9;
    }
  }
  res.Check(galois, "Galois inverse: g<-(g(r)) <= r and g(g<-(s)) >= s");
  res.Check(idempotent, "monotone repair idempotent on 200 random tables");

  // Inradius against the exact box value.
  bool boxes = true;
  double worst_box = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = trial % 2 == 0 ? 2 : 3;
    const Norm norm = trial % 4 < 2 ? Norm::kLinf : Norm::kL2;
    Box box;
    std::vector<double> center;
    for (int j = 0; j < dim; ++j) {
      box.lo.push_back(gen.Uniform(-1.0, -0.2));
      box.hi.push_back(gen.Uniform(0.2, 1.0));
      const auto jj = static_cast<std::size_t>(j);
      center.push_back(box.lo[jj] + gen.Uniform(0.2, 0.8) * (box.hi[jj] - box.lo[jj]));
    }
    // Grid samples of the box, faces included.
    const double pitch = dim == 2 ? 0.01 : 0.04;
    const double delta = norm == Norm::kLinf ? pitch / 2 : pitch * std::sqrt(dim) / 2;
    PointSet cloud;
    cloud.dim = dim;
    std::vector<long> counts(static_cast<std::size_t>(dim)), idx(counts.size(), 0);
    for (std::size_t j = 0; j < counts.size(); ++j) {
      counts[j] = static_cast<long>(std::ceil((box.hi[j] - box.lo[j]) / pitch));
    }
    std::vector<double> p(counts.size());
    while (true) {
      for (std::size_t j = 0; j < p.size(); ++j) {
        p[j] = box.lo[j] + (box.hi[j] - box.lo[j]) * double(idx[j]) / double(counts[j]);
      }
      cloud.push_back(p);
      std::size_t j = 0;
      for (; j < idx.size(); ++j) {
        if (idx[j] < counts[j]) {
          ++idx[j];
          break;
        }
        idx[j] = 0;
      }
      if (j == idx.size()) break;
    }
    const InradiusEstimate est = Inradius(cloud, center, delta, pitch, norm);
    const double err = std::abs(est.upper - InradiusBoxOracle(box, center));
    const double allowed = delta + 2 * pitch * std::sqrt(double(dim));
    boxes &= err <= allowed;
    worst_box = std::max(worst_box, err / allowed);
  }
  res.Check(boxes, Fmt("inradius within Lambda delta + 2 eps sqrt(dim) of the box "
                       "oracle on 50 boxes (largest ratio %.3g)",
                       worst_box));

  // Lipschitz bounds on random pairs.
  bool lipschitz = true;
  for (const char* name : {"cubic_scalar", "cubic2d", "unicycle", "affine1d",
                           "affine2d", "identity_3", "counterexample_3"}) {
    const System sys = Builtin(name);
    const int dim = InputDim(sys);
    for (Norm norm : {Norm::kLinf, Norm::kL2}) {
      const double radius = 0.7;
      const double lam = LipschitzBound(sys, radius, norm);
      for (int k = 0; k < 1000; ++k) {
        const auto a = gen.InBall(dim, radius, norm);
        const auto b = gen.InBall(dim, radius, norm);
        const Eigen::VectorXd za = Eigen::Map<const Eigen::VectorXd>(a.data(), dim);
        const Eigen::VectorXd zb = Eigen::Map<const Eigen::VectorXd>(b.data(), dim);
        const Eigen::VectorXd df = Evaluate(sys, za) - Evaluate(sys, zb);
        const Eigen::VectorXd dz = za - zb;
        lipschitz &= VectorNorm({df.data(), std::size_t(df.size())}, norm) <=
                     lam * VectorNorm({dz.data(), std::size_t(dz.size())}, norm) *
                             (1 + 1e-12) + 1e-15;
      }
    }
  }
  res.Check(lipschitz, "Lipschitz bound holds on 1000 random pairs per built-in");

  // RK4 order.
  double min_ratio = 1e300;
  for (double dt : {0.2, 0.1, 0.05}) {
    auto error = [](double h) {
      const Trajectory t = Integrate(LinearField(Eigen::MatrixXd::Constant(1, 1, -1)),
                                     Eigen::VectorXd::Ones(1), h, 1.0);
      return std::abs(t.states.back()(0) - std::exp(-1.0));
    };
    min_ratio = std::min(min_ratio, error(dt) / error(dt / 2));
  }
  res.Check(min_ratio >= 12, Fmt("RK4 error ratio on halving dt >= 12 (min %.4g)",
                                 min_ratio));

  // Gain monotonicity and dominance on built-in tables.
  bool monotone = true, dominant = true;
  int certified_main = 0;
  const RRange range{1e-3, 1e-1, 8};
  for (int trial = 0; trial < 20; ++trial) {
    const double beta = gen.Uniform(0.3, 2.0);
    const double k1 = gen.LogUniform(0.1, 5), k2 = k1 * gen.LogUniform(1, 20);
    const GainClass d1 = GainClass::PowerLaw(k1, beta), d2 = GainClass::PowerLaw(k2, beta);
    const auto h = InverseGrowthBound::Lipschitz(gen.LogUniform(0.3, 3));
    const int p = 2 * gen.Int(1, 3) + 1;
    for (const System& sys : {Builtin("cubic_scalar"), System(CounterexampleMap(p))}) {
      std::vector<double> radii = RequiredRhoRadii(d1, h, range);
      for (double x : RequiredRhoRadii(d2, h, range)) radii.push_back(x);
      std::sort(radii.begin(), radii.end());
      radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
      const RateTable g = OpennessRateTable(sys, radii, Norm::kLinf);
      const Verdict v1 = CheckNogo(g, d1, h, range);
      const Verdict v2 = CheckNogo(g, d2, h, range);
      if (v2.outcome == Outcome::kObstructionCertified) {
        monotone &= v1.outcome == Outcome::kObstructionCertified;
      }
      const RateTable g_fu =
          OpennessRateTable(CounterexampleMap(p), RequiredHRadii(h, range), Norm::kLinf);
      const Verdict strong = CheckNogoStrong(g, g_fu, d1, h, range);
      if (v1.outcome == Outcome::kObstructionCertified) {
        ++certified_main;
        dominant &= strong.outcome != Outcome::kNoObstruction;
      }
    }
  }
  res.Check(monotone, "gain monotonicity of check_nogo verdicts (40 cases)");
  res.Check(dominant, "check_nogo_strong never NoObstruction where check_nogo "
                      "certifies (" + std::to_string(certified_main) + " certified cases)");
  return res;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Result()> run;
};

}  // namespace
}  // namespace openness

int main(int argc, char** argv) {
  using namespace openness;
  CLI::App app{"acceptance criteria"};
  int only = 0;
  bool verbose = false;
  app.add_option("--criterion", only, "run a single criterion (1-8)");
  app.add_flag("-v,--verbose", verbose, "print every sub-check");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "cubic openness rate", CubicRate},
      {2, "unicycle obstruction", Unicycle},
      {3, "Banach constant", Banach},
      {4, "norm estimates", NormEstimates},
      {5, "eigenvalue check", EigenvalueCheck},
      {6, "counterexample family", Counterexample},
      {7, "threshold calculus", Threshold},
      {8, "property suites", Properties},
  };
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::cerr << "unknown criterion " << only << '\n';
    return 2;
  }
  bool all = true;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r.Check(false, std::string("exception: ") + e.what());
    }
    all &= r.pass;
    std::string failed;
    for (const auto& d : r.details) {
      if (d.rfind("FAILED", 0) == 0) failed += (failed.empty() ? "" : "; ") + d.substr(7);
    }
    std::cout << "criterion " << c.id << " (" << c.name << "): "
              << (r.pass ? "PASS" : "FAIL");
    if (!r.pass) std::cout << ": " << failed;
    std::cout << '\n';
    if (verbose || !r.pass) {
      for (const auto& d : r.details) std::cout << "    " << d << '\n';
    }
    std::cout.flush();
  }
  return all ? 0 : 1;
}
