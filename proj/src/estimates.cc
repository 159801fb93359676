#include "openness/estimates.h"

#include <algorithm>
#include <cmath>

#include "openness/errors.h"
#include "openness/geometry.h"
#include "openness/parallel.h"

namespace openness {
namespace {

double MaxAbs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::string SystemName(const System& sys) {
  if (const auto* s = std::get_if<SmoothSystem>(&sys)) return s->name;
  return "polynomial";
}

}  // namespace

SupNorm SupNormOnBall(const System& sys, double radius, Norm norm,
                      double spacing, std::span<const double> center) {
  if (!(radius > 0.0)) throw InputError("sup_norm_on_ball: radius must be > 0");
  const int in_dim = InputDim(sys);
  const int out_dim = StateDim(sys);
  if (!center.empty() && static_cast<int>(center.size()) != in_dim) {
    throw InputError("sup_norm_on_ball: center has dimension " +
                     std::to_string(center.size()) + ", expected " +
                     std::to_string(in_dim));
  }
  std::vector<double> base(static_cast<std::size_t>(in_dim), 0.0);
  std::copy(center.begin(), center.end(), base.begin());

  SupNorm result;
  result.lambda = LipschitzBound(sys, MaxAbs(base) + radius, norm);
  std::vector<int> active = ActiveVariables(sys);
  if (active.empty()) {
    // f is constant; one evaluation is exact.
    std::vector<double> out(static_cast<std::size_t>(out_dim));
    EvaluateInto(sys, base, out);
    result.value = VectorNorm(out, norm);
    result.net_points = 1;
    return result;
  }
  const BallNet net =
      MakeBallNet(static_cast<int>(active.size()), radius, norm, spacing);
  result.spacing = net.spacing;
  result.slack = result.lambda * net.spacing;
  result.net_points = net.points.size();

  const std::size_t count = net.points.size();
  const std::size_t chunks = std::max<std::size_t>(1, WorkerCount());
  std::vector<double> partial(chunks, 0.0);
  ParallelFor(chunks, [&](std::size_t cb, std::size_t ce) {
    std::vector<double> z(base.size());
    std::vector<double> out(static_cast<std::size_t>(out_dim));
    for (std::size_t c = cb; c < ce; ++c) {
      const std::size_t begin = count * c / chunks;
      const std::size_t end = count * (c + 1) / chunks;
      double best = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        z = base;
        const auto p = net.points.point(i);
        for (std::size_t j = 0; j < active.size(); ++j) {
          z[static_cast<std::size_t>(active[j])] += p[j];
        }
        EvaluateInto(sys, z, out);
        best = std::max(best, VectorNorm(out, norm));
      }
      partial[c] = best;
    }
  });
  result.value = *std::max_element(partial.begin(), partial.end());
  return result;
}

System Recentered(const System& sys, std::span<const double> center) {
  if (static_cast<int>(center.size()) != InputDim(sys)) {
    throw InputError("recentered: center has dimension " +
                     std::to_string(center.size()) + ", expected " +
                     std::to_string(InputDim(sys)));
  }
  if (const auto* p = std::get_if<PolynomialSystem>(&sys)) {
    return p->Recentered(center);
  }
  const SmoothSystem& s = std::get<SmoothSystem>(sys);
  const std::vector<double> c(center.begin(), center.end());
  std::vector<double> fc(static_cast<std::size_t>(s.state_dim));
  s.evaluate(c, fc);
  const double shift = MaxAbs(c);

  SmoothSystem out = s;
  out.name = s.name + "@shifted";
  out.evaluate = [inner = s.evaluate, c, fc](std::span<const double> w,
                                             std::span<double> y) {
    std::vector<double> z(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) z[j] = c[j] + w[j];
    inner(z, y);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= fc[i];
  };
  out.lipschitz = [inner = s.lipschitz, shift](double r) {
    return inner(shift + r);
  };
  out.max_radius = s.max_radius - shift;
  return out;
}

NormBound NormLowerBound(const System& sys, std::span<const double> center,
                         double radius, const RateTable& rate, Norm norm) {
  if (static_cast<int>(center.size()) != InputDim(sys)) {
    throw InputError("norm_lower_bound: center has dimension " +
                     std::to_string(center.size()) + ", expected " +
                     std::to_string(InputDim(sys)));
  }
  if (rate.entries.empty() || radius < rate.r_min() ||
      radius > rate.r_max() * (1.0 + 1e-12)) {
    throw RangeError(
        "norm_lower_bound: rate table does not cover R = " +
        FormatDouble(radius) +
        (rate.entries.empty() ? std::string(" (empty table)")
                              : " (table spans [" + FormatDouble(rate.r_min()) +
                                    ", " + FormatDouble(rate.r_max()) + "])"));
  }
  Eigen::VectorXd z(static_cast<Eigen::Index>(center.size()));
  for (std::size_t j = 0; j < center.size(); ++j) {
    z(static_cast<Eigen::Index>(j)) = center[j];
  }
  const Eigen::VectorXd fz = Evaluate(sys, z);

  NormBound bound;
  bound.kind = BoundKind::kLowerBoundOnSupNorm;
  bound.value_at_center = VectorNorm(
      std::span<const double>(fz.data(), static_cast<std::size_t>(fz.size())),
      norm);
  bound.rate_term = ReadStepDown(rate, radius, Column::kLower);
  bound.value = bound.value_at_center + bound.rate_term;
  bound.rigorous = true;
  for (const auto& e : rate.entries) {
    if (e.r <= radius * (1.0 + 1e-12) && !e.lower_rigorous) bound.rigorous = false;
  }
  bound.system_id = rate.system_id.empty() ? SystemName(sys) : rate.system_id;
  bound.center.assign(center.begin(), center.end());
  bound.radius = radius;
  bound.rate_source = "rate table (" + std::string(ToString(rate.norm)) +
                      ", lower column, step-down)";
  return bound;
}

EnvelopeReport EnvelopeCheck(const System& sys, const PowerLaw& phi,
                             std::span<const double> r_grid, Norm norm,
                             double spacing_fraction) {
  if (!(phi.coefficient > 0.0) || !(phi.exponent > 0.0)) {
    throw InputError("envelope_check: need M > 0 and alpha > 0");
  }
  EnvelopeReport report;
  for (double r : r_grid) {
    const SupNorm s = SupNormOnBall(sys, r, norm, spacing_fraction * r);
    EnvelopeRow row{r, s.value, s.slack, phi(r)};
    // Relative guard so an exact tie with the envelope is not a violation.
    if (row.sup > row.envelope * (1.0 + 1e-12)) {
      if (report.holds) report.first_violation = row;
      report.holds = false;
    }
    if (row.sup + row.slack > row.envelope) report.certified = false;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace openness
