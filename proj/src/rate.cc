#include "openness/rate.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "openness/errors.h"
#include "openness/geometry.h"
#include "openness/parallel.h"

namespace openness {
namespace {

constexpr double kGridMatchTolerance = 1e-12;

void CheckGrid(std::span<const double> r_grid) {
  if (r_grid.empty()) throw InputError("rate table: empty radius grid");
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (!(r_grid[i] > 0.0) || !std::isfinite(r_grid[i])) {
      throw InputError("rate table: radii must be positive and finite");
    }
    if (i > 0 && !(r_grid[i] > r_grid[i - 1])) {
      throw InputError("rate table: radii must be strictly increasing");
    }
  }
}

void CheckEquilibrium(const System& sys) {
  if (const auto* p = std::get_if<PolynomialSystem>(&sys)) {
    p->RequireEquilibriumAtOrigin();
    return;
  }
  const Eigen::VectorXd f0 = Evaluate(sys, Eigen::VectorXd::Zero(InputDim(sys)));
  if (f0.lpNorm<Eigen::Infinity>() != 0.0) {
    throw ValidationError(std::get<SmoothSystem>(sys).name +
                          ": f(0,0) must be 0");
  }
}

// Cell size no finer than needed to keep the image grid under `max_cells`.
double CoarsenCell(const PointSet& cloud, double dilation, double cell,
                   std::size_t max_cells) {
  const std::size_t d = static_cast<std::size_t>(cloud.dim);
  std::vector<double> lo(d, 0.0), hi(d, 0.0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    for (std::size_t j = 0; j < d; ++j) {
      lo[j] = std::min(lo[j], p[j]);
      hi[j] = std::max(hi[j], p[j]);
    }
  }
  for (int guard = 0; guard < 64; ++guard) {
    double cells = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      cells *= (hi[j] - lo[j] + 2.0 * dilation + 4.0 * cell) / cell + 3.0;
    }
    if (cells <= double(max_cells)) return cell;
    cell *= std::max(1.05, std::pow(cells / double(max_cells), 1.0 / double(d)));
  }
  return cell;
}

RateEntry ComputeRow(const System& sys, std::span<const int> active, double r,
                     Norm norm, const RateOptions& options) {
  RateEntry e;
  e.r = r;
  e.image_dim = StateDim(sys);
  e.lambda = LipschitzBound(sys, r, norm);
  if (active.empty()) {
    // f ignores every variable, so the image is {f(0)} = {0}.
    e.method = "interval";
    e.lower_rigorous = true;
    return e;
  }
  const int net_dim = static_cast<int>(active.size());
  const double spacing =
      options.spacing_fraction
          ? *options.spacing_fraction * r
          : SpacingForBudget(net_dim, r, norm, options.max_points);
  const BallNet net = MakeBallNet(net_dim, r, norm, spacing);
  const PointSet cloud = ImageCloud(sys, net, active);
  e.delta = net.spacing;
  const double dilation = e.lambda * e.delta;
  double cell = options.cell_fraction ? *options.cell_fraction * r : e.delta;
  if (cloud.dim > 1) cell = CoarsenCell(cloud, dilation, cell, options.max_cells);
  e.epsilon = cell;
  const std::vector<double> origin(static_cast<std::size_t>(cloud.dim), 0.0);
  const InradiusEstimate est = Inradius(cloud, origin, dilation, cell, norm);
  e.g_lower = est.lower;
  e.g_upper = est.upper;
  e.method = est.provenance.method;
  e.lower_rigorous = est.provenance.lower_rigorous;
  return e;
}

}  // namespace

double RateEntry::slack() const {
  if (method == "linear") return 0.0;
  double s = lambda * delta;
  if (method == "grid") s += epsilon * std::sqrt(double(image_dim));
  return s;
}

std::vector<double> RateTable::radii() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.r);
  return out;
}

std::vector<double> RateTable::column(Column c) const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.value(c));
  return out;
}

std::vector<double> LogSpacedGrid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    throw InputError("log grid: need 0 < lo < hi and at least 2 points");
  }
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) {
    grid[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

std::vector<double> DefaultRateGrid() { return LogSpacedGrid(0.01, 1.0, 16); }

RateTable OpennessRateTable(const System& sys, std::span<const double> r_grid,
                            Norm norm, const RateOptions& options) {
  CheckGrid(r_grid);
  CheckEquilibrium(sys);

  RateTable table;
  table.system_id = options.system_id;
  table.norm = norm;
  table.entries.resize(r_grid.size());

  const auto* poly = std::get_if<PolynomialSystem>(&sys);
  if (options.exact_linear && norm == Norm::kL2 && poly != nullptr &&
      poly->IsLinear()) {
    const double banach = BanachConstant(poly->LinearPart());
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
      RateEntry& e = table.entries[i];
      e.r = r_grid[i];
      e.g_lower = e.g_upper = banach * r_grid[i];
      e.lambda = LipschitzBound(sys, r_grid[i], norm);
      e.image_dim = poly->state_dim();
      e.method = "linear";
      e.lower_rigorous = true;
    }
    return table;
  }

  const std::vector<int> active = ActiveVariables(sys);
  ParallelFor(r_grid.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      table.entries[i] = ComputeRow(sys, active, r_grid[i], norm, options);
    }
  });
  return EnforceMonotone(std::move(table));
}

RateTable EnforceMonotone(RateTable table) {
  double lower = 0.0, upper = 0.0;
  for (auto& e : table.entries) {
    lower = std::max(lower, e.g_lower);
    upper = std::max(upper, e.g_upper);
    e.g_lower = lower;
    e.g_upper = upper;
  }
  return table;
}

double GeneralizedInverse(const RateTable& table, double s, Column column) {
  if (!(s >= 0.0)) throw InputError("generalized inverse: s must be >= 0");
  if (s == 0.0) return 0.0;
  for (const auto& e : table.entries) {
    if (e.value(column) >= s) return e.r;
  }
  return std::numeric_limits<double>::infinity();
}

std::optional<double> ReadStepUp(const RateTable& table, double r,
                                 Column column) {
  for (const auto& e : table.entries) {
    if (e.r >= r * (1.0 - kGridMatchTolerance)) return e.value(column);
  }
  return std::nullopt;
}

double ReadStepDown(const RateTable& table, double r, Column column) {
  double value = 0.0;
  for (const auto& e : table.entries) {
    if (e.r <= r * (1.0 + kGridMatchTolerance)) {
      value = e.value(column);
    } else {
      break;
    }
  }
  return value;
}

double PowerLaw::operator()(double r) const {
  return coefficient * std::pow(r, exponent);
}

PowerLawFit FitPowerLaw(std::span<const double> r, std::span<const double> g) {
  if (r.size() != g.size()) throw FitError("power-law fit: size mismatch");
  if (r.size() < 4) {
    throw FitError("power-law fit needs at least 4 rows, got " +
                   std::to_string(r.size()));
  }
  std::string bad;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(g[i] > 0.0) || !(r[i] > 0.0)) {
      bad += (bad.empty() ? "" : ", ") + std::to_string(i);
    }
  }
  if (!bad.empty()) {
    throw FitError("power-law fit: nonpositive entries in rows " + bad);
  }
  const double n = double(r.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double x = std::log(r[i]), y = std::log(g[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  PowerLawFit fit;
  fit.law.exponent = denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
  fit.law.coefficient = std::exp((sy - fit.law.exponent * sx) / n);
  for (std::size_t i = 0; i < r.size(); ++i) {
    fit.max_relative_residual = std::max(
        fit.max_relative_residual, std::abs(fit.law(r[i]) - g[i]) / g[i]);
  }
  return fit;
}

PowerLawFit FitPowerLaw(const RateTable& table, Column column) {
  const auto r = table.radii();
  const auto g = table.column(column);
  return FitPowerLaw(r, g);
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

void WriteRateCsv(const RateTable& table, std::ostream& out) {
  out << "r,g_lower,g_upper,delta,epsilon,lambda\n";
  for (const auto& e : table.entries) {
    out << FormatDouble(e.r) << ',' << FormatDouble(e.g_lower) << ','
        << FormatDouble(e.g_upper) << ',' << FormatDouble(e.delta) << ','
        << FormatDouble(e.epsilon) << ',' << FormatDouble(e.lambda) << '\n';
  }
}

}  // namespace openness
