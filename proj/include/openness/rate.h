#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "openness/systems.h"

namespace openness {

enum class Column { kLower, kUpper };

/// One row of a rate table: bounds on g(r) = inradius at 0 of f(closed r-ball)
/// and the discretisation that produced them.
struct RateEntry {
  double r = 0.0;
  double g_lower = 0.0;
  double g_upper = 0.0;
  double delta = 0.0;    // covering radius of the domain net
  double epsilon = 0.0;  // image cell size
  double lambda = 0.0;   // Lipschitz bound used for the dilation
  int image_dim = 0;
  std::string method;    // "interval", "grid" or "linear"
  bool lower_rigorous = false;

  double value(Column c) const { return c == Column::kLower ? g_lower : g_upper; }
  /// The one-sided discretisation allowance of this row.
  double slack() const;
};

struct RateTable {
  std::string system_id;
  Norm norm = Norm::kLinf;
  std::vector<RateEntry> entries;

  std::vector<double> radii() const;
  std::vector<double> column(Column c) const;
  double r_min() const { return entries.front().r; }
  double r_max() const { return entries.back().r; }
};

struct RateOptions {
  /// Budget for the domain net (points before clipping to the ball).
  std::size_t max_points = 1'000'000;
  /// Net covering radius as a fraction of r; overrides the budget when set.
  std::optional<double> spacing_fraction;
  /// Image cell size as a fraction of r; defaults to the net covering radius.
  std::optional<double> cell_fraction;
  /// Image cells cap; the cell size is coarsened to respect it.
  std::size_t max_cells = 8'000'000;
  /// Use g(r) = sigma_min(A) r for linear systems in l2.
  bool exact_linear = true;
  std::string system_id = "custom";
};

/// `count` log-spaced radii from lo to hi with both endpoints exact.
std::vector<double> LogSpacedGrid(double lo, double hi, int count);

/// Default radii: 16 log-spaced points on [0.01, 1].
std::vector<double> DefaultRateGrid();

/// For each r: net of the r-ball over the variables f depends on, image cloud,
/// Lipschitz bound on the r-ball, inradius at 0 with dilation lambda*delta.
/// Rows are computed in parallel and the result is passed through
/// EnforceMonotone.
///
/// Scalar images use the interval rule (both columns rigorous). Linear maps in
/// l2 use the Banach constant exactly. Everything else goes through the
/// occupancy-grid estimator (rigorous upper, heuristic lower; image dim <= 3).
RateTable OpennessRateTable(const System& sys, std::span<const double> r_grid,
                            Norm norm, const RateOptions& options = {});

/// Running maximum on both columns. Raising an entry keeps it valid: the true
/// g is nondecreasing, so a bound from a smaller radius also bounds g here.
RateTable EnforceMonotone(RateTable table);

/// inf{ r in grid : column(r) >= s }, 0 for s = 0 and +infinity when no grid
/// entry reaches s.
double GeneralizedInverse(const RateTable& table, double s, Column column);

/// Column value at the smallest grid radius >= r (an upper bound on g(r) when
/// reading the upper column). nullopt when r exceeds the table.
std::optional<double> ReadStepUp(const RateTable& table, double r,
                                 Column column);

/// Column value at the largest grid radius <= r (a lower bound on g(r) when
/// reading the lower column); 0 below the table.
double ReadStepDown(const RateTable& table, double r, Column column);

/// Inradius of A(unit ball) at 0 for the Euclidean norms: the smallest
/// singular value when A has full row rank, else 0.
double BanachConstant(const Eigen::MatrixXd& a);

struct PowerLaw {
  double coefficient = 0.0;
  double exponent = 0.0;

  double operator()(double r) const;
};

struct PowerLawFit {
  PowerLaw law;
  double max_relative_residual = 0.0;
};

/// Least squares on log g = log C + gamma log r. Needs at least 4 rows, all
/// positive; throws FitError otherwise (naming the offending rows).
PowerLawFit FitPowerLaw(const RateTable& table, Column column);
PowerLawFit FitPowerLaw(std::span<const double> r, std::span<const double> g);

/// CSV: r,g_lower,g_upper,delta,epsilon,lambda with 17 significant digits.
void WriteRateCsv(const RateTable& table, std::ostream& out);

/// Shortest-round-trip-independent formatting used by every CSV writer:
/// 17 significant digits, '.' decimal separator regardless of locale.
std::string FormatDouble(double v);

}  // namespace openness
