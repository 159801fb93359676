#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "openness/rate.h"
#include "openness/systems.h"

namespace openness {

/// Maximum of ||f|| over a delta-net of a closed ball. The true supremum lies
/// in [value, value + slack] with slack = Lambda * delta.
struct SupNorm {
  double value = 0.0;
  double slack = 0.0;
  double spacing = 0.0;  // covering radius actually used
  double lambda = 0.0;
  std::size_t net_points = 0;

  double upper() const { return value + slack; }
};

/// Sup of ||f(z)|| over the closed `radius` ball about `center` (the origin
/// when empty). `spacing` is the requested net covering radius.
SupNorm SupNormOnBall(const System& sys, double radius, Norm norm,
                      double spacing, std::span<const double> center = {});

/// w -> f(center + w) - f(center). Polynomial systems are re-expanded; smooth
/// systems are wrapped.
System Recentered(const System& sys, std::span<const double> center);

enum class BoundKind { kLowerBoundOnSupNorm, kUpperBoundOnRate };

struct NormBound {
  BoundKind kind = BoundKind::kLowerBoundOnSupNorm;
  double value = 0.0;
  /// ||f(x*)|| and the rate reading that make up `value`.
  double value_at_center = 0.0;
  double rate_term = 0.0;
  bool rigorous = false;
  std::string system_id;
  std::vector<double> center;
  double radius = 0.0;
  std::string rate_source;
};

/// ||f|_K|| >= ||f(x*)|| + g(R) for K the closed R-ball about x*. `rate` must be
/// the table of the recentered map (see Recentered); its lower column is read
/// step-down at R. Throws RangeError when R lies outside the table.
NormBound NormLowerBound(const System& sys, std::span<const double> center,
                         double radius, const RateTable& rate, Norm norm);

struct EnvelopeRow {
  double r = 0.0;
  double sup = 0.0;
  double slack = 0.0;
  double envelope = 0.0;
};

struct EnvelopeReport {
  /// No grid radius has a measured sup exceeding the envelope.
  bool holds = true;
  /// Every row satisfies sup + slack <= envelope.
  bool certified = true;
  std::optional<EnvelopeRow> first_violation;
  std::vector<EnvelopeRow> rows;
};

/// Compares SupNormOnBall(r) with phi(r) = M r^alpha along the grid. Net
/// spacing is `spacing_fraction * r`.
EnvelopeReport EnvelopeCheck(const System& sys, const PowerLaw& phi,
                             std::span<const double> r_grid, Norm norm,
                             double spacing_fraction = 1e-3);

}  // namespace openness
