#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "openness/systems.h"

namespace openness {

/// Flat storage for many points of one dimension.
struct PointSet {
  int dim = 0;
  std::vector<double> coords;

  std::size_t size() const {
    return dim == 0 ? 0 : coords.size() / static_cast<std::size_t>(dim);
  }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
  void push_back(std::span<const double> p) {
    coords.insert(coords.end(), p.begin(), p.end());
  }
};

/// Points of the closed ball B(0, radius) forming a `spacing`-net of it.
///
/// Built from an axis-aligned grid of pitch p through the origin, which puts
/// every point of the ball within p/2 (l-infinity) or p*sqrt(dim)/2 (l2) of a
/// grid node. For l2 the grid nodes outside the ball whose distance to it is
/// at most that half-diagonal are replaced by their radial projections onto
/// the sphere; projection onto a convex set is nonexpansive, so the covering
/// property survives.
struct BallNet {
  int dim = 0;
  double radius = 0.0;
  Norm norm = Norm::kLinf;
  double pitch = 0.0;
  double spacing = 0.0;  // achieved covering radius, <= the requested one
  PointSet points;
};

inline constexpr std::size_t kMaxNetPoints = 100'000'000;

/// Grid nodes per axis times dims, before clipping to the ball.
std::size_t ProjectedNetSize(int dim, double radius, Norm norm, double spacing);

/// Throws InputError on bad arguments and ResourceError when the projected
/// point count exceeds kMaxNetPoints.
BallNet MakeBallNet(int dim, double radius, Norm norm, double target_spacing);

/// Finest spacing whose projected point count stays within `max_points`.
double SpacingForBudget(int dim, double radius, Norm norm,
                        std::size_t max_points);

/// Pointwise images in net order. net.dim must equal n+m.
PointSet ImageCloud(const System& sys, const BallNet& net);

/// Same, for a net over the coordinates listed in `active` only (the others
/// are held at 0). When f ignores the remaining coordinates the image of the
/// projected ball equals the image of the full ball.
PointSet ImageCloud(const System& sys, const BallNet& net,
                    std::span<const int> active);

/// Dense boolean raster over an axis-aligned block of cells of side
/// `cell_size`. Cell k (a multi-index, possibly negative) is centred at
/// origin + k * cell_size.
class OccupancyGrid {
 public:
  OccupancyGrid(std::vector<double> origin, double cell_size,
                std::vector<long> kmin, std::vector<long> kmax);

  int dim() const { return static_cast<int>(origin_.size()); }
  double cell_size() const { return cell_size_; }
  const std::vector<double>& origin() const { return origin_; }
  const std::vector<long>& kmin() const { return kmin_; }
  const std::vector<long>& extent() const { return extent_; }
  std::size_t cell_count() const { return cells_.size(); }

  bool covered(std::size_t flat) const { return cells_[flat] != 0; }
  void set_covered(std::size_t flat, bool v) { cells_[flat] = v ? 1 : 0; }
  std::vector<std::uint8_t>& raw() { return cells_; }

  std::size_t Flatten(std::span<const long> k) const;
  void Unflatten(std::size_t flat, std::span<long> k) const;
  bool OnBoundary(std::size_t flat) const;

  /// Distance from the origin to the centre of cell `flat`.
  double CenterDistance(std::size_t flat, Norm norm) const;

  /// Flood-fills uncovered cells from the boundary layer (faces only) and
  /// returns the smallest origin distance among the reached cells' centres.
  /// Throws InternalError when the boundary layer is fully covered.
  double NearestExteriorDistance(Norm norm) const;

  /// Portable graymap (P2) dump of a 2-D grid: covered cells black.
  void WritePgm(std::ostream& out) const;

 private:
  std::vector<double> origin_;
  double cell_size_;
  std::vector<long> kmin_;
  std::vector<long> extent_;
  std::vector<std::size_t> stride_;
  std::vector<std::uint8_t> cells_;
};

inline constexpr std::size_t kMaxGridCells = 64'000'000;

/// Grid bounds shared by both rasters: bounding box of the cloud and the
/// centre, grown by `dilation` and padded by two cells, lattice anchored at
/// the centre.
OccupancyGrid MakeGrid(const PointSet& cloud, std::span<const double> center,
                       double dilation, double cell_size);

/// Marks every cell whose centre lies within `dilation` (in `norm`) of some
/// cloud point.
void RasterizeDilated(OccupancyGrid& grid, const PointSet& cloud,
                      double dilation, Norm norm);

/// Marks every cell that contains at least one cloud point.
void RasterizeRaw(OccupancyGrid& grid, const PointSet& cloud);

struct InradiusProvenance {
  double dilation = 0.0;
  double cell_size = 0.0;
  std::string method;  // "interval" (dim 1) or "grid"
  bool lower_rigorous = false;
  bool upper_rigorous = true;
};

struct InradiusEstimate {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> center;
  InradiusProvenance provenance;
};

/// Bounds on the inradius at `center` of a compact set K known to satisfy
/// cloud ⊆ K ⊆ union of closed `dilation` balls about the cloud points.
///
/// dim 1 (K an interval, e.g. the image of a connected set): K contains
/// [min, max] of the cloud and is contained in [min - D, max + D], which gives
/// two rigorous bounds.
///
/// dim 2, 3: upper is the distance to the nearest centre of a cell reached by
/// flood fill from outside the dilated raster. Such a centre is farther than D
/// from every cloud point, hence outside K, so upper is rigorous. lower is the
/// same distance on the raster of the raw cloud, minus cell_size * sqrt(dim),
/// floored at 0; it is a heuristic.
InradiusEstimate Inradius(const PointSet& cloud, std::span<const double> center,
                          double dilation, double cell_size, Norm norm);

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Exact inradius of a box at an interior point: the smallest face distance
/// (the same for l-infinity and l2 balls). Returns 0 outside the box.
double InradiusBoxOracle(const Box& box, std::span<const double> center);

}  // namespace openness
