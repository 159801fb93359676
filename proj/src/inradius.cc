#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "openness/errors.h"
#include "openness/geometry.h"

namespace openness {

OccupancyGrid::OccupancyGrid(std::vector<double> origin, double cell_size,
                             std::vector<long> kmin, std::vector<long> kmax)
    : origin_(std::move(origin)), cell_size_(cell_size), kmin_(std::move(kmin)) {
  const std::size_t d = origin_.size();
  if (d == 0 || kmin_.size() != d || kmax.size() != d) {
    throw InputError("occupancy grid: inconsistent dimensions");
  }
  extent_.resize(d);
  stride_.resize(d);
  double total = 1.0;
  for (std::size_t j = 0; j < d; ++j) {
    extent_[j] = kmax[j] - kmin_[j] + 1;
    if (extent_[j] < 1) throw InputError("occupancy grid: empty axis");
    total *= double(extent_[j]);
  }
  if (total > double(kMaxGridCells)) {
    throw ResourceError("occupancy grid would need " +
                        std::to_string(static_cast<long long>(total)) +
                        " cells (limit " + std::to_string(kMaxGridCells) +
                        "); use a larger cell size");
  }
  std::size_t s = 1;
  for (std::size_t j = d; j-- > 0;) {
    stride_[j] = s;
    s *= static_cast<std::size_t>(extent_[j]);
  }
  cells_.assign(s, 0);
}

std::size_t OccupancyGrid::Flatten(std::span<const long> k) const {
  std::size_t flat = 0;
  for (std::size_t j = 0; j < k.size(); ++j) {
    flat += static_cast<std::size_t>(k[j]) * stride_[j];
  }
  return flat;
}

void OccupancyGrid::Unflatten(std::size_t flat, std::span<long> k) const {
  for (std::size_t j = 0; j < stride_.size(); ++j) {
    k[j] = static_cast<long>(flat / stride_[j]);
    flat %= stride_[j];
  }
}

bool OccupancyGrid::OnBoundary(std::size_t flat) const {
  for (std::size_t j = 0; j < stride_.size(); ++j) {
    const long kj = static_cast<long>(flat / stride_[j]);
    flat %= stride_[j];
    if (kj == 0 || kj == extent_[j] - 1) return true;
  }
  return false;
}

double OccupancyGrid::CenterDistance(std::size_t flat, Norm norm) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < stride_.size(); ++j) {
    const long kj = static_cast<long>(flat / stride_[j]);
    flat %= stride_[j];
    const double off = double(kmin_[j] + kj) * cell_size_;
    if (norm == Norm::kLinf) {
      acc = std::max(acc, std::abs(off));
    } else {
      acc += off * off;
    }
  }
  return norm == Norm::kLinf ? acc : std::sqrt(acc);
}

double OccupancyGrid::NearestExteriorDistance(Norm norm) const {
  const std::size_t d = stride_.size();
  std::vector<std::uint8_t> seen(cells_.size(), 0);
  std::deque<std::size_t> queue;
  for (std::size_t f = 0; f < cells_.size(); ++f) {
    if (!cells_[f] && OnBoundary(f)) {
      seen[f] = 1;
      queue.push_back(f);
    }
  }
  if (queue.empty()) {
    throw InternalError("occupancy grid: boundary layer fully covered");
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<long> k(d);
  while (!queue.empty()) {
    const std::size_t f = queue.front();
    queue.pop_front();
    best = std::min(best, CenterDistance(f, norm));
    Unflatten(f, k);
    for (std::size_t j = 0; j < d; ++j) {
      if (k[j] > 0) {
        const std::size_t g = f - stride_[j];
        if (!cells_[g] && !seen[g]) {
          seen[g] = 1;
          queue.push_back(g);
        }
      }
      if (k[j] + 1 < extent_[j]) {
        const std::size_t g = f + stride_[j];
        if (!cells_[g] && !seen[g]) {
          seen[g] = 1;
          queue.push_back(g);
        }
      }
    }
  }
  return best;
}

void OccupancyGrid::WritePgm(std::ostream& out) const {
  if (dim() != 2) throw InputError("PGM dump needs a 2-D grid");
  out << "P2\n" << extent_[0] << " " << extent_[1] << "\n255\n";
  std::vector<long> k(2);
  for (long row = extent_[1] - 1; row >= 0; --row) {
    for (long col = 0; col < extent_[0]; ++col) {
      k[0] = col;
      k[1] = row;
      out << (cells_[Flatten(k)] ? 0 : 255) << (col + 1 < extent_[0] ? " " : "\n");
    }
  }
}

OccupancyGrid MakeGrid(const PointSet& cloud, std::span<const double> center,
                       double dilation, double cell_size) {
  const std::size_t d = static_cast<std::size_t>(cloud.dim);
  std::vector<double> lo(center.begin(), center.end());
  std::vector<double> hi(center.begin(), center.end());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    for (std::size_t j = 0; j < d; ++j) {
      lo[j] = std::min(lo[j], p[j]);
      hi[j] = std::max(hi[j], p[j]);
    }
  }
  std::vector<long> kmin(d), kmax(d);
  const double pad = dilation + 2.0 * cell_size;
  for (std::size_t j = 0; j < d; ++j) {
    kmin[j] = static_cast<long>(std::floor((lo[j] - pad - center[j]) / cell_size));
    kmax[j] = static_cast<long>(std::ceil((hi[j] + pad - center[j]) / cell_size));
    if (kmin[j] > 0 || kmax[j] < 0) {
      throw InternalError("occupancy grid bounds exclude the centre");
    }
  }
  return OccupancyGrid(std::vector<double>(center.begin(), center.end()),
                       cell_size, std::move(kmin), std::move(kmax));
}

namespace {

// Index range of cell centres c with |c - y| <= reach along one axis, clipped
// to [0, extent).
bool AxisRange(double y, double reach, double origin, double cell, long kmin,
               long extent, long& first, long& last) {
  const double a = std::ceil((y - reach - origin) / cell) - double(kmin);
  const double b = std::floor((y + reach - origin) / cell) - double(kmin);
  first = static_cast<long>(std::max(a, 0.0));
  last = static_cast<long>(std::min(b, double(extent - 1)));
  return a <= b && first <= last;
}

}  // namespace

void RasterizeDilated(OccupancyGrid& grid, const PointSet& cloud,
                      double dilation, Norm norm) {
  const std::size_t d = static_cast<std::size_t>(grid.dim());
  const double cell = grid.cell_size();
  // Err on the side of covering: a centre at distance exactly D (up to
  // rounding) is treated as covered.
  const double reach = dilation + 1e-12 * (dilation + cell);
  const auto& ext = grid.extent();
  const auto& kmin = grid.kmin();
  const auto& origin = grid.origin();

  // Difference array with one extra slot per axis.
  std::vector<std::size_t> dstride(d);
  std::size_t total = 1;
  for (std::size_t j = d; j-- > 0;) {
    dstride[j] = total;
    total *= static_cast<std::size_t>(ext[j] + 1);
  }
  std::vector<std::int32_t> diff(total, 0);

  std::vector<long> first(d), last(d);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto y = cloud.point(i);
    if (norm == Norm::kLinf || d == 1) {
      bool any = true;
      for (std::size_t j = 0; j < d && any; ++j) {
        any = AxisRange(y[j], reach, origin[j], cell, kmin[j], ext[j], first[j],
                        last[j]);
      }
      if (!any) continue;
      // 2^d corners of the box [first, last + 1).
      for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
        std::size_t flat = 0;
        int parity = 0;
        for (std::size_t j = 0; j < d; ++j) {
          if (mask & (std::size_t{1} << j)) {
            flat += static_cast<std::size_t>(last[j] + 1) * dstride[j];
            ++parity;
          } else {
            flat += static_cast<std::size_t>(first[j]) * dstride[j];
          }
        }
        diff[flat] += (parity % 2 == 0) ? 1 : -1;
      }
    } else {
      // l2: walk the rows of the leading axes, one interval per row on the
      // last axis.
      bool any = true;
      for (std::size_t j = 0; j + 1 < d && any; ++j) {
        any = AxisRange(y[j], reach, origin[j], cell, kmin[j], ext[j], first[j],
                        last[j]);
      }
      if (!any) continue;
      std::vector<long> k(first.begin(), first.end() - 1);
      while (true) {
        double used = 0.0;
        std::size_t row = 0;
        for (std::size_t j = 0; j + 1 < d; ++j) {
          const double off = origin[j] + double(kmin[j] + k[j]) * cell - y[j];
          used += off * off;
          row += static_cast<std::size_t>(k[j]) * dstride[j];
        }
        const double rem = reach * reach - used;
        long a = 0, b = 0;
        if (rem >= 0.0 &&
            AxisRange(y[d - 1], std::sqrt(rem), origin[d - 1], cell,
                      kmin[d - 1], ext[d - 1], a, b)) {
          diff[row + static_cast<std::size_t>(a)] += 1;
          diff[row + static_cast<std::size_t>(b + 1)] -= 1;
        }
        std::size_t j = 0;
        for (; j + 1 < d; ++j) {
          if (k[j] < last[j]) {
            ++k[j];
            break;
          }
          k[j] = first[j];
        }
        if (j + 1 == d) break;
      }
    }
  }

  // Prefix sums: every axis for the box stamps, only the last for l2 rows.
  const std::size_t first_axis = (norm == Norm::kLinf || d == 1) ? 0 : d - 1;
  for (std::size_t axis = first_axis; axis < d; ++axis) {
    const std::size_t len = static_cast<std::size_t>(ext[axis] + 1);
    const std::size_t s = dstride[axis];
    for (std::size_t flat = 0; flat < total; ++flat) {
      if ((flat / s) % len == 0) continue;
      diff[flat] += diff[flat - s];
    }
  }

  std::vector<long> k(d);
  auto& cells = grid.raw();
  for (std::size_t f = 0; f < cells.size(); ++f) {
    grid.Unflatten(f, k);
    std::size_t df = 0;
    for (std::size_t j = 0; j < d; ++j) {
      df += static_cast<std::size_t>(k[j]) * dstride[j];
    }
    if (diff[df] > 0) cells[f] = 1;
  }
}

void RasterizeRaw(OccupancyGrid& grid, const PointSet& cloud) {
  const std::size_t d = static_cast<std::size_t>(grid.dim());
  std::vector<long> k(d);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto y = cloud.point(i);
    bool inside = true;
    for (std::size_t j = 0; j < d; ++j) {
      k[j] = std::lround((y[j] - grid.origin()[j]) / grid.cell_size()) -
             grid.kmin()[j];
      if (k[j] < 0 || k[j] >= grid.extent()[j]) inside = false;
    }
    if (inside) grid.set_covered(grid.Flatten(k), true);
  }
}

InradiusEstimate Inradius(const PointSet& cloud, std::span<const double> center,
                          double dilation, double cell_size, Norm norm) {
  if (cloud.size() == 0) throw InputError("inradius: empty cloud");
  if (static_cast<int>(center.size()) != cloud.dim) {
    throw InputError("inradius: centre dimension does not match cloud");
  }
  if (cloud.dim > 3) {
    throw InputError("inradius: unsupported dimension " +
                     std::to_string(cloud.dim) + " (max 3)");
  }
  if (!(dilation >= 0.0)) throw InputError("inradius: dilation must be >= 0");
  if (!(cell_size > 0.0)) throw InputError("inradius: cell size must be > 0");

  InradiusEstimate est;
  est.center.assign(center.begin(), center.end());
  est.provenance.dilation = dilation;
  est.provenance.cell_size = cell_size;

  if (cloud.dim == 1) {
    const auto [lo, hi] =
        std::minmax_element(cloud.coords.begin(), cloud.coords.end());
    const double c = center[0];
    est.lower = std::max(0.0, std::min(*hi - c, c - *lo));
    est.upper = std::max(0.0, std::min(*hi + dilation - c, c - (*lo - dilation)));
    est.provenance.method = "interval";
    est.provenance.lower_rigorous = true;
    est.provenance.upper_rigorous = true;
    return est;
  }

  OccupancyGrid dilated = MakeGrid(cloud, center, dilation, cell_size);
  OccupancyGrid raw = dilated;
  RasterizeDilated(dilated, cloud, dilation, norm);
  est.upper = dilated.NearestExteriorDistance(norm);
  RasterizeRaw(raw, cloud);
  const double slack = cell_size * std::sqrt(double(cloud.dim));
  est.lower = std::clamp(raw.NearestExteriorDistance(norm) - slack, 0.0,
                         est.upper);
  est.provenance.method = "grid";
  est.provenance.lower_rigorous = false;
  est.provenance.upper_rigorous = true;
  return est;
}

}  // namespace openness
