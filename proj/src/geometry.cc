#include <algorithm>
#include <cmath>
#include <limits>

#include "openness/errors.h"
#include "openness/geometry.h"
#include "openness/parallel.h"

namespace openness {
namespace {

// Half the number of grid intervals per axis for a requested covering radius.
long HalfCount(int dim, double radius, Norm norm, double spacing) {
  const double per_node = norm == Norm::kLinf
                              ? 2.0 * spacing
                              : 2.0 * spacing / std::sqrt(double(dim));
  const double half = std::ceil(radius / per_node * (1.0 - 1e-12));
  if (!std::isfinite(half) || half > 1e15) return std::numeric_limits<long>::max();
  return std::max(1L, static_cast<long>(half));
}

double SaturatingPow(double base, int dim) {
  double v = 1.0;
  for (int i = 0; i < dim; ++i) v *= base;
  return v;
}

}  // namespace

std::size_t ProjectedNetSize(int dim, double radius, Norm norm, double spacing) {
  const long half = HalfCount(dim, radius, norm, spacing);
  const double count = SaturatingPow(2.0 * double(half) + 1.0, dim);
  if (count >= double(std::numeric_limits<std::size_t>::max())) {
    return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(count);
}

double SpacingForBudget(int dim, double radius, Norm norm,
                        std::size_t max_points) {
  if (dim < 1 || !(radius > 0.0)) {
    throw InputError("spacing_for_budget: need dim >= 1 and radius > 0");
  }
  long per_axis = static_cast<long>(
      std::floor(std::pow(double(max_points), 1.0 / dim) * (1.0 + 1e-12)));
  if (per_axis % 2 == 0) --per_axis;
  const long half = std::max(1L, (per_axis - 1) / 2);
  const double pitch = radius / double(half);
  const double spacing = norm == Norm::kLinf
                             ? pitch / 2.0
                             : pitch * std::sqrt(double(dim)) / 2.0;
  // Nudge up so HalfCount() lands on `half` despite rounding.
  return spacing * (1.0 + 1e-9);
}

BallNet MakeBallNet(int dim, double radius, Norm norm, double target_spacing) {
  if (dim < 1) throw InputError("make_ball_net: dim must be >= 1");
  if (!(radius > 0.0)) throw InputError("make_ball_net: radius must be > 0");
  if (!(target_spacing > 0.0)) {
    throw InputError("make_ball_net: spacing must be > 0");
  }
  const std::size_t projected =
      ProjectedNetSize(dim, radius, norm, target_spacing);
  if (projected > kMaxNetPoints) {
    throw ResourceError("make_ball_net: projected point count " +
                        std::to_string(projected) + " exceeds " +
                        std::to_string(kMaxNetPoints) +
                        "; use a coarser spacing");
  }
  const long half = HalfCount(dim, radius, norm, target_spacing);
  BallNet net;
  net.dim = dim;
  net.radius = radius;
  net.norm = norm;
  net.pitch = radius / double(half);
  net.spacing = norm == Norm::kLinf
                    ? net.pitch / 2.0
                    : net.pitch * std::sqrt(double(dim)) / 2.0;
  net.points.dim = dim;
  net.points.coords.reserve(projected * static_cast<std::size_t>(dim));

  std::vector<long> idx(static_cast<std::size_t>(dim), -half);
  std::vector<double> p(static_cast<std::size_t>(dim));
  while (true) {
    // Coordinates as radius * i / half so the faces land exactly on +-radius.
    for (std::size_t j = 0; j < p.size(); ++j) {
      p[j] = radius * double(idx[j]) / double(half);
    }
    if (norm == Norm::kLinf) {
      net.points.push_back(p);
    } else {
      const double len = VectorNorm(p, Norm::kL2);
      if (len <= radius) {
        net.points.push_back(p);
      } else if (len <= radius + net.spacing) {
        double scale = radius / len;
        for (double& c : p) c *= scale;
        while (VectorNorm(p, Norm::kL2) > radius) {
          scale = std::nextafter(scale, 0.0);
          for (std::size_t j = 0; j < p.size(); ++j) {
            p[j] = radius * double(idx[j]) / double(half) * scale;
          }
        }
        net.points.push_back(p);
      }
    }
    std::size_t j = 0;
    for (; j < idx.size(); ++j) {
      if (idx[j] < half) {
        ++idx[j];
        break;
      }
      idx[j] = -half;
    }
    if (j == idx.size()) break;
  }
  return net;
}

PointSet ImageCloud(const System& sys, const BallNet& net,
                    std::span<const int> active) {
  const int in_dim = InputDim(sys);
  const int out_dim = StateDim(sys);
  if (net.dim != static_cast<int>(active.size())) {
    throw InputError("image_cloud: net dimension does not match coordinates");
  }
  for (int a : active) {
    if (a < 0 || a >= in_dim) throw InputError("image_cloud: bad coordinate");
  }
  const std::size_t count = net.points.size();
  PointSet cloud;
  cloud.dim = out_dim;
  cloud.coords.resize(count * static_cast<std::size_t>(out_dim));
  ParallelFor(count, [&](std::size_t begin, std::size_t end) {
    std::vector<double> z(static_cast<std::size_t>(in_dim), 0.0);
    for (std::size_t i = begin; i < end; ++i) {
      const auto p = net.points.point(i);
      for (std::size_t j = 0; j < active.size(); ++j) {
        z[static_cast<std::size_t>(active[j])] = p[j];
      }
      EvaluateInto(sys, z,
                   std::span<double>(cloud.coords.data() +
                                         i * static_cast<std::size_t>(out_dim),
                                     static_cast<std::size_t>(out_dim)));
    }
  });
  return cloud;
}

PointSet ImageCloud(const System& sys, const BallNet& net) {
  if (net.dim != InputDim(sys)) {
    throw InputError("image_cloud: net dimension " + std::to_string(net.dim) +
                     " != n+m = " + std::to_string(InputDim(sys)));
  }
  std::vector<int> all(static_cast<std::size_t>(net.dim));
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<int>(j);
  return ImageCloud(sys, net, all);
}

double InradiusBoxOracle(const Box& box, std::span<const double> center) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < center.size(); ++j) {
    const double below = center[j] - box.lo[j];
    const double above = box.hi[j] - center[j];
    if (below < 0.0 || above < 0.0) return 0.0;
    best = std::min({best, below, above});
  }
  return best;
}

}  // namespace openness
