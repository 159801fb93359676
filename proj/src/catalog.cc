#include <charconv>
#include <cmath>
#include <optional>

#include "openness/errors.h"
#include "openness/systems.h"

namespace openness {
namespace {

Term T(double c, std::vector<int> e) { return Term{c, std::move(e)}; }

PolynomialSystem CubicScalar() {
  return PolynomialSystem(1, 1, {{T(1, {3, 0}), T(1, {0, 3})}});
}

// z = (x1, x2, u)
PolynomialSystem Cubic2d() {
  return PolynomialSystem(
      2, 1,
      {{T(1, {2, 0, 0}), T(1, {0, 2, 0}), T(1, {0, 1, 0})},
       {T(1, {1, 1, 0}), T(1, {0, 2, 0}), T(1, {0, 0, 3})}});
}

// z = (x, y, theta, u1, u2); f = (u1 cos theta, u1 sin theta, u2).
SmoothSystem Unicycle() {
  SmoothSystem s;
  s.name = "unicycle";
  s.state_dim = 3;
  s.control_dim = 2;
  s.evaluate = [](std::span<const double> z, std::span<double> out) {
    out[0] = z[3] * std::cos(z[2]);
    out[1] = z[3] * std::sin(z[2]);
    out[2] = z[4];
  };
  // The Jacobian's nontrivial block has singular values |u1| and 1, so
  // sqrt(1 + R^2) bounds the l2 gain and 2 sqrt(1 + R^2) >= 1 + R covers the
  // l-infinity row sums as well.
  s.lipschitz = [](double r) { return 2.0 * std::sqrt(1.0 + r * r); };
  s.active_variables = {2, 3, 4};
  return s;
}

PolynomialSystem Affine1d() {
  return PolynomialSystem(1, 0, {{T(2, {1}), T(3, {0})}});
}

PolynomialSystem Affine2d() {
  return PolynomialSystem(2, 0,
                          {{T(2, {1, 0}), T(3, {0, 0})},
                           {T(1, {0, 1}), T(4, {0, 0})}});
}

PolynomialSystem Identity(int n) {
  if (n < 1) throw InputError("identity: dimension must be positive");
  std::vector<std::vector<Term>> comps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    e[static_cast<std::size_t>(i)] = 1;
    comps[static_cast<std::size_t>(i)].push_back(T(1, std::move(e)));
  }
  return PolynomialSystem(n, 0, std::move(comps));
}

// Parses "<stem>_<k>", "<stem>:<k>" and "<stem>_p:<k>" / "<stem>_p(<k>)".
std::optional<int> ParseIndexed(std::string_view name, std::string_view stem) {
  if (!name.starts_with(stem)) return std::nullopt;
  std::string_view rest = name.substr(stem.size());
  if (rest.starts_with("_p")) rest.remove_prefix(2);
  if (rest.empty()) return std::nullopt;
  if (rest.front() == '_' || rest.front() == ':' || rest.front() == '(') {
    rest.remove_prefix(1);
  } else {
    return std::nullopt;
  }
  if (rest.ends_with(")")) rest.remove_suffix(1);
  int value = 0;
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), value);
  if (ec != std::errc() || ptr != rest.data() + rest.size()) {
    throw InputError("malformed index in '" + std::string(name) + "'");
  }
  return value;
}

}  // namespace

PolynomialSystem CounterexampleMap(int p) {
  if (p < 3 || p % 2 == 0) {
    throw InputError("counterexample_p requires an odd integer p >= 3, got " +
                     std::to_string(p));
  }
  return PolynomialSystem(1, 0, {{T(-1, {p})}});
}

System Builtin(std::string_view name) {
  if (name == "cubic_scalar") return CubicScalar();
  if (name == "cubic2d") return Cubic2d();
  if (name == "unicycle") return Unicycle();
  if (name == "affine1d") return Affine1d();
  if (name == "affine2d") return Affine2d();
  if (auto n = ParseIndexed(name, "identity")) return Identity(*n);
  if (auto p = ParseIndexed(name, "counterexample")) return CounterexampleMap(*p);
  throw CatalogError("unknown built-in system '" + std::string(name) + "'");
}

std::vector<CatalogEntry> BuiltinCatalog() {
  return {
      {"cubic_scalar",
       "f(x,u) = x^3 + u^3; openness rate 2 r^3 in the max norm, r^3 in l2"},
      {"cubic2d",
       "f(x,u) = [x1^2 + x2^2 + x2; x1 x2 + x2^2 + u^3]; stabilisable only by "
       "a non-C1 feedback (see closed loop threshold_alpha)"},
      {"unicycle",
       "x' = u1 cos(theta), y' = u1 sin(theta), theta' = u2; images of small "
       "balls have empty interior, so the rate is 0 below radius pi/2"},
      {"affine1d", "f(x) = 2x + 3; norm-estimate example at x* = 1, K = [0,2]"},
      {"affine2d",
       "f(x) = diag(2,1) x + (3,4); norm-estimate example on the unit disk"},
      {"identity_n", "f(x) = x on R^n; rate g(r) = r"},
      {"counterexample_p",
       "closed-loop map -x^p (odd p >= 3) of x' = x + u under u = -x - x^p; "
       "inverse growth r^(1/p) defeats any fixed bound H(r)"},
  };
}

}  // namespace openness
