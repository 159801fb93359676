#include "openness/systems.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <Eigen/SVD>

#include "openness/errors.h"

namespace openness {

std::string_view ToString(Norm norm) {
  return norm == Norm::kLinf ? "linf" : "l2";
}

Norm ParseNorm(std::string_view text) {
  if (text == "linf" || text == "ellinf" || text == "inf") return Norm::kLinf;
  if (text == "l2" || text == "ell2" || text == "2") return Norm::kL2;
  throw InputError("unknown norm '" + std::string(text) +
                   "' (expected linf or l2)");
}

double VectorNorm(std::span<const double> v, Norm norm) {
  double acc = 0.0;
  if (norm == Norm::kLinf) {
    for (double x : v) acc = std::max(acc, std::abs(x));
    return acc;
  }
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

namespace {

double IntPow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

int TotalDegree(const Term& t) {
  int d = 0;
  for (int e : t.exponents) d += e;
  return d;
}

std::vector<Term> Canonicalize(std::vector<Term> terms) {
  std::vector<Term> out;
  out.reserve(terms.size());
  for (auto& t : terms) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Term& o) {
      return o.exponents == t.exponents;
    });
    if (it == out.end()) {
      out.push_back(std::move(t));
    } else {
      it->coeff += t.coeff;
    }
  }
  std::erase_if(out, [](const Term& t) { return t.coeff == 0.0; });
  return out;
}

}  // namespace

PolynomialSystem::PolynomialSystem(int state_dim, int control_dim,
                                   std::vector<std::vector<Term>> components)
    : state_dim_(state_dim), control_dim_(control_dim) {
  if (state_dim < 1) throw InputError("state_dim must be positive");
  if (control_dim < 0) throw InputError("control_dim must be nonnegative");
  if (static_cast<int>(components.size()) != state_dim) {
    throw InputError("expected " + std::to_string(state_dim) +
                     " components, got " + std::to_string(components.size()));
  }
  const std::size_t width = static_cast<std::size_t>(input_dim());
  components_.reserve(components.size());
  for (std::size_t i = 0; i < components.size(); ++i) {
    for (const auto& t : components[i]) {
      if (t.exponents.size() != width) {
        throw InputError("component " + std::to_string(i) +
                         ": multi-index length " +
                         std::to_string(t.exponents.size()) + " != n+m = " +
                         std::to_string(width));
      }
      for (int e : t.exponents) {
        if (e < 0) {
          throw InputError("component " + std::to_string(i) +
                           ": negative exponent");
        }
      }
      if (!std::isfinite(t.coeff)) {
        throw InputError("component " + std::to_string(i) +
                         ": non-finite coefficient");
      }
    }
    components_.push_back(Canonicalize(std::move(components[i])));
  }
}

void PolynomialSystem::Evaluate(std::span<const double> z,
                                std::span<double> out) const {
  for (std::size_t i = 0; i < components_.size(); ++i) {
    double acc = 0.0;
    for (const auto& t : components_[i]) {
      double v = t.coeff;
      for (std::size_t j = 0; j < t.exponents.size(); ++j) {
        if (t.exponents[j] != 0) v *= IntPow(z[j], t.exponents[j]);
      }
      acc += v;
    }
    out[i] = acc;
  }
}

Eigen::VectorXd PolynomialSystem::Evaluate(const Eigen::VectorXd& z) const {
  if (z.size() != input_dim()) {
    throw InputError("evaluate: point has dimension " +
                     std::to_string(z.size()) + ", expected " +
                     std::to_string(input_dim()));
  }
  Eigen::VectorXd out(state_dim_);
  Evaluate(std::span<const double>(z.data(), z.size()),
           std::span<double>(out.data(), out.size()));
  return out;
}

bool PolynomialSystem::VanishesAtOrigin() const {
  for (const auto& comp : components_) {
    for (const auto& t : comp) {
      if (TotalDegree(t) == 0) return false;
    }
  }
  return true;
}

void PolynomialSystem::RequireEquilibriumAtOrigin() const {
  for (std::size_t i = 0; i < components_.size(); ++i) {
    for (const auto& t : components_[i]) {
      if (TotalDegree(t) == 0) {
        std::ostringstream msg;
        msg << "component " << i << " has constant term " << t.coeff
            << "; f(0,0) must be 0 (translate the equilibrium to the origin)";
        throw ValidationError(msg.str());
      }
    }
  }
}

std::vector<int> PolynomialSystem::ActiveVariables() const {
  std::vector<bool> used(static_cast<std::size_t>(input_dim()), false);
  for (const auto& comp : components_) {
    for (const auto& t : comp) {
      for (std::size_t j = 0; j < t.exponents.size(); ++j) {
        if (t.exponents[j] > 0) used[j] = true;
      }
    }
  }
  std::vector<int> active;
  for (std::size_t j = 0; j < used.size(); ++j) {
    if (used[j]) active.push_back(static_cast<int>(j));
  }
  return active;
}

bool PolynomialSystem::IsLinear() const {
  for (const auto& comp : components_) {
    for (const auto& t : comp) {
      if (TotalDegree(t) != 1) return false;
    }
  }
  return true;
}

Eigen::MatrixXd PolynomialSystem::LinearPart() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(state_dim_, input_dim());
  for (std::size_t i = 0; i < components_.size(); ++i) {
    for (const auto& t : components_[i]) {
      if (TotalDegree(t) != 1) continue;
      for (std::size_t j = 0; j < t.exponents.size(); ++j) {
        if (t.exponents[j] == 1) a(i, j) += t.coeff;
      }
    }
  }
  return a;
}

Eigen::MatrixXd PolynomialSystem::PartialDerivativeBounds(double radius) const {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(state_dim_, input_dim());
  for (std::size_t i = 0; i < components_.size(); ++i) {
    for (const auto& t : components_[i]) {
      const int degree = TotalDegree(t);
      for (std::size_t j = 0; j < t.exponents.size(); ++j) {
        if (t.exponents[j] == 0) continue;
        b(i, j) += std::abs(t.coeff) * t.exponents[j] *
                   IntPow(radius, degree - 1);
      }
    }
  }
  return b;
}

PolynomialSystem PolynomialSystem::Recentered(
    std::span<const double> center) const {
  if (static_cast<int>(center.size()) != input_dim()) {
    throw InputError("recenter: point has wrong dimension");
  }
  const std::size_t width = center.size();
  std::vector<std::vector<Term>> out(components_.size());
  for (std::size_t i = 0; i < components_.size(); ++i) {
    // Keyed by exponent vector; std::map keeps the expansion deterministic.
    std::map<std::vector<int>, double> acc;
    for (const auto& t : components_[i]) {
      // prod_j (c_j + w_j)^a_j = sum_{k <= a} prod_j C(a_j,k_j) c_j^(a_j-k_j)
      // w_j^k_j, enumerated with an odometer over k.
      std::vector<int> k(width, 0);
      while (true) {
        double v = t.coeff;
        for (std::size_t j = 0; j < width; ++j) {
          const int a = t.exponents[j];
          double binom = 1.0;
          for (int q = 0; q < k[j]; ++q) binom = binom * (a - q) / (q + 1);
          v *= binom * IntPow(center[j], a - k[j]);
        }
        bool constant = std::all_of(k.begin(), k.end(),
                                    [](int e) { return e == 0; });
        if (!constant) acc[k] += v;
        std::size_t j = 0;
        for (; j < width; ++j) {
          if (k[j] < t.exponents[j]) {
            ++k[j];
            break;
          }
          k[j] = 0;
        }
        if (j == width) break;
      }
    }
    for (auto& [exps, c] : acc) out[i].push_back(Term{c, exps});
  }
  return PolynomialSystem(state_dim_, control_dim_, std::move(out));
}

int StateDim(const System& sys) {
  return std::visit(
      [](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>,
                                     PolynomialSystem>) {
          return s.state_dim();
        } else {
          return s.state_dim;
        }
      },
      sys);
}

int InputDim(const System& sys) {
  return std::visit([](const auto& s) { return s.input_dim(); }, sys);
}

void EvaluateInto(const System& sys, std::span<const double> z,
                  std::span<double> out) {
  if (const auto* p = std::get_if<PolynomialSystem>(&sys)) {
    p->Evaluate(z, out);
  } else {
    std::get<SmoothSystem>(sys).evaluate(z, out);
  }
}

Eigen::VectorXd Evaluate(const System& sys, const Eigen::VectorXd& z) {
  if (z.size() != InputDim(sys)) {
    throw InputError("evaluate: point has dimension " +
                     std::to_string(z.size()) + ", expected " +
                     std::to_string(InputDim(sys)));
  }
  Eigen::VectorXd out(StateDim(sys));
  EvaluateInto(sys, std::span<const double>(z.data(), z.size()),
               std::span<double>(out.data(), out.size()));
  return out;
}

std::vector<int> ActiveVariables(const System& sys) {
  if (const auto* p = std::get_if<PolynomialSystem>(&sys)) {
    return p->ActiveVariables();
  }
  const auto& s = std::get<SmoothSystem>(sys);
  if (!s.active_variables.empty()) return s.active_variables;
  std::vector<int> all(static_cast<std::size_t>(s.input_dim()));
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<int>(j);
  return all;
}

double LipschitzBound(const PolynomialSystem& sys, double radius, Norm norm) {
  if (!(radius > 0.0)) throw InputError("lipschitz_bound: radius must be > 0");
  const Eigen::MatrixXd b = sys.PartialDerivativeBounds(radius);
  if (b.size() == 0 || b.isZero(0.0)) return 0.0;
  if (norm == Norm::kLinf) return b.rowwise().sum().maxCoeff();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b);
  return svd.singularValues()(0);
}

double LipschitzBound(const System& sys, double radius, Norm norm) {
  if (const auto* p = std::get_if<PolynomialSystem>(&sys)) {
    return LipschitzBound(*p, radius, norm);
  }
  const auto& s = std::get<SmoothSystem>(sys);
  if (!(radius > 0.0)) throw InputError("lipschitz_bound: radius must be > 0");
  if (radius > s.max_radius) {
    throw InputError(s.name + ": Lipschitz constant only valid up to radius " +
                     std::to_string(s.max_radius));
  }
  return s.lipschitz(radius);
}

}  // namespace openness
