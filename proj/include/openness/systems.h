#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace openness {

/// Norm used on both the product space R^n x R^m and the codomain R^n.
enum class Norm { kLinf, kL2 };

std::string_view ToString(Norm norm);

/// Accepts "linf"/"ellinf"/"inf" and "l2"/"ell2"/"2".
Norm ParseNorm(std::string_view text);

double VectorNorm(std::span<const double> v, Norm norm);

/// One monomial c * z^alpha over z = (x_1..x_n, u_1..u_m).
struct Term {
  double coeff{};
  std::vector<int> exponents;

  bool operator==(const Term&) const = default;
};

/// Multivariate polynomial map f: R^n x R^m -> R^n stored term by term.
///
/// Construction canonicalises each component: duplicate multi-indices are
/// merged into their first occurrence by summing coefficients and terms whose
/// coefficient becomes exactly zero are dropped. Term order is otherwise kept,
/// and evaluation sums in that order so results are reproducible bit for bit.
///
/// A nonzero constant term is allowed here (the affine catalogue entries need
/// it); code that measures openness at the origin calls
/// RequireEquilibriumAtOrigin() first.
class PolynomialSystem {
 public:
  PolynomialSystem(int state_dim, int control_dim,
                   std::vector<std::vector<Term>> components);

  int state_dim() const { return state_dim_; }
  int control_dim() const { return control_dim_; }
  int input_dim() const { return state_dim_ + control_dim_; }
  const std::vector<std::vector<Term>>& components() const {
    return components_;
  }

  void Evaluate(std::span<const double> z, std::span<double> out) const;
  Eigen::VectorXd Evaluate(const Eigen::VectorXd& z) const;

  bool VanishesAtOrigin() const;

  /// Throws ValidationError naming the first component with a constant term.
  void RequireEquilibriumAtOrigin() const;

  /// Indices of variables that appear with positive exponent in some term.
  std::vector<int> ActiveVariables() const;

  /// True when every term has total degree exactly one (f(z) = A z).
  bool IsLinear() const;

  /// Coefficient matrix A (n x (n+m)) of the degree-one terms.
  Eigen::MatrixXd LinearPart() const;

  /// Entrywise bounds B(i,j) >= |d f_i / d z_j| on {|z_k| <= radius for all k}.
  Eigen::MatrixXd PartialDerivativeBounds(double radius) const;

  /// The map w -> f(center + w) - f(center), expanded back into monomials.
  PolynomialSystem Recentered(std::span<const double> center) const;

  bool operator==(const PolynomialSystem&) const = default;

 private:
  int state_dim_;
  int control_dim_;
  std::vector<std::vector<Term>> components_;
};

/// Black-box system for the non-polynomial catalogue entries.
struct SmoothSystem {
  std::string name;
  int state_dim{};
  int control_dim{};
  std::function<void(std::span<const double>, std::span<double>)> evaluate;
  /// Lipschitz constant of f on the closed ball of the given radius (valid in
  /// both supported norms).
  std::function<double(double)> lipschitz;
  /// Largest radius for which `lipschitz` is valid.
  double max_radius = std::numeric_limits<double>::infinity();
  /// Variables f actually depends on; empty means all of them.
  std::vector<int> active_variables;

  int input_dim() const { return state_dim + control_dim; }
};

using System = std::variant<PolynomialSystem, SmoothSystem>;

int StateDim(const System& sys);
int InputDim(const System& sys);

/// Throws InputError when z.size() != n+m.
Eigen::VectorXd Evaluate(const System& sys, const Eigen::VectorXd& z);

/// Unchecked fast path used by the point-cloud code.
void EvaluateInto(const System& sys, std::span<const double> z,
                  std::span<double> out);

std::vector<int> ActiveVariables(const System& sys);

/// Lipschitz constant of f on the closed `radius` ball about the origin.
///
/// Each partial derivative is bounded by sum |c| * alpha_j * radius^(|alpha|-1)
/// and the resulting nonnegative matrix B is reduced to an operator-norm bound:
/// the maximum row sum for l-infinity, the spectral norm of B for l2 (valid
/// because |J| <= B entrywise implies ||J||_2 <= ||B||_2).
double LipschitzBound(const PolynomialSystem& sys, double radius, Norm norm);
double LipschitzBound(const System& sys, double radius, Norm norm);

// Catalogue -----------------------------------------------------------------

struct CatalogEntry {
  std::string name;
  std::string description;
};

/// Built-in systems: cubic_scalar, cubic2d, unicycle, affine1d, affine2d,
/// identity_<n>, counterexample_<p> (odd p >= 3). "identity:n" and
/// "counterexample:p" are accepted as aliases.
System Builtin(std::string_view name);
std::vector<CatalogEntry> BuiltinCatalog();

/// Closed-loop scalar map x -> -x^p (odd p >= 3).
PolynomialSystem CounterexampleMap(int p);

// Descriptor files ------------------------------------------------------------

/// Parses the JSON descriptor format. Throws ParseError with line and field
/// information, ValidationError when some component has a constant term.
PolynomialSystem ParseDescriptor(std::string_view text);
PolynomialSystem LoadDescriptor(const std::filesystem::path& path);
std::string SaveDescriptor(const PolynomialSystem& sys);
void WriteDescriptor(const PolynomialSystem& sys,
                     const std::filesystem::path& path);

}  // namespace openness
