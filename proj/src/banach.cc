#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "openness/rate.h"

namespace openness {

double BanachConstant(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  if (n == 0) return 0.0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < n) return 0.0;

  // Inverse power iteration on the SPD Gram matrix A A^T; its smallest
  // eigenvalue is sigma_min^2.
  const Eigen::MatrixXd gram = a * a.transpose();
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i) = 1.0 + 0.5 * std::sin(double(i) + 1.0);  // fixed start vector
  }
  x.normalize();
  double lambda = x.dot(gram * x);
  for (int it = 0; it < 10'000; ++it) {
    Eigen::VectorXd y = ldlt.solve(x);
    y.normalize();
    const double next = y.dot(gram * y);
    const bool done = std::abs(next - lambda) <= 1e-10 * std::abs(next) &&
                      (gram * y - next * y).norm() <= 1e-10 * gram.norm();
    x = y;
    lambda = next;
    if (done) break;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

}  // namespace openness
