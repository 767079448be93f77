#include "trc/svd.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace trc {

Eigen::Index truncation_rank(const Vector& sv, double delta, Eigen::Index rows, Eigen::Index cols) {
  const Eigen::Index k = sv.size();
  if (k == 0) return 0;
  const double noise = sv(0) * double(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
  const double budget = delta * delta + double(std::min(rows, cols)) * noise * noise;
  double tail = 0.0;
  Eigen::Index r = k;
  // grow the discarded tail from the back while it fits the budget
  while (r > 1) {
    const double next = tail + sv(r - 1) * sv(r - 1);
    if (next > budget) break;
    tail = next;
    --r;
  }
  return r;
}

TruncatedSVD truncated_svd(const Matrix& a, double delta) {
  if (a.size() == 0) throw std::invalid_argument("truncated_svd: empty matrix");
  if (!a.allFinite()) throw std::invalid_argument("truncated_svd: non-finite entries");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("truncated_svd: delta must be finite and >= 0");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const Eigen::Index r = truncation_rank(sv, delta, a.rows(), a.cols());

  TruncatedSVD out;
  out.u = svd.matrixU().leftCols(r);
  out.s = sv.head(r);
  out.vt = svd.matrixV().leftCols(r).transpose();
  out.discarded_energy = sv.tail(sv.size() - r).squaredNorm();
  return out;
}

}  // namespace trc
