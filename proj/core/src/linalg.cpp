#include "sif/linalg.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <cmath>

#include "sif/errors.hpp"

namespace sif {

namespace {

std::atomic<std::uint64_t> g_psd_fallbacks{0};

void require_square_symmetric(const Eigen::MatrixXd& p, const char* who) {
  if (p.rows() != p.cols()) {
    throw DimensionMismatch(std::string(who) + ": matrix is not square");
  }
  if (p.size() == 0) {
    throw DimensionMismatch(std::string(who) + ": matrix is empty");
  }
  const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
  const double skew = (p - p.transpose()).cwiseAbs().maxCoeff();
  if (skew > 1e-8 * scale) {
    throw DimensionMismatch(std::string(who) + ": matrix is not symmetric");
  }
}

}  // namespace

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& p) {
  return 0.5 * (p + p.transpose());
}

LowerTriangularFactor factor_spd(const SpdMatrix& p) {
  require_square_symmetric(p, "factor_spd");
  const Eigen::MatrixXd a = symmetrize(p);
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) {
      throw NotPositiveDefinite("factor_spd: pivot " + std::to_string(j) +
                                " is not positive");
    }
    const double root = std::sqrt(d);
    l(j, j) = root;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / root;
    }
  }
  return l;
}

LowerTriangularFactor factor_psd(const SpdMatrix& p) {
  try {
    return factor_spd(p);
  } catch (const NotPositiveDefinite&) {
    // fall through to the clipped path
  }
  require_square_symmetric(p, "factor_psd");
  const Eigen::MatrixXd a = symmetrize(p);
  if (a.cwiseAbs().maxCoeff() == 0.0) {
    return Eigen::MatrixXd::Zero(a.rows(), a.cols());  // exact zero, no warning
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) {
    throw NotPositiveDefinite("factor_psd: eigendecomposition failed");
  }
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = std::max(ev.cwiseAbs().maxCoeff(), 1.0);
  if (ev.minCoeff() < -1e-8 * top) {
    throw NotPositiveDefinite("factor_psd: matrix is significantly indefinite");
  }
  g_psd_fallbacks.fetch_add(1, std::memory_order_relaxed);
  const Eigen::VectorXd clipped = ev.cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd root = es.eigenvectors() * clipped.asDiagonal();
  return triangularize(root);
}

std::uint64_t psd_fallback_count() noexcept {
  return g_psd_fallbacks.load(std::memory_order_relaxed);
}

void reset_psd_fallback_count() noexcept {
  g_psd_fallbacks.store(0, std::memory_order_relaxed);
}

LowerTriangularFactor triangularize(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  if (m.cols() < n) {
    throw DimensionMismatch("triangularize: need at least as many columns as rows");
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m.transpose());
  Eigen::MatrixXd t =
      qr.matrixQR().topRows(n).triangularView<Eigen::Upper>().toDenseMatrix().transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (t(j, j) < 0.0) t.col(j) = -t.col(j);
  }
  return t;
}

void cholesky_downdate(Eigen::MatrixXd& factor, Eigen::VectorXd u) {
  const Eigen::Index n = factor.rows();
  if (factor.cols() != n || u.size() != n) {
    throw DimensionMismatch("cholesky_downdate: factor and vector sizes differ");
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lkk = factor(k, k);
    const double d = lkk * lkk - u(k) * u(k);
    if (!(d > 0.0)) {
      // A zero diagonal is only acceptable when nothing is being removed there.
      if (d == 0.0 && lkk == 0.0 && u(k) == 0.0) continue;
      throw DowndateFailure("cholesky_downdate: factor would become indefinite");
    }
    const double r = std::sqrt(d);
    const double c = r / lkk;
    const double s = u(k) / lkk;
    factor(k, k) = r;
    for (Eigen::Index i = k + 1; i < n; ++i) {
      factor(i, k) = (factor(i, k) - s * u(i)) / c;
      u(i) = c * u(i) - s * factor(i, k);
    }
  }
}

Eigen::MatrixXd random_orthogonal(int dim, RngStream& rng) {
  if (dim < 1) throw DimensionMismatch("random_orthogonal: dim must be >= 1");
  Eigen::MatrixXd g(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Folding the sign of the R diagonal into Q makes the draw Haar-uniform
  // rather than biased by the QR sign convention.
  for (int j = 0; j < dim; ++j) {
    if (qr.matrixQR()(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

double sample_chi(int dof, RngStream& rng) {
  if (dof < 1) throw std::invalid_argument("sample_chi: dof must be >= 1");
  return std::sqrt(rng.gamma(0.5 * static_cast<double>(dof), 2.0));
}

}  // namespace sif
