#include "core/linalg.hpp"

#include <cmath>
#include <numbers>

#include "core/config.hpp"

namespace qspcat {

double hermiticity_error(const Mat& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Mat& hermitian) {
  if (hermitian.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_unitary(const Mat& u, double tol) {
  if (u.rows() != u.cols()) return false;
  Mat d = u.adjoint() * u - Mat::Identity(u.cols(), u.cols());
  return d.cwiseAbs().maxCoeff() <= tol;
}

Mat psd_project(const Mat& hermitian) {
  Mat h = 0.5 * (hermitian + hermitian.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

Mat gram_lower_factor(const Mat& x, double psd_tol) {
  const Eigen::Index n = x.rows();
  Mat l = Mat::Zero(n, n);
  if (n == 0) return l;
  if (hermiticity_error(x) > 1e-10)
    throw NumericError("gram_lower_factor: matrix is not Hermitian");

  // Fast path: X = L^H L is a Cholesky factorization of the index-reversed
  // matrix. Backward stable, so two nearby Gram matrices factor nearby.
  {
    Mat rev(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c) rev(r, c) = x(n - 1 - r, n - 1 - c);
    Eigen::LLT<Mat> llt(rev);
    if (llt.info() == Eigen::Success) {
      Mat lr = llt.matrixL();
      for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c <= r; ++c)
          l(r, c) = std::conj(lr(n - 1 - c, n - 1 - r));
      for (Eigen::Index k = 0; k < n; ++k) {
        const Complex d = l(k, k);
        if (std::abs(d) > 0.0) l.row(k) *= std::conj(d) / std::abs(d);
      }
      return l;
    }
  }

  // Rank-deficient fallback: clipped eigendecomposition, then a triangular
  // re-orthogonalization of the square-root factor.
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (x + x.adjoint()));
  const double lo = es.eigenvalues().minCoeff();
  if (lo < -psd_tol)
    throw NumericError("gram_lower_factor: matrix is indefinite (min eigenvalue " +
                       std::to_string(lo) + ")");
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  // Square-root factor W with W^H W = X; its columns realize the vectors
  // whose Gram matrix is X.
  Mat w = ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();

  // Gram-Schmidt over columns in reverse order builds the lower-triangular
  // factor: column j must lie in the span of basis vectors j..n-1.
  const double scale = std::sqrt(std::max(x.diagonal().real().maxCoeff(), 1e-300));
  Mat q = Mat::Zero(n, n);
  std::vector<bool> live(n, false);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    Vec r = w.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = j + 1; k < n; ++k) {
        if (!live[k]) continue;
        r -= q.col(k) * (q.col(k).dot(r));
      }
    }
    const double nr = r.norm();
    if (nr > 1e-12 * scale) {
      q.col(j) = r / nr;
      live[j] = true;
    }
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!live[k]) continue;
    for (Eigen::Index j = 0; j <= k; ++j) l(k, j) = q.col(k).dot(w.col(j));
  }
  // Rotate row phases so diagonal entries are real nonnegative.
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex d = l(k, k);
    if (std::abs(d) > 0.0) l.row(k) *= std::conj(d) / std::abs(d);
  }
  return l;
}

Mat complete_to_unitary(const Mat& columns) {
  const Eigen::Index d = columns.rows();
  const Eigen::Index k = columns.cols();
  if (k > d) throw NumericError("complete_to_unitary: more columns than rows");
  Mat u(d, d);
  Eigen::Index filled = 0;
  for (Eigen::Index j = 0; j < k; ++j) {
    Vec c = columns.col(j);
    for (Eigen::Index i = 0; i < filled; ++i) c -= u.col(i) * (u.col(i).dot(c));
    const double n = c.norm();
    if (n < 1e-10)
      throw NumericError("complete_to_unitary: given columns are dependent");
    u.col(filled++) = c / n;
  }
  std::vector<bool> used(d, false);
  while (filled < d) {
    Eigen::Index best = -1;
    double best_norm = -1.0;
    Vec best_vec;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (used[j]) continue;
      Vec c = Vec::Unit(d, j);
      for (Eigen::Index i = 0; i < filled; ++i) c -= u.col(i) * (u.col(i).dot(c));
      const double n = c.norm();
      if (n > best_norm) {
        best_norm = n;
        best = j;
        best_vec = c;
      }
    }
    used[best] = true;
    u.col(filled++) = best_vec / best_norm;
  }
  return u;
}

Mat procrustes_unitary(const Mat& fam_a, const Mat& fam_b) {
  if (fam_a.rows() != fam_b.rows() || fam_a.cols() != fam_b.cols())
    throw NumericError("procrustes_unitary: family shapes differ");
  Mat m = fam_a * fam_b.adjoint();
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

std::vector<Complex> polynomial_roots(const Vec& coeffs) {
  Eigen::Index deg = coeffs.size() - 1;
  if (deg < 1) return {};
  if (std::abs(coeffs[deg]) == 0.0)
    throw NumericError("polynomial_roots: leading coefficient is zero");
  Mat companion = Mat::Zero(deg, deg);
  for (Eigen::Index i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < deg; ++i) companion(i, deg - 1) = -coeffs[i] / coeffs[deg];
  Eigen::ComplexEigenSolver<Mat> es(companion);
  std::vector<Complex> roots(es.eigenvalues().data(), es.eigenvalues().data() + deg);

  auto horner = [&](Complex z, Complex& p, Complex& dp) {
    p = coeffs[deg];
    dp = 0.0;
    for (Eigen::Index i = deg - 1; i >= 0; --i) {
      dp = dp * z + p;
      p = p * z + coeffs[i];
    }
  };
  const double scale = coeffs.cwiseAbs().maxCoeff();
  for (auto& r : roots) {
    for (int it = 0; it < 3; ++it) {
      Complex p, dp;
      horner(r, p, dp);
      // Once the value sits at rounding level, or near a multiple root where
      // p/dp is a ratio of noise, leave the eigenvalue alone.
      if (std::abs(p) < 1e-13 * scale || std::abs(dp) < 1e-10 * scale) break;
      Complex step = p / dp;
      if (std::abs(step) > 0.1 * (1.0 + std::abs(r))) break;
      r -= step;
    }
  }
  // Deterministic order: by modulus, then argument.
  std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma < mb;
    return std::arg(a) < std::arg(b);
  });
  return roots;
}

std::vector<double> torus_angles(int grid_per_axis) {
  std::vector<double> angles(grid_per_axis);
  for (int i = 0; i < grid_per_axis; ++i)
    angles[i] = 2.0 * std::numbers::pi * i / grid_per_axis;
  return angles;
}

}  // namespace qspcat
