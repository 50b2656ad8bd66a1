#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace qspcat {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

double hermiticity_error(const Mat& a);
double min_eigenvalue(const Mat& hermitian);
bool is_unitary(const Mat& u, double tol);

// Nearest PSD matrix: eigenvalues clipped at zero, Hermitian part enforced.
Mat psd_project(const Mat& hermitian);

// Factors a PSD matrix as X = L^H L with L lower triangular and real
// nonnegative diagonal (reverse-order Gram-Schmidt on a square root factor).
// Rows of L beyond the numerical rank come out zero. Throws NumericError if
// X is indefinite beyond `psd_tol`.
Mat gram_lower_factor(const Mat& x, double psd_tol);

// Extends k orthonormal-ish columns (d x k, k <= d) to a full d x d unitary.
// Completion columns are chosen greedily from the standard basis (largest
// residual first), so the result is deterministic.
Mat complete_to_unitary(const Mat& columns);

// Unitary U minimizing ||U*famB - famA||_F (orthogonal Procrustes). Both
// families are d x k with equal Gram matrices up to tolerance; on the span of
// famB the map is exact to that tolerance.
Mat procrustes_unitary(const Mat& fam_a, const Mat& fam_b);

// Roots of sum_k coeffs[k] z^k via the companion matrix, with a few Newton
// polishing steps. Leading zero coefficients must already be trimmed.
std::vector<Complex> polynomial_roots(const Vec& coeffs);

std::vector<double> torus_angles(int grid_per_axis);

}  // namespace qspcat
