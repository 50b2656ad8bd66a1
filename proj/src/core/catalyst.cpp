#include "core/catalyst.hpp"

#include <cmath>

#include "core/protocol.hpp"

namespace qspcat {
namespace {

// <tau_k, tau_h> with out-of-range indices read as zero.
Complex tau_inner(const PolyVector& tau, int k, int h) {
  if (k < 0 || h < 0) return 0.0;
  return tau.coeff({k}).dot(tau.coeff({h}));
}

}  // namespace

CatalystMatrix catalyst_gram(const PolyVector& tau, const Config& cfg, int window) {
  if (tau.num_vars() != 1)
    throw NumericError("catalyst_gram: univariate targets only");
  const int deg = tau.is_zero() ? 0 : tau.degree(0);
  const auto norm_rep = sup_norm_check(tau, 4 * deg + 5, 1.0, 1e-7, true);
  if (!norm_rep.pass)
    throw NumericError("catalyst_gram: tau is not a normalized polynomial state "
                       "(||tau|| in [" + std::to_string(norm_rep.min_norm) + ", " +
                       std::to_string(norm_rep.max_norm) + "] on the torus)");
  const int n = std::max(window, deg);
  CatalystMatrix cm;
  cm.n = n;
  cm.x = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    for (int h = k; h < n; ++h) {
      Complex s = 0.0;
      for (int j = 0; j <= std::min(k, h); ++j) {
        if (k - j == 0 && h - j == 0) s += 1.0;
        s -= tau_inner(tau, k - j, h - j);
      }
      cm.x(k, h) = s;
      cm.x(h, k) = std::conj(s);
    }
  }
  const double psd_slack = cfg.psd_tol * std::max(n, 1);
  const double lo = min_eigenvalue(cm.x);
  if (lo < -psd_slack)
    throw NumericError("catalyst_gram: displacement solution is indefinite "
                       "(min eigenvalue " + std::to_string(lo) +
                       "); tau is not a valid normalized polynomial state");
  const auto rep = verify_displacement(cm, tau, 1e-9);
  if (!rep.pass)
    throw NumericError("catalyst_gram: closed-form X fails the displacement "
                       "check (residual " + std::to_string(rep.max_residual) + ")");
  return cm;
}

DisplacementReport verify_displacement(const CatalystMatrix& x, const PolyVector& tau,
                                       double tol, bool partial) {
  const int deg = tau.is_zero() ? 0 : tau.degree(0);
  const int n = std::max(x.n, deg);
  DisplacementReport rep;
  rep.residual = Mat::Zero(n + 1, n + 1);
  auto entry = [&](int k, int h) -> Complex {
    if (k < 0 || h < 0 || k >= x.n || h >= x.n) return 0.0;
    return x.x(k, h);
  };
  for (int k = 0; k <= n; ++k) {
    for (int h = 0; h <= n; ++h) {
      const Complex lhs = ((k == 0 && h == 0) ? 1.0 : 0.0) - tau_inner(tau, k, h);
      rep.residual(k, h) = lhs - (entry(k, h) - entry(k - 1, h - 1));
    }
  }
  rep.max_residual = rep.residual.cwiseAbs().maxCoeff();
  rep.residual_min_eig = min_eigenvalue(rep.residual);
  rep.pass = partial ? rep.residual_min_eig >= -tol : rep.max_residual <= tol;
  return rep;
}

Catalyst catalyst_from_gram(const CatalystMatrix& x, const Config& cfg) {
  const Mat l = gram_lower_factor(x.x, cfg.psd_tol * std::max(x.n, 1));
  const double err = x.n == 0 ? 0.0 : (l.adjoint() * l - x.x).cwiseAbs().maxCoeff();
  if (err > 1e-9)
    throw NumericError("catalyst_from_gram: factorization residual " +
                       std::to_string(err));
  Catalyst v;
  for (int k = 0; k < x.n; ++k)
    v.parts.push_back(PolyVector::scalar_univariate(l.row(k).head(k + 1).transpose()));
  return v;
}

Catalyst scale_catalyst(const Catalyst& v, double c) {
  if (c <= 0.0 || c > 1.0)
    throw NumericError("scale_catalyst: c must lie in (0, 1]");
  Catalyst out;
  for (const auto& part : v.parts) out.parts.push_back(part.scaled(c));
  return out;
}

Catalyst catalyst_from_protocol(const Protocol& p, const Config& cfg) {
  p.validate(cfg.unitarity_tol);
  PolyVector state(p.num_vars, p.dim);
  state.set_coeff(MultiIndex(p.num_vars, 0), p.unitaries[0].col(0));
  Catalyst v;
  for (int step = 0; step < p.length(); ++step) {
    const auto& symbols = p.layers[step].symbols;
    std::vector<int> oracle_rows;
    for (int r = 0; r < p.dim; ++r)
      if (symbols[r] != 0) oracle_rows.push_back(r);
    // Oracle-subspace projection of the pre-oracle state.
    PolyVector part(p.num_vars, std::max<int>(1, oracle_rows.size()));
    for (const auto& [k, vec] : state.coeffs()) {
      Vec sub = Vec::Zero(std::max<int>(1, oracle_rows.size()));
      for (std::size_t i = 0; i < oracle_rows.size(); ++i) sub[i] = vec[oracle_rows[i]];
      part.set_coeff(k, sub);
    }
    v.parts.push_back(part);

    // Advance: signal layer, then the next processing operator.
    PolyVector advanced(p.num_vars, p.dim);
    for (const auto& [k, vec] : state.coeffs()) {
      for (int r = 0; r < p.dim; ++r) {
        if (vec[r] == Complex(0.0)) continue;
        MultiIndex k2 = k;
        if (symbols[r] != 0) k2[symbols[r] - 1] += 1;
        Vec unit = Vec::Zero(p.dim);
        unit[r] = vec[r];
        advanced.add_coeff(k2, unit);
      }
    }
    PolyVector next(p.num_vars, p.dim);
    for (const auto& [k, vec] : advanced.coeffs())
      next.set_coeff(k, p.unitaries[step + 1] * vec);
    state = next;
  }
  return v;
}

double catalyst_objective(const Catalyst& v, int grid_per_axis) {
  if (v.parts.empty()) return 0.0;
  int maxdeg = 0;
  for (const auto& part : v.parts)
    for (int d : part.degrees()) maxdeg = std::max(maxdeg, d);
  if (grid_per_axis == 0) grid_per_axis = 4 * maxdeg + 5;
  const PolyVector stacked = PolyVector::stack(v.parts);
  const auto rep = sup_norm_check(stacked, grid_per_axis, 0.0, 1e300, false);
  return rep.max_norm * rep.max_norm;
}

Mat catalyst_coefficient_gram(const Catalyst& v) {
  if (v.parts.empty()) return Mat::Zero(0, 0);
  const PolyVector stacked = PolyVector::stack(v.parts);
  if (stacked.num_vars() != 1)
    throw NumericError("catalyst_coefficient_gram: univariate catalysts only");
  const int n = static_cast<int>(v.parts.size());
  std::vector<Vec> family;
  for (int k = 0; k < n; ++k) family.push_back(stacked.coeff({k}));
  return coefficient_gram(family).entries;
}

}  // namespace qspcat
