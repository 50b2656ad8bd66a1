#include "core/fejer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qspcat {
namespace {

// Coefficients of prod (z - r) for the given root multiset, multiplied
// smallest modulus first.
Vec poly_from_roots(std::vector<Complex> roots) {
  std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma < mb;
    return std::arg(a) < std::arg(b);
  });
  Vec c = Vec::Zero(roots.size() + 1);
  c[0] = 1.0;
  Eigen::Index deg = 0;
  for (const Complex& r : roots) {
    ++deg;
    for (Eigen::Index i = deg; i >= 1; --i) c[i] = c[i - 1] - r * c[i];
    c[0] *= -r;
  }
  return c;
}

// Global phase chosen so the lowest-order nonzero coefficient is real
// positive.
Vec normalize_phase(Vec c) {
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (std::abs(c[i]) > 1e-14) {
      c *= std::conj(c[i]) / std::abs(c[i]);
      break;
    }
  }
  return c;
}

struct OuterFactorization {
  bool gap_is_zero = false;
  std::vector<Complex> q_roots;        // root multiset of the outer Q
  std::vector<Complex> movable_roots;  // strictly outside the circle
  double c0 = 0.0;                     // mean of the gap on T
  RootInventory inventory;
};

Vec build_completion(const std::vector<Complex>& roots, double c0) {
  Vec q = poly_from_roots(roots);
  const double mass = q.squaredNorm();
  return normalize_phase(std::sqrt(c0 / mass) * q);
}

// Newton step of the spectral factorization (Wilson-style): with Q outer and
// zero-free on the circle, the correction u = deltaQ/Q solves u + u* =
// gap/|Q|^2 - 1 on T, so u is the analytic projection with halved mean.
// Quadratic convergence; pushes the root-finding residual to rounding level.
Vec polish_outer(const PolyVector& p, Vec q) {
  const Eigen::Index deg = q.size() - 1;
  const int grid = 8 * std::max<int>(p.degree(0), static_cast<int>(deg)) + 9;
  const auto angles = torus_angles(grid);
  std::vector<Complex> zs(grid);
  for (int i = 0; i < grid; ++i) zs[i] = std::polar(1.0, angles[i]);

  auto eval_q = [&](const Vec& c, const Complex& z) {
    Complex acc = c[c.size() - 1];
    for (Eigen::Index i = c.size() - 2; i >= 0; --i) acc = acc * z + c[i];
    return acc;
  };
  for (int it = 0; it < 3; ++it) {
    std::vector<Complex> ratio(grid);
    double min_q = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i) {
      const Complex qv = eval_q(q, zs[i]);
      min_q = std::min(min_q, std::abs(qv));
      const double gap = 1.0 - p.evaluate({zs[i]}).squaredNorm();
      ratio[i] = gap / std::norm(qv) - 1.0;
    }
    if (min_q < 1e-3) return q;  // circle roots: leave the root-based factor
    Vec u = Vec::Zero(deg + 1);
    for (Eigen::Index j = 0; j <= deg; ++j) {
      Complex acc = 0.0;
      for (int i = 0; i < grid; ++i)
        acc += ratio[i] * std::polar(1.0, -static_cast<double>(j) * angles[i]);
      u[j] = acc / static_cast<double>(grid);
    }
    u[0] *= 0.5;
    Vec delta = Vec::Zero(deg + 1);
    for (Eigen::Index a = 0; a <= deg; ++a)
      for (Eigen::Index b = 0; a + b <= deg; ++b) delta[a + b] += q[a] * u[b];
    q += delta;
  }
  return normalize_phase(q);
}

OuterFactorization outer_factorization(const PolyVector& p, const Config& cfg) {
  OuterFactorization out;
  const GapPolynomial gap = gap_polynomial(p, cfg);
  const double scale = gap.c.cwiseAbs().maxCoeff();
  if (scale <= 1e-13) {
    out.gap_is_zero = true;
    return out;
  }
  out.c0 = gap.coeff(0).real();
  out.inventory = root_inventory(gap, cfg);
  const auto& inv = out.inventory;

  // Boundary roots must cluster with even multiplicity; half of each cluster
  // belongs to Q, snapped onto the circle.
  std::vector<int> boundary_idx;
  for (std::size_t i = 0; i < inv.roots.size(); ++i)
    if (inv.boundary[i]) boundary_idx.push_back(static_cast<int>(i));
  std::vector<int> cluster(boundary_idx.size());
  std::iota(cluster.begin(), cluster.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (cluster[a] != a) a = cluster[a] = cluster[cluster[a]];
    return a;
  };
  for (std::size_t a = 0; a < boundary_idx.size(); ++a)
    for (std::size_t b = a + 1; b < boundary_idx.size(); ++b)
      if (std::abs(inv.roots[boundary_idx[a]] - inv.roots[boundary_idx[b]]) <=
          cfg.cluster_tol)
        cluster[find(static_cast<int>(a))] = find(static_cast<int>(b));
  std::map<int, std::vector<int>> groups;
  for (std::size_t a = 0; a < boundary_idx.size(); ++a)
    groups[find(static_cast<int>(a))].push_back(boundary_idx[a]);
  for (const auto& [rep, members] : groups) {
    if (members.size() % 2 != 0)
      throw NumericError(
          "complete_outer: odd-multiplicity boundary root cluster near z = " +
          std::to_string(inv.roots[members.front()].real()) + " + " +
          std::to_string(inv.roots[members.front()].imag()) + "i");
    Complex centroid = 0.0;
    for (int i : members) centroid += inv.roots[i];
    centroid /= static_cast<double>(members.size());
    centroid /= std::abs(centroid);
    for (std::size_t c = 0; c < members.size() / 2; ++c)
      out.q_roots.push_back(centroid);
  }
  for (std::size_t i = 0; i < inv.roots.size(); ++i) {
    if (inv.boundary[i]) continue;
    if (std::abs(inv.roots[i]) > 1.0) {
      out.q_roots.push_back(inv.roots[i]);
      out.movable_roots.push_back(inv.roots[i]);
    }
  }
  std::sort(out.movable_roots.begin(), out.movable_roots.end(),
            [](const Complex& a, const Complex& b) {
              const double ma = std::abs(a), mb = std::abs(b);
              if (ma != mb) return ma < mb;
              return std::arg(a) < std::arg(b);
            });
  return out;
}

void check_completion(const PolyVector& p, const PolyVector& q, const Config& cfg) {
  PolyVector state = direct_sum(p, q);
  const int deg = std::max(state.degree(0), 1);
  const auto rep = sup_norm_check(state, 4 * deg + 1, 1.0, cfg.completion_tol, true);
  if (!rep.pass)
    throw NumericError("completion check failed: | |P|^2+|Q|^2-1 | up to " +
                       std::to_string(std::max(rep.max_norm - 1.0, 1.0 - rep.min_norm)));
}

}  // namespace

GapPolynomial gap_polynomial(const PolyVector& p, const Config& cfg) {
  if (p.num_vars() != 1)
    throw NumericError("gap_polynomial: univariate polynomials only");
  const int n = p.degree(0);
  const auto rep = sup_norm_check(p, 4 * n + 5, 1.0, cfg.gap_tol, false);
  if (!rep.pass)
    throw NumericError("gap_polynomial: ||P|| exceeds 1 on the torus (max " +
                       std::to_string(rep.max_norm) + "), not completable");
  GapPolynomial g;
  g.n = n;
  g.c = Vec::Zero(2 * n + 1);
  for (int k = -n; k <= n; ++k) {
    Complex s = (k == 0) ? 1.0 : 0.0;
    for (int j = 0; j <= n - std::abs(k); ++j) {
      const int a = (k >= 0) ? j : j - k;
      // sum_j <P_a, P_{a+k}> is the z^k Laurent coefficient of |P|^2
      s -= p.coeff({a}).dot(p.coeff({a + k}));
    }
    g.c[k + n] = s;
  }
  // Enforce exact Hermitian symmetry against rounding.
  for (int k = 1; k <= n; ++k) {
    const Complex avg = 0.5 * (g.c[n + k] + std::conj(g.c[n - k]));
    g.c[n + k] = avg;
    g.c[n - k] = std::conj(avg);
  }
  return g;
}

RootInventory root_inventory(const GapPolynomial& g, const Config& cfg) {
  RootInventory inv;
  const double scale = g.c.cwiseAbs().maxCoeff();
  if (scale <= 1e-13) return inv;
  int n_eff = 0;
  for (int k = 0; k <= g.n; ++k)
    if (std::abs(g.coeff(k)) > 1e-12 * scale) n_eff = k;
  inv.origin_multiplicity = g.n - n_eff;

  if (n_eff > 0) {
    Vec trimmed = g.c.segment(g.n - n_eff, 2 * n_eff + 1);
    inv.roots = polynomial_roots(trimmed);
  }
  for (int i = 0; i < inv.origin_multiplicity; ++i) inv.roots.push_back(0.0);

  const std::size_t count = inv.roots.size();
  inv.boundary.assign(count, false);
  inv.partner.assign(count, -1);
  for (std::size_t i = 0; i < count; ++i)
    inv.boundary[i] = std::abs(std::abs(inv.roots[i]) - 1.0) <= cfg.boundary_tol;
  for (std::size_t i = 0; i < count; ++i) {
    if (inv.boundary[i] || inv.partner[i] >= 0) continue;
    const Complex r = inv.roots[i];
    if (std::abs(r) <= cfg.boundary_tol) continue;  // origin pairs with infinity
    const Complex want = 1.0 / std::conj(r);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < count; ++j) {
      if (j == i || inv.boundary[j] || inv.partner[j] >= 0) continue;
      const double d = std::abs(inv.roots[j] - want);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(j);
      }
    }
    if (best >= 0 && best_d <= cfg.pairing_tol * std::max(1.0, std::abs(want))) {
      inv.partner[i] = best;
      inv.partner[best] = static_cast<int>(i);
    }
  }
  return inv;
}

PolyVector complete_outer(const PolyVector& p, const Config& cfg) {
  const auto fac = outer_factorization(p, cfg);
  if (fac.gap_is_zero) return PolyVector(1, 1);  // ||P|| is 1 already, Q = 0
  Vec coeffs = polish_outer(p, build_completion(fac.q_roots, fac.c0));
  PolyVector q = PolyVector::scalar_univariate(coeffs);
  check_completion(p, q, cfg);
  return q;
}

PolyVector blaschke_flip(const PolyVector& q, Complex alpha, const Config& cfg) {
  const Vec c = q.univariate_coeffs();
  const Eigen::Index deg = c.size() - 1;
  if (deg < 1) throw NumericError("blaschke_flip: Q is constant, no roots");
  if (std::abs(std::abs(alpha) - 1.0) <= cfg.boundary_tol)
    throw NumericError("blaschke_flip: root lies on the unit circle");
  // Synthetic division of Q by (z - alpha); the remainder must vanish.
  Vec r = Vec::Zero(deg);
  Complex carry = c[deg];
  for (Eigen::Index i = deg - 1; i >= 0; --i) {
    r[i] = carry;
    carry = c[i] + alpha * carry;
  }
  if (std::abs(carry) > cfg.root_tol * c.norm())
    throw NumericError("blaschke_flip: alpha is not a root of Q");
  // Q' = (Q / (z - alpha)) * (|alpha| z - alpha/|alpha|): moves alpha to
  // 1/conj(alpha) and keeps |Q| on the circle.
  const double mod = std::abs(alpha);
  Vec out = Vec::Zero(deg + 1);
  for (Eigen::Index i = 0; i < deg; ++i) {
    out[i + 1] += mod * r[i];
    out[i] -= (alpha / mod) * r[i];
  }
  return PolyVector::scalar_univariate(out);
}

std::vector<PolyVector> enumerate_completions(const PolyVector& p, int max_count,
                                              const Config& cfg) {
  if (max_count < 1) return {};
  PolyVector outer = complete_outer(p, cfg);
  if (outer.is_zero()) return {outer};

  // Off-circle roots of the polished outer factor are the movable ones.
  std::vector<Complex> movable, fixed;
  const Vec oc = outer.univariate_coeffs();
  if (oc.size() > 1) {
    for (const Complex& r : polynomial_roots(oc)) {
      if (std::abs(std::abs(r) - 1.0) <= cfg.boundary_tol)
        fixed.push_back(r);
      else
        movable.push_back(r);
    }
  }
  const std::size_t bits = movable.size();
  std::vector<PolyVector> out;
  std::vector<std::vector<Complex>> seen;
  const std::uint64_t total =
      bits >= 63 ? std::numeric_limits<std::uint64_t>::max() : (1ull << bits);
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    std::vector<Complex> key = fixed;
    for (std::size_t b = 0; b < bits; ++b)
      key.push_back((mask >> b) & 1 ? 1.0 / std::conj(movable[b]) : movable[b]);
    std::sort(key.begin(), key.end(), [](const Complex& a, const Complex& b) {
      if (a.real() != b.real()) return a.real() < b.real();
      return a.imag() < b.imag();
    });
    bool dup = false;
    for (const auto& k : seen) {
      bool same = true;
      for (std::size_t i = 0; i < key.size() && same; ++i)
        same = std::abs(key[i] - k[i]) <= cfg.root_tol;
      if (same) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    seen.push_back(key);
    PolyVector q = outer;
    for (std::size_t b = 0; b < bits; ++b)
      if ((mask >> b) & 1) q = blaschke_flip(q, movable[b], cfg);
    check_completion(p, q, cfg);
    out.push_back(std::move(q));
    if (static_cast<int>(out.size()) >= max_count) break;
  }
  return out;
}

PolyVector complete_to_state(const PolyVector& p, const Config& cfg) {
  const GapPolynomial gap = gap_polynomial(p, cfg);
  if (gap.c.cwiseAbs().maxCoeff() <= 1e-13) return p;
  PolyVector q = complete_outer(p, cfg);
  return direct_sum(p, q);
}

}  // namespace qspcat
