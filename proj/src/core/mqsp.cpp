#include "core/mqsp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace qspcat {
namespace {

// Lexicographic position of k inside the box 0 <= k_j < extents_j, or -1.
int box_position(const MultiIndex& k, const std::vector<int>& extents) {
  int pos = 0;
  for (std::size_t j = 0; j < extents.size(); ++j) {
    if (k[j] < 0 || k[j] >= extents[j]) return -1;
    pos = pos * extents[j] + k[j];
  }
  return pos;
}

std::vector<int> plus_one(const std::vector<int>& extents) {
  std::vector<int> out = extents;
  for (int& e : out) ++e;
  return out;
}

// E[k,h] = delta_{k,0} delta_{h,0} - <tau_k, tau_h> on the extended window.
Mat target_matrix(const PolyVector& tau, const std::vector<MultiIndex>& order) {
  const Eigen::Index n = order.size();
  Mat e(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const bool a0 = total_degree(order[a]) == 0;
    const Vec ca = tau.coeff(order[a]);
    for (Eigen::Index b = 0; b < n; ++b) {
      const bool b0 = total_degree(order[b]) == 0;
      e(a, b) = ((a0 && b0) ? 1.0 : 0.0) - ca.dot(tau.coeff(order[b]));
    }
  }
  return e;
}

// The per-variable displacement D_j(X)[k,h] = X_{k,h} - X_{k-e_j,h-e_j} as a
// map from window matrices to extended-window matrices, and its adjoint.
struct Displacement {
  int m = 0;
  std::vector<int> window;
  std::vector<MultiIndex> x_order;    // window box
  std::vector<MultiIndex> s_order;    // extended box
  std::vector<int> x_in_s;            // position of x_order[i] in s_order
  // For every extended index pair precomputed shifts per variable.
  std::vector<std::vector<int>> shift_in_s;  // [j][pos of k] -> pos of k+e_j or -1

  explicit Displacement(const std::vector<int>& win) : m(win.size()), window(win) {
    x_order = window_indices(window);
    s_order = window_indices(plus_one(window));
    const auto ext = plus_one(window);
    x_in_s.resize(x_order.size());
    for (std::size_t i = 0; i < x_order.size(); ++i)
      x_in_s[i] = box_position(x_order[i], ext);
    shift_in_s.assign(m, std::vector<int>(s_order.size(), -1));
    for (std::size_t i = 0; i < s_order.size(); ++i)
      for (int j = 0; j < m; ++j) {
        MultiIndex k = s_order[i];
        k[j] += 1;
        shift_in_s[j][i] = box_position(k, ext);
      }
  }

  // Applies sum_j D_j to the blocks; result on the extended window.
  Mat forward(const std::vector<Mat>& blocks) const {
    const Eigen::Index ns = s_order.size();
    Mat out = Mat::Zero(ns, ns);
    const auto ext = plus_one(window);
    for (int j = 0; j < m; ++j) {
      for (std::size_t a = 0; a < x_order.size(); ++a) {
        const int sa = x_in_s[a];
        MultiIndex ka = x_order[a];
        ka[j] += 1;
        const int sa_shift = box_position(ka, ext);
        for (std::size_t b = 0; b < x_order.size(); ++b) {
          const int sb = x_in_s[b];
          const Complex v = blocks[j](a, b);
          out(sa, sb) += v;
          MultiIndex kb = x_order[b];
          kb[j] += 1;
          out(sa_shift, box_position(kb, ext)) -= v;
        }
      }
    }
    return out;
  }

  // Adjoint of D_j applied to a multiplier on the extended window.
  Mat adjoint_one(int j, const Mat& lambda) const {
    const Eigen::Index nx = x_order.size();
    Mat out(nx, nx);
    for (Eigen::Index a = 0; a < nx; ++a) {
      const int sa = x_in_s[a];
      const int sa2 = shift_in_s[j][sa];
      for (Eigen::Index b = 0; b < nx; ++b) {
        const int sb = x_in_s[b];
        const int sb2 = shift_in_s[j][sb];
        out(a, b) = lambda(sa, sb) - lambda(sa2, sb2);
      }
    }
    return out;
  }

  // (I + sum_j D_j D_j*) lambda, the normal operator of the affine projection.
  Mat normal_op(const Mat& lambda) const {
    Mat out = lambda;
    std::vector<Mat> tmp(m);
    for (int j = 0; j < m; ++j) tmp[j] = adjoint_one(j, lambda);
    out += forward(tmp);
    return out;
  }
};

double re_inner(const Mat& a, const Mat& b) {
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

// Conjugate gradient for the SPD normal operator; spectrum lies in
// [1, 1+4m], so convergence is fast.
Mat solve_normal(const Displacement& disp, const Mat& rhs) {
  Mat x = Mat::Zero(rhs.rows(), rhs.cols());
  Mat r = rhs;
  Mat p = r;
  double rs = re_inner(r, r);
  const double target = std::max(1e-30, 1e-28 * rs);
  for (int it = 0; it < 400 && rs > target; ++it) {
    Mat ap = disp.normal_op(p);
    const double alpha = rs / re_inner(p, ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rs2 = re_inner(r, r);
    p = r + (rs2 / rs) * p;
    rs = rs2;
  }
  return 0.5 * (x + x.adjoint());
}

struct Point {
  std::vector<Mat> blocks;
  Mat residual;

  Point& operator+=(const Point& o) {
    for (std::size_t j = 0; j < blocks.size(); ++j) blocks[j] += o.blocks[j];
    residual += o.residual;
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (std::size_t j = 0; j < blocks.size(); ++j) blocks[j] -= o.blocks[j];
    residual -= o.residual;
    return *this;
  }
};

Point zero_point(const Displacement& disp) {
  Point p;
  p.blocks.assign(disp.m, Mat::Zero(disp.x_order.size(), disp.x_order.size()));
  p.residual = Mat::Zero(disp.s_order.size(), disp.s_order.size());
  return p;
}

Point project_cones(const Point& p, bool partial) {
  Point out = p;
  for (auto& b : out.blocks) b = psd_project(b);
  out.residual = partial ? psd_project(p.residual) : Mat::Zero(p.residual.rows(),
                                                               p.residual.cols());
  return out;
}

// Projection onto {R + sum_j D_j(X_j) = E}.
Point project_affine(const Displacement& disp, const Point& p, const Mat& e) {
  Mat violation = p.residual + disp.forward(p.blocks) - e;
  Mat lambda = solve_normal(disp, violation);
  Point out = p;
  for (int j = 0; j < disp.m; ++j) out.blocks[j] -= disp.adjoint_one(j, lambda);
  out.residual -= lambda;
  return out;
}

double affine_violation(const Displacement& disp, const Point& p, const Mat& e) {
  return (p.residual + disp.forward(p.blocks) - e).cwiseAbs().maxCoeff();
}

BlockCatalystMatrices pack(const Displacement& disp, const Point& p,
                           const PolyVector& tau, bool partial) {
  BlockCatalystMatrices out;
  out.num_vars = disp.m;
  out.window = disp.window;
  out.x_index_order = disp.x_order;
  out.blocks = p.blocks;
  out.residual_index_order = disp.s_order;
  out.partial = partial;
  // Recomputed from scratch, never trusted from solver state.
  out.residual = residual_gram(out, tau);
  return out;
}

// Douglas-Rachford splitting between the PSD product cone and the affine
// displacement set, started at `start`. The cone-feasible shadow iterate
// y = P_cones(x) is tracked; its affine violation is the convergence
// measure. Plain Dykstra and POCS stall sublinearly on the partial-mode
// geometry where the cones touch the affine set tangentially.
Point feasibility_iterate(const Displacement& disp, const Mat& e, const Point& start,
                          bool partial, int max_iter, double feas_tol,
                          SolveReport* report) {
  Point x = start;
  Point best = project_cones(x, partial);
  double best_viol = affine_violation(disp, best, e);
  int it = 0;
  for (; it < max_iter; ++it) {
    Point y = project_cones(x, partial);
    const double viol = affine_violation(disp, y, e);
    if (viol < best_viol) {
      best_viol = viol;
      best = y;
    }
    if (viol <= feas_tol) break;
    Point refl = y;
    refl += y;
    refl -= x;  // 2 P_cones(x) - x
    Point z = project_affine(disp, refl, e);
    x += z;
    x -= y;
  }
  if (report) {
    report->iterations = it;
    report->constraint_violation = best_viol;
    report->converged = best_viol <= feas_tol;
    report->min_block_eig = 0.0;
    for (const auto& b : best.blocks)
      report->min_block_eig = std::min(report->min_block_eig, min_eigenvalue(b));
    report->residual_min_eig = min_eigenvalue(e - disp.forward(best.blocks));
  }
  return best;
}

void check_window(const MqspInstance& inst) {
  const auto degs = inst.tau.degrees();
  if (inst.window.size() != degs.size())
    throw NumericError("mqsp: window arity does not match num_vars");
  for (std::size_t j = 0; j < degs.size(); ++j)
    if (inst.window[j] < degs[j])
      throw NumericError("mqsp: window l_" + std::to_string(j + 1) + " = " +
                         std::to_string(inst.window[j]) + " is below deg_j(tau) = " +
                         std::to_string(degs[j]));
}

}  // namespace

std::vector<MultiIndex> window_indices(const std::vector<int>& extents) {
  std::vector<MultiIndex> out;
  MultiIndex k(extents.size(), 0);
  while (true) {
    out.push_back(k);
    int j = static_cast<int>(extents.size()) - 1;
    for (; j >= 0; --j) {
      if (++k[j] < extents[j]) break;
      k[j] = 0;
    }
    if (j < 0) break;
  }
  return out;
}

Mat residual_gram(const BlockCatalystMatrices& x, const PolyVector& tau) {
  const auto ext = plus_one(x.window);
  const auto& order = x.residual_index_order;
  Mat g = target_matrix(tau, order);
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = 0; b < order.size(); ++b) {
      Complex s = 0.0;
      for (int j = 0; j < x.num_vars; ++j) {
        const int pa = box_position(order[a], x.window);
        const int pb = box_position(order[b], x.window);
        if (pa >= 0 && pb >= 0) s += x.blocks[j](pa, pb);
        MultiIndex ka = order[a], kb = order[b];
        ka[j] -= 1;
        kb[j] -= 1;
        const int qa = box_position(ka, x.window);
        const int qb = box_position(kb, x.window);
        if (qa >= 0 && qb >= 0) s -= x.blocks[j](qa, qb);
      }
      g(a, b) -= s;
    }
  }
  return g;
}

BlockCatalystMatrices solve_feasibility(const MqspInstance& inst, const Config& cfg,
                                        SolveReport* report) {
  check_window(inst);
  if (!inst.partial) {
    const auto rep = sup_norm_check(inst.tau, 4 * inst.tau.max_total_degree() + 5,
                                    1.0, 1e-7, true);
    if (!rep.pass)
      throw NumericError("mqsp: total mode requires a normalized tau");
  } else {
    const auto rep = sup_norm_check(inst.tau, 4 * inst.tau.max_total_degree() + 5,
                                    1.0, cfg.gap_tol, false);
    if (!rep.pass)
      throw NumericError("mqsp: partial mode requires sup ||tau|| <= 1");
  }
  Displacement disp(inst.window);
  const Mat e = target_matrix(inst.tau, disp.s_order);
  SolveReport local;
  Point sol = feasibility_iterate(disp, e, zero_point(disp), inst.partial,
                                  cfg.max_iter, cfg.feas_tol, &local);
  if (report) *report = local;
  return pack(disp, sol, inst.tau, inst.partial);
}

std::vector<int> block_ranks(const BlockCatalystMatrices& x, const Config& cfg) {
  double lmax = 0.0;
  for (const auto& b : x.blocks)
    if (b.rows() > 0) {
      Eigen::SelfAdjointEigenSolver<Mat> es(b, Eigen::EigenvaluesOnly);
      lmax = std::max(lmax, es.eigenvalues().maxCoeff());
    }
  const double thr = std::max(cfg.rank_tol * lmax, 1e-12);
  std::vector<int> ranks;
  for (const auto& b : x.blocks) {
    Eigen::SelfAdjointEigenSolver<Mat> es(b, Eigen::EigenvaluesOnly);
    int r = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()[i] > thr) ++r;
    ranks.push_back(r);
  }
  return ranks;
}

BlockCatalystMatrices rank_heuristic(const MqspInstance& inst,
                                     const BlockCatalystMatrices& start,
                                     const Config& cfg, SolveReport* report,
                                     std::vector<int>* rank_history) {
  check_window(inst);
  Displacement disp(inst.window);
  const Mat e = target_matrix(inst.tau, disp.s_order);

  Point cur = zero_point(disp);
  cur.blocks = start.blocks;
  cur.residual = psd_project(e - disp.forward(cur.blocks));

  auto total_rank = [&](const Point& pt) {
    BlockCatalystMatrices tmp = pack(disp, pt, inst.tau, inst.partial);
    const auto r = block_ranks(tmp, cfg);
    int s = 0;
    for (int v : r) s += v;
    return s;
  };

  Point incumbent = cur;
  int incumbent_rank = total_rank(cur);
  SolveReport incumbent_rep;
  incumbent_rep.converged = affine_violation(disp, cur, e) <= 10 * cfg.feas_tol;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int outer_rounds = 60;
  const double step = 0.5;
  const int inner_iters = std::min(cfg.max_iter, 4000);
  auto consider = [&](const Point& candidate) {
    const int r = total_rank(candidate);
    const bool feasible = affine_violation(disp, candidate, e) <= 10 * cfg.feas_tol;
    if (feasible && r < incumbent_rank) {
      incumbent = candidate;
      incumbent_rank = r;
    }
  };
  for (int round = 0; round < outer_rounds; ++round) {
    if (rank_history) rank_history->push_back(incumbent_rank);
    // Reweighted gradient W_j ~ (X_j + delta I)^(-1), with the weight
    // spectrum clamped near the live-subspace scale: the 1/delta mass on null
    // directions is clipped by the cone projection anyway and would otherwise
    // starve the motion along the feasible face. A seeded Hermitian jitter on
    // the first round breaks symmetric ties between permutations; the
    // asymmetry then compounds across constant-step rounds.
    Point stepped = cur;
    for (int j = 0; j < disp.m; ++j) {
      Mat xj = 0.5 * (cur.blocks[j] + cur.blocks[j].adjoint());
      Eigen::SelfAdjointEigenSolver<Mat> es(xj);
      const double lmax = std::max(es.eigenvalues().maxCoeff(), 1e-12);
      const double thr = std::max(cfg.rank_tol * lmax, 1e-12);
      double live_min = lmax;
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] > thr) {
          live_min = es.eigenvalues()[i];
          break;
        }
      const double delta = 1e-3 * lmax;
      const double cap = 3.0 / (live_min + delta);
      Eigen::VectorXd wv(es.eigenvalues().size());
      for (Eigen::Index i = 0; i < wv.size(); ++i)
        wv[i] = std::min(1.0 / (std::max(es.eigenvalues()[i], 0.0) + delta), cap);
      Mat w = es.eigenvectors() * wv.asDiagonal() * es.eigenvectors().adjoint();
      if (round == 0) {
        Mat noise(w.rows(), w.cols());
        for (Eigen::Index r = 0; r < w.rows(); ++r)
          for (Eigen::Index c = 0; c < w.cols(); ++c)
            noise(r, c) = Complex(gauss(rng), gauss(rng));
        noise = 0.5 * (noise + noise.adjoint());
        w += (3e-2 * w.cwiseAbs().maxCoeff()) * noise;
      }
      const double wmax = std::max(w.cwiseAbs().maxCoeff(), 1e-12);
      const double xmax = std::max(xj.cwiseAbs().maxCoeff(), 1e-12);
      stepped.blocks[j] = cur.blocks[j] - (step * xmax / wmax) * w;
    }
    cur = feasibility_iterate(disp, e, stepped, inst.partial, inner_iters,
                              cfg.feas_tol, nullptr);
    consider(cur);
  }

  // Rounding endgame: hard-threshold nearly dead eigenvalues and restore
  // feasibility, repeatedly. The restore brings back only part of the
  // truncated mass, so the dying eigenvalues contract geometrically until
  // they fall under the rank threshold.
  for (int it = 0; it < 25; ++it) {
    for (auto& b : cur.blocks) {
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (b + b.adjoint()));
      Eigen::VectorXd ev = es.eigenvalues();
      const double lmax = std::max(ev.maxCoeff(), 1e-12);
      for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev[i] < 0.02 * lmax) ev[i] = 0.0;
      b = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    }
    cur = feasibility_iterate(disp, e, cur, inst.partial, inner_iters, cfg.feas_tol,
                              nullptr);
    consider(cur);
  }
  if (rank_history) rank_history->push_back(incumbent_rank);
  if (report) {
    report->converged = true;
    report->constraint_violation = affine_violation(disp, incumbent, e);
    report->iterations = outer_rounds;
  }
  return pack(disp, incumbent, inst.tau, inst.partial);
}

SubCatalysts subcatalysts_from_blocks(const BlockCatalystMatrices& x, const Config& cfg) {
  const auto& order = x.x_index_order;
  int max_stage = 0;
  for (const auto& k : order) max_stage = std::max(max_stage, total_degree(k));

  SubCatalysts out;
  out.per_block.assign(max_stage + 1, {});
  out.block_dims.assign(max_stage + 1, std::vector<int>(x.num_vars, 0));
  for (int k = 0; k <= max_stage; ++k)
    out.per_block[k].assign(x.num_vars, PolyVector(x.num_vars, 1));

  for (int j = 0; j < x.num_vars; ++j) {
    const Mat xb = 0.5 * (x.blocks[j] + x.blocks[j].adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(xb);
    const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
    if (min_eigenvalue(xb) < -std::max(cfg.psd_tol * xb.rows(), 1e-8))
      throw NumericError("subcatalysts: block X^(" + std::to_string(j + 1) +
                         ") is not PSD");
    const double thr = std::max(cfg.rank_tol * lmax, 1e-12);
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()[i] > thr) kept.push_back(i);
    const int rank = static_cast<int>(kept.size());
    if (rank == 0) continue;
    // Columns of f realize the Pi_j coefficients: X^(j) = f^H f.
    Mat f(rank, order.size());
    for (int r = 0; r < rank; ++r)
      f.row(r) = std::sqrt(es.eigenvalues()[kept[r]]) *
                 es.eigenvectors().col(kept[r]).adjoint();

    // Stage assignment: Gram-Schmidt over columns in descending total degree;
    // a direction first seen at degree d belongs to stage d, which makes each
    // v^(k) a polynomial of total degree <= k.
    std::vector<std::size_t> perm(order.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
      const int da = total_degree(order[a]), db = total_degree(order[b]);
      if (da != db) return da > db;
      return order[a] > order[b];
    });
    const double col_scale = std::max(f.cwiseAbs().maxCoeff(), 1e-300);
    std::vector<Vec> basis;
    std::vector<int> stage_of;
    for (std::size_t pi = 0; pi < perm.size(); ++pi) {
      Vec c = f.col(perm[pi]);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : basis) c -= q * q.dot(c);
      if (c.norm() > 1e-8 * col_scale) {
        // Phase: the entry against its introducing column is real positive.
        Vec q = c / c.norm();
        const Complex lead = q.dot(f.col(perm[pi]));
        q *= lead / std::abs(lead);
        basis.push_back(q);
        stage_of.push_back(total_degree(order[perm[pi]]));
      }
    }
    // Rows grouped by stage, ascending; within a stage keep discovery order
    // reversed so lexicographically smaller introducers come first.
    std::vector<std::size_t> row_order(basis.size());
    for (std::size_t i = 0; i < row_order.size(); ++i) row_order[i] = i;
    std::stable_sort(row_order.begin(), row_order.end(),
                     [&](std::size_t a, std::size_t b) { return stage_of[a] < stage_of[b]; });
    std::vector<std::vector<std::size_t>> by_stage(max_stage + 1);
    for (std::size_t i : row_order) by_stage[stage_of[i]].push_back(i);
    for (int k = 0; k <= max_stage; ++k) {
      auto& rows = by_stage[k];
      std::reverse(rows.begin(), rows.end());
      if (rows.empty()) continue;
      PolyVector part(x.num_vars, static_cast<int>(rows.size()));
      for (std::size_t col = 0; col < order.size(); ++col) {
        Vec v(rows.size());
        for (std::size_t ri = 0; ri < rows.size(); ++ri)
          v[ri] = basis[rows[ri]].dot(f.col(col));
        part.add_coeff(order[col], v);
      }
      out.per_block[k][j] = part;
      out.block_dims[k][j] = static_cast<int>(rows.size());
    }
    // Consistency: the graded rows must reproduce the block Gram.
    Mat recon = Mat::Zero(order.size(), order.size());
    {
      Mat g(basis.size(), order.size());
      for (std::size_t r = 0; r < basis.size(); ++r)
        for (std::size_t c = 0; c < order.size(); ++c) g(r, c) = basis[r].dot(f.col(c));
      recon = g.adjoint() * g;
    }
    const double err = (recon - xb).cwiseAbs().maxCoeff();
    if (err > 1e-9 + 10 * thr)
      throw NumericError("subcatalysts: grading failed to reproduce X^(" +
                         std::to_string(j + 1) + ") (error " + std::to_string(err) +
                         ")");
  }

  for (int k = 0; k <= max_stage; ++k) {
    std::vector<PolyVector> nonzero;
    for (int j = 0; j < x.num_vars; ++j)
      if (out.block_dims[k][j] > 0) nonzero.push_back(out.per_block[k][j]);
    out.combined.push_back(nonzero.empty() ? PolyVector(x.num_vars, 1)
                                           : PolyVector::stack(nonzero));
  }
  return out;
}

PolyVector complete_from_residual(const PolyVector& tau, const BlockCatalystMatrices& x,
                                  const Config& cfg) {
  Mat g = residual_gram(x, tau);
  const double gmax = g.cwiseAbs().maxCoeff();
  if (!x.partial) {
    if (gmax > 1e2 * cfg.feas_tol)
      throw NumericError("complete_from_residual: total-mode residual is " +
                         std::to_string(gmax));
    return tau;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (g + g.adjoint()));
  const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
  const double thr = std::max(cfg.rank_tol * lmax, 1e-10);
  std::vector<PolyVector> extras;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()[i] <= thr) continue;
    PolyVector q(tau.num_vars(), 1);
    const Vec col = std::sqrt(es.eigenvalues()[i]) * es.eigenvectors().col(i).conjugate();
    for (std::size_t a = 0; a < x.residual_index_order.size(); ++a)
      q.add_coeff(x.residual_index_order[a], Vec::Constant(1, col[a]));
    extras.push_back(q);
  }
  if (extras.empty()) return tau;
  std::vector<PolyVector> all = {tau};
  for (auto& q : extras) all.push_back(q);
  return PolyVector::stack(all);
}

Protocol synthesize_mqsp(const PolyVector& tau, const SubCatalysts& subs,
                         const Config& cfg) {
  const int n = tau.max_total_degree();
  for (std::size_t k = n; k < subs.combined.size(); ++k)
    if (!subs.combined[k].is_zero())
      throw NumericError("synthesize_mqsp: catalyst has mass at stage " +
                         std::to_string(k) + " beyond deg(tau)-1");
  if (static_cast<int>(subs.combined.size()) < n)
    throw NumericError("synthesize_mqsp: catalyst stages missing (have " +
                       std::to_string(subs.combined.size()) + ", need " +
                       std::to_string(n) + ")");
  const int m = tau.num_vars();

  struct Level {
    std::vector<PolyVector> one_parts;  // tau_- realization (scalars)
    std::vector<PolyVector> z_parts;    // Pi_j blocks of v^(d-1), variable-tagged
    std::vector<int> z_vars;            // variable per z part
  };
  std::vector<Level> levels;

  // Pass 1: realize tau_- at every level from the Gram deficit
  // G_tau - G_{O v^(d-1)}; padding does not matter for inner products here.
  PolyVector cur = tau;
  for (int d = n; d >= 1; --d) {
    Level lv;
    std::vector<PolyVector> ov_parts;
    for (int j = 0; j < m; ++j) {
      if (subs.block_dims[d - 1][j] == 0) continue;
      lv.z_parts.push_back(subs.per_block[d - 1][j]);
      lv.z_vars.push_back(j);
      ov_parts.push_back(subs.per_block[d - 1][j].shifted(j));
    }
    if (ov_parts.empty())
      throw NumericError("synthesize_mqsp: empty catalyst stage " +
                         std::to_string(d - 1));
    PolyVector ov = PolyVector::stack(ov_parts);

    std::vector<MultiIndex> support;
    for (const auto& [k, v] : cur.coeffs()) support.push_back(k);
    for (const auto& [k, v] : ov.coeffs())
      if (!cur.coeffs().count(k)) support.push_back(k);
    std::sort(support.begin(), support.end());
    Mat d_minus(support.size(), support.size());
    for (std::size_t a = 0; a < support.size(); ++a)
      for (std::size_t b = 0; b < support.size(); ++b)
        d_minus(a, b) = cur.coeff(support[a]).dot(cur.coeff(support[b])) -
                        ov.coeff(support[a]).dot(ov.coeff(support[b]));
    // tau_- has degree <= d-1; top-degree rows of the deficit are feasibility
    // noise and would otherwise leak sqrt-sized coefficients into tau_-.
    double dropped = 0.0;
    for (std::size_t a = 0; a < support.size(); ++a) {
      if (total_degree(support[a]) < d) continue;
      for (std::size_t b = 0; b < support.size(); ++b) {
        dropped = std::max({dropped, std::abs(d_minus(a, b)), std::abs(d_minus(b, a))});
        d_minus(a, b) = 0.0;
        d_minus(b, a) = 0.0;
      }
    }
    if (dropped > 1e-4)
      throw NumericError("synthesize_mqsp: tau_- carries top-degree mass (" +
                         std::to_string(dropped) + "); synthesis obstruction at "
                         "degree " + std::to_string(d));
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (d_minus + d_minus.adjoint()));
    if (es.eigenvalues().size() > 0 && es.eigenvalues().minCoeff() < -1e-6)
      throw NumericError("synthesize_mqsp: Gram deficit of tau_- is indefinite at "
                         "degree " + std::to_string(d) + "; synthesis obstruction");
    const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
    const double thr = std::max(cfg.rank_tol * lmax, 1e-10);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      if (es.eigenvalues()[i] <= thr) continue;
      PolyVector t(m, 1);
      const Vec col =
          std::sqrt(es.eigenvalues()[i]) * es.eigenvectors().col(i).conjugate();
      for (std::size_t a = 0; a < support.size(); ++a)
        t.add_coeff(support[a], Vec::Constant(1, col[a]));
      lv.one_parts.push_back(t);
    }
    for (const auto& t : lv.one_parts)
      if (t.max_total_degree() >= d)
        throw NumericError("synthesize_mqsp: tau_- carries top-degree mass; "
                           "synthesis obstruction at degree " + std::to_string(d));

    std::vector<PolyVector> next_parts = lv.one_parts;
    for (const auto& zp : lv.z_parts) next_parts.push_back(zp);
    cur = PolyVector::stack(next_parts);
    levels.push_back(std::move(lv));
  }
  if (cur.max_total_degree() != 0)
    throw NumericError("synthesize_mqsp: stripping did not reach a constant state");

  // Protocol dimension: the largest state met along the way.
  int dim = std::max(cur.ambient_dim(), tau.ambient_dim());
  for (const auto& lv : levels) {
    int need = 0;
    for (const auto& t : lv.one_parts) need += t.ambient_dim();
    for (const auto& zp : lv.z_parts) need += zp.ambient_dim();
    dim = std::max(dim, need);
  }

  // Pass 2: assemble with a fixed slot layout per level -- 1 slots first
  // (tau_- padded to dim - z_dim), then the z blocks. Each level's target is
  // the previous level's next-state in exactly this layout.
  auto padded_state = [&](const Level& lv, bool shift_z) {
    int z_dim = 0;
    for (const auto& zp : lv.z_parts) z_dim += zp.ambient_dim();
    const int one_dim = dim - z_dim;
    PolyVector state(m, dim);
    int off = 0;
    for (const auto& t : lv.one_parts) {
      for (const auto& [k, v] : t.coeffs()) {
        Vec padded = Vec::Zero(dim);
        padded.segment(off, v.size()) = v;
        state.add_coeff(k, padded);
      }
      off += t.ambient_dim();
    }
    off = one_dim;
    for (std::size_t zi = 0; zi < lv.z_parts.size(); ++zi) {
      const PolyVector zp =
          shift_z ? lv.z_parts[zi].shifted(lv.z_vars[zi]) : lv.z_parts[zi];
      for (const auto& [k, v] : zp.coeffs()) {
        Vec padded = Vec::Zero(dim);
        padded.segment(off, v.size()) = v;
        state.add_coeff(k, padded);
      }
      off += lv.z_parts[zi].ambient_dim();
    }
    return state;
  };

  Protocol proto;
  proto.dim = dim;
  proto.num_vars = m;
  std::vector<Mat> tops;
  std::vector<SignalLayer> layers;
  PolyVector target(m, dim);
  for (const auto& [k, v] : tau.coeffs()) {
    Vec padded = Vec::Zero(dim);
    padded.head(v.size()) = v;
    target.add_coeff(k, padded);
  }
  for (const auto& lv : levels) {
    int z_dim = 0;
    for (const auto& zp : lv.z_parts) z_dim += zp.ambient_dim();
    const int one_dim = dim - z_dim;

    SignalLayer layer;
    layer.symbols.assign(one_dim, 0);
    for (std::size_t zi = 0; zi < lv.z_parts.size(); ++zi)
      layer.symbols.insert(layer.symbols.end(), lv.z_parts[zi].ambient_dim(),
                           lv.z_vars[zi] + 1);

    const PolyVector fam_b_poly = padded_state(lv, true);
    std::vector<MultiIndex> support;
    for (const auto& [k, v] : target.coeffs()) support.push_back(k);
    for (const auto& [k, v] : fam_b_poly.coeffs())
      if (!target.coeffs().count(k)) support.push_back(k);
    std::sort(support.begin(), support.end());
    std::vector<Vec> fam_a, fam_b;
    for (const auto& k : support) {
      fam_a.push_back(target.coeff(k));
      fam_b.push_back(fam_b_poly.coeff(k));
    }
    tops.push_back(unitary_from_gram_match(fam_a, fam_b, cfg));
    layers.push_back(std::move(layer));
    target = padded_state(lv, false);
  }

  Vec constant = target.coeff(MultiIndex(m, 0));
  proto.unitaries.push_back(complete_to_unitary(constant / constant.norm()));
  for (auto it = tops.rbegin(); it != tops.rend(); ++it)
    proto.unitaries.push_back(std::move(*it));
  for (auto it = layers.rbegin(); it != layers.rend(); ++it)
    proto.layers.push_back(std::move(*it));

  const double err = verify_protocol(proto, tau);
  if (err > 1e-6)
    throw NumericError("synthesize_mqsp: verification failed with grid error " +
                       std::to_string(err));
  return proto;
}

SupportReport support_check(const BlockCatalystMatrices& x, const std::vector<int>& n,
                            const Config& cfg) {
  SupportReport rep;
  rep.pass = true;
  double lmax = 1e-12;
  for (const auto& b : x.blocks)
    if (b.rows() > 0) lmax = std::max(lmax, b.cwiseAbs().maxCoeff());
  for (std::size_t a = 0; a < x.x_index_order.size(); ++a) {
    double mass = 0.0;
    for (const auto& b : x.blocks) mass = std::max(mass, std::abs(b(a, a)));
    if (mass <= cfg.rank_tol * lmax) continue;
    const auto& k = x.x_index_order[a];
    for (std::size_t j = 0; j < n.size(); ++j)
      if (k[j] >= n[j]) {
        rep.pass = false;
        rep.violations.push_back(k);
        break;
      }
  }
  return rep;
}

SupportReport support_check(const Catalyst& v, const std::vector<int>& n,
                            const Config& cfg) {
  SupportReport rep;
  rep.pass = true;
  double scale = 1e-12;
  for (const auto& part : v.parts)
    for (const auto& [k, vec] : part.coeffs())
      scale = std::max(scale, vec.norm());
  for (const auto& part : v.parts) {
    for (const auto& [k, vec] : part.coeffs()) {
      if (vec.norm() <= cfg.rank_tol * scale) continue;
      for (std::size_t j = 0; j < n.size(); ++j)
        if (k[j] >= n[j]) {
          rep.pass = false;
          rep.violations.push_back(k);
          break;
        }
    }
  }
  return rep;
}

}  // namespace qspcat
