#include "manisac/solvers.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace manisac::solvers {

namespace {

constexpr int kBisectCap = 200;
constexpr double kMuCap = 1e14;

cvec deterministic_unit(Eigen::Index n) {
  std::mt19937_64 rng(0x5eedf00dULL);
  std::normal_distribution<double> g(0.0, 1.0);
  cvec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(g(rng), g(rng));
  v.normalize();
  return v;
}

}  // namespace

std::pair<double, cvec> lambda_max(const cmat& h) {
  const Eigen::Index n = h.rows();
  if (n == 1) return {h(0, 0).real(), cvec::Ones(1)};
  const double scale = std::max(h.cwiseAbs().rowwise().sum().maxCoeff(),
                                std::numeric_limits<double>::min());
  // Gershgorin shift keeps the iteration matrix PSD without flattening the
  // spectral gap more than necessary.
  double lo_bound = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) off += std::abs(h(i, j));
    lo_bound = std::min(lo_bound, h(i, i).real() - off);
  }
  const double shift = std::max(0.0, -lo_bound) + 1e-3 * scale;
  const cmat s = h + shift * cmat::Identity(n, n);

  cvec v = deterministic_unit(n);
  double theta = 0.0;
  for (int it = 0; it < 300; ++it) {
    cvec w = s * v;
    const double norm = w.norm();
    if (norm == 0.0) return {0.0, v};
    w /= norm;
    theta = std::real(w.dot(h * w));
    if ((h * w - theta * w).norm() <= 1e-13 * scale) return {theta, w};
    v = w;
  }
  // Rayleigh-quotient inverse iteration polish.
  for (int it = 0; it < 8; ++it) {
    theta = std::real(v.dot(h * v));
    const cvec r = h * v - theta * v;
    if (r.norm() <= 1e-13 * scale) break;
    const cmat m =
        h - (theta + 1e-10 * scale) * cmat::Identity(n, n);
    cvec w = m.colPivHouseholderQr().solve(v);
    const double wn = w.norm();
    if (!std::isfinite(wn) || wn == 0.0) break;
    v = w / wn;
  }
  theta = std::real(v.dot(h * v));
  return {theta, v};
}

std::pair<double, cvec> max_generalized_eig(const cmat& a, const cmat& b) {
  Eigen::LLT<cmat> llt(b);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("max_generalized_eig: B is not positive definite");
  const auto l = llt.matrixL();
  const cmat x = l.solve(a);
  const cmat c = l.solve(x.adjoint()).adjoint();
  auto [val, y] = lambda_max(0.5 * (c + c.adjoint()));
  cvec v = llt.matrixU().solve(y);
  return {val, v};
}

// ---------------------------------------------------------------------------
// Complex block QCQP.

namespace {

struct BlockWork {
  const BlockProblem* prob = nullptr;
  std::vector<vec> diag;    // per-block ball-multiplier load on the diagonal
  std::vector<cvec> x;
  std::vector<double> ridge;
  std::vector<Eigen::LDLT<cmat>> fact;  // factorizations of the last solve

  explicit BlockWork(const BlockProblem& p) : prob(&p) {
    const size_t nb = p.objective.size();
    diag.resize(nb);
    x.resize(nb);
    ridge.resize(nb);
    fact.resize(nb);
    for (size_t b = 0; b < nb; ++b) {
      const Eigen::Index n = p.objective[b].hessian.rows();
      diag[b] = vec::Zero(n);
      x[b] = cvec::Zero(n);
      ridge[b] = 1e-12 * (1.0 + p.objective[b].hessian.cwiseAbs().maxCoeff());
    }
  }

  void load_nu(const std::vector<double>& nu) {
    for (auto& d : diag) d.setZero();
    for (size_t bi = 0; bi < prob->balls.size(); ++bi)
      for (const BlockSlice& sl : prob->balls[bi].slices)
        diag[sl.block].segment(sl.offset, sl.length).array() += nu[bi];
  }

  void solve_block(size_t b, double mu) {
    const QuadBlock& obj = prob->objective[b];
    const Eigen::Index n = obj.hessian.rows();
    cmat m = obj.hessian;
    cvec rhs = obj.linear;
    if (!prob->quad_ineq.empty()) {
      m += mu * prob->quad_ineq[b].hessian;
      rhs += mu * prob->quad_ineq[b].linear;
    }
    m += (diag[b].array() + ridge[b]).matrix().asDiagonal().toDenseMatrix().cast<cplx>();
    fact[b].compute(m);
    x[b] = fact[b].solve(rhs);
  }

  void solve_all(double mu) {
    for (size_t b = 0; b < prob->objective.size(); ++b) solve_block(b, mu);
  }

  double ball_norm2(size_t bi) const {
    double acc = 0.0;
    for (const BlockSlice& sl : prob->balls[bi].slices)
      acc += x[sl.block].segment(sl.offset, sl.length).squaredNorm();
    return acc;
  }

  double objective_value() const {
    double acc = 0.0;
    for (size_t b = 0; b < prob->objective.size(); ++b) {
      const QuadBlock& o = prob->objective[b];
      acc += std::real(x[b].dot(o.hessian * x[b])) -
             2.0 * std::real(o.linear.dot(x[b]));
    }
    return acc;
  }

  // Inequality value together with the magnitude scale used for tolerances.
  std::pair<double, double> ineq_value() const {
    double quad = 0.0, lin = 0.0;
    for (size_t b = 0; b < prob->objective.size(); ++b) {
      const QuadBlock& g = prob->quad_ineq[b];
      quad += std::real(x[b].dot(g.hessian * x[b]));
      lin += -2.0 * std::real(g.linear.dot(x[b]));
    }
    const double val = quad + lin + prob->ineq_const;
    const double scale =
        std::abs(quad) + std::abs(lin) + std::abs(prob->ineq_const) + 1e-300;
    return {val, scale};
  }
};

// Project onto the ball constraints for a fixed shared multiplier by cyclic
// dual coordinate ascent on the per-ball multipliers.
void inner_solve(BlockWork& w, std::vector<double>& nu, double mu) {
  const BlockProblem& p = *w.prob;
  w.load_nu(nu);
  w.solve_all(mu);
  if (p.balls.empty()) return;
  // Cyclic rounds must continue until every ball is simultaneously within
  // tolerance: adjusting one multiplier perturbs the others' norms, and the
  // coupling strengthens as the blocks align, so a small round cap silently
  // leaks feasibility.
  for (int round = 0; round < 10000; ++round) {
    bool dirty = false;
    double moved = 0.0;  // largest relative multiplier change this round
    for (size_t bi = 0; bi < p.balls.size(); ++bi) {
      const double r2 = p.balls[bi].radius * p.balls[bi].radius;
      const double nu_was = nu[bi];
      auto track = [&] {
        moved = std::max(moved,
                         std::abs(nu[bi] - nu_was) / (1.0 + std::abs(nu_was)));
      };
      auto resolve = [&](double v) {
        nu[bi] = v;
        w.load_nu(nu);
        w.solve_all(mu);
        return w.ball_norm2(bi);
      };
      auto bisect = [&](double lo, double hi) {
        for (int it = 0; it < 100; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (resolve(mid) > r2) lo = mid; else hi = mid;
          if (hi - lo <= 1e-14 * (1.0 + hi)) break;
        }
        resolve(hi);
      };
      double n2 = w.ball_norm2(bi);
      if (n2 <= r2 * (1.0 + 1e-10)) {
        if (nu[bi] > 0.0 && n2 < r2 * (1.0 - 1e-8)) {
          // over-tightened by an earlier round; relax. resolve() rewrites
          // nu[bi], so the previous multiplier must be saved as the bracket.
          const double prev = nu[bi];
          if (resolve(0.0) <= r2 * (1.0 + 1e-10)) {
            dirty = true;
            track();
            continue;
          }
          bisect(0.0, prev);
          dirty = true;
          track();
        }
        continue;
      }
      double lo = nu[bi], hi = std::max(1.0, 2.0 * nu[bi]);
      while (resolve(hi) > r2 && hi < 1e16) hi *= 2.0;
      bisect(lo, hi);
      dirty = true;
      track();
    }
    if (!dirty) break;
    // Strongly coupled duals can toggle around the tolerances forever while
    // the multipliers barely move; further rounds are useless then.
    if (moved < 1e-10) break;
  }
}

// Dual bisection path: outer doubling/bisection on the shared-inequality
// multiplier with cyclic per-ball projections inside. Robust but slow when
// the ball duals are strongly coupled; used as a fallback.
bool solve_by_bisection(BlockWork& work, std::vector<double>& nu,
                        SolveReport& rep, double& mu_out) {
  const BlockProblem& prob = *work.prob;
  const bool has_ineq = !prob.quad_ineq.empty();
  double mu = 0.0;
  int iters = 0;
  inner_solve(work, nu, 0.0);
  if (has_ineq) {
    auto [val, scale] = work.ineq_value();
    if (val > 1e-9 * scale) {
      double lo = 0.0, hi = 1.0;
      for (;;) {
        inner_solve(work, nu, hi);
        ++iters;
        auto [v, s] = work.ineq_value();
        if (v <= 1e-9 * s) break;
        if (hi >= kMuCap || iters >= kBisectCap) {
          rep.status = SolveStatus::infeasible;
          rep.objective = v;  // separating certificate: inf over feasible set
          rep.dual = hi;
          return false;
        }
        lo = hi;
        hi *= 2.0;
      }
      while (iters < kBisectCap) {
        ++iters;
        const double mid = 0.5 * (lo + hi);
        inner_solve(work, nu, mid);
        auto [v, s] = work.ineq_value();
        if (v > 1e-9 * s) lo = mid; else hi = mid;
        if ((hi - lo) <= 1e-10 * (1.0 + hi)) break;
        if (std::abs(mid * v) <= 1e-8 * s * (1.0 + mid)) { hi = mid; break; }
      }
      inner_solve(work, nu, hi);
      mu = hi;
      if (iters >= kBisectCap) rep.status = SolveStatus::max_iter;
    }
  }
  mu_out = mu;
  return true;
}

// Active-set Newton on the dual variables (shared-inequality multiplier plus
// one multiplier per ball). The dual dimension is tiny, so a finite-difference
// Jacobian with damped steps converges in a handful of iterations where the
// cyclic scheme needs thousands of rounds. Returns false when it stalls.
bool solve_by_dual_newton(BlockWork& work, vec& lam, SolveStatus* infeasible) {
  const BlockProblem& prob = *work.prob;
  const bool has_ineq = !prob.quad_ineq.empty();
  const size_t nb = prob.balls.size();
  const int nl = (has_ineq ? 1 : 0) + static_cast<int>(nb);
  if (nl == 0) {
    work.solve_all(0.0);
    return true;
  }
  lam = vec::Zero(nl);

  std::vector<double> nu(nb, 0.0);
  auto apply = [&](const vec& l) {
    for (size_t i = 0; i < nb; ++i) nu[i] = l[(has_ineq ? 1 : 0) + i];
    work.load_nu(nu);
    work.solve_all(has_ineq ? l[0] : 0.0);
  };
  // residuals c_i (feasible iff <= 0) and their magnitude scales
  auto residual = [&](vec& c, vec& s) {
    int idx = 0;
    if (has_ineq) {
      auto [v, sc] = work.ineq_value();
      c[idx] = v;
      s[idx] = sc;
      ++idx;
    }
    for (size_t i = 0; i < nb; ++i, ++idx) {
      const double r2 = prob.balls[i].radius * prob.balls[i].radius;
      c[idx] = work.ball_norm2(i) - r2;
      s[idx] = r2 + 1e-300;
    }
  };
  auto tol_of = [&](int i, const vec& s) {
    return (has_ineq && i == 0) ? 1e-9 * s[i] : 1e-10 * s[i];
  };

  vec c(nl), s(nl);
  apply(lam);
  residual(c, s);

  std::vector<bool> active(nl, false);
  bool any = false;
  for (int i = 0; i < nl; ++i)
    if (c[i] > tol_of(i, s)) active[i] = any = true;
  if (!any) return true;

  for (int iter = 0; iter < 100; ++iter) {
    std::vector<int> idx;
    for (int i = 0; i < nl; ++i)
      if (active[i]) idx.push_back(i);
    const int na = static_cast<int>(idx.size());
    if (na == 0) return true;

    // residuals normalized by their magnitude scales so the Newton system is
    // well conditioned across the very different units of the constraints
    vec ca(na);
    for (int a = 0; a < na; ++a) ca[a] = c[idx[a]] / s[idx[a]];

    // Analytic Jacobian through the stored block factorizations:
    // dx_b/dlam_j = H_b^{-1} (drhs_b - dH_b x_b).
    const size_t nblk = prob.objective.size();
    mat jac(na, na);
    std::vector<cvec> dx(nblk);
    for (int a = 0; a < na; ++a) {
      const int j = idx[a];
      for (size_t b = 0; b < nblk; ++b) {
        cvec r;
        if (has_ineq && j == 0) {
          r = prob.quad_ineq[b].linear - prob.quad_ineq[b].hessian * work.x[b];
        } else {
          const size_t bi = static_cast<size_t>(j - (has_ineq ? 1 : 0));
          r = cvec::Zero(work.x[b].size());
          for (const BlockSlice& sl : prob.balls[bi].slices)
            if (static_cast<size_t>(sl.block) == b)
              r.segment(sl.offset, sl.length) =
                  -work.x[b].segment(sl.offset, sl.length);
        }
        dx[b] = work.fact[b].solve(r);
      }
      for (int row = 0; row < na; ++row) {
        const int i = idx[row];
        double v = 0.0;
        if (has_ineq && i == 0) {
          for (size_t b = 0; b < nblk; ++b)
            v += 2.0 * std::real((prob.quad_ineq[b].hessian * work.x[b] -
                                  prob.quad_ineq[b].linear)
                                     .dot(dx[b]));
        } else {
          const size_t bi = static_cast<size_t>(i - (has_ineq ? 1 : 0));
          for (const BlockSlice& sl : prob.balls[bi].slices)
            v += 2.0 * std::real(work.x[sl.block]
                                     .segment(sl.offset, sl.length)
                                     .dot(dx[sl.block].segment(sl.offset,
                                                               sl.length)));
        }
        jac(row, a) = v / s[i];
      }
    }
    vec step = jac.colPivHouseholderQr().solve(ca);
    if (!step.allFinite()) return false;

    // damped update with projection onto lam >= 0
    const double base_norm = ca.norm();
    double t = 1.0;
    vec trial = lam;
    bool improved = false;
    for (int halve = 0; halve < 40; ++halve) {
      trial = lam;
      for (int a = 0; a < na; ++a)
        trial[idx[a]] = std::max(0.0, lam[idx[a]] - t * step[a]);
      apply(trial);
      residual(c, s);
      double tn = 0.0;
      for (int a = 0; a < na; ++a) {
        const double r = c[idx[a]] / s[idx[a]];
        tn += r * r;
      }
      if (std::sqrt(tn) <= (1.0 - 1e-4 * t) * base_norm) {
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) {
      // Line search hit its numerical noise floor. Accept the point when all
      // residuals sit in a still-tight feasibility band; the cyclic fallback
      // cannot do better and is orders of magnitude slower.
      apply(lam);
      residual(c, s);
      for (int i = 0; i < nl; ++i) {
        if (c[i] > 1e-7 * s[i]) return false;
        if (lam[i] > 0.0 && -c[i] > 1e-6 * s[i]) return false;
      }
      return true;
    }
    lam = trial;

    // active-set management
    for (int i = 0; i < nl; ++i) {
      if (active[i] && lam[i] == 0.0 && c[i] <= tol_of(i, s)) active[i] = false;
      if (!active[i] && c[i] > tol_of(i, s)) active[i] = true;
    }

    bool feas = true, tight = true;
    for (int i = 0; i < nl; ++i) {
      if (c[i] > tol_of(i, s)) feas = false;
      if (lam[i] > 0.0 && -c[i] > 1e-8 * s[i]) tight = false;
    }
    if (feas && tight) return true;

    if (has_ineq && lam[0] >= kMuCap && c[0] > tol_of(0, s)) {
      *infeasible = SolveStatus::infeasible;
      return false;
    }
  }
  apply(lam);
  residual(c, s);
  for (int i = 0; i < nl; ++i)
    if (c[i] > 1e-7 * s[i]) return false;
  return true;
}

}  // namespace

std::pair<std::vector<cvec>, SolveReport> solve_block_qcqp(
    const BlockProblem& prob) {
  BlockWork work(prob);
  SolveReport rep;
  const bool has_ineq = !prob.quad_ineq.empty();
  const size_t nb = prob.balls.size();

  double mu = 0.0;
  std::vector<double> nu(nb, 0.0);
  vec lam;
  SolveStatus newton_infeasible = SolveStatus::optimal;
  if (solve_by_dual_newton(work, lam, &newton_infeasible)) {
    if (lam.size() > 0) {
      mu = has_ineq ? lam[0] : 0.0;
      for (size_t i = 0; i < nb; ++i) nu[i] = lam[(has_ineq ? 1 : 0) + i];
    }
  } else if (newton_infeasible == SolveStatus::infeasible) {
    rep.status = SolveStatus::infeasible;
    rep.objective = work.ineq_value().first;
    rep.dual = kMuCap;
    return {work.x, rep};
  } else {
    std::fill(nu.begin(), nu.end(), 0.0);
    if (!solve_by_bisection(work, nu, rep, mu)) return {work.x, rep};
  }

  rep.objective = work.objective_value();
  rep.dual = mu;
  for (size_t i = 0; i < nb; ++i) {
    const double r2 = prob.balls[i].radius * prob.balls[i].radius;
    if (work.ball_norm2(i) > r2 * (1.0 + 1e-6)) rep.status = SolveStatus::max_iter;
  }
  if (has_ineq) {
    auto [v, s] = work.ineq_value();
    if (v > 1e-6 * s) rep.status = SolveStatus::max_iter;
  }
  double kkt = 0.0;
  for (size_t b = 0; b < prob.objective.size(); ++b) {
    cvec r = prob.objective[b].hessian * work.x[b] - prob.objective[b].linear;
    if (has_ineq)
      r += mu * (prob.quad_ineq[b].hessian * work.x[b] -
                 prob.quad_ineq[b].linear);
    r += work.diag[b].cast<cplx>().asDiagonal() * work.x[b];
    kkt += 4.0 * r.squaredNorm();
  }
  rep.kkt_residual = std::sqrt(kkt);
  return {work.x, rep};
}

// ---------------------------------------------------------------------------
// Real QCQP.

namespace {

std::vector<Halfspace> with_box(const std::vector<Halfspace>& hs,
                                const std::optional<Box>& box,
                                Eigen::Index n) {
  std::vector<Halfspace> all = hs;
  if (box) {
    for (Eigen::Index i = 0; i < n; ++i) {
      vec e = vec::Zero(n);
      e[i] = 1.0;
      all.push_back({e, box->lo[i]});
      all.push_back({-e, -box->hi[i]});
    }
  }
  return all;
}

bool feasible_point(const vec& x, const std::vector<Halfspace>& hs) {
  for (const Halfspace& h : hs) {
    const double slack = h.normal.dot(x) - h.bound;
    if (slack < -1e-10 * (1.0 + h.normal.norm() * x.norm() + std::abs(h.bound)))
      return false;
  }
  return true;
}

// Minimize x^T P x + q^T x over the polyhedron by active-set enumeration.
// Exact for n <= 2 with P PD. Returns nullopt when the polyhedron is empty.
std::optional<vec> min_over_polyhedron(const mat& p, const vec& q,
                                       const std::vector<Halfspace>& hs) {
  const Eigen::Index n = q.size();
  std::optional<vec> best;
  double best_val = std::numeric_limits<double>::infinity();
  auto consider = [&](const vec& x) {
    if (!x.allFinite() || !feasible_point(x, hs)) return;
    const double v = x.dot(p * x) + q.dot(x);
    if (v < best_val) {
      best_val = v;
      best = x;
    }
  };

  consider(p.ldlt().solve(-0.5 * q));
  if (n == 1) {
    for (const Halfspace& h : hs)
      if (h.normal[0] != 0.0) consider(vec::Constant(1, h.bound / h.normal[0]));
    return best;
  }
  for (size_t i = 0; i < hs.size(); ++i) {
    const vec& a = hs[i].normal;
    const double an2 = a.squaredNorm();
    if (an2 == 0.0) continue;
    const vec xp = a * (hs[i].bound / an2);
    vec d(2);
    d << -a[1], a[0];
    const double curv = d.dot(p * d);
    if (curv > 0.0) {
      const double t = -(2.0 * xp.dot(p * d) + q.dot(d)) / (2.0 * curv);
      consider(xp + t * d);
    }
    for (size_t j = i + 1; j < hs.size(); ++j) {
      mat a2(2, 2);
      a2.row(0) = hs[i].normal.transpose();
      a2.row(1) = hs[j].normal.transpose();
      if (std::abs(a2.determinant()) < 1e-14 * (1.0 + a2.cwiseAbs().maxCoeff()))
        continue;
      vec b2(2);
      b2 << hs[i].bound, hs[j].bound;
      consider(a2.fullPivLu().solve(b2));
    }
  }
  return best;
}

double kkt_stationarity(const RealQuadratic& obj,
                        const std::optional<RealQuadratic>& ineq, double mu,
                        const std::vector<Halfspace>& hs, const vec& x) {
  vec g = obj.grad(x);
  if (ineq) g += mu * ineq->grad(x);
  std::vector<const Halfspace*> active;
  for (const Halfspace& h : hs)
    if (std::abs(h.normal.dot(x) - h.bound) <=
        1e-7 * (1.0 + std::abs(h.bound) + h.normal.norm() * x.norm()))
      active.push_back(&h);
  if (active.empty()) return g.norm();
  mat a(x.size(), static_cast<Eigen::Index>(active.size()));
  for (size_t i = 0; i < active.size(); ++i) a.col(i) = active[i]->normal;
  vec lam = a.colPivHouseholderQr().solve(g);
  lam = lam.cwiseMax(0.0);
  return (g - a * lam).norm();
}

}  // namespace

std::pair<vec, SolveReport> solve_qcqp(
    const RealQuadratic& objective,
    const std::optional<RealQuadratic>& quad_ineq,
    const std::vector<Halfspace>& halfspaces, const std::optional<Box>& box) {
  const Eigen::Index n = objective.p1.size();
  SolveReport rep;

  const double ridge =
      1e-10 * (1.0 + objective.p2.cwiseAbs().maxCoeff());

  auto finish = [&](vec x, double mu) {
    rep.dual = mu;
    rep.objective = objective.value(x);
    const auto all_hs = with_box(halfspaces, box, n);
    rep.kkt_residual = kkt_stationarity(objective, quad_ineq, mu, all_hs, x);
    return std::make_pair(std::move(x), rep);
  };

  auto ineq_scaled = [&](const vec& x) {
    const double quad = x.dot(quad_ineq->p2 * x);
    const double lin = quad_ineq->p1.dot(x);
    const double scale =
        std::abs(quad) + std::abs(lin) + std::abs(quad_ineq->p0) + 1e-300;
    return std::make_pair(quad + lin + quad_ineq->p0, scale);
  };

  if (n <= 2) {
    const auto all_hs = with_box(halfspaces, box, n);
    auto solve_mu = [&](double mu) {
      mat p = objective.p2 + ridge * mat::Identity(n, n);
      vec q = objective.p1;
      if (quad_ineq) {
        p += mu * quad_ineq->p2;
        q += mu * quad_ineq->p1;
      }
      return min_over_polyhedron(p, q, all_hs);
    };

    auto x0 = solve_mu(0.0);
    if (!x0) {
      rep.status = SolveStatus::infeasible;
      return {vec::Zero(n), rep};
    }
    if (!quad_ineq) return finish(*x0, 0.0);
    auto [v0, s0] = ineq_scaled(*x0);
    if (v0 <= 1e-9 * s0) return finish(*x0, 0.0);

    double lo = 0.0, hi = 1.0;
    int iters = 0;
    vec xh;
    for (;;) {
      xh = *solve_mu(hi);
      ++iters;
      auto [v, s] = ineq_scaled(xh);
      if (v <= 1e-9 * s) break;
      if (hi >= kMuCap || iters >= kBisectCap) {
        rep.status = SolveStatus::infeasible;
        rep.objective = v;  // certificate: near the min of the constraint
        rep.dual = hi;
        return {xh, rep};
      }
      lo = hi;
      hi *= 2.0;
    }
    while (iters < kBisectCap) {
      ++iters;
      const double mid = 0.5 * (lo + hi);
      vec xm = *solve_mu(mid);
      auto [v, s] = ineq_scaled(xm);
      if (v > 1e-9 * s) {
        lo = mid;
      } else {
        hi = mid;
        xh = xm;
      }
      if ((hi - lo) <= 1e-10 * (1.0 + hi)) break;
      if (std::abs(mid * v) <= 1e-8 * s * (1.0 + mid)) break;
    }
    if (iters >= kBisectCap) rep.status = SolveStatus::max_iter;
    return finish(xh, hi);
  }

  // Diagonal path: coordinate-separable quadratics over a box.
  if (!halfspaces.empty() || !box)
    throw std::logic_error("solve_qcqp: n > 2 requires diagonal form with box");
  auto diag_ok = [](const mat& m) {
    return (m - m.diagonal().asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() <=
           1e-12 * (1.0 + m.cwiseAbs().maxCoeff());
  };
  if (!diag_ok(objective.p2) || (quad_ineq && !diag_ok(quad_ineq->p2)))
    throw std::logic_error("solve_qcqp: n > 2 requires diagonal quadratics");

  auto solve_mu = [&](double mu) {
    vec x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double a = objective.p2(i, i) + ridge;
      double b = objective.p1[i];
      if (quad_ineq) {
        a += mu * quad_ineq->p2(i, i);
        b += mu * quad_ineq->p1[i];
      }
      const double xi = (a > 0.0) ? -b / (2.0 * a)
                                  : (b > 0.0 ? box->lo[i] : box->hi[i]);
      x[i] = std::clamp(xi, box->lo[i], box->hi[i]);
    }
    return x;
  };

  vec x0 = solve_mu(0.0);
  if (!quad_ineq) return finish(x0, 0.0);
  auto [v0, s0] = ineq_scaled(x0);
  if (v0 <= 1e-9 * s0) return finish(x0, 0.0);

  double lo = 0.0, hi = 1.0;
  int iters = 0;
  vec xh;
  for (;;) {
    xh = solve_mu(hi);
    ++iters;
    auto [v, s] = ineq_scaled(xh);
    if (v <= 1e-9 * s) break;
    if (hi >= kMuCap || iters >= kBisectCap) {
      rep.status = SolveStatus::infeasible;
      rep.objective = v;
      rep.dual = hi;
      return {xh, rep};
    }
    lo = hi;
    hi *= 2.0;
  }
  while (iters < kBisectCap) {
    ++iters;
    const double mid = 0.5 * (lo + hi);
    vec xm = solve_mu(mid);
    auto [v, s] = ineq_scaled(xm);
    if (v > 1e-9 * s) {
      lo = mid;
    } else {
      hi = mid;
      xh = xm;
    }
    if ((hi - lo) <= 1e-10 * (1.0 + hi)) break;
    if (std::abs(mid * v) <= 1e-8 * s * (1.0 + mid)) break;
  }
  if (iters >= kBisectCap) rep.status = SolveStatus::max_iter;
  return finish(xh, hi);
}

}  // namespace manisac::solvers
