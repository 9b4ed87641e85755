#include "manisac/position.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

#include "manisac/channel.hpp"
#include "manisac/metrics.hpp"

namespace manisac::position {

double phase_sum_eval(const PhaseSum& ps, const Vec2& t) {
  const double k = 2.0 * kPi / ps.wavelength;
  double acc = 0.0;
  for (size_t l = 0; l < ps.amplitudes.size(); ++l)
    acc += ps.amplitudes[l] *
           std::cos(k * t.dot(ps.directions[l]) - ps.phases[l]);
  return acc;
}

Vec2 phase_sum_grad(const PhaseSum& ps, const Vec2& t) {
  const double k = 2.0 * kPi / ps.wavelength;
  Vec2 g = Vec2::Zero();
  for (size_t l = 0; l < ps.amplitudes.size(); ++l)
    g -= ps.amplitudes[l] * k *
         std::sin(k * t.dot(ps.directions[l]) - ps.phases[l]) *
         ps.directions[l];
  return g;
}

solvers::RealQuadratic QuadraticSurrogate::to_quadratic() const {
  const double s = (sense == BoundSense::upper) ? 0.5 : -0.5;
  solvers::RealQuadratic q;
  q.p2 = s * curvature * mat::Identity(2, 2);
  q.p1 = grad - 2.0 * s * curvature * anchor;
  q.p0 = base - grad.dot(anchor) + s * curvature * anchor.squaredNorm();
  return q;
}

QuadraticSurrogate lemma1_bound(const PhaseSum& ps, const Vec2& anchor,
                                BoundSense sense) {
  double amp_sum = 0.0;
  for (double a : ps.amplitudes) amp_sum += a;
  QuadraticSurrogate s;
  s.curvature = 8.0 * kPi * kPi / (ps.wavelength * ps.wavelength) * amp_sum;
  s.grad = phase_sum_grad(ps, anchor);
  s.base = phase_sum_eval(ps, anchor);
  s.anchor = anchor;
  s.sense = sense;
  return s;
}

std::pair<cvec, double> lmax_majorizer(const cmat& f_quad, const cvec& h0,
                                       const cvec& extra) {
  auto [lam, v] = solvers::lambda_max(f_quad);
  const double lam_up = lam + 1e-8 * (1.0 + std::abs(lam));
  const cvec f = extra + 2.0 * (f_quad * h0 - lam_up * h0);
  const double len = static_cast<double>(h0.size());
  const double c = 2.0 * lam_up * len - std::real(h0.dot(f_quad * h0));
  return {f, c};
}

std::vector<solvers::Halfspace> linearize_min_distance(
    const Vec2& anchor, std::span<const Vec2> others, double min_dist) {
  std::vector<solvers::Halfspace> hs;
  hs.reserve(others.size());
  for (const Vec2& o : others) {
    const Vec2 diff = anchor - o;
    const double dist = diff.norm();
    if (dist < 1e-12)
      throw std::invalid_argument(
          "linearize_min_distance: anchor coincides with another antenna");
    solvers::Halfspace h;
    h.normal = diff / dist;
    h.bound = min_dist + h.normal.dot(o);
    hs.push_back(std::move(h));
  }
  return hs;
}

namespace {

std::vector<Vec2> to_dirs(std::span<const Angles> angs) {
  std::vector<Vec2> d;
  d.reserve(angs.size());
  for (const Angles& a : angs) d.push_back(a.direction());
  return d;
}

// Accumulates terms Re{coef * exp(j 2pi/wl t.dir)} into a phase sum.
// Coefficients sharing a direction are merged coherently before amplitudes
// are taken, keeping the curvature bound as tight as the representation
// allows.
struct PhaseAccum {
  std::vector<cplx> coefs;
  std::vector<Vec2> dirs;
  double wavelength;

  explicit PhaseAccum(double wl) : wavelength(wl) {}

  void add_coef(cplx coef, const Vec2& dir) {
    if (coef == cplx(0.0)) return;
    for (size_t i = 0; i < dirs.size(); ++i)
      if ((dirs[i] - dir).squaredNorm() < 1e-24) {
        coefs[i] += coef;
        return;
      }
    coefs.push_back(coef);
    dirs.push_back(dir);
  }

  // Re{f^H v(t)} with v_l(t) = exp(j 2pi/wl t.dirs[l]).
  void add_frv_linear(const cvec& f, const std::vector<Vec2>& frv_dirs) {
    for (Eigen::Index l = 0; l < f.size(); ++l)
      add_coef(std::conj(f[l]), frv_dirs[static_cast<size_t>(l)]);
  }

  PhaseSum finalize() const {
    PhaseSum ps;
    ps.wavelength = wavelength;
    for (size_t i = 0; i < coefs.size(); ++i) {
      if (coefs[i] == cplx(0.0)) continue;
      ps.amplitudes.push_back(std::abs(coefs[i]));
      ps.phases.push_back(-std::arg(coefs[i]));
      ps.directions.push_back(dirs[i]);
    }
    return ps;
  }
};

// Quadratic-plus-linear form in a unit-modulus response vector v(t):
//   v^H F v + Re{f^H v}, built from terms scale * |c + a (b^H v)|^2 and
//   Re{alpha (b^H v)}; majorized into a phase sum via the lambda_max bound.
struct QuadAccum {
  cmat f_quad;
  cvec f_lin;
  const std::vector<Vec2>& dirs;
  cvec v0;

  QuadAccum(const std::vector<Vec2>& directions, cvec anchor_frv)
      : f_quad(cmat::Zero(anchor_frv.size(), anchor_frv.size())),
        f_lin(cvec::Zero(anchor_frv.size())),
        dirs(directions),
        v0(std::move(anchor_frv)) {}

  void add_pattern(double scale, cplx c, cplx a, const cvec& b) {
    if (scale == 0.0 || a == cplx(0.0)) return;
    f_quad.noalias() += (scale * std::norm(a)) * (b * b.adjoint());
    f_lin += (2.0 * scale * c * std::conj(a)) * b;
  }

  void add_linear(cplx alpha, const cvec& b) {
    f_lin += std::conj(alpha) * b;
  }

  void majorize_into(PhaseAccum& pa, double sign = 1.0) const {
    if (sign >= 0.0) {
      auto [f, c] = lmax_majorizer(f_quad, v0, f_lin);
      pa.add_frv_linear(f, dirs);
    } else {
      // lower bound of the form: majorize the negated quadratic
      auto [f, c] = lmax_majorizer(-f_quad, v0, -f_lin);
      pa.add_frv_linear(-f, dirs);
    }
  }
};

struct AttemptConfig {
  bool check_sensing = true;
  double scan_cap = 4096.0;
};

// True feasibility of the full layout: region box everywhere plus pairwise
// spacing inside each BS array (the surrogate only sees a linearization).
bool layout_feasible(const Scenario& sc, const PositionLayout& layout) {
  const double half = 0.5 * sc.region_a + 1e-12;
  auto in_box = [&](const Vec2& p) {
    return std::abs(p.x()) <= half && std::abs(p.y()) <= half;
  };
  auto array_ok = [&](const std::vector<Vec2>& arr) {
    for (size_t i = 0; i < arr.size(); ++i) {
      if (!in_box(arr[i])) return false;
      for (size_t j = i + 1; j < arr.size(); ++j)
        if ((arr[i] - arr[j]).norm() < sc.min_dist - 1e-12) return false;
    }
    return true;
  };
  for (const auto& arr : layout.tbs)
    if (!array_ok(arr)) return false;
  for (const auto& arr : layout.rbs)
    if (!array_ok(arr)) return false;
  for (const Vec2& p : layout.dl_user)
    if (!in_box(p)) return false;
  for (const Vec2& p : layout.ul_user)
    if (!in_box(p)) return false;
  return true;
}

bool attempt_move(const Scenario& sc, PositionLayout& layout, ChannelSet& ch,
                  const DecisionState& st, const MoveSurrogate& ms, Vec2* slot,
                  const AttemptConfig& cfg = {}) {
  Vec2 target;
  if (!ms.constraint && ms.halfspaces.empty()) {
    // separable quadratic over a box: per-coordinate clipping
    const double delta = 2.0 * ms.objective.p2(0, 0);
    if (delta <= 0.0) return false;
    for (int c = 0; c < 2; ++c)
      target[c] = std::clamp(-ms.objective.p1[c] / delta, ms.box.lo[c],
                             ms.box.hi[c]);
  } else {
    auto [x, rep] = solvers::solve_qcqp(ms.objective, ms.constraint,
                                        ms.halfspaces, ms.box);
    if (rep.status == solvers::SolveStatus::infeasible) return false;
    target = x;
  }
  if ((target - ms.anchor).norm() <= 1e-12) return false;
  if (ms.objective.value(target) > ms.objective.value(ms.anchor) + 1e-12 *
          (1.0 + std::abs(ms.objective.value(ms.anchor))))
    return false;

  const double mse_old = metrics::weighted_mse(sc, ch, st);
  const Vec2 saved = *slot;

  // Evaluates a candidate against the true objective and constraints.
  auto probe = [&](const Vec2& t, double best_mse,
                   ChannelSet& out) -> std::optional<double> {
    *slot = t;
    if (!layout_feasible(sc, layout)) return std::nullopt;
    ChannelSet moved = channel::stack_channels(layout, sc);
    const double mse = metrics::weighted_mse(sc, moved, st);
    if (mse > best_mse) return std::nullopt;
    if (cfg.check_sensing &&
        metrics::sinr_radar(sc, moved, st) < sc.gamma_r * (1.0 - 1e-9))
      return std::nullopt;
    out = std::move(moved);
    return mse;
  };

  ChannelSet best_ch;
  auto base = probe(target, mse_old + 1e-7 * (1.0 + std::abs(mse_old)), best_ch);
  if (!base) {
    *slot = saved;
    return false;
  }

  // The conservative curvature bound makes the surrogate step short; probe
  // geometric extrapolations of the accepted step and keep the best point
  // that still passes the exact checks. The exact objective is oscillatory
  // along the ray, so non-improving multiples are skipped rather than
  // terminating the scan.
  Vec2 best_t = target;
  double best_mse = *base;
  double best_s = 1.0;
  const Vec2 d = target - ms.anchor;
  auto try_scale = [&](double s) {
    Vec2 cand = ms.anchor + s * d;
    for (int c = 0; c < 2; ++c)
      cand[c] = std::clamp(cand[c], ms.box.lo[c], ms.box.hi[c]);
    if ((cand - best_t).norm() <= 1e-12) return false;
    ChannelSet cand_ch;
    auto mse = probe(cand, best_mse, cand_ch);
    if (!mse) return false;
    best_t = cand;
    best_mse = *mse;
    best_s = s;
    best_ch = std::move(cand_ch);
    return true;
  };
  Vec2 last = target;
  for (double s = 2.0; s <= cfg.scan_cap; s *= 2.0) {
    Vec2 cand = ms.anchor + s * d;
    for (int c = 0; c < 2; ++c)
      cand[c] = std::clamp(cand[c], ms.box.lo[c], ms.box.hi[c]);
    if ((cand - last).norm() <= 1e-12) break;  // clamped against the region
    last = cand;
    try_scale(s);
  }
  if (best_s > 1.0) {
    try_scale(0.75 * best_s);
    try_scale(1.5 * best_s);
  }

  *slot = best_t;
  ch = std::move(best_ch);
  return true;
}

solvers::Box region_box(const Scenario& sc) {
  solvers::Box b;
  b.lo = vec::Constant(2, -0.5 * sc.region_a);
  b.hi = vec::Constant(2, 0.5 * sc.region_a);
  return b;
}

double ul_weight(const Scenario& sc, const DecisionState& st, int l) {
  return sc.weight_ul[l] * st.omega_ul[l];
}
double dl_weight(const Scenario& sc, const DecisionState& st, int k) {
  return sc.weight_dl[k] * st.omega_dl[k];
}

}  // namespace

MoveSurrogate build_tbs_move(const Scenario& sc, const PositionLayout& layout,
                             const ChannelSet& ch, const DecisionState& st,
                             int m, int n) {
  const Dims& d = sc.dims;
  const double wl = sc.wavelength;
  const Eigen::Index gi = static_cast<Eigen::Index>(m) * d.nt + n;
  const Vec2 t0 = layout.tbs[m][n];

  PhaseAccum obj_ph(wl), con_ph(wl);

  // Downlink channels through this antenna.
  for (int k = 0; k < d.kd; ++k) {
    const PathSet& ps = sc.dl_paths[m][k];
    const std::vector<Vec2> dirs = to_dirs(ps.departure);
    const cvec rx = channel::frv(layout.dl_user[k], ps.arrival, wl);
    const cvec b = ps.response.conjugate().asDiagonal() * rx;
    const cvec v0 = channel::frv(t0, ps.departure, wl);
    const cplx h0 = v0.dot(b);  // current h_{d,m,k}[n]
    QuadAccum qa(dirs, v0);
    const double sk = dl_weight(sc, st, k) * std::norm(st.beta_dl[k]);
    for (int i = 0; i < d.kd; ++i) {
      const cplx full = ch.hd[k].dot(st.w[i]);
      const cplx a = st.w[i][gi];
      const cplx c = full - std::conj(h0) * a;
      qa.add_pattern(sk, c, a, b);
      if (i == k)
        qa.add_linear(-2.0 * dl_weight(sc, st, k) * std::conj(st.beta_dl[k]) * a,
                      b);
    }
    for (int col = 0; col < d.nt; ++col) {
      const cplx full =
          ch.hd[k].segment(gi - n, d.nt).dot(st.wr[m].col(col));
      const cplx a = st.wr[m](n, col);
      qa.add_pattern(sk, full - std::conj(h0) * a, a, b);
    }
    qa.majorize_into(obj_ph);
  }

  // Radar steering through this antenna: phase-only terms.
  for (int j = 0; j <= d.kt; ++j) {
    const Vec2 dir = sc.radar.tbs_angles[m][j].direction();
    const cplx beta = sc.radar.fading_t[m][j];
    const cplx g0 = ch.gt[j][gi];
    double echo = 0.0;  // echo weight reaching the comm filters
    for (int l = 0; l < d.ku; ++l)
      echo += ul_weight(sc, st, l) * std::norm(st.beta_ul[l]) *
              sc.radar.rcs_var[j] * std::norm(st.u_comm[l].dot(ch.gr[j]));
    const double sense = sc.radar.rcs_var[j] * std::norm(st.u_sense.dot(ch.gr[j]));
    const double con_scale = (j == 0) ? -sense / sc.gamma_r : sense;
    auto add_term = [&](cplx full, cplx a) {
      const cplx c = full - std::conj(g0) * a;
      const cplx coef = 2.0 * c * beta * std::conj(a);
      obj_ph.add_coef(echo * coef, dir);
      con_ph.add_coef(con_scale * coef, dir);
    };
    for (int k = 0; k < d.kd; ++k)
      add_term(ch.gt[j].dot(st.w[k]), st.w[k][gi]);
    for (int col = 0; col < d.nt; ++col)
      add_term(ch.gt[j].segment(gi - n, d.nt).dot(st.wr[m].col(col)),
               st.wr[m](n, col));
  }

  const QuadraticSurrogate obj_s = lemma1_bound(obj_ph.finalize(), t0, BoundSense::upper);
  const QuadraticSurrogate con_s = lemma1_bound(con_ph.finalize(), t0, BoundSense::upper);

  MoveSurrogate ms;
  ms.anchor = t0;
  ms.objective = obj_s.to_quadratic();
  // recover the dropped constants so the surrogate touches the true value
  ms.objective.p0 +=
      metrics::weighted_mse(sc, ch, st) - ms.objective.value(t0);
  ms.constraint = con_s.to_quadratic();
  ms.constraint->p0 += metrics::sensing_constraint_value(sc, ch, st) -
                       ms.constraint->value(t0);
  std::vector<Vec2> others;
  for (int i = 0; i < d.nt; ++i)
    if (i != n) others.push_back(layout.tbs[m][i]);
  ms.halfspaces = linearize_min_distance(t0, others, sc.min_dist);
  ms.box = region_box(sc);
  return ms;
}

MoveSurrogate build_rbs_move(const Scenario& sc, const PositionLayout& layout,
                             const ChannelSet& ch, const DecisionState& st,
                             int p, int n) {
  const Dims& d = sc.dims;
  const double wl = sc.wavelength;
  const Eigen::Index gi = static_cast<Eigen::Index>(p) * d.nr + n;
  const Vec2 r0 = layout.rbs[p][n];

  PhaseAccum obj_ph(wl), con_ph(wl);

  // Uplink channels through this antenna.
  for (int i = 0; i < d.ku; ++i) {
    const PathSet& ps = sc.ul_paths[p][i];
    const std::vector<Vec2> dirs = to_dirs(ps.departure);
    const cvec rx = channel::frv(layout.ul_user[i], ps.arrival, wl);
    const cvec b = ps.response.conjugate().asDiagonal() * rx;
    const cvec v0 = channel::frv(r0, ps.departure, wl);
    const cplx h0 = v0.dot(b);  // current h_{u,p,i}[n]
    QuadAccum qa_obj(dirs, v0), qa_con(dirs, v0);
    for (int l = 0; l < d.ku; ++l) {
      const double scale =
          ul_weight(sc, st, l) * std::norm(st.beta_ul[l]) * st.q[i];
      const cplx a = std::conj(st.u_comm[l][gi]);
      const cplx c = st.u_comm[l].dot(ch.hu[i]) - a * h0;
      qa_obj.add_pattern(scale, std::conj(c), st.u_comm[l][gi], b);
      if (l == i)
        qa_obj.add_linear(-2.0 * ul_weight(sc, st, l) * std::sqrt(st.q[l]) *
                              st.beta_ul[l] * st.u_comm[l][gi],
                          b);
    }
    {
      const cplx a = std::conj(st.u_sense[gi]);
      const cplx c = st.u_sense.dot(ch.hu[i]) - a * h0;
      qa_con.add_pattern(st.q[i], std::conj(c), st.u_sense[gi], b);
    }
    qa_obj.majorize_into(obj_ph);
    qa_con.majorize_into(con_ph);
  }

  // Radar return steering through this antenna: phase-only terms.
  for (int j = 0; j <= d.kt; ++j) {
    const Vec2 dir = sc.radar.rbs_angles[p][j].direction();
    const cplx beta = sc.radar.fading_r[p][j];
    const cplx g0 = ch.gr[j][gi];
    const double pj = metrics::beam_power(sc, ch, st, j);
    for (int l = 0; l < d.ku; ++l) {
      const double scale = ul_weight(sc, st, l) * std::norm(st.beta_ul[l]) *
                           sc.radar.rcs_var[j] * pj;
      const cplx a = st.u_comm[l][gi];
      const cplx c = st.u_comm[l].dot(ch.gr[j]) - std::conj(a) * g0;
      obj_ph.add_coef(2.0 * scale * std::conj(c) * std::conj(a) * beta, dir);
    }
    {
      const double scale = ((j == 0) ? -1.0 / sc.gamma_r : 1.0) *
                           sc.radar.rcs_var[j] * pj;
      const cplx a = st.u_sense[gi];
      const cplx c = st.u_sense.dot(ch.gr[j]) - std::conj(a) * g0;
      con_ph.add_coef(2.0 * scale * std::conj(c) * std::conj(a) * beta, dir);
    }
  }

  const QuadraticSurrogate obj_s = lemma1_bound(obj_ph.finalize(), r0, BoundSense::upper);
  const QuadraticSurrogate con_s = lemma1_bound(con_ph.finalize(), r0, BoundSense::upper);

  MoveSurrogate ms;
  ms.anchor = r0;
  ms.objective = obj_s.to_quadratic();
  ms.objective.p0 +=
      metrics::weighted_mse(sc, ch, st) - ms.objective.value(r0);
  ms.constraint = con_s.to_quadratic();
  ms.constraint->p0 += metrics::sensing_constraint_value(sc, ch, st) -
                       ms.constraint->value(r0);
  std::vector<Vec2> others;
  for (int i = 0; i < d.nr; ++i)
    if (i != n) others.push_back(layout.rbs[p][i]);
  ms.halfspaces = linearize_min_distance(r0, others, sc.min_dist);
  ms.box = region_box(sc);
  return ms;
}

MoveSurrogate build_dl_user_move(const Scenario& sc,
                                 const PositionLayout& layout,
                                 const ChannelSet& ch, const DecisionState& st,
                                 int k) {
  const Dims& d = sc.dims;
  const double wl = sc.wavelength;
  const Vec2 t0 = layout.dl_user[k];

  // Stack the receive-side response vectors of every link touching this user:
  // the M_t downlink links, then the K_u user-to-user links.
  std::vector<Vec2> dirs;
  std::vector<Eigen::Index> start(d.mt + d.ku + 1, 0);
  for (int m = 0; m < d.mt; ++m) {
    const auto ds = to_dirs(sc.dl_paths[m][k].arrival);
    dirs.insert(dirs.end(), ds.begin(), ds.end());
    start[m + 1] = static_cast<Eigen::Index>(dirs.size());
  }
  for (int l = 0; l < d.ku; ++l) {
    const auto ds = to_dirs(sc.du_paths[k][l].arrival);
    dirs.insert(dirs.end(), ds.begin(), ds.end());
    start[d.mt + l + 1] = static_cast<Eigen::Index>(dirs.size());
  }
  const Eigen::Index total = static_cast<Eigen::Index>(dirs.size());
  cvec v0(total);
  for (int m = 0; m < d.mt; ++m)
    v0.segment(start[m], start[m + 1] - start[m]) =
        channel::frv(t0, sc.dl_paths[m][k].arrival, wl);
  for (int l = 0; l < d.ku; ++l)
    v0.segment(start[d.mt + l], start[d.mt + l + 1] - start[d.mt + l]) =
        channel::frv(t0, sc.du_paths[k][l].arrival, wl);

  QuadAccum qa(dirs, v0);
  const double sk = dl_weight(sc, st, k) * std::norm(st.beta_dl[k]);

  std::vector<cmat> tx(d.mt);  // departure-side response matrices
  for (int m = 0; m < d.mt; ++m)
    tx[m] = channel::frm(layout.tbs[m], sc.dl_paths[m][k].departure, wl);

  auto stack_tx = [&](auto&& per_tbs_vec) {  // z with z_m = Sigma T x_m
    cvec z = cvec::Zero(total);
    for (int m = 0; m < d.mt; ++m)
      z.segment(start[m], start[m + 1] - start[m]) =
          sc.dl_paths[m][k].response.asDiagonal() * (tx[m] * per_tbs_vec(m));
    return z;
  };

  for (int i = 0; i < d.kd; ++i) {
    const cvec z = stack_tx([&](int m) {
      return st.w[i].segment(static_cast<Eigen::Index>(m) * d.nt, d.nt);
    });
    qa.add_pattern(sk, cplx(0.0), cplx(1.0), z);
    if (i == k)
      qa.add_linear(-2.0 * dl_weight(sc, st, k) * st.beta_dl[k], z);
  }
  for (int m = 0; m < d.mt; ++m)
    for (int col = 0; col < d.nt; ++col) {
      cvec z = cvec::Zero(total);
      z.segment(start[m], start[m + 1] - start[m]) =
          sc.dl_paths[m][k].response.asDiagonal() * (tx[m] * st.wr[m].col(col));
      qa.add_pattern(sk, cplx(0.0), cplx(1.0), z);
    }
  for (int l = 0; l < d.ku; ++l) {
    const PathSet& ps = sc.du_paths[k][l];
    cvec z = cvec::Zero(total);
    z.segment(start[d.mt + l], start[d.mt + l + 1] - start[d.mt + l]) =
        ps.response.asDiagonal() *
        channel::frv(layout.ul_user[l], ps.departure, wl);
    qa.add_pattern(sk * st.q[l], cplx(0.0), cplx(1.0), z);
  }

  PhaseAccum obj_ph(wl);
  qa.majorize_into(obj_ph);
  const QuadraticSurrogate obj_s = lemma1_bound(obj_ph.finalize(), t0, BoundSense::upper);

  MoveSurrogate ms;
  ms.anchor = t0;
  ms.objective = obj_s.to_quadratic();
  ms.objective.p0 +=
      metrics::weighted_mse(sc, ch, st) - ms.objective.value(t0);
  ms.box = region_box(sc);
  return ms;
}

MoveSurrogate build_ul_user_move(const Scenario& sc,
                                 const PositionLayout& layout,
                                 const ChannelSet& ch, const DecisionState& st,
                                 int l) {
  const Dims& d = sc.dims;
  const double wl = sc.wavelength;
  const Vec2 t0 = layout.ul_user[l];

  // Stack the transmit-side response vectors of this user's links: the M_r
  // uplink links, then the K_d user-to-user links.
  std::vector<Vec2> dirs;
  std::vector<Eigen::Index> start(d.mr + d.kd + 1, 0);
  for (int p = 0; p < d.mr; ++p) {
    const auto ds = to_dirs(sc.ul_paths[p][l].arrival);
    dirs.insert(dirs.end(), ds.begin(), ds.end());
    start[p + 1] = static_cast<Eigen::Index>(dirs.size());
  }
  for (int k = 0; k < d.kd; ++k) {
    const auto ds = to_dirs(sc.du_paths[k][l].departure);
    dirs.insert(dirs.end(), ds.begin(), ds.end());
    start[d.mr + k + 1] = static_cast<Eigen::Index>(dirs.size());
  }
  const Eigen::Index total = static_cast<Eigen::Index>(dirs.size());
  cvec v0(total);
  for (int p = 0; p < d.mr; ++p)
    v0.segment(start[p], start[p + 1] - start[p]) =
        channel::frv(t0, sc.ul_paths[p][l].arrival, wl);
  for (int k = 0; k < d.kd; ++k)
    v0.segment(start[d.mr + k], start[d.mr + k + 1] - start[d.mr + k]) =
        channel::frv(t0, sc.du_paths[k][l].departure, wl);

  QuadAccum qa_obj(dirs, v0), qa_con(dirs, v0);

  std::vector<cmat> tx(d.mr);
  for (int p = 0; p < d.mr; ++p)
    tx[p] = channel::frm(layout.rbs[p], sc.ul_paths[p][l].departure, wl);

  auto filter_vec = [&](const cvec& u) {  // c with u^H h_{u,l} = c^H v(t)
    cvec c = cvec::Zero(total);
    for (int p = 0; p < d.mr; ++p)
      c.segment(start[p], start[p + 1] - start[p]) =
          sc.ul_paths[p][l].response.asDiagonal() *
          (tx[p] * u.segment(static_cast<Eigen::Index>(p) * d.nr, d.nr));
    return c;
  };

  for (int i = 0; i < d.ku; ++i) {
    const double scale =
        ul_weight(sc, st, i) * std::norm(st.beta_ul[i]) * st.q[l];
    const cvec c = filter_vec(st.u_comm[i]);
    qa_obj.add_pattern(scale, cplx(0.0), cplx(1.0), c);
    if (i == l)
      qa_obj.add_linear(-2.0 * ul_weight(sc, st, l) * std::sqrt(st.q[l]) *
                            std::conj(st.beta_ul[l]),
                        c);
  }
  for (int k = 0; k < d.kd; ++k) {
    const PathSet& ps = sc.du_paths[k][l];
    cvec b = cvec::Zero(total);
    b.segment(start[d.mr + k], start[d.mr + k + 1] - start[d.mr + k]) =
        ps.response.conjugate().asDiagonal() *
        channel::frv(layout.dl_user[k], ps.arrival, wl);
    qa_obj.add_pattern(dl_weight(sc, st, k) * std::norm(st.beta_dl[k]) * st.q[l],
                       cplx(0.0), cplx(1.0), b);
  }
  qa_con.add_pattern(st.q[l], cplx(0.0), cplx(1.0), filter_vec(st.u_sense));

  PhaseAccum obj_ph(wl), con_ph(wl);
  qa_obj.majorize_into(obj_ph);
  qa_con.majorize_into(con_ph);
  const QuadraticSurrogate obj_s = lemma1_bound(obj_ph.finalize(), t0, BoundSense::upper);
  const QuadraticSurrogate con_s = lemma1_bound(con_ph.finalize(), t0, BoundSense::upper);

  MoveSurrogate ms;
  ms.anchor = t0;
  ms.objective = obj_s.to_quadratic();
  ms.objective.p0 +=
      metrics::weighted_mse(sc, ch, st) - ms.objective.value(t0);
  ms.constraint = con_s.to_quadratic();
  ms.constraint->p0 += metrics::sensing_constraint_value(sc, ch, st) -
                       ms.constraint->value(t0);
  ms.box = region_box(sc);
  return ms;
}

bool update_tbs_ma(const Scenario& sc, PositionLayout& layout, ChannelSet& ch,
                   const DecisionState& st, int m, int n, double scan_cap) {
  const MoveSurrogate ms = build_tbs_move(sc, layout, ch, st, m, n);
  AttemptConfig cfg;
  cfg.scan_cap = scan_cap;
  return attempt_move(sc, layout, ch, st, ms, &layout.tbs[m][n], cfg);
}

bool update_rbs_ma(const Scenario& sc, PositionLayout& layout, ChannelSet& ch,
                   const DecisionState& st, int p, int n, double scan_cap) {
  const MoveSurrogate ms = build_rbs_move(sc, layout, ch, st, p, n);
  AttemptConfig cfg;
  cfg.scan_cap = scan_cap;
  return attempt_move(sc, layout, ch, st, ms, &layout.rbs[p][n], cfg);
}

bool update_dl_user_ma(const Scenario& sc, PositionLayout& layout,
                       ChannelSet& ch, const DecisionState& st, int k,
                       double scan_cap) {
  const MoveSurrogate ms = build_dl_user_move(sc, layout, ch, st, k);
  AttemptConfig cfg;
  cfg.check_sensing = false;  // downlink user position never enters sensing
  cfg.scan_cap = scan_cap;
  return attempt_move(sc, layout, ch, st, ms, &layout.dl_user[k], cfg);
}

bool update_ul_user_ma(const Scenario& sc, PositionLayout& layout,
                       ChannelSet& ch, const DecisionState& st, int l,
                       double scan_cap) {
  const MoveSurrogate ms = build_ul_user_move(sc, layout, ch, st, l);
  AttemptConfig cfg;
  cfg.scan_cap = scan_cap;
  return attempt_move(sc, layout, ch, st, ms, &layout.ul_user[l], cfg);
}

}  // namespace manisac::position
