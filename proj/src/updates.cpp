#include "manisac/updates.hpp"

#include <cmath>

#include "manisac/metrics.hpp"

namespace manisac::updates {

void update_auxiliaries(const Scenario& sc, const ChannelSet& ch,
                        DecisionState& st) {
  for (int k = 0; k < sc.dims.kd; ++k) {
    const cplx s = ch.hd[k].dot(st.w[k]);
    const double total = metrics::dl_interference(sc, ch, st, k) + std::norm(s);
    const cplx b = (total > 0.0) ? s / total : cplx(0.0);
    st.beta_dl[k] = b;
    st.omega_dl[k] = 1.0 / (1.0 - 2.0 * std::real(std::conj(b) * s) +
                            std::norm(b) * total);
  }
  for (int l = 0; l < sc.dims.ku; ++l) {
    const cplx s = std::sqrt(st.q[l]) * st.u_comm[l].dot(ch.hu[l]);
    const double total = metrics::ul_interference(sc, ch, st, l) +
                         st.q[l] * std::norm(st.u_comm[l].dot(ch.hu[l]));
    const cplx b = (total > 0.0) ? s / total : cplx(0.0);
    st.beta_ul[l] = b;
    st.omega_ul[l] = 1.0 / (1.0 - 2.0 * std::real(std::conj(b) * s) +
                            std::norm(b) * total);
  }
}

namespace {

// Per-RBS-filter echo gain sigma^2_{t,j} |u^H g_{r,j}| ^2 for each j.
vec echo_gains(const Scenario& sc, const ChannelSet& ch, const cvec& u) {
  vec g(sc.dims.kt + 1);
  for (int j = 0; j <= sc.dims.kt; ++j)
    g[j] = sc.radar.rcs_var[j] * std::norm(u.dot(ch.gr[j]));
  return g;
}

cplx vec_dot(const cmat& a, const cmat& b) {  // <vec(a), vec(b)> = tr(a^H b)
  return (a.adjoint() * b).trace();
}

}  // namespace

solvers::BlockProblem build_beamformer_subproblem(const Scenario& sc,
                                                  const ChannelSet& ch,
                                                  const DecisionState& st) {
  const Dims& d = sc.dims;
  const Eigen::Index nw = static_cast<Eigen::Index>(d.mt) * d.nt;

  // MSE quadratic shared by every comm beamformer: downlink cross terms plus
  // the radar echoes reaching each uplink receive filter.
  cmat comm_hess = cmat::Zero(nw, nw);
  for (int k = 0; k < d.kd; ++k) {
    const double s = sc.weight_dl[k] * st.omega_dl[k] * std::norm(st.beta_dl[k]);
    comm_hess.noalias() += s * (ch.hd[k] * ch.hd[k].adjoint());
  }
  std::vector<vec> ul_echo(d.ku);
  for (int l = 0; l < d.ku; ++l) ul_echo[l] = echo_gains(sc, ch, st.u_comm[l]);
  for (int j = 0; j <= d.kt; ++j) {
    double s = 0.0;
    for (int l = 0; l < d.ku; ++l)
      s += sc.weight_ul[l] * st.omega_ul[l] * std::norm(st.beta_ul[l]) *
           ul_echo[l][j];
    comm_hess.noalias() += s * (ch.gt[j] * ch.gt[j].adjoint());
  }

  // Sensing constraint: clutter leakage quadratic minus the linearized target
  // return, scaled so that the constraint reads (value <= 0).
  const vec sense_echo = echo_gains(sc, ch, st.u_sense);
  cmat sense_hess = cmat::Zero(nw, nw);
  for (int j = 1; j <= d.kt; ++j)
    sense_hess.noalias() += sense_echo[j] * (ch.gt[j] * ch.gt[j].adjoint());
  const double target_gain = sense_echo[0] / sc.gamma_r;

  solvers::BlockProblem prob;
  prob.objective.resize(d.kd + d.mt);
  prob.quad_ineq.resize(d.kd + d.mt);
  for (int k = 0; k < d.kd; ++k) {
    prob.objective[k].hessian = comm_hess;
    prob.objective[k].linear =
        sc.weight_dl[k] * st.omega_dl[k] * st.beta_dl[k] * ch.hd[k];
    prob.quad_ineq[k].hessian = sense_hess;
    prob.quad_ineq[k].linear =
        target_gain * ch.gt[0] * ch.gt[0].dot(st.w[k]);
  }

  // Radar beamformer blocks: vec(W^r_m) with per-column Kronecker structure.
  for (int m = 0; m < d.mt; ++m) {
    const Eigen::Index nt = d.nt;
    cmat per_col = cmat::Zero(nt, nt);
    cmat per_col_sense = cmat::Zero(nt, nt);
    for (int k = 0; k < d.kd; ++k) {
      const cvec hseg = ch.hd[k].segment(m * nt, nt);
      per_col.noalias() += sc.weight_dl[k] * st.omega_dl[k] *
                           std::norm(st.beta_dl[k]) * (hseg * hseg.adjoint());
    }
    for (int j = 0; j <= d.kt; ++j) {
      const cvec gseg = ch.gt[j].segment(m * nt, nt);
      double s = 0.0;
      for (int l = 0; l < d.ku; ++l)
        s += sc.weight_ul[l] * st.omega_ul[l] * std::norm(st.beta_ul[l]) *
             ul_echo[l][j];
      per_col.noalias() += s * (gseg * gseg.adjoint());
      if (j >= 1)
        per_col_sense.noalias() += sense_echo[j] * (gseg * gseg.adjoint());
    }
    auto& obj = prob.objective[d.kd + m];
    auto& ineq = prob.quad_ineq[d.kd + m];
    obj.hessian = cmat::Zero(nt * nt, nt * nt);
    ineq.hessian = cmat::Zero(nt * nt, nt * nt);
    for (Eigen::Index c = 0; c < nt; ++c) {
      obj.hessian.block(c * nt, c * nt, nt, nt) = per_col;
      ineq.hessian.block(c * nt, c * nt, nt, nt) = per_col_sense;
    }
    obj.linear = cvec::Zero(nt * nt);
    const cvec g0 = ch.gt[0].segment(m * nt, nt);
    const cmat lin = target_gain * g0 * (g0.adjoint() * st.wr[m]);
    ineq.linear = Eigen::Map<const cvec>(lin.data(), nt * nt);
  }

  // Constraint constant: filter-side interference independent of the
  // beamformers, plus the anchor value of the linearized target return.
  double c = sc.noise_r * st.u_sense.squaredNorm();
  for (int i = 0; i < d.ku; ++i)
    c += st.q[i] * std::norm(st.u_sense.dot(ch.hu[i]));
  c += target_gain * metrics::beam_power(sc, ch, st, 0);
  prob.ineq_const = c;

  prob.balls.resize(d.mt);
  for (int m = 0; m < d.mt; ++m) {
    auto& ball = prob.balls[m];
    ball.radius = std::sqrt(sc.budget_bs[m]);
    for (int k = 0; k < d.kd; ++k)
      ball.slices.push_back({k, m * d.nt, d.nt});
    ball.slices.push_back({d.kd + m, 0, d.nt * d.nt});
  }
  return prob;
}

bool update_beamformers(const Scenario& sc, const ChannelSet& ch,
                        DecisionState& st) {
  const auto prob = build_beamformer_subproblem(sc, ch, st);
  auto [x, rep] = solvers::solve_block_qcqp(prob);
  if (rep.status == solvers::SolveStatus::infeasible) return false;
  for (int k = 0; k < sc.dims.kd; ++k) st.w[k] = x[k];
  for (int m = 0; m < sc.dims.mt; ++m)
    st.wr[m] = Eigen::Map<const cmat>(x[sc.dims.kd + m].data(), sc.dims.nt,
                                      sc.dims.nt);
  return true;
}

bool update_powers(const Scenario& sc, const ChannelSet& ch,
                   DecisionState& st) {
  const Dims& d = sc.dims;
  const Eigen::Index n = d.ku;

  solvers::RealQuadratic obj;
  obj.p2 = mat::Zero(n, n);
  obj.p1 = vec::Zero(n);
  obj.p0 = 0.0;
  for (int l = 0; l < d.ku; ++l) {
    double quad = 0.0;
    for (int i = 0; i < d.ku; ++i)
      quad += sc.weight_ul[i] * st.omega_ul[i] * std::norm(st.beta_ul[i]) *
              std::norm(st.u_comm[i].dot(ch.hu[l]));
    for (int k = 0; k < d.kd; ++k)
      quad += sc.weight_dl[k] * st.omega_dl[k] * std::norm(st.beta_dl[k]) *
              std::norm(ch.hdu(k, l));
    obj.p2(l, l) = quad;
    obj.p1[l] = -2.0 * sc.weight_ul[l] * st.omega_ul[l] *
                std::real(std::conj(st.beta_ul[l]) *
                          st.u_comm[l].dot(ch.hu[l]));
  }

  // Sensing leakage bound: uplink power into the sensing filter may not exceed
  // the target return scaled by the threshold, minus clutter and noise.
  const vec sense_echo = echo_gains(sc, ch, st.u_sense);
  double budget = sense_echo[0] * metrics::beam_power(sc, ch, st, 0) /
                  sc.gamma_r;
  budget -= sc.noise_r * st.u_sense.squaredNorm();
  for (int j = 1; j <= d.kt; ++j)
    budget -= sense_echo[j] * metrics::beam_power(sc, ch, st, j);

  solvers::RealQuadratic ineq;
  ineq.p2 = mat::Zero(n, n);
  ineq.p1 = vec::Zero(n);
  ineq.p0 = -budget;
  for (int l = 0; l < d.ku; ++l)
    ineq.p2(l, l) = std::norm(st.u_sense.dot(ch.hu[l]));

  solvers::Box box;
  box.lo = vec::Zero(n);
  box.hi = vec(n);
  for (int l = 0; l < d.ku; ++l) box.hi[l] = std::sqrt(sc.budget_ul[l]);

  auto [s, rep] = solvers::solve_qcqp(obj, ineq, {}, box);
  if (rep.status == solvers::SolveStatus::infeasible) return false;
  for (int l = 0; l < d.ku; ++l) st.q[l] = s[l] * s[l];
  return true;
}

void update_comm_filters(const Scenario& sc, const ChannelSet& ch,
                         DecisionState& st) {
  const Dims& d = sc.dims;
  const Eigen::Index n = static_cast<Eigen::Index>(d.mr) * d.nr;
  cmat cov = sc.noise_r * cmat::Identity(n, n);
  for (int i = 0; i < d.ku; ++i)
    cov.noalias() += st.q[i] * (ch.hu[i] * ch.hu[i].adjoint());
  std::vector<double> beam(d.kt + 1);
  for (int j = 0; j <= d.kt; ++j) {
    beam[j] = metrics::beam_power(sc, ch, st, j);
    cov.noalias() +=
        sc.radar.rcs_var[j] * beam[j] * (ch.gr[j] * ch.gr[j].adjoint());
  }
  const auto ldlt = cov.ldlt();
  for (int l = 0; l < d.ku; ++l) {
    const cplx b = st.beta_ul[l];
    if (st.q[l] <= 0.0 || std::norm(b) == 0.0) {
      st.u_comm[l].setZero(n);
      continue;
    }
    st.u_comm[l] =
        (std::sqrt(st.q[l]) / b) * ldlt.solve(ch.hu[l]).eval();
  }
}

void update_sensing_filter(const Scenario& sc, const ChannelSet& ch,
                           DecisionState& st) {
  const Dims& d = sc.dims;
  const Eigen::Index n = static_cast<Eigen::Index>(d.mr) * d.nr;
  const double p0 = metrics::beam_power(sc, ch, st, 0);
  const cmat signal =
      sc.radar.rcs_var[0] * p0 * (ch.gr[0] * ch.gr[0].adjoint());
  cmat noise = sc.noise_r * cmat::Identity(n, n);
  for (int i = 0; i < d.ku; ++i)
    noise.noalias() += st.q[i] * (ch.hu[i] * ch.hu[i].adjoint());
  for (int j = 1; j <= d.kt; ++j)
    noise.noalias() += sc.radar.rcs_var[j] * metrics::beam_power(sc, ch, st, j) *
                       (ch.gr[j] * ch.gr[j].adjoint());
  auto [val, v] = solvers::max_generalized_eig(signal, noise);
  st.u_sense = v.normalized();
}

}  // namespace manisac::updates
