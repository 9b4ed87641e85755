#include "manisac/metrics.hpp"

#include <cmath>

namespace manisac::metrics {

namespace {

// ||h^H blkdiag(W_0..W_{m-1})||^2 with h stacked to match the blocks.
double blkdiag_row_power(const cvec& h, const std::vector<cmat>& blocks) {
  double acc = 0.0;
  Eigen::Index off = 0;
  for (const cmat& w : blocks) {
    acc += (h.segment(off, w.rows()).adjoint() * w).squaredNorm();
    off += w.rows();
  }
  return acc;
}

}  // namespace

double beam_power(const Scenario& sc, const ChannelSet& ch,
                  const DecisionState& st, int j) {
  double p = 0.0;
  for (const cvec& w : st.w) p += std::norm(ch.gt[j].dot(w));
  p += blkdiag_row_power(ch.gt[j], st.wr);
  return p;
}

double tbs_power(const Scenario& sc, const DecisionState& st, int m) {
  const int nt = sc.dims.nt;
  double p = st.wr[m].squaredNorm();
  for (const cvec& w : st.w)
    p += w.segment(static_cast<Eigen::Index>(m) * nt, nt).squaredNorm();
  return p;
}

double dl_signal(const ChannelSet& ch, const DecisionState& st, int k) {
  return std::norm(ch.hd[k].dot(st.w[k]));
}

double dl_interference(const Scenario& sc, const ChannelSet& ch,
                       const DecisionState& st, int k) {
  double acc = sc.noise_dl[k];
  for (int i = 0; i < sc.dims.kd; ++i)
    if (i != k) acc += std::norm(ch.hd[k].dot(st.w[i]));
  acc += blkdiag_row_power(ch.hd[k], st.wr);
  for (int l = 0; l < sc.dims.ku; ++l)
    acc += st.q[l] * std::norm(ch.hdu(k, l));
  return acc;
}

double sinr_dl(const Scenario& sc, const ChannelSet& ch,
               const DecisionState& st, int k) {
  return dl_signal(ch, st, k) / dl_interference(sc, ch, st, k);
}

double ul_interference(const Scenario& sc, const ChannelSet& ch,
                       const DecisionState& st, int l) {
  const cvec& u = st.u_comm[l];
  double acc = sc.noise_r * u.squaredNorm();
  for (int i = 0; i < sc.dims.ku; ++i)
    if (i != l) acc += st.q[i] * std::norm(u.dot(ch.hu[i]));
  for (int j = 0; j <= sc.dims.kt; ++j)
    acc += sc.radar.rcs_var[j] * std::norm(u.dot(ch.gr[j])) *
           beam_power(sc, ch, st, j);
  return acc;
}

double sinr_ul(const Scenario& sc, const ChannelSet& ch,
               const DecisionState& st, int l) {
  const double sig = st.q[l] * std::norm(st.u_comm[l].dot(ch.hu[l]));
  if (sig == 0.0) return 0.0;  // covers the q=0, u=0 silent-user state
  return sig / ul_interference(sc, ch, st, l);
}

namespace {

double radar_signal(const Scenario& sc, const ChannelSet& ch,
                    const DecisionState& st) {
  return sc.radar.rcs_var[0] * std::norm(st.u_sense.dot(ch.gr[0])) *
         beam_power(sc, ch, st, 0);
}

double radar_interference(const Scenario& sc, const ChannelSet& ch,
                          const DecisionState& st) {
  const cvec& u = st.u_sense;
  double acc = sc.noise_r * u.squaredNorm();
  for (int i = 0; i < sc.dims.ku; ++i)
    acc += st.q[i] * std::norm(u.dot(ch.hu[i]));
  for (int j = 1; j <= sc.dims.kt; ++j)
    acc += sc.radar.rcs_var[j] * std::norm(u.dot(ch.gr[j])) *
           beam_power(sc, ch, st, j);
  return acc;
}

}  // namespace

double sinr_radar(const Scenario& sc, const ChannelSet& ch,
                  const DecisionState& st) {
  const double sig = radar_signal(sc, ch, st);
  if (sig == 0.0) return 0.0;
  return sig / radar_interference(sc, ch, st);
}

double sensing_constraint_value(const Scenario& sc, const ChannelSet& ch,
                                const DecisionState& st) {
  return radar_interference(sc, ch, st) -
         radar_signal(sc, ch, st) / sc.gamma_r;
}

double sum_rate(const Scenario& sc, const ChannelSet& ch,
                const DecisionState& st) {
  double acc = 0.0;
  for (int k = 0; k < sc.dims.kd; ++k)
    acc += sc.weight_dl[k] * std::log1p(sinr_dl(sc, ch, st, k));
  for (int l = 0; l < sc.dims.ku; ++l)
    acc += sc.weight_ul[l] * std::log1p(sinr_ul(sc, ch, st, l));
  return acc;
}

double surrogate_rate_dl(const Scenario& sc, const ChannelSet& ch,
                         const DecisionState& st, int k) {
  const cplx s = ch.hd[k].dot(st.w[k]);
  const double total = dl_interference(sc, ch, st, k) + std::norm(s);
  const cplx b = st.beta_dl[k];
  const double mse =
      1.0 - 2.0 * std::real(std::conj(b) * s) + std::norm(b) * total;
  const double w = st.omega_dl[k];
  return std::log(w) + 1.0 - w * mse;
}

double surrogate_rate_ul(const Scenario& sc, const ChannelSet& ch,
                         const DecisionState& st, int l) {
  const cplx s = std::sqrt(st.q[l]) * st.u_comm[l].dot(ch.hu[l]);
  const double total = ul_interference(sc, ch, st, l) +
                       st.q[l] * std::norm(st.u_comm[l].dot(ch.hu[l]));
  const cplx b = st.beta_ul[l];
  const double mse =
      1.0 - 2.0 * std::real(std::conj(b) * s) + std::norm(b) * total;
  const double w = st.omega_ul[l];
  return std::log(w) + 1.0 - w * mse;
}

double surrogate_total(const Scenario& sc, const ChannelSet& ch,
                       const DecisionState& st) {
  double acc = 0.0;
  for (int k = 0; k < sc.dims.kd; ++k)
    acc += sc.weight_dl[k] * surrogate_rate_dl(sc, ch, st, k);
  for (int l = 0; l < sc.dims.ku; ++l)
    acc += sc.weight_ul[l] * surrogate_rate_ul(sc, ch, st, l);
  return acc;
}

double weighted_mse(const Scenario& sc, const ChannelSet& ch,
                    const DecisionState& st) {
  double acc = 0.0;
  for (int k = 0; k < sc.dims.kd; ++k)
    acc += sc.weight_dl[k] *
           (std::log(st.omega_dl[k]) + 1.0 - surrogate_rate_dl(sc, ch, st, k));
  for (int l = 0; l < sc.dims.ku; ++l)
    acc += sc.weight_ul[l] *
           (std::log(st.omega_ul[l]) + 1.0 - surrogate_rate_ul(sc, ch, st, l));
  return acc;
}

}  // namespace manisac::metrics
