#pragma once

#include "manisac/types.hpp"

namespace manisac::metrics {

/// Radiated power towards target/clutter j from all TBSs:
/// sum_k |g_tj^H w_k|^2 + ||g_tj^H blkdiag(W^r)||^2.
double beam_power(const Scenario& sc, const ChannelSet& ch,
                  const DecisionState& st, int j);

/// Total transmit power of TBS m (communication plus radar streams).
double tbs_power(const Scenario& sc, const DecisionState& st, int m);

/// Received signal power |h_dk^H w_k|^2.
double dl_signal(const ChannelSet& ch, const DecisionState& st, int k);

/// Interference-plus-noise at DL user k (everything except its own stream).
double dl_interference(const Scenario& sc, const ChannelSet& ch,
                       const DecisionState& st, int k);

double sinr_dl(const Scenario& sc, const ChannelSet& ch,
               const DecisionState& st, int k);

/// Post-combining interference-plus-noise at the RBS cluster for UL user l,
/// including radar echoes from the target and all clutter sources.
double ul_interference(const Scenario& sc, const ChannelSet& ch,
                       const DecisionState& st, int l);

double sinr_ul(const Scenario& sc, const ChannelSet& ch,
               const DecisionState& st, int l);

double sinr_radar(const Scenario& sc, const ChannelSet& ch,
                  const DecisionState& st);

/// Sensing feasibility residual: interference - signal/gamma_r. Feasible <= 0.
double sensing_constraint_value(const Scenario& sc, const ChannelSet& ch,
                                const DecisionState& st);

/// Weighted sum of achievable rates, natural log.
double sum_rate(const Scenario& sc, const ChannelSet& ch,
                const DecisionState& st);

/// Rate lower bound log(omega) + 1 - omega * MSE for the stored auxiliaries.
double surrogate_rate_dl(const Scenario& sc, const ChannelSet& ch,
                         const DecisionState& st, int k);
double surrogate_rate_ul(const Scenario& sc, const ChannelSet& ch,
                         const DecisionState& st, int l);

/// Weighted sum of the surrogate rates; equals sum_rate at optimal auxiliaries.
double surrogate_total(const Scenario& sc, const ChannelSet& ch,
                       const DecisionState& st);

/// Sum of weight * omega * MSE over all users; the transceiver blocks minimize
/// this, which is surrogate_total up to an auxiliary-only constant.
double weighted_mse(const Scenario& sc, const ChannelSet& ch,
                    const DecisionState& st);

}  // namespace manisac::metrics
