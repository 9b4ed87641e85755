#pragma once

#include "manisac/solvers.hpp"
#include "manisac/types.hpp"

namespace manisac::updates {

/// Closed-form WMMSE auxiliaries for the current transceivers. Afterwards the
/// per-user surrogate rate equals log(1+SINR).
void update_auxiliaries(const Scenario& sc, const ChannelSet& ch,
                        DecisionState& st);

/// Convex surrogate of the beamformer block: weighted-MSE quadratic objective
/// over {w_k} and {vec W^r_m}, plus the sensing constraint with its concave
/// signal part linearized at the current beamformers. Blocks 0..K_d-1 are the
/// communication beamformers, blocks K_d..K_d+M_t-1 the column-stacked radar
/// beamformers; ball b bounds TBS b's total transmit power.
solvers::BlockProblem build_beamformer_subproblem(const Scenario& sc,
                                                  const ChannelSet& ch,
                                                  const DecisionState& st);

/// Beamformer block update. Returns false (state unchanged) when the
/// linearized subproblem is reported infeasible.
bool update_beamformers(const Scenario& sc, const ChannelSet& ch,
                        DecisionState& st);

/// UL power block update via the sqrt-power substitution. Returns false
/// (state unchanged) on solver failure.
bool update_powers(const Scenario& sc, const ChannelSet& ch,
                   DecisionState& st);

/// Per-user MMSE receive filters (exact minimizers, closed form).
void update_comm_filters(const Scenario& sc, const ChannelSet& ch,
                         DecisionState& st);

/// Sensing filter: principal generalized eigenvector of the radar
/// signal/interference covariance pair (MVDR-type).
void update_sensing_filter(const Scenario& sc, const ChannelSet& ch,
                           DecisionState& st);

}  // namespace manisac::updates
