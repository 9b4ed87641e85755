#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "manisac/types.hpp"

namespace manisac::engine {

enum class Scheme { joint_ma, bs_ma, user_ma, rand_ma, fpa };

/// "joint-ma" | "bs-ma" | "user-ma" | "rand-ma" | "fpa"; throws on others.
Scheme scheme_from_string(const std::string& name);
std::string scheme_to_string(Scheme s);

struct EngineConfig {
  double epsilon = 1e-3;  // relative sum-rate change at which to stop
  int max_outer = 50;
  Scheme scheme = Scheme::joint_ma;
  bool restoration = true;
};

struct IterateRecord {
  int iter = 0;
  double sum_rate = 0.0;  // weighted, nats
  double sinr_radar = 0.0;
  double power_residual = 0.0;     // max constraint violation (<= 0 when met)
  double distance_residual = 0.0;  // max distance/box violation
  double ms = 0.0;                 // wall time of the iteration
};

struct RunResult {
  bool feasible = true;  // initialization (incl. restoration) succeeded
  std::vector<IterateRecord> iterates;
  PositionLayout layout;
  DecisionState state;
};

/// Feasible starting point: jittered-grid (or scheme-specific) positions,
/// matched-filter beamformers at full per-TBS power, half uplink power, MMSE
/// filters, and sensing-feasibility restoration. Returns false when
/// restoration fails (scenario declared infeasible).
bool initialize(const Scenario& sc, const EngineConfig& cfg,
                std::uint64_t seed, PositionLayout& layout, DecisionState& st);

/// Full block-coordinate ascent until the relative sum-rate change drops
/// below epsilon or max_outer is reached. Deterministic in (sc, cfg, seed).
RunResult run(const Scenario& sc, const EngineConfig& cfg, std::uint64_t seed);

}  // namespace manisac::engine
