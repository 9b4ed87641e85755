#pragma once

#include <cstdint>
#include <string>

namespace manisac::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Run one trial and write the per-iteration CSV (deterministic) plus a
/// timing sidecar "<out>.timing.csv" (wall-clock, not reproducible).
int run_single(const std::string& config_path, std::uint64_t seed,
               const std::string& out_path);

/// Monte-Carlo sweep: one CSV per (axis value, scheme) with mean/stderr of the
/// converged sum-rate, plus a manifest echoing the spec and seeds.
int run_sweep(const std::string& spec_path, const std::string& out_dir,
              int jobs);

}  // namespace manisac::cli
