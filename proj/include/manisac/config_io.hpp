#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "manisac/channel.hpp"
#include "manisac/engine.hpp"

namespace manisac::config_io {

/// Scenario generation plus engine knobs parsed from a key=value file.
/// Power-like quantities are given in dB/dBm at the interface and stored
/// linear in the generator config.
struct RunConfig {
  channel::GeneratorConfig gen;
  engine::EngineConfig eng;
};

/// key = value lines; '#' starts a comment; unknown keys are an error.
/// Throws std::runtime_error with a descriptive message.
std::map<std::string, std::string> parse_kv_file(const std::string& path);

RunConfig run_config_from_kv(const std::map<std::string, std::string>& kv);
RunConfig parse_run_config(const std::string& path);

struct SweepSpec {
  RunConfig base;
  std::string axis;            // tx_power_dbm | n_t | n_r | m_t | m_r |
                               // paths_L | k_d | k_u | gamma_r_db
  std::vector<double> values;  // nonempty
  int trials = 1;
  std::vector<engine::Scheme> schemes;
  std::uint64_t base_seed = 0;
};

SweepSpec parse_sweep_spec(const std::string& path);

/// Set one sweep-axis value on a generator config (dB axes converted here).
void apply_axis(channel::GeneratorConfig& gen, const std::string& axis,
                double value);

double db_to_linear(double db);      // 10^(db/10)
double dbm_to_watts(double dbm);     // 10^((dbm-30)/10)

}  // namespace manisac::config_io
