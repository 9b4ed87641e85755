#include "manisac/config_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace manisac::config_io {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

int to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::runtime_error("config: invalid integer for '" + key + "': " + v);
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::runtime_error("config: invalid number for '" + key + "': " + v);
  }
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": empty key or value");
    if (kv.count(key))
      throw std::runtime_error(path + ": duplicate key '" + key + "'");
    kv[key] = val;
  }
  return kv;
}

RunConfig run_config_from_kv(const std::map<std::string, std::string>& kv) {
  RunConfig rc;
  auto& g = rc.gen;
  for (const auto& [k, v] : kv) {
    if (k == "m_t") g.dims.mt = to_int(k, v);
    else if (k == "m_r") g.dims.mr = to_int(k, v);
    else if (k == "n_t") g.dims.nt = to_int(k, v);
    else if (k == "n_r") g.dims.nr = to_int(k, v);
    else if (k == "k_d") g.dims.kd = to_int(k, v);
    else if (k == "k_u") g.dims.ku = to_int(k, v);
    else if (k == "k_t") g.dims.kt = to_int(k, v);
    else if (k == "paths_L") g.paths = to_int(k, v);
    else if (k == "radius_m") g.radius_m = to_double(k, v);
    else if (k == "alpha_loss") g.alpha_loss = to_double(k, v);
    else if (k == "c0_db") g.c0 = db_to_linear(to_double(k, v));
    else if (k == "tx_power_dbm") g.tx_power = dbm_to_watts(to_double(k, v));
    else if (k == "ul_power_dbm") g.ul_power = dbm_to_watts(to_double(k, v));
    else if (k == "noise_dbm") g.noise = dbm_to_watts(to_double(k, v));
    else if (k == "gamma_r_db") g.gamma_r = db_to_linear(to_double(k, v));
    else if (k == "rcs_var") g.rcs_var = to_double(k, v);
    else if (k == "region_a") g.region_a = to_double(k, v);
    else if (k == "min_dist") g.min_dist = to_double(k, v);
    else if (k == "epsilon") rc.eng.epsilon = to_double(k, v);
    else if (k == "max_outer") rc.eng.max_outer = to_int(k, v);
    else if (k == "scheme") rc.eng.scheme = engine::scheme_from_string(v);
    else if (k == "restoration") {
      if (v == "on") rc.eng.restoration = true;
      else if (v == "off") rc.eng.restoration = false;
      else throw std::runtime_error("config: restoration must be on|off");
    } else {
      throw std::runtime_error("config: unknown key '" + k + "'");
    }
  }
  if (rc.eng.epsilon <= 0.0) throw std::runtime_error("config: epsilon must be > 0");
  if (rc.eng.max_outer < 1) throw std::runtime_error("config: max_outer must be >= 1");
  return rc;
}

RunConfig parse_run_config(const std::string& path) {
  return run_config_from_kv(parse_kv_file(path));
}

void apply_axis(channel::GeneratorConfig& gen, const std::string& axis,
                double value) {
  if (axis == "tx_power_dbm") gen.tx_power = dbm_to_watts(value);
  else if (axis == "gamma_r_db") gen.gamma_r = db_to_linear(value);
  else if (axis == "n_t") gen.dims.nt = static_cast<int>(value);
  else if (axis == "n_r") gen.dims.nr = static_cast<int>(value);
  else if (axis == "m_t") gen.dims.mt = static_cast<int>(value);
  else if (axis == "m_r") gen.dims.mr = static_cast<int>(value);
  else if (axis == "paths_L") gen.paths = static_cast<int>(value);
  else if (axis == "k_d") gen.dims.kd = static_cast<int>(value);
  else if (axis == "k_u") gen.dims.ku = static_cast<int>(value);
  else throw std::runtime_error("sweep: unknown axis '" + axis + "'");
}

SweepSpec parse_sweep_spec(const std::string& path) {
  auto kv = parse_kv_file(path);
  SweepSpec spec;

  auto take = [&](const char* key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end())
      throw std::runtime_error("sweep: missing required key '" +
                               std::string(key) + "'");
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  spec.axis = take("axis");
  for (const std::string& v : split_list(take("values")))
    spec.values.push_back(to_double("values", v));
  if (spec.values.empty()) throw std::runtime_error("sweep: values is empty");
  spec.trials = to_int("trials", take("trials"));
  if (spec.trials < 1) throw std::runtime_error("sweep: trials must be >= 1");
  for (const std::string& v : split_list(take("schemes")))
    spec.schemes.push_back(engine::scheme_from_string(v));
  if (spec.schemes.empty()) throw std::runtime_error("sweep: schemes is empty");
  if (auto it = kv.find("base_seed"); it != kv.end()) {
    spec.base_seed = static_cast<std::uint64_t>(
        std::stoull(it->second));
    kv.erase(it);
  }

  spec.base = run_config_from_kv(kv);
  channel::GeneratorConfig probe = spec.base.gen;  // validates the axis name
  apply_axis(probe, spec.axis, spec.values.front());
  return spec;
}

}  // namespace manisac::config_io
