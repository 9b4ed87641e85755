#include "manisac/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>
#include <vector>

#include "manisac/config_io.hpp"
#include "manisac/metrics.hpp"

namespace manisac::cli {

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

double converged_sum_rate(const engine::RunResult& res) {
  return res.iterates.empty() ? 0.0 : res.iterates.back().sum_rate;
}

}  // namespace

int run_single(const std::string& config_path, std::uint64_t seed,
               const std::string& out_path) {
  config_io::RunConfig rc;
  try {
    rc = config_io::parse_run_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  Scenario sc;
  try {
    sc = channel::generate_scenario(rc.gen, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  const engine::RunResult res = engine::run(sc, rc.eng, seed);
  if (!res.feasible) {
    std::cerr << "error: scenario infeasible (sensing restoration failed)\n";
    return kExitRuntime;
  }

  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "error: cannot write " << out_path << "\n";
    return kExitRuntime;
  }
  out << "iter,sum_rate_nats,sum_rate_bits,sinr_radar_db,power_residual,"
         "distance_residual\n";
  for (const auto& r : res.iterates)
    out << r.iter << ',' << fmt(r.sum_rate) << ','
        << fmt(r.sum_rate / std::log(2.0)) << ','
        << fmt(10.0 * std::log10(r.sinr_radar)) << ','
        << fmt(r.power_residual) << ',' << fmt(r.distance_residual) << '\n';
  out.close();
  if (!out) {
    std::cerr << "error: write failure on " << out_path << "\n";
    return kExitRuntime;
  }

  // Wall-clock timings are inherently non-reproducible; keep them out of the
  // primary artifact.
  std::ofstream timing(out_path + ".timing.csv");
  if (timing) {
    timing << "iter,ms\n";
    for (const auto& r : res.iterates)
      timing << r.iter << ',' << fmt(r.ms) << '\n';
  }
  return kExitOk;
}

int run_sweep(const std::string& spec_path, const std::string& out_dir,
              int jobs) {
  config_io::SweepSpec spec;
  try {
    spec = config_io::parse_sweep_spec(spec_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (jobs < 1) {
    std::cerr << "error: --jobs must be >= 1\n";
    return kExitUsage;
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create " << out_dir << "\n";
    return kExitRuntime;
  }

  struct Task {
    size_t vi, si;
    int trial;
  };
  std::vector<Task> tasks;
  for (size_t vi = 0; vi < spec.values.size(); ++vi)
    for (size_t si = 0; si < spec.schemes.size(); ++si)
      for (int t = 0; t < spec.trials; ++t) tasks.push_back({vi, si, t});

  // rates[vi][si][trial]; NaN marks an infeasible trial.
  std::vector<std::vector<std::vector<double>>> rates(
      spec.values.size(),
      std::vector<std::vector<double>>(
          spec.schemes.size(),
          std::vector<double>(spec.trials,
                              std::numeric_limits<double>::quiet_NaN())));

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      channel::GeneratorConfig gen = spec.base.gen;
      config_io::apply_axis(gen, spec.axis, spec.values[t.vi]);
      engine::EngineConfig eng = spec.base.eng;
      eng.scheme = spec.schemes[t.si];
      const std::uint64_t seed =
          spec.base_seed + static_cast<std::uint64_t>(t.trial);
      const Scenario sc = channel::generate_scenario(gen, seed);
      const engine::RunResult res = engine::run(sc, eng, seed);
      if (res.feasible) rates[t.vi][t.si][t.trial] = converged_sum_rate(res);
    }
  };
  std::vector<std::thread> pool;
  const int nthreads = std::min<size_t>(jobs, tasks.size());
  for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  for (size_t vi = 0; vi < spec.values.size(); ++vi)
    for (size_t si = 0; si < spec.schemes.size(); ++si) {
      double sum = 0.0, sum2 = 0.0;
      int n = 0;
      for (double r : rates[vi][si])
        if (std::isfinite(r)) {
          sum += r;
          sum2 += r * r;
          ++n;
        }
      const double mean = (n > 0) ? sum / n : 0.0;
      const double var =
          (n > 1) ? std::max(0.0, (sum2 - n * mean * mean) / (n - 1)) : 0.0;
      const double se = (n > 1) ? std::sqrt(var / n) : 0.0;

      const std::string name = "sweep_" + spec.axis + "_" +
                               fmt(spec.values[vi]) + "_" +
                               engine::scheme_to_string(spec.schemes[si]) +
                               ".csv";
      std::ofstream out(std::filesystem::path(out_dir) / name);
      if (!out) {
        std::cerr << "error: cannot write " << name << "\n";
        return kExitRuntime;
      }
      out << "axis,value,scheme,trials,mean_sum_rate_nats,"
             "stderr_sum_rate_nats\n";
      out << spec.axis << ',' << fmt(spec.values[vi]) << ','
          << engine::scheme_to_string(spec.schemes[si]) << ',' << n << ','
          << fmt(mean) << ',' << fmt(se) << '\n';
    }

  std::ofstream manifest(std::filesystem::path(out_dir) / "manifest.txt");
  if (!manifest) {
    std::cerr << "error: cannot write manifest\n";
    return kExitRuntime;
  }
  manifest << "spec_file = " << spec_path << "\n";
  manifest << "axis = " << spec.axis << "\n";
  manifest << "values =";
  for (double v : spec.values) manifest << ' ' << fmt(v);
  manifest << "\nschemes =";
  for (auto s : spec.schemes) manifest << ' ' << engine::scheme_to_string(s);
  manifest << "\ntrials = " << spec.trials << "\n";
  manifest << "seeds =";
  for (int t = 0; t < spec.trials; ++t)
    manifest << ' ' << (spec.base_seed + static_cast<std::uint64_t>(t));
  manifest << "\n";
  const auto& g = spec.base.gen;
  manifest << "m_t = " << g.dims.mt << "\nm_r = " << g.dims.mr
           << "\nn_t = " << g.dims.nt << "\nn_r = " << g.dims.nr
           << "\nk_d = " << g.dims.kd << "\nk_u = " << g.dims.ku
           << "\nk_t = " << g.dims.kt << "\npaths_L = " << g.paths
           << "\nradius_m = " << fmt(g.radius_m)
           << "\nalpha_loss = " << fmt(g.alpha_loss)
           << "\nc0 = " << fmt(g.c0) << "\ntx_power_w = " << fmt(g.tx_power)
           << "\nul_power_w = " << fmt(g.ul_power)
           << "\nnoise_w = " << fmt(g.noise)
           << "\ngamma_r = " << fmt(g.gamma_r)
           << "\nrcs_var = " << fmt(g.rcs_var)
           << "\nregion_a = " << fmt(g.region_a)
           << "\nmin_dist = " << fmt(g.min_dist)
           << "\nepsilon = " << fmt(spec.base.eng.epsilon)
           << "\nmax_outer = " << spec.base.eng.max_outer << "\n";
  return kExitOk;
}

}  // namespace manisac::cli
