#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using doctest::Approx;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* p = std::getenv("MANISAC_CLI");
  REQUIRE_MESSAGE(p != nullptr, "MANISAC_CLI must point at the CLI binary");
  return p;
}

int run_cmd(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

fs::path work_dir() {
  const fs::path d = fs::temp_directory_path() / "manisac_cli_test";
  fs::create_directories(d);
  return d;
}

// Small scenario so each trial takes a fraction of a second.
fs::path write_config(const std::string& name,
                      const std::string& extra = "") {
  const fs::path p = work_dir() / name;
  std::ofstream out(p);
  out << "m_t = 2\nm_r = 2\nn_t = 2\nn_r = 2\nk_d = 2\nk_u = 2\nk_t = 1\n"
         "paths_L = 2\nmax_outer = 5\n"
      << extra;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

TEST_CASE("run writes a well-formed iterate CSV and exits 0") {
  const fs::path cfg = write_config("ok.cfg");
  const fs::path out = work_dir() / "run.csv";
  CHECK(run_cmd("run --config " + cfg.string() + " --seed 3 --out " +
                out.string()) == 0);

  const auto lines = split(slurp(out), '\n');
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0] ==
        "iter,sum_rate_nats,sum_rate_bits,sinr_radar_db,power_residual,"
        "distance_residual");
  double prev = 0.0;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cols = split(lines[i], ',');
    REQUIRE(cols.size() == 6);
    CHECK(std::stoi(cols[0]) == static_cast<int>(i));
    const double nats = std::stod(cols[1]);
    CHECK(nats >= prev - 1e-6);
    prev = nats;
    CHECK(std::stod(cols[2]) == Approx(nats / std::log(2.0)).epsilon(1e-9));
    CHECK(std::stod(cols[4]) <= 1e-6);
    CHECK(std::stod(cols[5]) <= 1e-6);
  }
}

TEST_CASE("identical config and seed reproduce a byte-identical CSV") {
  const fs::path cfg = write_config("det.cfg");
  const fs::path o1 = work_dir() / "det1.csv";
  const fs::path o2 = work_dir() / "det2.csv";
  REQUIRE(run_cmd("run --config " + cfg.string() + " --seed 12 --out " +
                  o1.string()) == 0);
  REQUIRE(run_cmd("run --config " + cfg.string() + " --seed 12 --out " +
                  o2.string()) == 0);
  CHECK(slurp(o1) == slurp(o2));
}

TEST_CASE("usage errors exit with code 2") {
  const fs::path out = work_dir() / "unused.csv";
  CHECK(run_cmd("run --seed 1 --out " + out.string()) == 2);  // missing config
  CHECK(run_cmd("frobnicate") == 2);

  const fs::path bad1 = write_config("bad_key.cfg", "no_such_key = 1\n");
  CHECK(run_cmd("run --config " + bad1.string() + " --seed 1 --out " +
                out.string()) == 2);
  const fs::path bad2 = write_config("bad_scheme.cfg", "scheme = warp\n");
  CHECK(run_cmd("run --config " + bad2.string() + " --seed 1 --out " +
                out.string()) == 2);
  const fs::path bad3 = work_dir() / "bad_line.cfg";
  std::ofstream(bad3) << "just some words\n";
  CHECK(run_cmd("run --config " + bad3.string() + " --seed 1 --out " +
                out.string()) == 2);

  const fs::path cfg = write_config("jobs.cfg");
  CHECK(run_cmd("sweep --spec " + cfg.string() + " --out-dir " +
                (work_dir() / "d").string() + " --jobs 0") == 2);
}

TEST_CASE("unwritable output path exits with code 1") {
  const fs::path cfg = write_config("ok2.cfg");
  CHECK(run_cmd("run --config " + cfg.string() + " --seed 1 --out " +
                "/no/such/dir/out.csv") == 1);
}

TEST_CASE("a single-cell sweep reproduces the corresponding single run") {
  const fs::path cfg = write_config("single.cfg");
  const fs::path run_out = work_dir() / "single_run.csv";
  REQUIRE(run_cmd("run --config " + cfg.string() + " --seed 7 --out " +
                  run_out.string()) == 0);
  const auto lines = split(slurp(run_out), '\n');
  std::string last;
  for (const auto& l : lines)
    if (!l.empty()) last = l;
  const double run_rate = std::stod(split(last, ',')[1]);

  const fs::path spec = work_dir() / "single.spec";
  std::ofstream(spec) << slurp(cfg)
                      << "axis = tx_power_dbm\nvalues = 30\ntrials = 1\n"
                         "schemes = joint-ma\nbase_seed = 7\n";
  const fs::path dir = work_dir() / "sweep_single";
  fs::remove_all(dir);
  REQUIRE(run_cmd("sweep --spec " + spec.string() + " --out-dir " +
                  dir.string() + " --jobs 1") == 0);

  const fs::path cell = dir / "sweep_tx_power_dbm_30_joint-ma.csv";
  REQUIRE(fs::exists(cell));
  const auto cl = split(slurp(cell), '\n');
  REQUIRE(cl.size() >= 2);
  CHECK(cl[0] ==
        "axis,value,scheme,trials,mean_sum_rate_nats,stderr_sum_rate_nats");
  const auto cols = split(cl[1], ',');
  REQUIRE(cols.size() == 6);
  CHECK(cols[0] == "tx_power_dbm");
  CHECK(std::stoi(cols[3]) == 1);
  CHECK(std::stod(cols[4]) == Approx(run_rate).epsilon(1e-12));

  CHECK(fs::exists(dir / "manifest.txt"));
  const std::string manifest = slurp(dir / "manifest.txt");
  CHECK(manifest.find("axis = tx_power_dbm") != std::string::npos);
  CHECK(manifest.find("seeds = 7") != std::string::npos);
}

TEST_CASE("sweeps produce one cell file per value and scheme") {
  const fs::path cfg = write_config("multi.cfg");
  const fs::path spec = work_dir() / "multi.spec";
  std::ofstream(spec) << slurp(cfg)
                      << "axis = tx_power_dbm\nvalues = 10, 20\ntrials = 2\n"
                         "schemes = joint-ma, fpa\nbase_seed = 1\n";
  const fs::path dir = work_dir() / "sweep_multi";
  fs::remove_all(dir);
  REQUIRE(run_cmd("sweep --spec " + spec.string() + " --out-dir " +
                  dir.string() + " --jobs 2") == 0);
  for (const char* v : {"10", "20"})
    for (const char* s : {"joint-ma", "fpa"})
      CHECK(fs::exists(dir / ("sweep_tx_power_dbm_" + std::string(v) + "_" +
                              s + ".csv")));
}
