#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gprv/report.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const int status = std::system((std::string(GPRVARIMAX_BIN) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gprv_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Cli, RotateWritesLoadings) {
  const fs::path dir = scratch("rotate");
  const double c = std::cos(0.4), s = std::sin(0.4);
  std::ostringstream csv;
  csv << "f1,f2\n";
  for (int i = 0; i < 3; ++i) csv << 0.7 * c << ',' << -0.7 * s << '\n';
  for (int i = 0; i < 3; ++i) csv << 0.7 * s << ',' << 0.7 * c << '\n';
  write(dir / "in.csv", csv.str());
  for (const char* method : {"--method gpr --starts random --q 5", "--method gpr --starts identity",
                             "--method pairwise"}) {
    for (const char* kaiser : {"off", "on"}) {
      ASSERT_EQ(run("rotate --input " + (dir / "in.csv").string() + " " + method + " --kaiser " + kaiser +
                    " --seed 3 --output " + (dir / "out.csv").string()),
                0);
      const gprv::Matrix out = gprv::read_loading_csv((dir / "out.csv").string());
      ASSERT_EQ(out.rows(), 6);
      EXPECT_NEAR(out.cwiseAbs().rowwise().maxCoeff().minCoeff(), 0.7, 1e-6);
    }
  }
  fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("codes");
  write(dir / "bad.csv", "1,2\nx,y\n");
  EXPECT_EQ(run("rotate --input " + (dir / "bad.csv").string() + " --output " + (dir / "o.csv").string()), 1);
  EXPECT_EQ(run("rotate --input " + (dir / "missing.csv").string() + " --output " + (dir / "o.csv").string()), 3);
  write(dir / "zero.csv", "0.5,0.5\n0,0\n0.1,0.6\n");
  EXPECT_EQ(run("rotate --input " + (dir / "zero.csv").string() + " --kaiser on --output " + (dir / "o.csv").string()), 2);
  EXPECT_EQ(run("rotate --input x.csv"), 1);
  EXPECT_EQ(run("bogus"), 1);
  write(dir / "cfg.json", R"({"unknown": 1})");
  EXPECT_EQ(run("simulate --config " + (dir / "cfg.json").string() + " --output-dir " + (dir / "out").string()), 1);
  EXPECT_EQ(run("report --input-dir " + (dir / "nothing").string()), 3);
  fs::remove_all(dir);
}

TEST(Cli, SimulateThenReport) {
  const fs::path dir = scratch("simulate");
  write(dir / "cfg.json", R"({"k_list":[2],"n_list":[50],"kaiser_list":[false,true],"q_schedule":[1,3],
                             "replications":3,"population_cases":1000,"base_seed":4})");
  ASSERT_EQ(run("simulate --config " + (dir / "cfg.json").string() + " --output-dir " + (dir / "out").string()), 0);
  const auto cells = gprv::read_cells_csv((dir / "out" / "cells.csv").string());
  EXPECT_EQ(cells.size(), 8u);
  fs::remove(dir / "out" / "stationarity.txt");
  ASSERT_EQ(run("report --input-dir " + (dir / "out").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "stationarity.txt"));
  EXPECT_TRUE(fs::exists(dir / "out" / "figure_rmse_k2.csv"));
  fs::remove_all(dir);
}
