#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "drabi/error.hpp"
#include "drabi/harness.hpp"

using namespace drabi;
namespace fs = std::filesystem;

namespace {

class HarnessTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("drabi_harness_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  HarnessOptions options(const std::string& sub) const {
    HarnessOptions o;
    o.out_dir = dir_ / sub;
    return o;
  }

  fs::path dir_;
};

RunConfig small_ohmic() {
  std::istringstream is(
      "version = 1\n"
      "bath = pure_ohmic\n"
      "alpha_list = 0.3, 0.5\n"
      "beta_list = 4\n"
      "n_therm = 200\n"
      "n_sweeps = 3000\n"
      "bin_len = 100\n"
      "n_chains = 2\n"
      "checkpoint_every = 500\n"
      "bootstrap = 50\n"
      "seed = 11\n");
  return parse_config(is, "small");
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST(Harness, ResistanceEstimate) {
  EXPECT_NEAR(resistance_estimate(0.2), 1.2, 1e-15);
  EXPECT_NEAR(resistance_estimate(0.24), 1.0, 1e-15);
  EXPECT_THROW(resistance_estimate(0.0), DomainError);
}

TEST_F(HarnessTest, SweepIsReproducibleAcrossThreadCounts) {
  const auto cfg = small_ohmic();
  auto a = options("a");
  auto b = options("b");
  b.threads = 3;
  cmd_sweep(cfg, a);
  cmd_sweep(cfg, b);
  const auto ca = slurp(a.out_dir / "results.csv");
  EXPECT_FALSE(ca.empty());
  EXPECT_EQ(ca, slurp(b.out_dir / "results.csv"));
  EXPECT_TRUE(fs::exists(a.out_dir / "summary.json"));
  EXPECT_TRUE(fs::exists(a.out_dir / "checkpoints" / "p1_c1.ckpt"));
}

TEST_F(HarnessTest, KilledRunResumesToTheSameResult) {
  const auto cfg = small_ohmic();
  const auto ref = options("ref");
  cmd_sweep(cfg, ref);

  auto killed = options("killed");
  killed.stop_after = 1000;
  EXPECT_THROW(cmd_sweep(cfg, killed), Interrupted);
  EXPECT_FALSE(fs::exists(killed.out_dir / "results.csv"));
  killed.stop_after = 0;
  killed.resume = true;
  cmd_sweep(cfg, killed);
  EXPECT_EQ(slurp(ref.out_dir / "results.csv"), slurp(killed.out_dir / "results.csv"));
}

TEST_F(HarnessTest, ResumeWithDifferentSettingsIsRejected) {
  const auto cfg = small_ohmic();
  auto o = options("run");
  o.stop_after = 500;
  EXPECT_THROW(cmd_sweep(cfg, o), Interrupted);
  o.stop_after = 0;
  o.resume = true;
  o.seed = 12;
  try {
    cmd_sweep(cfg, o);
    FAIL() << "expected ResumeMismatch";
  } catch (const ResumeMismatch& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("seed"), std::string::npos) << msg;
    EXPECT_NE(msg.find("11"), std::string::npos) << msg;
    EXPECT_NE(msg.find("12"), std::string::npos) << msg;
  }
}

TEST_F(HarnessTest, ZeroCouplingRowIsAFreeSpin) {
  std::istringstream is(
      "version = 1\n"
      "bath = structured\n"
      "g_list = 0\n"
      "beta_list = 6\n"
      "n_therm = 1000\n"
      "n_sweeps = 40000\n"
      "bin_len = 200\n"
      "n_chains = 2\n"
      "bootstrap = 100\n");
  const auto cfg = parse_config(is, "free");
  const auto rows = cmd_sweep(cfg, options("free"));
  ASSERT_EQ(rows.size(), 1u);
  const auto& r = rows.front();
  EXPECT_EQ(r.g, 0.0);
  EXPECT_EQ(r.alpha_eff, 0.0);
  EXPECT_EQ(r.alpha_total, 0.0);
  const double m2 = std::tanh(3.0) / 3.0, sx = std::tanh(3.0);
  EXPECT_NEAR(r.est.m2.mean, m2, 4 * r.est.m2.std_error + 1e-4);
  EXPECT_NEAR(r.est.sigma_x.mean, sx, 4 * r.est.sigma_x.std_error + 1e-4);
  EXPECT_DOUBLE_EQ(r.est.hq.mean, -0.5 * r.delta * r.est.sigma_x.mean);
  EXPECT_EQ(r.est.m2.n_samples, 2u * 40000u);
}

TEST_F(HarnessTest, ResultsCsvRoundTrip) {
  const auto cfg = small_ohmic();
  const auto o = options("rt");
  const auto rows = cmd_sweep(cfg, o);
  std::ifstream is(o.out_dir / "results.csv");
  const auto back = read_results_csv(is);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].bath, "pure_ohmic");
    EXPECT_TRUE(std::isnan(back[i].g));
    EXPECT_EQ(back[i].alpha_total, rows[i].alpha_total);
    EXPECT_EQ(back[i].beta, rows[i].beta);
    EXPECT_EQ(back[i].est.m2.mean, rows[i].est.m2.mean);
    EXPECT_EQ(back[i].est.m2.std_error, rows[i].est.m2.std_error);
    EXPECT_EQ(back[i].est.sigma_x.mean, rows[i].est.sigma_x.mean);
    EXPECT_EQ(back[i].est.delta_eff.has_value(), rows[i].est.delta_eff.has_value());
  }
  std::istringstream bad("bath,g\nx,1\n");
  EXPECT_THROW(read_results_csv(bad), ParseError);
  const auto pts = psi_points(rows);
  EXPECT_EQ(pts[1].g, 0.5);
  EXPECT_DOUBLE_EQ(pts[1].psi, 0.5 * rows[1].est.m2.mean);
}

TEST_F(HarnessTest, BktFitOnSyntheticTable) {
  // Psi from G = 20 + 20 (1.10 - alpha)(ln beta - x0), written as a results table.
  // The level keeps Psi below alpha, as M^2 <= 1 requires.
  const std::vector<double> betas{25, 50, 100, 200, 400};
  double x0 = 0.0;
  for (double b : betas) x0 += std::log(b);
  x0 /= static_cast<double>(betas.size());
  std::vector<ResultRow> rows;
  for (int k = 0; k < 8; ++k) {
    const double alpha = 1.06 + 0.02 * k;
    for (double b : betas) {
      const double G = 20.0 + 20.0 * (1.10 - alpha) * (std::log(b) - x0);
      const double psi = 1.0 + 1.0 / (G + 2.0 * std::log(b));
      ResultRow r;
      r.bath = "pure_ohmic";
      r.g = std::nan("");
      r.alpha_eff = r.alpha_total = alpha;
      r.beta = b;
      r.est.m2.mean = psi / alpha;
      r.est.m2.std_error = 1e-4;
      rows.push_back(r);
    }
  }
  const auto table = dir_ / "synthetic.csv";
  {
    std::ofstream os(table);
    write_results_csv(os, rows);
  }
  auto o = options("fit");
  CriticalOptions copt;
  copt.bootstrap = 100;
  const auto fit = cmd_bkt_fit({table}, o, copt);
  EXPECT_NEAR(fit.alpha_c, 1.10, 1e-3);
  EXPECT_NEAR(fit.ln_beta0, -10.0, 1e-2);
  EXPECT_TRUE(fs::exists(o.out_dir / "g_curves.csv"));
  EXPECT_NE(slurp(o.out_dir / "bkt_fit.json").find("\"alpha_c\""), std::string::npos);
  EXPECT_THROW(cmd_bkt_fit({}, o), ParseError);
}

TEST_F(HarnessTest, KernelTableForZeroCoupling) {
  std::istringstream is("version = 1\ng_list = 0, 0.5\nbeta_list = 5\n");
  const auto cfg = parse_config(is, "kt");
  const auto paths = cmd_kernel_table(cfg, options("kt"));
  ASSERT_EQ(paths.size(), 2u);
  std::ifstream k0(paths[0]);
  const auto zero = KernelTable::read(k0);
  EXPECT_TRUE(zero.zero());
  EXPECT_EQ(zero.W(2.0), 0.0);
  std::ifstream k1(paths[1]);
  const auto t = KernelTable::read(k1);
  EXPECT_FALSE(t.zero());
  EXPECT_GT(t.K(0.5), 0.0);
}

TEST_F(HarnessTest, EdCheckOnTinyBath) {
  std::istringstream is(
      "version = 1\n"
      "bath = discrete\n"
      "modes = 0.9:0.3\n"
      "beta_list = 2\n"
      "n_max = 12\n"
      "eps_list = 0.1, 0.01\n"
      "z_points = 31\n");
  const auto cfg = parse_config(is, "ed");
  const auto o = options("ed");
  const auto lines = cmd_ed_check(cfg, o);
  EXPECT_GE(lines.size(), 7u);
  for (const auto& l : lines) EXPECT_TRUE(l.pass) << l.name << " " << l.value << " " << l.detail;
  EXPECT_TRUE(fs::exists(o.out_dir / "ed_check.json"));
  EXPECT_TRUE(fs::exists(o.out_dir / "spectrum_0_beta0.csv"));
  const auto traces = cmd_relax(cfg, o);
  ASSERT_EQ(traces.size(), 1u);
  EXPECT_EQ(traces[0].sigma_z.front(), 1.0);
  EXPECT_TRUE(fs::exists(o.out_dir / "relax_0.csv"));
}
