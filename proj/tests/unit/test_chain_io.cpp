#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "drabi/chain_io.hpp"
#include "drabi/error.hpp"
#include "drabi/kernel_table.hpp"
#include "drabi/spectral.hpp"

using namespace drabi;

namespace {

KernelTable table(double beta) {
  return KernelTable::build(SpectralDensity::pure_ohmic(0.7, 10.0), beta);
}

const Echo kEcho{{"bath", "pure_ohmic"}, {"alpha", "0.7"}, {"beta", "6"}, {"seed", "4"}};

}  // namespace

TEST(ChainIo, RoundTripIsExact) {
  const auto kt = table(6.0);
  Schedule s;
  s.n_therm = 50;
  s.bin_len = 20;
  s.seed = 4;
  s.updates = UpdateScheme::mixed;
  ChainState st = make_chain(6.0, s);
  advance(st, kt, 1.0, s, 777);

  std::stringstream ss;
  write_checkpoint(ss, kEcho, st);
  const auto cp = read_checkpoint(ss);
  EXPECT_EQ(cp.echo, kEcho);
  EXPECT_EQ(cp.state.sweep, st.sweep);
  EXPECT_EQ(cp.state.proposed, st.proposed);
  EXPECT_EQ(cp.state.accepted, st.accepted);
  EXPECT_EQ(cp.state.worldline.base_sign, st.worldline.base_sign);
  EXPECT_EQ(cp.state.worldline.kinks, st.worldline.kinks);
  EXPECT_EQ(cp.state.acc.bins_m2, st.acc.bins_m2);
  EXPECT_EQ(cp.state.acc.in_bin, st.acc.in_bin);
  EXPECT_EQ(cp.state.acc.bin_m2, st.acc.bin_m2);
  EXPECT_TRUE(cp.state.acc.ac_m2 == st.acc.ac_m2);
  EXPECT_TRUE(cp.state.rng == st.rng);

  // Continuing from the restored state reproduces the uninterrupted run.
  ChainState restored = cp.state;
  advance(st, kt, 1.0, s, 1500);
  advance(restored, kt, 1.0, s, 1500);
  EXPECT_EQ(restored.worldline.kinks, st.worldline.kinks);
  EXPECT_EQ(restored.acc.bins_m2, st.acc.bins_m2);
  EXPECT_EQ(restored.acc.bins_sx, st.acc.bins_sx);
}

TEST(ChainIo, FileSaveAndLoad) {
  const auto dir = std::filesystem::temp_directory_path() / "drabi_chain_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "c.ckpt";
  ChainState st = make_chain(3.0, Schedule{});
  st.worldline.kinks = {0.25, 1.0 / 3.0};
  save_checkpoint(path, kEcho, st);
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  const auto cp = load_checkpoint(path);
  EXPECT_EQ(cp.state.worldline.kinks, st.worldline.kinks);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), Error);
}

TEST(ChainIo, RejectsDamagedInput) {
  std::stringstream bad("# something else\n");
  EXPECT_THROW(read_checkpoint(bad), ParseError);
  std::stringstream ss;
  write_checkpoint(ss, kEcho, make_chain(3.0, Schedule{}));
  const std::string full = ss.str();
  std::stringstream truncated(full.substr(0, full.size() / 2));
  EXPECT_THROW(read_checkpoint(truncated), ParseError);
}

TEST(ChainIo, EchoDiffNamesChangedKeys) {
  EXPECT_EQ(echo_diff(kEcho, kEcho), "");
  Echo other = kEcho;
  other[1].second = "0.8";
  other.push_back({"extra", "1"});
  const auto d = echo_diff(kEcho, other);
  EXPECT_NE(d.find("alpha"), std::string::npos);
  EXPECT_NE(d.find("0.7"), std::string::npos);
  EXPECT_NE(d.find("0.8"), std::string::npos);
  EXPECT_NE(d.find("extra"), std::string::npos);
  EXPECT_EQ(d.find("seed"), std::string::npos);
}
