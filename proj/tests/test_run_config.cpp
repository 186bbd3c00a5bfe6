#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "support.hpp"
#include "wheelodo/run_config.hpp"

using namespace wheelodo;
using namespace wheelodo::testing;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::IoError;
}

std::filesystem::path ini(const std::string& name, const std::string& text) {
  const auto p = scratch_dir("run_config") / name;
  std::ofstream(p) << text;
  return p;
}

struct SeedEnv {
  explicit SeedEnv(const char* v) { ::setenv("WHEELODO_SEED", v, 1); }
  ~SeedEnv() { ::unsetenv("WHEELODO_SEED"); }
};

}  // namespace

TEST(RunConfig, Defaults) {
  RunConfig c;
  EXPECT_EQ(c.train.learning_rate, 0.0007);
  EXPECT_EQ(c.train.dropout_rate, 0.05);
  EXPECT_EQ(c.train.epochs, 200);
  EXPECT_EQ(c.train.batch_size, 64);
  EXPECT_EQ(c.recal_epochs, 50);
  EXPECT_EQ(c.recal_batch_size, 8);
  EXPECT_EQ(c.adapt_seconds, 50.0);
  EXPECT_EQ(c.scenarios, (std::vector<int>{30, 60, 120, 180}));
  EXPECT_FALSE(c.radius_m);
  EXPECT_NO_THROW(c.validate());
  const auto r = c.recal();
  EXPECT_EQ(r.epochs, 50);
  EXPECT_EQ(r.batch_size, 8);
  EXPECT_EQ(r.learning_rate, c.train.learning_rate);
}

TEST(RunConfig, FileOverridesDefaults) {
  RunConfig c;
  apply_config_file(c, ini("a.ini",
                           "[train]\nepochs = 7\nhidden_size = 8\nfreeze = w_x, u_h\n"
                           "[recalibrate]\nseconds = 80\nbatch_size = 4\n"
                           "[evaluate]\nscenarios = 30,60\n[run]\nseed = 9\nradius_m = 0.31\n"));
  EXPECT_EQ(c.train.epochs, 7);
  EXPECT_EQ(c.train.hidden_size, 8);
  EXPECT_EQ(c.train.freeze, (std::vector<std::string>{"w_x", "u_h"}));
  EXPECT_EQ(c.train.learning_rate, 0.0007);
  EXPECT_EQ(c.adapt_seconds, 80.0);
  EXPECT_EQ(c.recal_batch_size, 4);
  EXPECT_EQ(c.scenarios, (std::vector<int>{30, 60}));
  EXPECT_EQ(c.seed(), 9u);
  EXPECT_EQ(c.radius_m, 0.31);
}

TEST(RunConfig, EnvironmentBeatsFileAndFlagsBeatEnvironment) {
  RunConfig c;
  apply_config_file(c, ini("b.ini", "[run]\nseed = 9\n"));
  {
    SeedEnv env("21");
    apply_seed_env(c);
  }
  EXPECT_EQ(c.seed(), 21u);
  c.set_seed(5);  // a --seed flag is applied last
  EXPECT_EQ(c.seed(), 5u);
  SeedEnv bad("-3");
  EXPECT_EQ(code_of([&] { apply_seed_env(c); }), Errc::InvalidConfig);
}

TEST(RunConfig, RejectsBadFiles) {
  RunConfig c;
  EXPECT_EQ(code_of([&] { apply_config_file(c, ini("c.ini", "[train]\nlearnig_rate = 0.1\n")); }),
            Errc::InvalidConfig);
  EXPECT_EQ(code_of([&] { apply_config_file(c, ini("d.ini", "[train]\nepochs = many\n")); }), Errc::InvalidConfig);
  EXPECT_EQ(code_of([&] { apply_config_file(c, ini("e.ini", "[evaluate]\nscenarios = 30,x\n")); }),
            Errc::InvalidConfig);
  EXPECT_EQ(code_of([&] { apply_config_file(c, "/nonexistent/run.ini"); }), Errc::MissingFile);
  RunConfig bad;
  bad.train.dropout_rate = 1.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), Errc::InvalidConfig);
  bad = {};
  bad.scenarios = {30, 0};
  EXPECT_EQ(code_of([&] { bad.validate(); }), Errc::InvalidConfig);
}

TEST(RunConfig, IniRoundTripKeepsTheHash) {
  RunConfig c;
  c.train.epochs = 12;
  c.train.learning_rate = 0.001;
  c.recal_freeze = {"w_x"};
  c.scenarios = {30};
  c.set_seed(77);
  c.radius_m = 0.305;
  RunConfig back;
  apply_config_file(back, ini("rt.ini", config_to_ini(c)));
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.hash(), c.hash());
  RunConfig other = c;
  other.set_seed(78);
  EXPECT_NE(other.hash(), c.hash());
}
