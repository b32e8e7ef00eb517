#include <gtest/gtest.h>

#include "sacfem/config.hpp"

using namespace sacfem;

TEST(Config, EmptyGivesDefaults) {
  const auto c = parse_config_string("");
  EXPECT_EQ(c.E, 1e6);
  EXPECT_EQ(c.nu, 0.3);
  EXPECT_EQ(c.rho, 1.0);
  EXPECT_EQ(c.n_p, 20);
  EXPECT_EQ(c.resolved_n_cri(), 20 * 80 + 1);
}

TEST(Config, ParsesValuesAndComments) {
  const auto c = parse_config_string("# comment\nnu = 0.25  # trailing\nmode = nopre\nn_cri = 5000\nconditional = true\n");
  EXPECT_EQ(c.nu, 0.25);
  EXPECT_EQ(c.mode, AssemblyMode::PerStep);
  EXPECT_EQ(*c.n_cri, 5000);
  EXPECT_TRUE(c.conditional);
}

TEST(Config, RejectsBadInput) {
  for (const char* text : {"nu = 0.5", "bogus = 1", "nu 0.3", "E = -1", "alpha_s = 1.5", "n_cri = 10", "nx = abc"}) {
    try {
      parse_config_string(text);
      ADD_FAILURE() << text;
    } catch (const std::invalid_argument& e) {
      const std::string key = std::string(text).substr(0, std::string(text).find_first_of(" ="));
      EXPECT_NE(std::string(e.what()).find(key), std::string::npos) << e.what();
    }
  }
}

TEST(Config, EmitReparseRoundTrip) {
  auto c = parse_config_string("E = 2e6\nn_s = 40\ndt = 1e-4\nlatency_us = 100\nh_measure = circumsphere\n");
  const auto back = parse_config_string(emit_config(c));
  EXPECT_EQ(emit_config(back), emit_config(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(*back.dt, 1e-4);
  EXPECT_EQ(config_hash(parse_config_string("")), config_hash(RunConfig{}));
  EXPECT_NE(config_hash(c), config_hash(RunConfig{}));
}

TEST(Config, MissingFile) { EXPECT_ANY_THROW(parse_config("/nonexistent/run.cfg")); }
