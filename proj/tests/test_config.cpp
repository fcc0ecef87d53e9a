#include <gtest/gtest.h>

#include "swarm/config.hpp"

using namespace swarm;

TEST(Config, SectionsAndTypes) {
  const auto cfg = Config::from_string(
      "# comment\n[model]\na = 1.5\ntau=inf\ndim = 3\n[run]\nname = demo\nvalues = 0.1, 0.2,0.3\nflag = yes\n");
  EXPECT_DOUBLE_EQ(cfg.get("model.a", 0.0), 1.5);
  EXPECT_TRUE(std::isinf(cfg.get("model.tau", 0.0)));
  EXPECT_EQ(cfg.get("model.dim", 0), 3);
  EXPECT_EQ(cfg.get<std::string>("run.name", ""), "demo");
  EXPECT_TRUE(cfg.get("run.flag", false));
  EXPECT_EQ(cfg.get_list("run.values", {}).size(), 3u);
  EXPECT_EQ(cfg.get("run.missing", 7), 7);
  EXPECT_THROW(cfg.require<double>("run.missing"), std::runtime_error);
}

TEST(Config, ModelParams) {
  const auto cfg = Config::from_string("[model]\nsigma = 2\ndiff = 0.1\n");
  const auto p = load_model_params(cfg);
  EXPECT_DOUBLE_EQ(p.temperature(), 0.2);
  EXPECT_THROW(load_model_params(Config::from_string("[model]\ndim = 5\n")), std::invalid_argument);
}

TEST(Config, BadNumber) {
  const auto cfg = Config::from_string("[model]\na = fast\n");
  EXPECT_THROW(cfg.get("model.a", 1.0), std::runtime_error);
}

TEST(Config, HashIsStable) {
  auto a = Config::from_string("[model]\na = 1\n");
  auto b = Config::from_string("[model]\n a=1 \n");
  EXPECT_EQ(a.hash(), b.hash());
  b.set("model.a", 2.0);
  EXPECT_NE(a.hash(), b.hash());
}
