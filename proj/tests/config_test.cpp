#include <gtest/gtest.h>

#include <fstream>

#include "hgvae/config.hpp"
#include "hgvae/errors.hpp"
#include "support/fixtures.hpp"

namespace hgvae {
namespace {

using nlohmann::json;
using testing::TempDir;

TEST(Config, Defaults) {
  const TrainingConfig c;
  EXPECT_EQ(c.lr, 5e-4);
  EXPECT_EQ(c.kappa, 2.0);
  EXPECT_EQ(c.delta, 3.0);
  EXPECT_EQ(c.mask_rate, 0.5);
  EXPECT_EQ(c.esce_variant, "focal");
  EXPECT_FALSE(c.denominator_includes_positive);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, NestedAndDottedFormsAgree) {
  const TrainingConfig a = TrainingConfig::from_json({{"train", {{"lr", 1e-3}, {"epochs", 7}}}, {"pnsg", {{"kappa", 4}}}});
  const TrainingConfig b = TrainingConfig::from_json({{"train.lr", 1e-3}, {"train.epochs", 7}, {"pnsg.kappa", 4}});
  EXPECT_EQ(a.to_json(), b.to_json());
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.epochs, 7);
  EXPECT_EQ(a.kappa, 4.0);
}

TEST(Config, JsonRoundTripCoversEveryKey) {
  TrainingConfig c;
  c.mask_rate_final = 0.7;
  c.pnsg_mode = "vi_only";
  const TrainingConfig back = TrainingConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  for (const std::string& key : TrainingConfig::keys()) {
    const auto dot = key.find('.');
    EXPECT_TRUE(c.to_json().at(key.substr(0, dot)).contains(key.substr(dot + 1))) << key;
  }
}

TEST(Config, SetParsesLiteralsAndBareStrings) {
  TrainingConfig c;
  c.set("loss.esce_variant", "literal");
  c.set("loss.alpha", "0.25");
  c.set("train.early_stopping", "true");
  c.set("mask.rate_final", "0.3");
  EXPECT_EQ(c.esce_variant, "literal");
  EXPECT_EQ(c.alpha, 0.25);
  EXPECT_TRUE(c.early_stopping);
  EXPECT_EQ(c.final_mask_rate(), 0.3);
  EXPECT_THROW(c.set("loss.alpah", "1"), ConfigError);
  EXPECT_THROW(c.set("train.epochs", "many"), ConfigError);
}

TEST(Config, HashTracksContent) {
  TrainingConfig a, b;
  EXPECT_EQ(a.hash(), b.hash());
  b.tau = 0.4;
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Config, ValidationRejectsOutOfRange) {
  const std::vector<std::pair<std::string, std::string>> bad = {
      {"train.epochs", "0"},      {"train.lr", "0"},          {"mask.rate", "1.5"},
      {"model.heads", "3"},       {"model.dropout", "1"},     {"pnsg.dropout_rate", "0"},
      {"pnsg.mode", "mixup"},     {"loss.beta", "-1"},        {"loss.tau", "0"},
      {"loss.delta", "0.5"},      {"loss.esce_variant", "x"}, {"model.activation", "gelu"},
      {"pnsg.num_negatives", "0"}};
  for (const auto& [key, value] : bad) {
    TrainingConfig c;
    c.set(key, value);
    EXPECT_THROW(c.validate(), ConfigError) << key << "=" << value;
  }
}

TEST(Config, LoadReportsFileProblems) {
  TempDir dir("cfg");
  EXPECT_THROW(TrainingConfig::load((dir.path() / "absent.json").string()), ConfigError);
  std::ofstream(dir.path() / "bad.json") << "{ not json";
  EXPECT_THROW(TrainingConfig::load((dir.path() / "bad.json").string()), ConfigError);
  std::ofstream(dir.path() / "arr.json") << "[1, 2]";
  EXPECT_THROW(TrainingConfig::load((dir.path() / "arr.json").string()), ConfigError);
  std::ofstream(dir.path() / "ok.json") << R"({"loss": {"gamma": 0.5}})";
  EXPECT_EQ(TrainingConfig::load((dir.path() / "ok.json").string()).gamma, 0.5);
}

}  // namespace
}  // namespace hgvae
