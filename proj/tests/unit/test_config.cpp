#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "lanecast/config.hpp"

using namespace lanecast;

TEST(Config, EmptyObjectGivesDefaults) {
  const auto c = parse_run_config("{}");
  EXPECT_EQ(c.seed, 0u);
  EXPECT_DOUBLE_EQ(c.train.learning_rate, 7e-5);
  EXPECT_EQ(c.train.epochs, 300u);
  EXPECT_EQ(c.train.batch_size, 128u);
  EXPECT_DOUBLE_EQ(c.slots.side_gate, 15.0);
  EXPECT_EQ(c.stride, 10);
  EXPECT_EQ(c.split, (std::array<double, 3>{0.7, 0.1, 0.2}));
  EXPECT_EQ(c.variant, AblationVariant::full);
  EXPECT_EQ(c.corpus.windows, 2000u);
  EXPECT_FALSE(c.scenario.has_value());
}

TEST(Config, ReadsEverySection) {
  const auto c = parse_run_config(R"({
    "seed": 42,
    "train": {"learning_rate": 0.002, "epochs": 12, "batch_size": 32, "seed": 5, "keep_best": false,
              "patience": 4, "workers": 2, "final_lr_scale": 0.001},
    "neighborhood": {"side_gate_m": 10.0, "stride": 5, "normalize": false},
    "split": [0.8, 0.1, 0.1],
    "ablation": {"variant": "without_dilation"},
    "corpus": {"windows": 6000, "noise": 0.1},
    "scenario": {"lanes": 2, "vehicles": [{"id": 1, "x": 0, "lane": 1, "v": 20,
                 "lane_change": {"direction": "left", "start": 3}}]}
  })");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_DOUBLE_EQ(c.train.learning_rate, 0.002);
  EXPECT_EQ(c.train.epochs, 12u);
  EXPECT_FALSE(c.train.keep_best);
  EXPECT_DOUBLE_EQ(c.train.final_lr_scale, 0.001);
  EXPECT_DOUBLE_EQ(c.slots.side_gate, 10.0);
  EXPECT_EQ(c.stride, 5);
  EXPECT_FALSE(c.normalize);
  EXPECT_EQ(c.variant, AblationVariant::without_dilation);
  EXPECT_EQ(c.corpus.windows, 6000u);
  EXPECT_DOUBLE_EQ(c.corpus.noise, 0.1);
  ASSERT_TRUE(c.scenario.has_value());
  EXPECT_EQ(c.scenario->lanes, 2);
  ASSERT_TRUE(c.scenario->vehicles[0].lane_change.has_value());
  EXPECT_DOUBLE_EQ(c.scenario->vehicles[0].lane_change->duration, 4.0);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_run_config(R"({"sede": 1})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"train": {"lr": 1}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"train": {"epochs": "many"}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"train": {"teacher_forcing": false}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"train": {"batch_size": 0}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"neighborhood": {"stride": 0}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"ablation": {"variant": "bogus"}})"), ConfigError);
  EXPECT_THROW(parse_run_config("[1, 2"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"scenario": {"vehicles": [{"x": 1}]}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"scenario": {"vehicles": [{"id": 1, "lane_change": {"direction": "up"}}]}})"),
               ConfigError);
}

TEST(Config, ErrorNamesOffendingKey) {
  try {
    parse_run_config(R"({"corpus": {"window": 10}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'window'"), std::string::npos);
  }
}

TEST(Config, DumpRoundTripsAndFingerprints) {
  auto c = parse_run_config(R"({"seed": 3, "corpus": {"windows": 100},
    "scenario": {"vehicles": [{"id": 2, "lane": 2, "v": 25, "speed_change": {"start": 1, "duration": 2, "accel": -1}}]}})");
  const auto text = dump_run_config(c);
  EXPECT_EQ(dump_run_config(parse_run_config(text)), text);
  const auto fp = config_fingerprint(c);
  EXPECT_EQ(fp.size(), 16u);
  EXPECT_EQ(config_fingerprint(parse_run_config(text)), fp);
  c.train.epochs = 299;
  EXPECT_NE(config_fingerprint(c), fp);
}

TEST(Config, ScenarioBareOrWrapped) {
  const std::string bare = R"({"lanes": 3, "vehicles": [{"id": 1, "x": 0, "lane": 2, "v": 25}]})";
  const auto a = parse_scenario(bare);
  const auto b = parse_scenario(R"({"scenario": )" + bare + "}");
  EXPECT_EQ(a.vehicles.size(), 1u);
  EXPECT_EQ(b.vehicles.size(), 1u);
  EXPECT_EQ(a.vehicles[0].lane, 2);
}

TEST(Config, FileErrorsNamePath) {
  const auto path = std::filesystem::temp_directory_path() / "lanecast_bad_config.json";
  {
    std::ofstream out(path);
    out << R"({"unknown": 1})";
  }
  try {
    load_run_config(path);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(path.string()), std::string::npos);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(load_run_config(path), ConfigError);
}
