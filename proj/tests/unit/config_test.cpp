#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "telebrain/config.hpp"
#include "telebrain/content_store.hpp"
#include "test_support.hpp"

using namespace telebrain;
namespace ts = testsupport;

TEST(Config, Defaults) {
  const auto c = parse_config(Json::object());
  EXPECT_EQ(c.http_port, 8080);
  EXPECT_EQ(c.osc.listen_port, 57121);
  EXPECT_EQ(c.osc.default_send_port, 57120);
  EXPECT_EQ(c.delay_budget_ms, 200);
  EXPECT_EQ(c.utc_offset_minutes(), 0);
  EXPECT_FALSE(c.tts.has_value());
}

TEST(Config, FullDocument) {
  const auto c = parse_config(Json::parse(R"({
    "http_port": 9000, "bind_address": "127.0.0.1",
    "osc": {"listen_port": 7000, "default_send_port": 7001},
    "delay_budget_ms": 350, "data_dir": "/tmp/x", "timezone": "-05:30", "rng_seed": 9,
    "tts": {"endpoint": "http://127.0.0.1:5002/speak", "language_map": {"en": "en-US"},
            "timeout_ms": 900}})"));
  EXPECT_EQ(c.http_port, 9000);
  EXPECT_EQ(c.osc.listen_port, 7000);
  EXPECT_EQ(c.delay_budget_ms, 350);
  EXPECT_EQ(c.utc_offset_minutes(), -330);
  EXPECT_EQ(c.rng_seed, 9u);
  ASSERT_TRUE(c.tts.has_value());
  EXPECT_EQ(c.tts->language_map.at("en"), "en-US");
  EXPECT_EQ(c.tts->timeout_ms, 900);
}

TEST(Config, ListsEveryBadKey) {
  try {
    parse_config(Json::parse(R"({"http_port": -1, "delay_budget_ms": 0, "colour": "red"})"));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.violations().size(), 3u);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "invalid");
    const std::string what = e.what();
    EXPECT_NE(what.find("http_port"), std::string::npos);
    EXPECT_NE(what.find("delay_budget_ms"), std::string::npos);
    EXPECT_NE(what.find("colour"), std::string::npos);
  }
}

TEST(Config, UtcOffsets) {
  EXPECT_EQ(parse_utc_offset("UTC"), 0);
  EXPECT_EQ(parse_utc_offset("Z"), 0);
  EXPECT_EQ(parse_utc_offset("+01:00"), 60);
  EXPECT_EQ(parse_utc_offset("-09:45"), -585);
  EXPECT_THROW(parse_utc_offset("Europe/Paris"), Error);
  EXPECT_THROW(parse_utc_offset("+25:00"), Error);
}

TEST(Config, EnvironmentOverridesDataDir) {
  ts::TempDir dir;
  const auto file = dir.path() / "config.json";
  std::ofstream(file) << R"({"data_dir": "relative-data"})";
  ::unsetenv(kDataDirEnv);
  EXPECT_EQ(load_config(file).data_dir, dir.path() / "relative-data");
  ::setenv(kDataDirEnv, "/srv/elsewhere", 1);
  EXPECT_EQ(load_config(file).data_dir, "/srv/elsewhere");
  ServerConfig c;
  apply_env(c);
  EXPECT_EQ(c.data_dir, "/srv/elsewhere");
  ::setenv(kDataDirEnv, "", 1);
  ServerConfig d;
  apply_env(d);
  EXPECT_EQ(d.data_dir, "data");
  ::unsetenv(kDataDirEnv);
}
