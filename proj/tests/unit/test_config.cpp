#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "cdec/config.hpp"
#include "cdec/errors.hpp"

using namespace cdec;

namespace {

std::size_t error_line(const std::string& text) {
    try {
        KeyValueConfig::parse_string(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return 0;
}

}  // namespace

TEST(Config, ParsesSectionsCommentsAndWhitespace) {
    const auto cfg = KeyValueConfig::parse_string(
        "# top comment\n"
        "name = quick\n"
        "\n"
        "[model]\n"
        "  layers = 5   \n"
        "; another comment\n"
        "mu=0.5\n"
        "[train]\n"
        "loss = log-cosh\n"
        "seeds = 1, 2,3\n"
        "flag = yes\n");
    EXPECT_EQ(cfg.get_string("name", ""), "quick");
    EXPECT_EQ(cfg.get_int("model.layers", 0), 5);
    EXPECT_EQ(cfg.get_double("model.mu", 0.0), 0.5);
    EXPECT_EQ(cfg.get_string("train.loss", ""), "log-cosh");
    EXPECT_EQ(cfg.get_list("train.seeds", {}), (std::vector<std::string>{"1", "2", "3"}));
    EXPECT_TRUE(cfg.get_bool("train.flag", false));
    EXPECT_EQ(cfg.get_int("model.missing", 7), 7);
    EXPECT_FALSE(cfg.has("model.missing"));
    EXPECT_EQ(cfg.entries().at("model.layers").line, 5u);
}

TEST(Config, ErrorsCarryLineNumbers) {
    EXPECT_EQ(error_line("[a]\nx=1\n[b\n"), 3u);
    EXPECT_EQ(error_line("[a]\nno equals sign\n"), 2u);
    EXPECT_EQ(error_line("[a]\nx=1\nx=2\n"), 3u);
    EXPECT_EQ(error_line("[bad name]\n"), 1u);
    EXPECT_EQ(error_line("[a]\nbad key=1\n"), 2u);
    EXPECT_EQ(error_line("\n\n=3\n"), 3u);
}

TEST(Config, TypedGettersRejectMalformedValues) {
    const auto cfg = KeyValueConfig::parse_string("[s]\nd=1.5x\ni=2.5\nu=-3\nb=maybe\nl=1,,2\n");
    try {
        cfg.get_double("s.d", 0.0);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_NE(std::string(e.what()).find("s.d"), std::string::npos);
    }
    EXPECT_THROW(cfg.get_int("s.i", 0), ConfigError);
    EXPECT_THROW(cfg.get_u64("s.u", 0), ConfigError);
    EXPECT_EQ(cfg.get_int("s.u", 0), -3);
    EXPECT_THROW(cfg.get_bool("s.b", false), ConfigError);
    EXPECT_THROW(cfg.get_list("s.l", {}), ConfigError);
}

TEST(Config, OverridesReplaceOrAdd) {
    auto cfg = KeyValueConfig::parse_string("[model]\nlayers=5\n");
    cfg.apply_override("model.layers=7");
    cfg.apply_override("train.loss = mse");
    EXPECT_EQ(cfg.get_int("model.layers", 0), 7);
    EXPECT_EQ(cfg.entries().at("model.layers").line, 0u);
    EXPECT_EQ(cfg.get_string("train.loss", ""), "mse");
    EXPECT_THROW(cfg.apply_override("nonsense"), ConfigError);
    EXPECT_THROW(cfg.apply_override("a b=1"), ConfigError);
}

TEST(Config, UnknownKeysAreReported) {
    const auto cfg = KeyValueConfig::parse_string("[model]\nlayers=5\nlayres=6\n");
    try {
        cfg.require_known({"model.layers"});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find("model.layres"), std::string::npos);
    }
}

TEST(Config, CanonicalFormIsStableAndReparses) {
    auto a = KeyValueConfig::parse_string("top=1\n[z]\nb=2\na=1\n[a]\nk=v\n");
    auto b = KeyValueConfig::parse_string("[a]\nk = v\n[z]\na=1\nb=2\n");
    b.set("top", "1");
    EXPECT_EQ(a.canonical(), b.canonical());
    const auto again = KeyValueConfig::parse_string(a.canonical());
    EXPECT_EQ(again.canonical(), a.canonical());
    EXPECT_EQ(a.canonical().rfind("top = 1", 0), 0u);
}

TEST(Config, LoadReportsMissingFile) {
    EXPECT_THROW(KeyValueConfig::load("/nonexistent/dir/x.cfg"), ConfigError);
    const auto path = std::filesystem::temp_directory_path() / "cdec_config_test.cfg";
    std::ofstream(path) << "[model]\nlayers=3\n";
    EXPECT_EQ(KeyValueConfig::load(path).get_int("model.layers", 0), 3);
    std::filesystem::remove(path);
}
