#include <string>

#include "doctest.h"
#include "dlgn/config.hpp"
#include "dlgn/errors.hpp"

using namespace dlgn;

TEST_SUITE_BEGIN("config");

TEST_CASE("defaults parse from an empty config") {
    const auto cfg = parse_config_text("");
    CHECK(cfg.dataset == "parity:4");
    CHECK(cfg.net.layer_width == 256);
    CHECK(cfg.net.base_layers == 4);
    CHECK(cfg.net.param == Parametrization::IWP);
    CHECK(cfg.net.estimator == Estimator::Sin01);
    CHECK(cfg.net.init.kind == InitScheme::Kind::Residual);
    CHECK(cfg.train.learning_rate == 0.01);
    CHECK(cfg.train.steps == 5000);
    CHECK(cfg.seed == 1);
}

TEST_CASE("keys override defaults; comments and blanks are ignored") {
    const auto cfg = parse_config_text(
        "# quickstart\n"
        "\n"
        "dataset = parity:6\n"
        "layer_width=64   # inline comment\n"
        "parametrization = op\n"
        "estimator = sigmoid\n"
        "init.kind = heavy_tail_set\n"
        "init.gates = 2,8\n"
        "lr = 0.02\n"
        "tau = 4\n"
        "seed = 42\n");
    CHECK(cfg.dataset == "parity:6");
    CHECK(cfg.net.layer_width == 64);
    CHECK(cfg.net.param == Parametrization::OP);
    CHECK(cfg.net.estimator == Estimator::Sigmoid);
    CHECK(cfg.net.init.kind == InitScheme::Kind::HeavyTailSet);
    CHECK(cfg.net.init.target_gates == std::vector<GateId>{2, 8});
    CHECK(cfg.train.learning_rate == 0.02);
    CHECK(cfg.net.tau == 4.0);
    CHECK(cfg.seed == 42);
}

TEST_CASE("unknown and duplicate keys are rejected") {
    try {
        (void)parse_config_text("layers = 3\n");
        FAIL("expected rejection");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("unknown config key") != std::string::npos);
    }
    CHECK_THROWS_AS((void)parse_config_text("seed = 1\nseed = 2\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config_text("steps\n"), ConfigError);  // missing '='
}

TEST_CASE("invalid values are rejected") {
    CHECK_THROWS_AS((void)parse_config_text("steps = -5\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config_text("estimator = relu\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config_text("parametrization = both\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config_text("tau = 0\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config_text("lr = tiny\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config_text("weight_decay = 0.1\n"), ConfigError);  // IWP default
}

TEST_CASE("echo is sorted, complete, and reparses to the same config") {
    const auto cfg = parse_config_text(
        "dataset = parity:5\n"
        "layer_width = 32\n"
        "init.mu = 1.7\n"
        "dropout_p = 0.25\n");
    const auto echo = echo_config(cfg);

    // every line is key=value with sorted keys
    std::string prev;
    size_t start = 0;
    int lines = 0;
    while (start < echo.size()) {
        const auto end = echo.find('\n', start);
        const auto line = echo.substr(start, end - start);
        const auto eq = line.find('=');
        REQUIRE(eq != std::string::npos);
        const auto key = line.substr(0, eq);
        CHECK(prev < key);
        prev = key;
        ++lines;
        start = end + 1;
    }
    CHECK(lines >= 25);

    const auto back = parse_config_text(echo);
    CHECK(echo_config(back) == echo);
    CHECK(back.dataset == cfg.dataset);
    CHECK(back.net.init.mu == cfg.net.init.mu);
    CHECK(back.train.dropout_p == cfg.train.dropout_p);
}

TEST_CASE("echo serializes doubles round-trip exactly") {
    const auto cfg = parse_config_text("lr = 0.30000000000000004\ninit.sigma = 1e-17\n");
    const auto back = parse_config_text(echo_config(cfg));
    CHECK(back.train.learning_rate == 0.30000000000000004);
    CHECK(back.net.init.sigma == 1e-17);
}

TEST_CASE("heavy_tail_set defaults its gate list to AND-OR") {
    const auto cfg = parse_config_text("init.kind = heavy_tail_set\n");
    CHECK(cfg.net.init.target_gates == std::vector<GateId>{2, 8});
}

TEST_SUITE_END();
