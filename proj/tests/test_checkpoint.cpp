#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "dlgn/checkpoint.hpp"
#include "dlgn/dataset.hpp"
#include "dlgn/errors.hpp"

using namespace dlgn;

namespace {

const std::string tmp_dir = DLGN_TEST_TMP;

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct Fixture {
    RunConfig cfg;
    Network net;
    Trainer trainer;
    TrainData train, test;

    explicit Fixture(const std::string& text) {
        cfg = parse_config_text(text);
        const auto data = ingest_dataset(cfg.dataset);
        cfg.net.encoder.input_dim = data.train.feature_dim;
        cfg.net.class_count = data.train.class_count;
        net = build_network(cfg.net, cfg.seed);
        trainer = Trainer::create(net, cfg.train);
        train.encoded = thermometer_encode_batch(cfg.net.encoder, data.train.features);
        train.labels = data.train.labels;
        test.encoded = thermometer_encode_batch(cfg.net.encoder, data.test.features);
        test.labels = data.test.labels;
    }
};

const char* kSmall =
    "dataset = parity:3\n"
    "layer_width = 8\n"
    "base_layers = 2\n"
    "steps = 40\n"
    "batch_size = 6\n"
    "eval_every = 20\n";

}  // namespace

TEST_SUITE_BEGIN("checkpoint");

TEST_CASE("save, load, save is byte-identical") {
    Fixture f(kSmall);
    train_loop(f.net, f.trainer, f.train, f.test);

    const auto ck = make_checkpoint(f.cfg, f.net, &f.trainer);
    const std::string p1 = tmp_dir + "/ck_a.ckpt", p2 = tmp_dir + "/ck_b.ckpt";
    save_checkpoint(p1, ck);
    const auto loaded = load_checkpoint(p1);
    save_checkpoint(p2, loaded);
    CHECK(slurp(p1) == slurp(p2));

    CHECK(loaded.config_text == ck.config_text);
    CHECK(loaded.param == ck.param);
    CHECK(loaded.seed == ck.seed);
    CHECK(loaded.layer_logits == ck.layer_logits);
    CHECK(loaded.has_trainer);
    CHECK(loaded.step == 40);
    CHECK(loaded.adam.m == ck.adam.m);
    CHECK(loaded.adam.v == ck.adam.v);
    CHECK(loaded.data_rng == ck.data_rng);
}

TEST_CASE("restore rebuilds the identical network and trainer") {
    Fixture f(kSmall);
    train_loop(f.net, f.trainer, f.train, f.test);
    const auto ck = make_checkpoint(f.cfg, f.net, &f.trainer);

    const auto run = restore_run(ck);
    REQUIRE(run.net.layers.size() == f.net.layers.size());
    for (size_t l = 0; l < f.net.layers.size(); ++l) {
        CHECK(run.net.layers[l].logits == f.net.layers[l].logits);
        CHECK(run.net.layers[l].wire_a == f.net.layers[l].wire_a);
        CHECK(run.net.layers[l].wire_b == f.net.layers[l].wire_b);
    }
    CHECK(run.trainer.step == f.trainer.step);
    CHECK(run.trainer.adam.step == f.trainer.adam.step);
    CHECK(run.trainer.data_rng == f.trainer.data_rng);
}

TEST_CASE("resumed training matches an uninterrupted run") {
    // one run straight to step 40
    Fixture full(kSmall);
    train_loop(full.net, full.trainer, full.train, full.test);

    // same run paused at 20 and resumed through a checkpoint file
    Fixture half(kSmall);
    half.trainer.cfg.steps = 20;
    train_loop(half.net, half.trainer, half.train, half.test);
    const std::string path = tmp_dir + "/resume.ckpt";
    save_checkpoint(path, make_checkpoint(half.cfg, half.net, &half.trainer));

    auto run = restore_run(load_checkpoint(path));
    run.trainer.cfg.steps = 40;
    train_loop(run.net, run.trainer, full.train, full.test);

    for (size_t l = 0; l < full.net.layers.size(); ++l)
        for (size_t i = 0; i < full.net.layers[l].logits.size(); ++i)
            CHECK(run.net.layers[l].logits[i] ==
                  doctest::Approx(full.net.layers[l].logits[i]).epsilon(1e-12));
}

TEST_CASE("parametrization mismatch between header and echo is rejected") {
    Fixture f(kSmall);
    auto ck = make_checkpoint(f.cfg, f.net, &f.trainer);
    ck.param = Parametrization::OP;  // echo still says iwp
    CHECK_THROWS_AS((void)restore_run(ck), ConfigError);
}

TEST_CASE("logit shape mismatch is rejected") {
    Fixture f(kSmall);
    auto ck = make_checkpoint(f.cfg, f.net, &f.trainer);
    ck.layer_logits[0].pop_back();
    CHECK_THROWS_AS((void)restore_run(ck), ConfigError);
}

TEST_CASE("truncated and corrupt files are rejected") {
    Fixture f(kSmall);
    const std::string path = tmp_dir + "/trunc.ckpt";
    save_checkpoint(path, make_checkpoint(f.cfg, f.net, &f.trainer));
    const auto bytes = slurp(path);

    {
        std::ofstream os(path, std::ios::binary);
        os.write(bytes.data(), long(bytes.size() / 2));
    }
    CHECK_THROWS_AS((void)load_checkpoint(path), ConfigError);

    {
        std::ofstream os(path, std::ios::binary);
        os << "not a checkpoint";
    }
    CHECK_THROWS_AS((void)load_checkpoint(path), ConfigError);
    CHECK_THROWS_AS((void)load_checkpoint(tmp_dir + "/missing.ckpt"), ConfigError);
}

TEST_CASE("a checkpoint without trainer state restores for evaluation") {
    Fixture f(kSmall);
    const auto ck = make_checkpoint(f.cfg, f.net, nullptr);
    CHECK(!ck.has_trainer);
    const auto run = restore_run(ck);
    for (size_t l = 0; l < f.net.layers.size(); ++l)
        CHECK(run.net.layers[l].logits == f.net.layers[l].logits);
}

TEST_SUITE_END();
