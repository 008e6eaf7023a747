#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dlgn/config.hpp"
#include "dlgn/network.hpp"
#include "dlgn/train.hpp"

namespace dlgn {

// Versioned binary container: config echo, wiring seed, raw logits (never
// post-estimator values), optimizer state, step counter, rng streams.
// save -> load -> save is byte-identical.
struct Checkpoint {
    std::string config_text;  // effective config echo, preserved verbatim
    Parametrization param = Parametrization::IWP;
    Estimator estimator = Estimator::Sin01;
    std::uint64_t seed = 0;
    int input_dim = 0;    // dataset-derived encoder width
    int class_count = 0;  // dataset-derived
    std::vector<std::vector<double>> layer_logits;
    bool has_trainer = false;
    AdamState adam;
    int step = 0;
    std::string data_rng, intervention_rng, dropout_rng;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);  // throws ConfigError

Checkpoint make_checkpoint(const RunConfig& cfg, const Network& net, const Trainer* trainer);

struct RestoredRun {
    RunConfig cfg;
    Network net;
    Trainer trainer;  // meaningful when ck.has_trainer
};

// Rebuilds the network from the embedded config + seed and overwrites the
// logits. Fails if the stored parametrization disagrees with the config echo
// or the logit shapes do not match.
RestoredRun restore_run(const Checkpoint& ck);

}  // namespace dlgn
