#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dlgn/network.hpp"
#include "dlgn/rng.hpp"

namespace dlgn {

struct TrainConfig {
    double learning_rate = 0.01;
    int steps = 5000;
    int batch_size = 100;
    int accumulation = 1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.0;  // decoupled; OP only
    int eval_every = 1000;
    InterventionConfig intervention;
    double dropout_p = 0.0;
    int threads = 1;

    void validate(Parametrization param) const;  // throws ConfigError
};

struct CrossEntropy {
    double loss = 0.0;
    std::vector<double> d_logits;  // softmax - one_hot
};

CrossEntropy softmax_cross_entropy(std::span<const double> logits, int label);

struct AdamState {
    std::vector<std::vector<double>> m, v;  // same shapes as the layer logits
    std::int64_t step = 0;

    static AdamState for_network(const Network& net);
};

// One bias-corrected update from gradients averaged over the effective batch.
// Throws NumericError naming the layer on non-finite gradients.
void adam_step(Network& net, const std::vector<std::vector<double>>& grads,
               AdamState& state, const TrainConfig& cfg);

struct TrainData {
    Batch encoded;  // already thermometer-encoded
    std::vector<int> labels;
};

struct EvalPoint {
    int step = 0;
    double loss = 0.0;  // mean cross-entropy over the train rows
    double train_acc = 0.0;
    double train_disc_acc = 0.0;
    double test_acc = 0.0;
    double test_disc_acc = 0.0;
    std::vector<double> grad_norms;  // per-layer input-grad norms on the train rows
};

struct RunMetrics {
    std::vector<EvalPoint> points;
};

// Mutable training state, separable from the network for checkpoint resume.
struct Trainer {
    TrainConfig cfg;
    AdamState adam;
    Rng data_rng{0};
    Rng intervention_rng{0};
    Rng dropout_rng{0};
    int step = 0;

    static Trainer create(const Network& net, const TrainConfig& cfg);
};

// Runs from trainer.step to cfg.steps; evaluates at step 0, every eval_every
// steps, and the final step. Propagates numeric aborts.
RunMetrics train_loop(Network& net, Trainer& trainer, const TrainData& train,
                      const TrainData& test,
                      const std::function<void(const EvalPoint&)>& on_eval = {});

EvalPoint evaluate(const Network& net, const TrainData& train, const TrainData& test,
                   int step, int threads);

// Diagnostics (no parameter updates).
struct GradNormProfile {
    std::vector<double> upstream_norms;    // grad wrt layer outputs
    std::vector<double> wire_grad_norms;   // all (d_p, d_q) before scatter
    std::vector<double> wire_ratios;       // wire_grad_norms / upstream_norms
    std::vector<double> input_grad_norms;  // grad wrt layer inputs, post scatter
};

GradNormProfile grad_norm_profile(const Network& net, const Batch& rows,
                                  const std::vector<int>& labels, int threads = 1);

// Activation histogram of one layer (0-based) over fixed uniform bins on [0,1].
std::vector<std::int64_t> gate_output_histogram(const Network& net, const Batch& rows,
                                                int layer, int bins = 50);

}  // namespace dlgn
