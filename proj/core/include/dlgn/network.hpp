#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dlgn/estimator.hpp"
#include "dlgn/init.hpp"
#include "dlgn/neuron.hpp"
#include "dlgn/rng.hpp"

namespace dlgn {

enum class Parametrization { OP, IWP };
std::string_view parametrization_name(Parametrization p);
Parametrization parametrization_from_name(std::string_view name);  // throws ConfigError

// Row-major dense matrix of activations / features.
struct Batch {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Batch() = default;
    Batch(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}
    double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }
};

struct EncoderConfig {
    int input_dim = 0;  // raw feature count
    int k = 4;          // thresholds per feature, t_i = i/(k+1)
    int output_width() const { return input_dim * k; }
};

// Thermometer bits for one feature vector, feature-major: bit (x > i/(k+1))
// for i = 1..k. Features must lie in [0,1].
std::vector<double> thermometer_encode(std::span<const double> features, int k);
Batch thermometer_encode_batch(const EncoderConfig& enc, const Batch& features);

struct NetworkConfig {
    EncoderConfig encoder;
    int layer_width = 256;
    int base_layers = 4;
    int depth_scale = 1;  // D: every base layer becomes D stacked layers
    int class_count = 2;
    double tau = 8.0;  // GroupSum temperature
    int final_layer_width_multiplier = 1;
    Parametrization param = Parametrization::IWP;
    Estimator estimator = Estimator::Sin01;
    InitScheme init;
    // Fraction of neurons fixed to pass-through, growing linearly from
    // residual_start at layer 1 to residual_end at the last layer.
    double residual_start = 0.0;
    double residual_end = 0.0;

    int total_layers() const { return base_layers * depth_scale; }
    int layer_out_width(int layer) const {  // 0-based layer index
        return layer == total_layers() - 1 ? layer_width * final_layer_width_multiplier
                                           : layer_width;
    }
    int final_width() const { return layer_out_width(total_layers() - 1); }
    void validate() const;  // throws ConfigError
};

struct Layer {
    std::vector<std::int32_t> wire_a, wire_b;  // indices into the previous layer
    std::vector<double> logits;                // width * (16 | 4), row per neuron
    std::vector<std::uint8_t> residual;        // 1 = fixed pass-through stream
    int width = 0;
    int in_width = 0;
    int params_per_neuron = 0;  // 16 (OP) or 4 (IWP)
};

struct Network {
    NetworkConfig cfg;  // init scheme stored resolved
    std::uint64_t seed = 0;
    std::vector<Layer> layers;

    int input_width() const { return cfg.encoder.output_width(); }
    size_t param_count() const;
};

// Deterministic construction: wiring uniform with replacement (a and b
// independent; self-pairs allowed), parameters via the init module, one
// derived rng stream per layer.
Network build_network(NetworkConfig cfg, std::uint64_t seed);

// Random gate interventions: each gate (not each row) is replaced with
// probability p; the replacement value is shared across the batch and the
// gate receives no gradient.
struct InterventionConfig {
    enum class Strategy { Constant, Uniform, BernoulliHalf };
    double p = 0.0;
    Strategy strategy = Strategy::Constant;
    double value = 0.5;  // Constant only
};
std::string_view intervention_strategy_name(InterventionConfig::Strategy s);
InterventionConfig::Strategy intervention_strategy_from_name(std::string_view name);

struct InterventionDraw {
    std::vector<std::uint8_t> mask;  // per gate
    std::vector<double> value;
};
InterventionDraw draw_interventions(int width, const InterventionConfig& cfg, Rng& rng);
void apply_interventions(Batch& acts, const InterventionDraw& draw);

// Input-channel dropout: channel = all k thermometer bits of one feature.
// Selects each channel with probability p and returns the final-layer gates
// forward-reachable from any selected channel. Masked gates contribute 0 to
// GroupSum and receive no gradient.
std::vector<std::uint8_t> dropout_mask(const Network& net, double p_dropout, Rng& rng);

struct ForwardOptions {
    const InterventionConfig* intervention = nullptr;  // training-time only
    Rng* rng = nullptr;                                // for intervention draws
    const std::vector<std::uint8_t>* dropout = nullptr;  // final-layer mask
    int threads = 1;
};

struct ForwardTrace {
    std::vector<Batch> acts;  // acts[0] = encoded input, acts[l+1] = layer l output
    Batch logits;             // rows x class_count
    std::vector<InterventionDraw> intervened;      // per layer; empty if unused
    const std::vector<std::uint8_t>* dropout = nullptr;
};

// Rows must already be encoded (width = encoder output width).
ForwardTrace forward(const Network& net, const Batch& rows, const ForwardOptions& opts = {});

// GroupSum head: logit_c = (sum of contiguous bin c) / tau.
std::vector<double> group_sum(std::span<const double> final_row, int class_count, double tau);

// Temperature heuristic: scale a reference temperature when the class count
// changes (tau shrinks by the square root of the class increase).
double suggested_tau(double base_tau, int base_classes, int classes);

struct Gradients {
    std::vector<std::vector<double>> d_logits;  // per layer, summed over rows
    // Per-layer diagnostics recorded during the backward sweep:
    std::vector<double> upstream_norms;    // L2 of the grad wrt layer outputs
    std::vector<double> wire_grad_norms;   // L2 of all (d_p, d_q) before scatter
    std::vector<double> input_grad_norms;  // L2 of the grad wrt layer inputs
};

// Gradients are sums over batch rows; divide by the effective batch size for
// mean-loss gradients. d_logits has one row per batch row.
Gradients backward(const Network& net, const ForwardTrace& trace, const Batch& d_logits,
                   int threads = 1);

}  // namespace dlgn
