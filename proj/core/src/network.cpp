#include "dlgn/network.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "dlgn/errors.hpp"
#include "parallel.hpp"

namespace dlgn {

std::string_view parametrization_name(Parametrization p) {
    return p == Parametrization::OP ? "op" : "iwp";
}

Parametrization parametrization_from_name(std::string_view name) {
    if (name == "op") return Parametrization::OP;
    if (name == "iwp") return Parametrization::IWP;
    throw ConfigError("unknown parametrization '" + std::string(name) +
                      "' (expected op or iwp)");
}

std::vector<double> thermometer_encode(std::span<const double> features, int k) {
    if (k < 1) throw ConfigError("thermometer k must be positive");
    std::vector<double> bits;
    bits.reserve(features.size() * k);
    for (double x : features) {
        if (!(x >= 0.0 && x <= 1.0))
            throw std::domain_error("thermometer feature outside [0,1]");
        for (int i = 1; i <= k; ++i)
            bits.push_back(x > static_cast<double>(i) / (k + 1) ? 1.0 : 0.0);
    }
    return bits;
}

Batch thermometer_encode_batch(const EncoderConfig& enc, const Batch& features) {
    if (features.cols != enc.input_dim)
        throw ConfigError("feature width does not match encoder input_dim");
    Batch out(features.rows, enc.output_width());
    for (int r = 0; r < features.rows; ++r) {
        const auto bits = thermometer_encode(
            std::span<const double>(features.row(r), features.cols), enc.k);
        std::memcpy(out.row(r), bits.data(), bits.size() * sizeof(double));
    }
    return out;
}

void NetworkConfig::validate() const {
    if (encoder.input_dim < 1) throw ConfigError("encoder input_dim must be positive");
    if (encoder.k < 1) throw ConfigError("encoder k must be positive");
    if (layer_width < 1) throw ConfigError("layer_width must be positive");
    if (base_layers < 1) throw ConfigError("base_layers must be positive");
    if (depth_scale < 1) throw ConfigError("depth_scale must be positive");
    if (class_count < 1) throw ConfigError("class_count must be positive");
    if (final_layer_width_multiplier < 1)
        throw ConfigError("final_layer_width_multiplier must be positive");
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    if (final_width() % class_count != 0)
        throw ConfigError("final layer width must be divisible by class_count");
    if (!(residual_start >= 0.0 && residual_start <= 1.0) ||
        !(residual_end >= 0.0 && residual_end <= 1.0))
        throw ConfigError("residual fractions must lie in [0,1]");
    if (residual_start > residual_end)
        throw ConfigError("residual fraction schedule must be non-decreasing");
}

size_t Network::param_count() const {
    size_t n = 0;
    for (const auto& l : layers) n += l.logits.size();
    return n;
}

Network build_network(NetworkConfig cfg, std::uint64_t seed) {
    cfg.validate();
    cfg.init = cfg.init.resolved(cfg.estimator);

    Network net;
    net.cfg = cfg;
    net.seed = seed;
    const int L = cfg.total_layers();
    const int per = cfg.param == Parametrization::OP ? 16 : 4;
    net.layers.resize(L);

    int in_width = cfg.encoder.output_width();
    for (int l = 0; l < L; ++l) {
        Layer& layer = net.layers[l];
        layer.width = cfg.layer_out_width(l);
        layer.in_width = in_width;
        layer.params_per_neuron = per;
        layer.wire_a.resize(layer.width);
        layer.wire_b.resize(layer.width);
        layer.residual.assign(layer.width, 0);
        layer.logits.resize(static_cast<size_t>(layer.width) * per);

        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(l));
        for (int n = 0; n < layer.width; ++n) {
            layer.wire_a[n] = static_cast<std::int32_t>(rng.uniform_int(in_width));
            layer.wire_b[n] = static_cast<std::int32_t>(rng.uniform_int(in_width));
        }
        for (int n = 0; n < layer.width; ++n) {
            if (cfg.param == Parametrization::OP) {
                const OpParams p = init_op_neuron(cfg.init, rng);
                std::memcpy(&layer.logits[static_cast<size_t>(n) * 16], p.logits.data(),
                            16 * sizeof(double));
            } else {
                const IwpParams p = init_iwp_neuron(cfg.init, cfg.estimator, rng);
                std::memcpy(&layer.logits[static_cast<size_t>(n) * 4], p.logits.data(),
                            4 * sizeof(double));
            }
        }

        // Residual streams: the first round(f_l * width) indices are fixed to
        // pass-through of the same index in the previous layer; the fraction
        // grows linearly toward the last layer so streams continue.
        if (cfg.residual_end > 0.0) {
            const double t = L > 1 ? static_cast<double>(l) / (L - 1) : 1.0;
            const double frac = cfg.residual_start + (cfg.residual_end - cfg.residual_start) * t;
            int count = static_cast<int>(std::llround(frac * layer.width));
            count = std::min({count, layer.width, in_width});
            for (int n = 0; n < count; ++n) {
                layer.residual[n] = 1;
                layer.wire_a[n] = n;
                layer.wire_b[n] = n;
            }
        }
        in_width = layer.width;
    }
    return net;
}

std::string_view intervention_strategy_name(InterventionConfig::Strategy s) {
    switch (s) {
        case InterventionConfig::Strategy::Constant: return "constant";
        case InterventionConfig::Strategy::Uniform: return "uniform";
        case InterventionConfig::Strategy::BernoulliHalf: return "bernoulli_half";
    }
    return "";  // unreachable
}

InterventionConfig::Strategy intervention_strategy_from_name(std::string_view name) {
    if (name == "constant") return InterventionConfig::Strategy::Constant;
    if (name == "uniform") return InterventionConfig::Strategy::Uniform;
    if (name == "bernoulli_half") return InterventionConfig::Strategy::BernoulliHalf;
    throw ConfigError("unknown intervention strategy '" + std::string(name) + "'");
}

InterventionDraw draw_interventions(int width, const InterventionConfig& cfg, Rng& rng) {
    if (!(cfg.p >= 0.0 && cfg.p <= 1.0))
        throw ConfigError("intervention probability must lie in [0,1]");
    InterventionDraw draw;
    draw.mask.assign(width, 0);
    draw.value.assign(width, 0.0);
    if (cfg.p <= 0.0) return draw;
    for (int n = 0; n < width; ++n) {
        if (rng.uniform() < cfg.p) {
            draw.mask[n] = 1;
            switch (cfg.strategy) {
                case InterventionConfig::Strategy::Constant:
                    draw.value[n] = cfg.value;
                    break;
                case InterventionConfig::Strategy::Uniform:
                    draw.value[n] = rng.uniform();
                    break;
                case InterventionConfig::Strategy::BernoulliHalf:
                    draw.value[n] = rng.uniform() < 0.5 ? 0.0 : 1.0;
                    break;
            }
        }
    }
    return draw;
}

void apply_interventions(Batch& acts, const InterventionDraw& draw) {
    if (draw.mask.empty()) return;
    for (int r = 0; r < acts.rows; ++r) {
        double* row = acts.row(r);
        for (int n = 0; n < acts.cols; ++n)
            if (draw.mask[n]) row[n] = draw.value[n];
    }
}

std::vector<std::uint8_t> dropout_mask(const Network& net, double p_dropout, Rng& rng) {
    if (!(p_dropout >= 0.0 && p_dropout <= 1.0))
        throw ConfigError("dropout probability must lie in [0,1]");
    const int k = net.cfg.encoder.k;
    const int channels = net.cfg.encoder.input_dim;
    std::vector<std::uint8_t> reach(net.input_width(), 0);
    for (int c = 0; c < channels; ++c) {
        if (rng.uniform() < p_dropout)
            for (int i = 0; i < k; ++i) reach[static_cast<size_t>(c) * k + i] = 1;
    }
    for (const Layer& layer : net.layers) {
        std::vector<std::uint8_t> next(layer.width, 0);
        for (int n = 0; n < layer.width; ++n) {
            if (layer.residual[n])
                next[n] = reach[layer.wire_a[n]];
            else
                next[n] = reach[layer.wire_a[n]] | reach[layer.wire_b[n]];
        }
        reach = std::move(next);
    }
    return reach;
}

namespace {

// Both parametrizations evaluate as a bilinear form over effective corner
// values: IWP uses the estimator outputs directly; OP folds the softmax
// mixture into corners via the gate truth bits.
void effective_corners(const Layer& layer, Parametrization param, Estimator est,
                       std::vector<double>& corners) {
    corners.resize(static_cast<size_t>(layer.width) * 4);
    if (param == Parametrization::IWP) {
        for (int n = 0; n < layer.width; ++n)
            for (int c = 0; c < 4; ++c)
                corners[static_cast<size_t>(n) * 4 + c] =
                    estimator_value(est, layer.logits[static_cast<size_t>(n) * 4 + c]);
        return;
    }
    for (int n = 0; n < layer.width; ++n) {
        OpParams p;
        std::memcpy(p.logits.data(), &layer.logits[static_cast<size_t>(n) * 16],
                    16 * sizeof(double));
        const auto w = op_weights(p);
        double acc[4] = {0, 0, 0, 0};
        for (int i = 0; i < 16; ++i) {
            const auto bits = truth_table(i + 1);
            for (int c = 0; c < 4; ++c) acc[c] += w[i] * bits[c];
        }
        for (int c = 0; c < 4; ++c) corners[static_cast<size_t>(n) * 4 + c] = acc[c];
    }
}

void op_weight_table(const Layer& layer, std::vector<double>& weights) {
    weights.resize(static_cast<size_t>(layer.width) * 16);
    for (int n = 0; n < layer.width; ++n) {
        OpParams p;
        std::memcpy(p.logits.data(), &layer.logits[static_cast<size_t>(n) * 16],
                    16 * sizeof(double));
        const auto w = op_weights(p);
        std::memcpy(&weights[static_cast<size_t>(n) * 16], w.data(), 16 * sizeof(double));
    }
}

}  // namespace

ForwardTrace forward(const Network& net, const Batch& rows, const ForwardOptions& opts) {
    if (rows.cols != net.input_width())
        throw ConfigError("forward: row width " + std::to_string(rows.cols) +
                          " does not match encoder output width " +
                          std::to_string(net.input_width()));
    const int L = static_cast<int>(net.layers.size());
    ForwardTrace trace;
    trace.acts.reserve(L + 1);
    trace.acts.push_back(rows);
    trace.dropout = opts.dropout;
    if (opts.intervention && opts.intervention->p > 0.0) {
        if (!opts.rng)
            throw ConfigError("interventions require an rng");
        trace.intervened.reserve(L);
    }

    std::vector<double> corners;
    for (int l = 0; l < L; ++l) {
        const Layer& layer = net.layers[l];
        effective_corners(layer, net.cfg.param, net.cfg.estimator, corners);
        Batch out(rows.rows, layer.width);
        const Batch& in = trace.acts.back();
        parallel_chunks(rows.rows, opts.threads, [&](int, int begin, int end) {
            for (int r = begin; r < end; ++r) {
                const double* x = in.row(r);
                double* y = out.row(r);
                for (int n = 0; n < layer.width; ++n) {
                    const double p = x[layer.wire_a[n]];
                    if (layer.residual[n]) {
                        y[n] = p;
                        continue;
                    }
                    const double q = x[layer.wire_b[n]];
                    const double* w = &corners[static_cast<size_t>(n) * 4];
                    y[n] = (1.0 - p) * ((1.0 - q) * w[0] + q * w[1]) +
                           p * ((1.0 - q) * w[2] + q * w[3]);
                }
            }
        });
        if (opts.intervention && opts.intervention->p > 0.0) {
            InterventionDraw draw = draw_interventions(layer.width, *opts.intervention, *opts.rng);
            apply_interventions(out, draw);
            trace.intervened.push_back(std::move(draw));
        }
        trace.acts.push_back(std::move(out));
    }

    // GroupSum head. Dropout-masked and intervened final gates contribute 0.
    const Batch& fin = trace.acts.back();
    const int C = net.cfg.class_count;
    const int bin = fin.cols / C;
    trace.logits = Batch(rows.rows, C);
    const InterventionDraw* fin_iv =
        trace.intervened.empty() ? nullptr : &trace.intervened.back();
    for (int r = 0; r < rows.rows; ++r) {
        const double* x = fin.row(r);
        double* z = trace.logits.row(r);
        for (int c = 0; c < C; ++c) {
            double s = 0.0;
            for (int i = c * bin; i < (c + 1) * bin; ++i) {
                if (opts.dropout && (*opts.dropout)[i]) continue;
                if (fin_iv && fin_iv->mask[i]) continue;
                s += x[i];
            }
            z[c] = s / net.cfg.tau;
        }
    }
    return trace;
}

std::vector<double> group_sum(std::span<const double> final_row, int class_count, double tau) {
    if (class_count < 1 || final_row.size() % class_count != 0)
        throw ConfigError("group_sum: width not divisible by class count");
    if (!(tau > 0.0)) throw ConfigError("group_sum: tau must be positive");
    const size_t bin = final_row.size() / class_count;
    std::vector<double> logits(class_count, 0.0);
    for (int c = 0; c < class_count; ++c) {
        double s = 0.0;
        for (size_t i = c * bin; i < (c + 1) * bin; ++i) s += final_row[i];
        logits[c] = s / tau;
    }
    return logits;
}

double suggested_tau(double base_tau, int base_classes, int classes) {
    if (base_classes < 1 || classes < 1)
        throw ConfigError("suggested_tau: class counts must be positive");
    return base_tau / std::sqrt(static_cast<double>(classes) / base_classes);
}

Gradients backward(const Network& net, const ForwardTrace& trace, const Batch& d_logits,
                   int threads) {
    const int L = static_cast<int>(net.layers.size());
    if (static_cast<int>(trace.acts.size()) != L + 1)
        throw std::logic_error("backward: trace does not match network");
    const int B = d_logits.rows;
    if (B != trace.acts[0].rows || d_logits.cols != net.cfg.class_count)
        throw std::logic_error("backward: d_logits shape mismatch");
    const bool iv = !trace.intervened.empty();

    Gradients grads;
    grads.d_logits.resize(L);
    grads.upstream_norms.assign(L, 0.0);
    grads.wire_grad_norms.assign(L, 0.0);
    grads.input_grad_norms.assign(L, 0.0);

    // Head: distribute d_logits across the final-layer bins.
    const Layer& last = net.layers[L - 1];
    const int bin = last.width / net.cfg.class_count;
    Batch g(B, last.width);
    const InterventionDraw* fin_iv = iv ? &trace.intervened.back() : nullptr;
    for (int r = 0; r < B; ++r) {
        const double* dz = d_logits.row(r);
        double* gr = g.row(r);
        for (int n = 0; n < last.width; ++n) {
            if (trace.dropout && (*trace.dropout)[n]) continue;
            if (fin_iv && fin_iv->mask[n]) continue;
            gr[n] = dz[n / bin] / net.cfg.tau;
        }
    }

    std::vector<double> corners, weights;
    for (int l = L - 1; l >= 0; --l) {
        const Layer& layer = net.layers[l];
        const Batch& in = trace.acts[l];
        const bool is_op = net.cfg.param == Parametrization::OP;
        effective_corners(layer, net.cfg.param, net.cfg.estimator, corners);
        if (is_op) op_weight_table(layer, weights);
        // Estimator derivative per logit for IWP.
        std::vector<double> estg;
        if (!is_op) {
            estg.resize(layer.logits.size());
            for (size_t i = 0; i < layer.logits.size(); ++i)
                estg[i] = estimator_grad(net.cfg.estimator, layer.logits[i]);
        }
        const InterventionDraw* layer_iv = iv ? &trace.intervened[l] : nullptr;

        const int T = std::max(1, threads);
        std::vector<std::vector<double>> dlog_parts(
            T, std::vector<double>(layer.logits.size(), 0.0));
        // Each thread owns disjoint rows of gprev, so row-sliced writes are race-free.
        Batch gprev(B, layer.in_width);
        std::vector<double> up_sq(T, 0.0), wire_sq(T, 0.0);

        parallel_chunks(B, threads, [&](int t, int begin, int end) {
            std::vector<double>& dlog = dlog_parts[t];
            for (int r = begin; r < end; ++r) {
                const double* x = in.row(r);
                const double* gr = g.row(r);
                double* gp = gprev.row(r);
                for (int n = 0; n < layer.width; ++n) {
                    const double u = gr[n];
                    up_sq[t] += u * u;
                    if (layer_iv && layer_iv->mask[n]) continue;  // replaced: no grad
                    if (layer.residual[n]) {
                        gp[layer.wire_a[n]] += u;
                        wire_sq[t] += u * u;
                        continue;
                    }
                    if (u == 0.0) continue;
                    const double p = x[layer.wire_a[n]];
                    const double q = x[layer.wire_b[n]];
                    const double* w = &corners[static_cast<size_t>(n) * 4];
                    const double dp = u * ((1.0 - q) * (w[2] - w[0]) + q * (w[3] - w[1]));
                    const double dq = u * ((1.0 - p) * (w[1] - w[0]) + p * (w[3] - w[2]));
                    wire_sq[t] += dp * dp + dq * dq;
                    gp[layer.wire_a[n]] += dp;
                    gp[layer.wire_b[n]] += dq;
                    const double basis[4] = {(1.0 - p) * (1.0 - q), (1.0 - p) * q,
                                             p * (1.0 - q), p * q};
                    if (is_op) {
                        const double* wn = &weights[static_cast<size_t>(n) * 16];
                        const double mix = basis[0] * w[0] + basis[1] * w[1] +
                                           basis[2] * w[2] + basis[3] * w[3];
                        double* d = &dlog[static_cast<size_t>(n) * 16];
                        for (int i = 0; i < 16; ++i) {
                            const auto bits = truth_table(i + 1);
                            const double vi = basis[0] * bits[0] + basis[1] * bits[1] +
                                              basis[2] * bits[2] + basis[3] * bits[3];
                            d[i] += u * wn[i] * (vi - mix);
                        }
                    } else {
                        double* d = &dlog[static_cast<size_t>(n) * 4];
                        const double* eg = &estg[static_cast<size_t>(n) * 4];
                        for (int c = 0; c < 4; ++c) d[c] += u * basis[c] * eg[c];
                    }
                }
            }
        });

        std::vector<double> dlog = std::move(dlog_parts[0]);
        for (int t = 1; t < T; ++t)
            for (size_t i = 0; i < dlog.size(); ++i) dlog[i] += dlog_parts[t][i];
        grads.d_logits[l] = std::move(dlog);

        double up = 0.0, wire = 0.0, inp = 0.0;
        for (int t = 0; t < T; ++t) {
            up += up_sq[t];
            wire += wire_sq[t];
        }
        for (double v : gprev.data) inp += v * v;
        grads.upstream_norms[l] = std::sqrt(up);
        grads.wire_grad_norms[l] = std::sqrt(wire);
        grads.input_grad_norms[l] = std::sqrt(inp);
        g = std::move(gprev);
    }
    return grads;
}

}  // namespace dlgn
