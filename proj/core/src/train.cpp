#include "dlgn/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "dlgn/circuit.hpp"
#include "dlgn/errors.hpp"

namespace dlgn {

namespace {

// Stream ids for the trainer's independent rng streams; layer streams use the
// layer index, so these start far above any plausible depth.
constexpr std::uint64_t kStreamData = 1u << 20;
constexpr std::uint64_t kStreamIntervention = (1u << 20) + 1;
constexpr std::uint64_t kStreamDropout = (1u << 20) + 2;

}  // namespace

void TrainConfig::validate(Parametrization param) const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (steps < 0) throw ConfigError("steps must be non-negative");
    if (batch_size < 1) throw ConfigError("batch_size must be positive");
    if (accumulation < 1) throw ConfigError("accumulation must be at least 1");
    if (eval_every < 1) throw ConfigError("eval_every must be positive");
    if (weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");
    if (param == Parametrization::IWP && weight_decay > 0.0)
        throw ConfigError("weight_decay must be 0 under the iwp parametrization");
    if (!(dropout_p >= 0.0 && dropout_p <= 1.0))
        throw ConfigError("dropout_p must lie in [0,1]");
    if (!(intervention.p >= 0.0 && intervention.p <= 1.0))
        throw ConfigError("intervene_p must lie in [0,1]");
    if (threads < 1) throw ConfigError("threads must be positive");
}

CrossEntropy softmax_cross_entropy(std::span<const double> logits, int label) {
    const int C = static_cast<int>(logits.size());
    if (label < 0 || label >= C)
        throw ConfigError("label " + std::to_string(label) + " outside class range");
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - zmax);
    const double lse = zmax + std::log(sum);
    CrossEntropy out;
    out.loss = lse - logits[label];
    out.d_logits.resize(C);
    for (int c = 0; c < C; ++c) out.d_logits[c] = std::exp(logits[c] - lse);
    out.d_logits[label] -= 1.0;
    return out;
}

AdamState AdamState::for_network(const Network& net) {
    AdamState st;
    st.m.resize(net.layers.size());
    st.v.resize(net.layers.size());
    for (size_t l = 0; l < net.layers.size(); ++l) {
        st.m[l].assign(net.layers[l].logits.size(), 0.0);
        st.v[l].assign(net.layers[l].logits.size(), 0.0);
    }
    return st;
}

void adam_step(Network& net, const std::vector<std::vector<double>>& grads,
               AdamState& state, const TrainConfig& cfg) {
    if (grads.size() != net.layers.size())
        throw std::logic_error("adam_step: gradient layer count mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (size_t l = 0; l < net.layers.size(); ++l) {
        auto& params = net.layers[l].logits;
        const auto& g = grads[l];
        if (g.size() != params.size())
            throw std::logic_error("adam_step: gradient size mismatch");
        auto& m = state.m[l];
        auto& v = state.v[l];
        for (size_t i = 0; i < params.size(); ++i) {
            if (!std::isfinite(g[i]))
                throw NumericError("non-finite gradient in layer " + std::to_string(l) +
                                   " at optimizer step " + std::to_string(state.step));
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            double update = mhat / (std::sqrt(vhat) + cfg.epsilon);
            if (cfg.weight_decay > 0.0) update += cfg.weight_decay * params[i];
            params[i] -= cfg.learning_rate * update;
        }
    }
}

Trainer Trainer::create(const Network& net, const TrainConfig& cfg) {
    cfg.validate(net.cfg.param);
    Trainer tr;
    tr.cfg = cfg;
    tr.adam = AdamState::for_network(net);
    tr.data_rng = Rng::stream(net.seed, kStreamData);
    tr.intervention_rng = Rng::stream(net.seed, kStreamIntervention);
    tr.dropout_rng = Rng::stream(net.seed, kStreamDropout);
    return tr;
}

namespace {

int argmax_row(const double* z, int n) {
    return static_cast<int>(std::max_element(z, z + n) - z);
}

double continuous_accuracy(const Network& net, const TrainData& data, int threads) {
    if (data.encoded.rows == 0) return 0.0;
    ForwardOptions opts;
    opts.threads = threads;
    const ForwardTrace trace = forward(net, data.encoded, opts);
    int hits = 0;
    for (int r = 0; r < data.encoded.rows; ++r)
        hits += argmax_row(trace.logits.row(r), net.cfg.class_count) == data.labels[r];
    return static_cast<double>(hits) / data.encoded.rows;
}

double discretized_accuracy(const PackedCircuit& pc, const TrainData& data, int threads) {
    if (data.encoded.rows == 0) return 0.0;
    const PackedScores ps = eval_packed(pc, threshold_batch(data.encoded), threads);
    int hits = 0;
    for (int r = 0; r < data.encoded.rows; ++r)
        hits += ps.predictions[r] == data.labels[r];
    return static_cast<double>(hits) / data.encoded.rows;
}

}  // namespace

EvalPoint evaluate(const Network& net, const TrainData& train, const TrainData& test,
                   int step, int threads) {
    EvalPoint pt;
    pt.step = step;

    ForwardOptions opts;
    opts.threads = threads;
    const ForwardTrace trace = forward(net, train.encoded, opts);
    Batch d(train.encoded.rows, net.cfg.class_count);
    double loss_sum = 0.0;
    int hits = 0;
    for (int r = 0; r < train.encoded.rows; ++r) {
        const double* z = trace.logits.row(r);
        const CrossEntropy ce = softmax_cross_entropy(
            std::span<const double>(z, net.cfg.class_count), train.labels[r]);
        loss_sum += ce.loss;
        std::memcpy(d.row(r), ce.d_logits.data(), ce.d_logits.size() * sizeof(double));
        hits += argmax_row(z, net.cfg.class_count) == train.labels[r];
    }
    const int n = std::max(1, train.encoded.rows);
    pt.loss = loss_sum / n;
    pt.train_acc = static_cast<double>(hits) / n;

    // Per-layer gradient norms of the mean loss on the same rows.
    for (auto& row : d.data) row /= n;
    const Gradients grads = backward(net, trace, d, threads);
    pt.grad_norms = grads.input_grad_norms;

    const PackedCircuit pc = pack(discretize_network(net));
    pt.train_disc_acc = discretized_accuracy(pc, train, threads);
    pt.test_acc = continuous_accuracy(net, test, threads);
    pt.test_disc_acc = discretized_accuracy(pc, test, threads);
    return pt;
}

RunMetrics train_loop(Network& net, Trainer& trainer, const TrainData& train,
                      const TrainData& test,
                      const std::function<void(const EvalPoint&)>& on_eval) {
    const TrainConfig& cfg = trainer.cfg;
    cfg.validate(net.cfg.param);
    if (train.encoded.rows == 0) throw ConfigError("training set is empty");
    if (train.encoded.rows != static_cast<int>(train.labels.size()) ||
        test.encoded.rows != static_cast<int>(test.labels.size()))
        throw ConfigError("label count does not match rows");

    RunMetrics metrics;
    auto emit = [&](const EvalPoint& pt) {
        metrics.points.push_back(pt);
        if (on_eval) on_eval(pt);
    };
    if (trainer.step == 0) emit(evaluate(net, train, test, 0, cfg.threads));

    const int n_train = train.encoded.rows;
    const bool full_table = cfg.batch_size >= n_train;
    const int micro_rows = full_table ? n_train : cfg.batch_size;
    const int effective = micro_rows * cfg.accumulation;

    std::vector<std::vector<double>> acc(net.layers.size());
    for (size_t l = 0; l < net.layers.size(); ++l)
        acc[l].assign(net.layers[l].logits.size(), 0.0);

    const bool use_iv = cfg.intervention.p > 0.0;
    const bool use_drop = cfg.dropout_p > 0.0;

    for (int step = trainer.step + 1; step <= cfg.steps; ++step) {
        for (auto& a : acc) std::fill(a.begin(), a.end(), 0.0);
        double loss_sum = 0.0;

        for (int micro = 0; micro < cfg.accumulation; ++micro) {
            Batch rows(micro_rows, train.encoded.cols);
            std::vector<int> labels(micro_rows);
            for (int r = 0; r < micro_rows; ++r) {
                const int idx = full_table
                                    ? r
                                    : static_cast<int>(trainer.data_rng.uniform_int(n_train));
                std::memcpy(rows.row(r), train.encoded.row(idx),
                            sizeof(double) * rows.cols);
                labels[r] = train.labels[idx];
            }

            std::vector<std::uint8_t> drop;
            ForwardOptions opts;
            opts.threads = cfg.threads;
            if (use_iv) {
                opts.intervention = &cfg.intervention;
                opts.rng = &trainer.intervention_rng;
            }
            if (use_drop) {
                drop = dropout_mask(net, cfg.dropout_p, trainer.dropout_rng);
                opts.dropout = &drop;
            }
            const ForwardTrace trace = forward(net, rows, opts);

            Batch d(micro_rows, net.cfg.class_count);
            for (int r = 0; r < micro_rows; ++r) {
                const double* z = trace.logits.row(r);
                const CrossEntropy ce = softmax_cross_entropy(
                    std::span<const double>(z, net.cfg.class_count), labels[r]);
                loss_sum += ce.loss;
                std::memcpy(d.row(r), ce.d_logits.data(),
                            ce.d_logits.size() * sizeof(double));
            }
            const Gradients grads = backward(net, trace, d, cfg.threads);
            for (size_t l = 0; l < acc.size(); ++l)
                for (size_t i = 0; i < acc[l].size(); ++i)
                    acc[l][i] += grads.d_logits[l][i];
        }

        const double mean_loss = loss_sum / effective;
        if (!std::isfinite(mean_loss))
            throw NumericError("non-finite loss at step " + std::to_string(step));
        for (auto& a : acc)
            for (double& g : a) g /= effective;
        adam_step(net, acc, trainer.adam, cfg);
        trainer.step = step;

        if (step % cfg.eval_every == 0 || step == cfg.steps)
            emit(evaluate(net, train, test, step, cfg.threads));
    }
    return metrics;
}

GradNormProfile grad_norm_profile(const Network& net, const Batch& rows,
                                  const std::vector<int>& labels, int threads) {
    if (rows.rows != static_cast<int>(labels.size()))
        throw ConfigError("grad_norm_profile: label count does not match rows");
    ForwardOptions opts;
    opts.threads = threads;
    const ForwardTrace trace = forward(net, rows, opts);
    Batch d(rows.rows, net.cfg.class_count);
    for (int r = 0; r < rows.rows; ++r) {
        const double* z = trace.logits.row(r);
        const CrossEntropy ce = softmax_cross_entropy(
            std::span<const double>(z, net.cfg.class_count), labels[r]);
        std::memcpy(d.row(r), ce.d_logits.data(), ce.d_logits.size() * sizeof(double));
    }
    for (auto& x : d.data) x /= std::max(1, rows.rows);
    const Gradients grads = backward(net, trace, d, threads);

    GradNormProfile prof;
    prof.upstream_norms = grads.upstream_norms;
    prof.wire_grad_norms = grads.wire_grad_norms;
    prof.input_grad_norms = grads.input_grad_norms;
    prof.wire_ratios.resize(grads.upstream_norms.size());
    for (size_t l = 0; l < prof.wire_ratios.size(); ++l)
        prof.wire_ratios[l] = grads.upstream_norms[l] > 0.0
                                  ? grads.wire_grad_norms[l] / grads.upstream_norms[l]
                                  : 0.0;
    return prof;
}

std::vector<std::int64_t> gate_output_histogram(const Network& net, const Batch& rows,
                                                int layer, int bins) {
    if (layer < 0 || layer >= static_cast<int>(net.layers.size()))
        throw ConfigError("gate_output_histogram: layer index out of range");
    if (bins < 1) throw ConfigError("gate_output_histogram: bins must be positive");
    const ForwardTrace trace = forward(net, rows);
    const Batch& acts = trace.acts[layer + 1];
    std::vector<std::int64_t> hist(bins, 0);
    for (double v : acts.data) {
        int b = static_cast<int>(v * bins);
        b = std::clamp(b, 0, bins - 1);
        ++hist[b];
    }
    return hist;
}

}  // namespace dlgn
