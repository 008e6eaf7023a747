#include "dlgn/commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "dlgn/checkpoint.hpp"
#include "dlgn/circuit.hpp"
#include "dlgn/dataset.hpp"
#include "dlgn/errors.hpp"
#include "dlgn/init.hpp"
#include "dlgn/neuron.hpp"
#include "fmt.hpp"

namespace dlgn {

namespace {

namespace fs = std::filesystem;
using detail::shortest;

constexpr std::uint64_t kStreamDiagnostics = (1u << 20) + 16;

constexpr const char* kMetricsHeader =
    "step,loss,train_acc,train_disc_acc,test_acc,test_disc_acc";

void apply_overrides(RunConfig& cfg, const GlobalOverrides& ov) {
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.out_dir) cfg.out_dir = *ov.out_dir;
    if (ov.threads) cfg.train.threads = *ov.threads;
}

// Encode a raw split with the network's thermometer settings.
TrainData encode_split(const Network& net, const LabeledData& data) {
    TrainData out;
    out.encoded = thermometer_encode_batch(net.cfg.encoder, data.features);
    out.labels = data.labels;
    return out;
}

void require_dataset_compatible(const Network& net, const DatasetPair& data) {
    if (data.train.feature_dim != net.cfg.encoder.input_dim)
        throw ConfigError("dataset feature width " + std::to_string(data.train.feature_dim) +
                          " does not match the network's input width " +
                          std::to_string(net.cfg.encoder.input_dim));
    if (data.train.class_count != net.cfg.class_count)
        throw ConfigError("dataset class count " + std::to_string(data.train.class_count) +
                          " does not match the network's class count " +
                          std::to_string(net.cfg.class_count));
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw ConfigError("cannot write " + path);
    os << text;
}

std::string metrics_row(const EvalPoint& pt) {
    return std::to_string(pt.step) + "," + shortest(pt.loss) + "," +
           shortest(pt.train_acc) + "," + shortest(pt.train_disc_acc) + "," +
           shortest(pt.test_acc) + "," + shortest(pt.test_disc_acc);
}

}  // namespace

RunConfig load_run_config(const std::string& config_path, const GlobalOverrides& ov) {
    RunConfig cfg = config_path.empty() ? parse_config_text("")
                                        : parse_config_file(config_path);
    apply_overrides(cfg, ov);
    return cfg;
}

void cmd_train(const TrainArgs& args, std::ostream& out) {
    RunConfig cfg;
    Network net;
    Trainer trainer;
    bool resumed = false;

    if (!args.resume_path.empty()) {
        if (!args.config_path.empty())
            throw ConfigError("--config and --resume are mutually exclusive");
        if (args.overrides.seed)
            throw ConfigError("cannot override the seed when resuming (it fixes the wiring)");
        const Checkpoint ck = load_checkpoint(args.resume_path);
        RestoredRun run = restore_run(ck);
        cfg = run.cfg;
        net = std::move(run.net);
        trainer = std::move(run.trainer);
        if (args.overrides.out_dir) cfg.out_dir = *args.overrides.out_dir;
        if (args.overrides.threads) cfg.train.threads = *args.overrides.threads;
        if (args.steps) cfg.train.steps = *args.steps;
        trainer.cfg = cfg.train;
        resumed = true;
    } else {
        cfg = load_run_config(args.config_path, args.overrides);
        if (args.steps) cfg.train.steps = *args.steps;
    }

    const DatasetPair data = ingest_dataset(cfg.dataset);
    if (!resumed) {
        cfg.net.encoder.input_dim = data.train.feature_dim;
        cfg.net.class_count = data.train.class_count;
        net = build_network(cfg.net, cfg.seed);
        trainer = Trainer::create(net, cfg.train);
    } else {
        require_dataset_compatible(net, data);
    }

    fs::create_directories(cfg.out_dir);
    write_file(cfg.out_dir + "/effective_config.txt", echo_config(cfg));

    const TrainData train = encode_split(net, data.train);
    const TrainData test = encode_split(net, data.test);

    const std::string metrics_path = cfg.out_dir + "/metrics.csv";
    const bool append = resumed && fs::exists(metrics_path);
    std::ofstream metrics(metrics_path, append ? std::ios::app : std::ios::trunc);
    if (!metrics) throw ConfigError("cannot write " + metrics_path);
    if (!append) metrics << kMetricsHeader << "\n";

    const std::string ckpt_path = cfg.out_dir + "/checkpoint.ckpt";
    auto on_eval = [&](const EvalPoint& pt) {
        metrics << metrics_row(pt) << "\n";
        metrics.flush();
        save_checkpoint(ckpt_path, make_checkpoint(cfg, net, &trainer));
        out << "step " << pt.step << "  loss " << shortest(pt.loss) << "  train "
            << shortest(pt.train_acc) << "/" << shortest(pt.train_disc_acc) << "  test "
            << shortest(pt.test_acc) << "/" << shortest(pt.test_disc_acc) << "\n";
    };

    train_loop(net, trainer, train, test, on_eval);
    // steps already reached (e.g. a no-op resume) still refreshes the checkpoint.
    save_checkpoint(ckpt_path, make_checkpoint(cfg, net, &trainer));
    out << "wrote " << metrics_path << " and " << ckpt_path << "\n";
}

namespace {

// Select rows for the requested split; "all" concatenates train then test.
LabeledData select_split(const DatasetPair& data, const std::string& split) {
    if (split == "train") return data.train;
    if (split == "test") return data.test;
    if (split != "all") throw ConfigError("split must be train, test, or all");
    LabeledData all;
    all.feature_dim = data.train.feature_dim;
    all.class_count = data.train.class_count;
    all.features = Batch(data.train.features.rows + data.test.features.rows,
                         all.feature_dim);
    for (int r = 0; r < data.train.features.rows; ++r)
        std::copy_n(data.train.features.row(r), all.feature_dim, all.features.row(r));
    for (int r = 0; r < data.test.features.rows; ++r)
        std::copy_n(data.test.features.row(r), all.feature_dim,
                    all.features.row(data.train.features.rows + r));
    all.labels = data.train.labels;
    all.labels.insert(all.labels.end(), data.test.labels.begin(), data.test.labels.end());
    return all;
}

struct PackedTiming {
    double rows_per_sec = 0.0;
};

PackedScores timed_eval_packed(const PackedCircuit& pc, const BitRows& rows, int threads,
                               PackedTiming& timing) {
    const auto t0 = std::chrono::steady_clock::now();
    PackedScores ps = eval_packed(pc, rows, threads);
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    timing.rows_per_sec = secs > 0.0 ? rows.rows / secs : 0.0;
    return ps;
}

}  // namespace

void cmd_eval(const EvalArgs& args, std::ostream& out) {
    const bool has_ck = !args.checkpoint_path.empty();
    const bool has_nl = !args.netlist_path.empty();
    if (has_ck == has_nl)
        throw ConfigError("eval needs exactly one of --checkpoint or --netlist");

    if (has_ck) {
        const Checkpoint ck = load_checkpoint(args.checkpoint_path);
        RestoredRun run = restore_run(ck);
        const std::string spec = args.dataset.empty() ? run.cfg.dataset : args.dataset;
        const DatasetPair data = ingest_dataset(spec);
        require_dataset_compatible(run.net, data);
        const LabeledData rows = select_split(data, args.split);
        if (rows.features.rows == 0)
            throw ConfigError("selected split '" + args.split + "' is empty");

        const TrainData enc = encode_split(run.net, rows);
        double cont = 0.0;
        {
            ForwardOptions opts;
            opts.threads = args.threads;
            const ForwardTrace trace = forward(run.net, enc.encoded, opts);
            int hits = 0;
            for (int r = 0; r < enc.encoded.rows; ++r) {
                const double* z = trace.logits.row(r);
                hits += static_cast<int>(std::max_element(z, z + run.net.cfg.class_count) -
                                         z) == enc.labels[r];
            }
            cont = static_cast<double>(hits) / enc.encoded.rows;
        }

        const DiscreteCircuit circ = discretize_network(run.net);
        const BitRows bits = threshold_batch(enc.encoded);
        int hits = 0;
        PackedTiming timing;
        if (args.packed) {
            const PackedScores ps = timed_eval_packed(pack(circ), bits, args.threads, timing);
            for (int r = 0; r < bits.rows; ++r) hits += ps.predictions[r] == enc.labels[r];
        } else {
            for (int r = 0; r < bits.rows; ++r) {
                const CircuitScores s = eval_circuit(
                    circ, std::span<const std::uint8_t>(bits.row(r), bits.cols));
                hits += s.prediction == enc.labels[r];
            }
        }
        out << "rows=" << rows.features.rows << "\n"
            << "continuous_acc=" << shortest(cont) << "\n"
            << "discretized_acc=" << shortest(static_cast<double>(hits) / bits.rows) << "\n";
        if (args.packed)
            out << "throughput_rows_per_sec=" << shortest(timing.rows_per_sec) << "\n";
        return;
    }

    if (args.dataset.empty()) throw ConfigError("--data is required with --netlist");
    std::ifstream is(args.netlist_path);
    if (!is) throw ConfigError("cannot open netlist " + args.netlist_path);
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    const DiscreteCircuit circ = import_netlist(text);

    const DatasetPair data = ingest_dataset(args.dataset);
    const LabeledData rows = select_split(data, args.split);
    if (rows.features.rows == 0)
        throw ConfigError("selected split '" + args.split + "' is empty");
    if (circ.input_width % rows.feature_dim != 0)
        throw ConfigError("netlist input width " + std::to_string(circ.input_width) +
                          " is not a multiple of the dataset feature width " +
                          std::to_string(rows.feature_dim));
    if (circ.class_count != rows.class_count)
        throw ConfigError("netlist class count does not match the dataset");
    EncoderConfig enc;
    enc.input_dim = rows.feature_dim;
    enc.k = circ.input_width / rows.feature_dim;
    const BitRows bits = threshold_batch(thermometer_encode_batch(enc, rows.features));

    int hits = 0;
    PackedTiming timing;
    if (args.packed) {
        const PackedScores ps = timed_eval_packed(pack(circ), bits, args.threads, timing);
        for (int r = 0; r < bits.rows; ++r) hits += ps.predictions[r] == rows.labels[r];
    } else {
        for (int r = 0; r < bits.rows; ++r) {
            const CircuitScores s = eval_circuit(
                circ, std::span<const std::uint8_t>(bits.row(r), bits.cols));
            hits += s.prediction == rows.labels[r];
        }
    }
    out << "rows=" << rows.features.rows << "\n"
        << "discretized_acc=" << shortest(static_cast<double>(hits) / bits.rows) << "\n";
    if (args.packed)
        out << "throughput_rows_per_sec=" << shortest(timing.rows_per_sec) << "\n";
}

void cmd_discretize(const DiscretizeArgs& args, std::ostream& out) {
    if (args.checkpoint_path.empty()) throw ConfigError("--checkpoint is required");
    const Checkpoint ck = load_checkpoint(args.checkpoint_path);
    RestoredRun run = restore_run(ck);

    const DiscreteCircuit before = discretize_network(run.net);
    const DiscreteCircuit after = args.simplify ? simplify(before) : before;
    const auto hist_before = gate_histogram(before);
    const auto hist_after = gate_histogram(after);

    std::string netlist_path = args.netlist_out;
    if (netlist_path.empty()) {
        fs::create_directories(args.out_dir);
        netlist_path = args.out_dir + "/circuit.netlist";
    }
    write_file(netlist_path, export_netlist(after));

    std::string report;
    report += "nodes_before=" + std::to_string(before.nodes.size()) + "\n";
    report += "nodes_after=" + std::to_string(after.nodes.size()) + "\n";
    report += std::string("simplified=") + (args.simplify ? "true" : "false") + "\n";
    for (GateId g = 1; g <= kGateCount; ++g)
        report += "gate " + std::to_string(g) + " " + std::string(gate_mnemonic(g)) +
                  " before=" + std::to_string(hist_before[g]) +
                  " after=" + std::to_string(hist_after[g]) + "\n";
    if (!args.report_out.empty()) write_file(args.report_out, report);
    out << report;
    out << "wrote " << netlist_path << "\n";
}

namespace {

Batch random_binary_rows(int rows, int cols, Rng& rng) {
    Batch b(rows, cols);
    for (double& x : b.data) x = rng.uniform() < 0.5 ? 0.0 : 1.0;
    return b;
}

std::vector<int> random_labels(int rows, int classes, Rng& rng) {
    std::vector<int> labels(rows);
    for (int& l : labels)
        l = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(classes)));
    return labels;
}

// d/dp of the relaxed neuron output at q = 0.5 (bilinear, so p drops out).
double op_dp_half(const OpParams& params) {
    const auto w = op_weights(params);
    double dp = 0.0;
    for (int i = 0; i < kGateCount; ++i)
        dp += w[i] * surrogate_grad(i + 1, 0.5, 0.5).first;
    return dp;
}

double iwp_dp_half(const IwpParams& params, Estimator est) {
    const auto om = iwp_outputs(params, est);
    return 0.5 * ((om[2] - om[0]) + (om[3] - om[1]));
}

struct NetSource {
    RunConfig cfg;
    Network net;
};

NetSource diagnose_net(const DiagnoseArgs& args) {
    if (!args.checkpoint_path.empty()) {
        RestoredRun run = restore_run(load_checkpoint(args.checkpoint_path));
        return {std::move(run.cfg), std::move(run.net)};
    }
    RunConfig cfg = load_run_config(args.config_path, args.overrides);
    const DatasetPair data = ingest_dataset(cfg.dataset);
    cfg.net.encoder.input_dim = data.train.feature_dim;
    cfg.net.class_count = data.train.class_count;
    Network net = build_network(cfg.net, cfg.seed);
    return {std::move(cfg), std::move(net)};
}

}  // namespace

void cmd_diagnose(const DiagnoseArgs& args, std::ostream& out) {
    fs::create_directories(args.out_dir);
    const int threads = args.overrides.threads.value_or(1);

    if (args.which == "gradnorms" || args.which == "histograms") {
        NetSource src = diagnose_net(args);
        Rng rng = Rng::stream(src.cfg.seed, kStreamDiagnostics);
        const Batch rows = random_binary_rows(args.batch, src.net.input_width(), rng);

        if (args.which == "gradnorms") {
            const auto labels = random_labels(args.batch, src.net.cfg.class_count, rng);
            const GradNormProfile prof = grad_norm_profile(src.net, rows, labels, threads);
            std::string csv = "layer,upstream_norm,wire_grad_norm,wire_ratio,input_grad_norm\n";
            for (size_t l = 0; l < prof.upstream_norms.size(); ++l)
                csv += std::to_string(l + 1) + "," + shortest(prof.upstream_norms[l]) + "," +
                       shortest(prof.wire_grad_norms[l]) + "," +
                       shortest(prof.wire_ratios[l]) + "," +
                       shortest(prof.input_grad_norms[l]) + "\n";
            write_file(args.out_dir + "/gradnorms.csv", csv);
            out << "wrote " << args.out_dir << "/gradnorms.csv\n";
        } else {
            const int bins = 50;
            std::string csv = "layer,bin,lo,hi,count\n";
            for (size_t l = 0; l < src.net.layers.size(); ++l) {
                const auto hist =
                    gate_output_histogram(src.net, rows, static_cast<int>(l), bins);
                for (int b = 0; b < bins; ++b)
                    csv += std::to_string(l + 1) + "," + std::to_string(b) + "," +
                           shortest(static_cast<double>(b) / bins) + "," +
                           shortest(static_cast<double>(b + 1) / bins) + "," +
                           std::to_string(hist[b]) + "\n";
            }
            write_file(args.out_dir + "/histograms.csv", csv);
            out << "wrote " << args.out_dir << "/histograms.csv\n";
        }
        return;
    }

    if (args.which == "gap") {
        if (args.checkpoint_path.empty())
            throw ConfigError("gap diagnostics need --checkpoint");
        RestoredRun run = restore_run(load_checkpoint(args.checkpoint_path));
        const std::string spec = args.dataset.empty() ? run.cfg.dataset : args.dataset;
        const DatasetPair data = ingest_dataset(spec);
        require_dataset_compatible(run.net, data);
        std::string csv = "split,continuous_acc,discretized_acc,gap\n";
        for (const char* split : {"train", "test"}) {
            const LabeledData rows = select_split(data, split);
            if (rows.features.rows == 0) continue;
            const TrainData enc = encode_split(run.net, rows);
            const GapReport rep =
                discretization_gap(run.net, enc.encoded, enc.labels, threads);
            csv += std::string(split) + "," + shortest(rep.continuous_acc) + "," +
                   shortest(rep.discretized_acc) + "," + shortest(rep.gap) + "\n";
        }
        write_file(args.out_dir + "/gap.csv", csv);
        out << "wrote " << args.out_dir << "/gap.csv\n";
        return;
    }

    if (args.which == "concentration") {
        const std::uint64_t seed =
            args.overrides.seed.value_or(args.config_path.empty()
                                             ? 1
                                             : load_run_config(args.config_path, {}).seed);
        const int samples = 10000;
        std::string csv = "scheme,d_p\n";

        struct OpScheme {
            const char* name;
            InitScheme scheme;
        };
        InitScheme g1;
        g1.kind = InitScheme::Kind::Gaussian;
        g1.sigma = 1.0;
        InitScheme g4 = g1;
        g4.sigma = 4.0;
        InitScheme rz5;
        rz5.kind = InitScheme::Kind::Residual;
        rz5.z = 5.0;
        const OpScheme op_schemes[] = {
            {"op_gaussian_s1", g1}, {"op_gaussian_s4", g4}, {"op_residual_z5", rz5}};
        std::uint64_t stream = kStreamDiagnostics + 1;
        for (const auto& s : op_schemes) {
            const InitScheme scheme = s.scheme.resolved(Estimator::Sin01);
            Rng rng = Rng::stream(seed, stream++);
            for (int i = 0; i < samples; ++i)
                csv += std::string(s.name) + "," +
                       shortest(op_dp_half(init_op_neuron(scheme, rng))) + "\n";
        }

        InitScheme ri;
        ri.kind = InitScheme::Kind::Residual;
        InitScheme ht;
        ht.kind = InitScheme::Kind::HeavyTailSet;
        ht.target_gates = {2, 8};
        const OpScheme iwp_schemes[] = {{"iwp_residual_default", ri},
                                        {"iwp_heavy_tail_and_or", ht}};
        for (const auto& s : iwp_schemes) {
            const InitScheme scheme = s.scheme.resolved(Estimator::Sin01);
            Rng rng = Rng::stream(seed, stream++);
            for (int i = 0; i < samples; ++i)
                csv += std::string(s.name) + "," +
                       shortest(iwp_dp_half(init_iwp_neuron(scheme, Estimator::Sin01, rng),
                                            Estimator::Sin01)) +
                       "\n";
        }
        write_file(args.out_dir + "/concentration.csv", csv);
        out << "wrote " << args.out_dir << "/concentration.csv\n";
        return;
    }

    throw ConfigError("unknown diagnostic '" + args.which +
                      "' (expected gradnorms, histograms, gap, or concentration)");
}

}  // namespace dlgn
