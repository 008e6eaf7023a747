#include "dlgn/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "dlgn/errors.hpp"

namespace dlgn {

namespace {

constexpr char kMagic[8] = {'D', 'L', 'G', 'N', 'C', 'K', 'P', '1'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_string(std::ostream& os, const std::string& s) {
    write_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void write_doubles(std::ostream& os, const std::vector<double>& v) {
    write_u64(os, v.size() * sizeof(double));
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(v)))
        throw ConfigError("checkpoint: truncated file");
    return v;
}
std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(v)))
        throw ConfigError("checkpoint: truncated file");
    return v;
}
std::string read_string(std::istream& is) {
    const std::uint64_t len = read_u64(is);
    if (len > (1ull << 32)) throw ConfigError("checkpoint: implausible string length");
    std::string s(len, '\0');
    if (!is.read(s.data(), static_cast<std::streamsize>(len)))
        throw ConfigError("checkpoint: truncated file");
    return s;
}
std::vector<double> read_doubles(std::istream& is) {
    const std::uint64_t bytes = read_u64(is);
    if (bytes % sizeof(double) != 0)
        throw ConfigError("checkpoint: parameter block length not a multiple of 8");
    std::vector<double> v(bytes / sizeof(double));
    if (!is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes)))
        throw ConfigError("checkpoint: truncated file");
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot open checkpoint for writing: " + path);
    os.write(kMagic, sizeof(kMagic));
    write_u32(os, kVersion);
    write_string(os, ck.config_text);
    os.put(ck.param == Parametrization::OP ? 0 : 1);
    os.put(static_cast<char>(ck.estimator));
    write_u64(os, ck.seed);
    write_u32(os, static_cast<std::uint32_t>(ck.input_dim));
    write_u32(os, static_cast<std::uint32_t>(ck.class_count));
    write_u32(os, static_cast<std::uint32_t>(ck.layer_logits.size()));
    for (const auto& block : ck.layer_logits) write_doubles(os, block);
    os.put(ck.has_trainer ? 1 : 0);
    if (ck.has_trainer) {
        write_u64(os, static_cast<std::uint64_t>(ck.adam.step));
        for (const auto& block : ck.adam.m) write_doubles(os, block);
        for (const auto& block : ck.adam.v) write_doubles(os, block);
        write_u32(os, static_cast<std::uint32_t>(ck.step));
        write_string(os, ck.data_rng);
        write_string(os, ck.intervention_rng);
        write_string(os, ck.dropout_rng);
    }
    if (!os) throw ConfigError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open checkpoint: " + path);
    char magic[8];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
        throw ConfigError("checkpoint: bad magic (not a dlgn checkpoint): " + path);
    const std::uint32_t version = read_u32(is);
    if (version != kVersion)
        throw ConfigError("checkpoint: unsupported version " + std::to_string(version));
    Checkpoint ck;
    ck.config_text = read_string(is);
    const int param = is.get();
    const int est = is.get();
    if (param < 0 || param > 1 || est < 0 || est > 2)
        throw ConfigError("checkpoint: invalid parametrization/estimator byte");
    ck.param = param == 0 ? Parametrization::OP : Parametrization::IWP;
    ck.estimator = static_cast<Estimator>(est);
    ck.seed = read_u64(is);
    ck.input_dim = static_cast<int>(read_u32(is));
    ck.class_count = static_cast<int>(read_u32(is));
    const std::uint32_t layers = read_u32(is);
    ck.layer_logits.resize(layers);
    for (auto& block : ck.layer_logits) block = read_doubles(is);
    const int has = is.get();
    if (has < 0) throw ConfigError("checkpoint: truncated file");
    ck.has_trainer = has != 0;
    if (ck.has_trainer) {
        ck.adam.step = static_cast<std::int64_t>(read_u64(is));
        ck.adam.m.resize(layers);
        for (auto& block : ck.adam.m) block = read_doubles(is);
        ck.adam.v.resize(layers);
        for (auto& block : ck.adam.v) block = read_doubles(is);
        ck.step = static_cast<int>(read_u32(is));
        ck.data_rng = read_string(is);
        ck.intervention_rng = read_string(is);
        ck.dropout_rng = read_string(is);
    }
    return ck;
}

Checkpoint make_checkpoint(const RunConfig& cfg, const Network& net, const Trainer* trainer) {
    Checkpoint ck;
    ck.config_text = echo_config(cfg);
    ck.param = net.cfg.param;
    ck.estimator = net.cfg.estimator;
    ck.seed = net.seed;
    ck.input_dim = net.cfg.encoder.input_dim;
    ck.class_count = net.cfg.class_count;
    for (const Layer& layer : net.layers) ck.layer_logits.push_back(layer.logits);
    if (trainer) {
        ck.has_trainer = true;
        ck.adam = trainer->adam;
        ck.step = trainer->step;
        ck.data_rng = trainer->data_rng.serialize();
        ck.intervention_rng = trainer->intervention_rng.serialize();
        ck.dropout_rng = trainer->dropout_rng.serialize();
    }
    return ck;
}

RestoredRun restore_run(const Checkpoint& ck) {
    RestoredRun run;
    run.cfg = parse_config_text(ck.config_text);
    if (run.cfg.net.param != ck.param)
        throw ConfigError("checkpoint: parametrization byte does not match config echo");
    if (run.cfg.net.estimator != ck.estimator)
        throw ConfigError("checkpoint: estimator byte does not match config echo");
    run.cfg.net.encoder.input_dim = ck.input_dim;
    run.cfg.net.class_count = ck.class_count;
    run.net = build_network(run.cfg.net, ck.seed);
    if (ck.layer_logits.size() != run.net.layers.size())
        throw ConfigError("checkpoint: layer count does not match config");
    for (size_t l = 0; l < run.net.layers.size(); ++l) {
        if (ck.layer_logits[l].size() != run.net.layers[l].logits.size())
            throw ConfigError("checkpoint: parameter block size mismatch in layer " +
                              std::to_string(l));
        run.net.layers[l].logits = ck.layer_logits[l];
    }
    run.trainer = Trainer::create(run.net, run.cfg.train);
    if (ck.has_trainer) {
        run.trainer.adam = ck.adam;
        run.trainer.step = ck.step;
        run.trainer.data_rng = Rng::deserialize(ck.data_rng);
        run.trainer.intervention_rng = Rng::deserialize(ck.intervention_rng);
        run.trainer.dropout_rng = Rng::deserialize(ck.dropout_rng);
    }
    return run;
}

}  // namespace dlgn
