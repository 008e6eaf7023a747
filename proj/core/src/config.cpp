#include "dlgn/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "dlgn/errors.hpp"
#include "dlgn/init.hpp"
#include "fmt.hpp"

namespace dlgn {

namespace {

std::string trim(const std::string& s) {
    const size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError(key + ": expected a real number, got '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
    }
}

std::vector<GateId> parse_gate_list(const std::string& v) {
    std::vector<GateId> gates;
    if (trim(v).empty()) return gates;
    std::stringstream ss(v);
    for (std::string cell; std::getline(ss, cell, ',');)
        gates.push_back(parse_int("init.gates", trim(cell)));
    return gates;
}

std::string format_double(double x) { return detail::shortest(x); }

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "dataset") cfg.dataset = value;
    else if (key == "parametrization") cfg.net.param = parametrization_from_name(value);
    else if (key == "estimator") cfg.net.estimator = estimator_from_name(value);
    else if (key == "layer_width") cfg.net.layer_width = parse_int(key, value);
    else if (key == "base_layers") cfg.net.base_layers = parse_int(key, value);
    else if (key == "depth_scale") cfg.net.depth_scale = parse_int(key, value);
    else if (key == "tau") cfg.net.tau = parse_double(key, value);
    else if (key == "final_layer_width_multiplier")
        cfg.net.final_layer_width_multiplier = parse_int(key, value);
    else if (key == "encoder_bits") cfg.net.encoder.k = parse_int(key, value);
    else if (key == "init.kind") cfg.net.init.kind = init_kind_from_name(value);
    else if (key == "init.sigma") cfg.net.init.sigma = parse_double(key, value);
    else if (key == "init.mu") cfg.net.init.mu = parse_double(key, value);
    else if (key == "init.z") cfg.net.init.z = parse_double(key, value);
    else if (key == "init.jitter_sigma") cfg.net.init.jitter_sigma = parse_double(key, value);
    else if (key == "init.gates") cfg.net.init.target_gates = parse_gate_list(value);
    else if (key == "residual_start") cfg.net.residual_start = parse_double(key, value);
    else if (key == "residual_end") cfg.net.residual_end = parse_double(key, value);
    else if (key == "lr") cfg.train.learning_rate = parse_double(key, value);
    else if (key == "steps") cfg.train.steps = parse_int(key, value);
    else if (key == "batch_size") cfg.train.batch_size = parse_int(key, value);
    else if (key == "accumulation") cfg.train.accumulation = parse_int(key, value);
    else if (key == "weight_decay") cfg.train.weight_decay = parse_double(key, value);
    else if (key == "eval_every") cfg.train.eval_every = parse_int(key, value);
    else if (key == "intervene_p") cfg.train.intervention.p = parse_double(key, value);
    else if (key == "intervene_strategy")
        cfg.train.intervention.strategy = intervention_strategy_from_name(value);
    else if (key == "intervene_value") cfg.train.intervention.value = parse_double(key, value);
    else if (key == "dropout_p") cfg.train.dropout_p = parse_double(key, value);
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "threads") cfg.train.threads = parse_int(key, value);
    else if (key == "out") cfg.out_dir = value;
    else throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    std::map<std::string, int> seen;
    while (std::getline(is, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (auto [it, inserted] = seen.try_emplace(key, line_no); !inserted)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": duplicate key '" + key + "' (first on line " +
                              std::to_string(it->second) + ")");
        apply_key(cfg, key, value);
    }
    // Convenience default: the heavy-tail scheme without an explicit set is
    // the AND-OR bias.
    if (cfg.net.init.kind == InitScheme::Kind::HeavyTailSet &&
        cfg.net.init.target_gates.empty())
        cfg.net.init.target_gates = {2, 8};
    cfg.net.init = cfg.net.init.resolved(cfg.net.estimator);
    cfg.train.validate(cfg.net.param);
    // The dataset-dependent parts of NetworkConfig (input_dim, class_count)
    // are validated at build time; check the rest here.
    {
        NetworkConfig probe = cfg.net;
        probe.encoder.input_dim = 1;
        probe.class_count = 1;
        probe.validate();
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

std::string echo_config(const RunConfig& input) {
    RunConfig cfg = input;
    if (cfg.net.init.kind == InitScheme::Kind::HeavyTailSet &&
        cfg.net.init.target_gates.empty())
        cfg.net.init.target_gates = {2, 8};
    cfg.net.init = cfg.net.init.resolved(cfg.net.estimator);

    std::string gates;
    for (size_t i = 0; i < cfg.net.init.target_gates.size(); ++i) {
        if (i) gates += ",";
        gates += std::to_string(cfg.net.init.target_gates[i]);
    }

    std::ostringstream os;  // keys in sorted order
    os << "accumulation=" << cfg.train.accumulation << "\n"
       << "base_layers=" << cfg.net.base_layers << "\n"
       << "batch_size=" << cfg.train.batch_size << "\n"
       << "dataset=" << cfg.dataset << "\n"
       << "depth_scale=" << cfg.net.depth_scale << "\n"
       << "dropout_p=" << format_double(cfg.train.dropout_p) << "\n"
       << "encoder_bits=" << cfg.net.encoder.k << "\n"
       << "estimator=" << estimator_name(cfg.net.estimator) << "\n"
       << "eval_every=" << cfg.train.eval_every << "\n"
       << "final_layer_width_multiplier=" << cfg.net.final_layer_width_multiplier << "\n"
       << "init.gates=" << gates << "\n"
       << "init.jitter_sigma=" << format_double(cfg.net.init.jitter_sigma) << "\n"
       << "init.kind=" << init_kind_name(cfg.net.init.kind) << "\n"
       << "init.mu=" << format_double(cfg.net.init.mu) << "\n"
       << "init.sigma=" << format_double(cfg.net.init.sigma) << "\n"
       << "init.z=" << format_double(cfg.net.init.z) << "\n"
       << "intervene_p=" << format_double(cfg.train.intervention.p) << "\n"
       << "intervene_strategy=" << intervention_strategy_name(cfg.train.intervention.strategy)
       << "\n"
       << "intervene_value=" << format_double(cfg.train.intervention.value) << "\n"
       << "layer_width=" << cfg.net.layer_width << "\n"
       << "lr=" << format_double(cfg.train.learning_rate) << "\n"
       << "out=" << cfg.out_dir << "\n"
       << "parametrization=" << parametrization_name(cfg.net.param) << "\n"
       << "residual_end=" << format_double(cfg.net.residual_end) << "\n"
       << "residual_start=" << format_double(cfg.net.residual_start) << "\n"
       << "seed=" << cfg.seed << "\n"
       << "steps=" << cfg.train.steps << "\n"
       << "tau=" << format_double(cfg.net.tau) << "\n"
       << "threads=" << cfg.train.threads << "\n"
       << "weight_decay=" << format_double(cfg.train.weight_decay) << "\n";
    return os.str();
}

}  // namespace dlgn
