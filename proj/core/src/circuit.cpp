#include "dlgn/circuit.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <tuple>

#include "dlgn/errors.hpp"
#include "dlgn/neuron.hpp"
#include "parallel.hpp"

namespace dlgn {

void DiscreteCircuit::validate() const {
    if (input_width < 1) throw ConfigError("circuit: input_width must be positive");
    if (class_count < 1) throw ConfigError("circuit: class_count must be positive");
    for (size_t n = 0; n < nodes.size(); ++n) {
        const CircuitNode& node = nodes[n];
        if (node.gate < 1 || node.gate > 16)
            throw ConfigError("circuit: node " + std::to_string(n) + " has invalid gate id");
        for (std::int32_t ref : {node.a, node.b}) {
            if (is_input_ref(ref)) {
                if (input_index(ref) >= input_width)
                    throw ConfigError("circuit: node " + std::to_string(n) +
                                      " references input " + std::to_string(input_index(ref)) +
                                      " outside input_width");
            } else if (ref >= static_cast<std::int32_t>(n)) {
                throw ConfigError("circuit: node " + std::to_string(n) +
                                  " references node " + std::to_string(ref) +
                                  " that is not earlier (acyclicity)");
            }
        }
    }
    if (static_cast<int>(bins.size()) != class_count)
        throw ConfigError("circuit: bin count does not match class_count");
    for (const auto& bin : bins)
        for (std::int32_t e : bin)
            if (e < 0 || e >= static_cast<std::int32_t>(nodes.size()))
                throw ConfigError("circuit: bin references node " + std::to_string(e) +
                                  " outside the node list");
}

DiscreteCircuit discretize_network(const Network& net) {
    DiscreteCircuit c;
    c.input_width = net.input_width();
    c.class_count = net.cfg.class_count;

    std::int32_t base = 0;  // node id of the previous layer's neuron 0
    bool first = true;
    for (const Layer& layer : net.layers) {
        const std::int32_t this_base = static_cast<std::int32_t>(c.nodes.size());
        for (int n = 0; n < layer.width; ++n) {
            CircuitNode node;
            const std::int32_t ra =
                first ? input_ref(layer.wire_a[n]) : base + layer.wire_a[n];
            const std::int32_t rb =
                first ? input_ref(layer.wire_b[n]) : base + layer.wire_b[n];
            if (layer.residual[n]) {
                node.gate = 4;  // pass-through of input A
                node.a = ra;
                node.b = ra;
            } else {
                if (net.cfg.param == Parametrization::OP) {
                    OpParams p;
                    std::copy_n(&layer.logits[static_cast<size_t>(n) * 16], 16,
                                p.logits.begin());
                    node.gate = discretize_op(p);
                } else {
                    IwpParams p;
                    std::copy_n(&layer.logits[static_cast<size_t>(n) * 4], 4,
                                p.logits.begin());
                    node.gate = discretize_iwp(p, net.cfg.estimator);
                }
                node.a = ra;
                node.b = rb;
            }
            c.nodes.push_back(node);
        }
        base = this_base;
        first = false;
    }

    const int final_width = net.layers.back().width;
    const int bin = final_width / c.class_count;
    c.bins.resize(c.class_count);
    for (int cls = 0; cls < c.class_count; ++cls)
        for (int i = cls * bin; i < (cls + 1) * bin; ++i)
            c.bins[cls].push_back(base + i);
    return c;
}

CircuitScores eval_circuit(const DiscreteCircuit& c, std::span<const std::uint8_t> bits) {
    if (static_cast<int>(bits.size()) != c.input_width)
        throw ConfigError("eval_circuit: row width does not match input_width");
    std::vector<std::uint8_t> vals(c.nodes.size());
    auto read = [&](std::int32_t ref) -> int {
        return is_input_ref(ref) ? bits[input_index(ref)] : vals[ref];
    };
    for (size_t n = 0; n < c.nodes.size(); ++n) {
        const CircuitNode& node = c.nodes[n];
        vals[n] = static_cast<std::uint8_t>(
            truth_table(node.gate)[read(node.a) * 2 + read(node.b)]);
    }
    CircuitScores out;
    out.scores.resize(c.class_count, 0);
    for (int cls = 0; cls < c.class_count; ++cls)
        for (std::int32_t e : c.bins[cls]) out.scores[cls] += vals[e];
    out.prediction = static_cast<int>(
        std::max_element(out.scores.begin(), out.scores.end()) - out.scores.begin());
    return out;
}

namespace {

using Bits = std::array<int, 4>;

GateId from_bits(const Bits& t) { return gate_from_bits(t[0], t[1], t[2], t[3]); }

bool depends_on_a(const Bits& t) { return t[0] != t[2] || t[1] != t[3]; }
bool depends_on_b(const Bits& t) { return t[0] != t[1] || t[2] != t[3]; }

Bits negate_a(const Bits& t) { return {t[2], t[3], t[0], t[1]}; }
Bits negate_b(const Bits& t) { return {t[1], t[0], t[3], t[2]}; }
Bits swap_ab(const Bits& t) { return {t[0], t[2], t[1], t[3]}; }
Bits restrict_a(const Bits& t, int va) {
    return va ? Bits{t[2], t[3], t[2], t[3]} : Bits{t[0], t[1], t[0], t[1]};
}
Bits restrict_b(const Bits& t, int vb) {
    return vb ? Bits{t[1], t[1], t[3], t[3]} : Bits{t[0], t[0], t[2], t[2]};
}
Bits diagonal(const Bits& t) { return {t[0], t[0], t[3], t[3]}; }

// Follow pass-through (A) and negation (NOTA/NOTB, B) chains to the ultimate
// source, tracking parity. Refs strictly decrease, so this terminates.
std::pair<std::int32_t, bool> chase(const std::vector<CircuitNode>& nodes,
                                    std::int32_t ref) {
    bool neg = false;
    while (!is_input_ref(ref)) {
        const CircuitNode& n = nodes[ref];
        if (n.gate == 4) {
            ref = n.a;
        } else if (n.gate == 6) {
            ref = n.b;
        } else if (n.gate == 13) {
            ref = n.a;
            neg = !neg;
        } else if (n.gate == 11) {
            ref = n.b;
            neg = !neg;
        } else {
            break;
        }
    }
    return {ref, neg};
}

// Constant value of a node ref after chasing, or -1 if not constant.
int const_value(const std::vector<CircuitNode>& nodes, std::int32_t ref, bool neg) {
    if (is_input_ref(ref)) return -1;
    const GateId g = nodes[ref].gate;
    if (g == 1) return neg ? 1 : 0;
    if (g == 16) return neg ? 0 : 1;
    return -1;
}

// Rewrite one node in place to canonical form given already-rewritten
// predecessors. Returns true if anything changed.
bool rewrite_node(std::vector<CircuitNode>& nodes, size_t idx) {
    CircuitNode& node = nodes[idx];
    bool changed = false;
    for (int guard = 0; guard < 64; ++guard) {
        Bits t = truth_table(node.gate);
        const bool da = depends_on_a(t), db = depends_on_b(t);

        if (da) {
            auto [ra, na] = chase(nodes, node.a);
            if (int v = const_value(nodes, ra, na); v >= 0) {
                node.gate = from_bits(restrict_a(t, v));
                changed = true;
                continue;
            }
            if (ra != node.a || na) {
                node.a = ra;
                if (na) node.gate = from_bits(negate_a(t));
                changed = true;
                continue;
            }
        }
        if (db) {
            auto [rb, nb] = chase(nodes, node.b);
            if (int v = const_value(nodes, rb, nb); v >= 0) {
                node.gate = from_bits(restrict_b(t, v));
                changed = true;
                continue;
            }
            if (rb != node.b || nb) {
                node.b = rb;
                if (nb) node.gate = from_bits(negate_b(t));
                changed = true;
                continue;
            }
        }
        if ((da || db) && node.a == node.b && diagonal(t) != t) {
            node.gate = from_bits(diagonal(t));
            changed = true;
            continue;
        }
        // Canonical refs for ignored inputs (helps CSE and keeps chasing simple).
        if (!da && !db) {
            if (node.a != input_ref(0) || node.b != input_ref(0)) {
                node.a = node.b = input_ref(0);
                changed = true;
            }
            break;
        }
        if (!da && node.a != node.b) {
            node.a = node.b;
            changed = true;
            continue;
        }
        if (!db && node.b != node.a) {
            node.b = node.a;
            changed = true;
            continue;
        }
        // Canonical operand order for two-input gates.
        if (da && db && node.a > node.b) {
            std::swap(node.a, node.b);
            node.gate = from_bits(swap_ab(t));
            changed = true;
            continue;
        }
        break;
    }
    return changed;
}

}  // namespace

DiscreteCircuit simplify(const DiscreteCircuit& input) {
    input.validate();
    DiscreteCircuit c = input;
    auto& nodes = c.nodes;
    const auto n_count = static_cast<std::int32_t>(nodes.size());

    for (int pass = 0; pass < 100; ++pass) {
        bool changed = false;
        for (size_t n = 0; n < nodes.size(); ++n)
            if (rewrite_node(nodes, n)) changed = true;

        // Common subexpression elimination: later duplicates collapse onto the
        // first occurrence.
        std::map<std::tuple<GateId, std::int32_t, std::int32_t>, std::int32_t> seen;
        std::vector<std::int32_t> remap(nodes.size());
        for (std::int32_t n = 0; n < n_count; ++n) {
            CircuitNode& node = nodes[n];
            if (!is_input_ref(node.a) && remap[node.a] != node.a) {
                node.a = remap[node.a];
                changed = true;
            }
            if (!is_input_ref(node.b) && remap[node.b] != node.b) {
                node.b = remap[node.b];
                changed = true;
            }
            const auto key = std::make_tuple(node.gate, node.a, node.b);
            auto [it, inserted] = seen.try_emplace(key, n);
            remap[n] = it->second;
            if (!inserted) changed = true;
        }

        // Bins reference nodes only, but a bin entry that is a pass-through of
        // another node can point at the source directly.
        for (auto& bin : c.bins) {
            for (auto& e : bin) {
                if (remap[e] != e) {
                    e = remap[e];
                    changed = true;
                }
                while (nodes[e].gate == 4 && !is_input_ref(nodes[e].a)) {
                    e = nodes[e].a;
                    changed = true;
                }
            }
        }
        if (!changed) break;
    }

    // Dead-node elimination and renumbering.
    std::vector<std::uint8_t> alive(nodes.size(), 0);
    for (const auto& bin : c.bins)
        for (std::int32_t e : bin) alive[e] = 1;
    for (std::int32_t n = n_count - 1; n >= 0; --n) {
        if (!alive[n]) continue;
        const Bits t = truth_table(nodes[n].gate);
        if (depends_on_a(t) && !is_input_ref(nodes[n].a)) alive[nodes[n].a] = 1;
        if (depends_on_b(t) && !is_input_ref(nodes[n].b)) alive[nodes[n].b] = 1;
    }
    std::vector<std::int32_t> new_id(nodes.size(), -1);
    DiscreteCircuit out;
    out.input_width = c.input_width;
    out.class_count = c.class_count;
    // Ignored refs of pruned predecessors are retargeted to input 0 so every
    // surviving ref stays valid.
    auto remap_ref = [&](std::int32_t ref) {
        if (is_input_ref(ref)) return ref;
        return new_id[ref] >= 0 ? new_id[ref] : input_ref(0);
    };
    for (std::int32_t n = 0; n < n_count; ++n) {
        if (!alive[n]) continue;
        new_id[n] = static_cast<std::int32_t>(out.nodes.size());
        CircuitNode node = nodes[n];
        node.a = remap_ref(node.a);
        node.b = remap_ref(node.b);
        out.nodes.push_back(node);
    }
    out.bins.resize(c.class_count);
    for (int cls = 0; cls < c.class_count; ++cls)
        for (std::int32_t e : c.bins[cls]) out.bins[cls].push_back(new_id[e]);
    out.validate();
    return out;
}

BitRows threshold_batch(const Batch& b) {
    BitRows out(b.rows, b.cols);
    for (size_t i = 0; i < b.data.size(); ++i) out.data[i] = b.data[i] > 0.5 ? 1 : 0;
    return out;
}

PackedCircuit pack(const DiscreteCircuit& c) {
    c.validate();
    return PackedCircuit{c};
}

namespace {

std::uint64_t apply_gate_words(GateId g, std::uint64_t a, std::uint64_t b) {
    switch (g) {
        case 1: return 0;
        case 2: return a & b;
        case 3: return a & ~b;
        case 4: return a;
        case 5: return ~a & b;
        case 6: return b;
        case 7: return a ^ b;
        case 8: return a | b;
        case 9: return ~(a | b);
        case 10: return ~(a ^ b);
        case 11: return ~b;
        case 12: return a | ~b;
        case 13: return ~a;
        case 14: return ~a | b;
        case 15: return ~(a & b);
        case 16: return ~0ull;
    }
    throw std::invalid_argument("gate id out of range");
}

}  // namespace

PackedScores eval_packed(const PackedCircuit& pc, const BitRows& rows, int threads) {
    const DiscreteCircuit& c = pc.circuit;
    if (rows.cols != c.input_width)
        throw ConfigError("eval_packed: row width does not match input_width");
    PackedScores out;
    out.rows = rows.rows;
    out.class_count = c.class_count;
    out.scores.assign(static_cast<size_t>(rows.rows) * c.class_count, 0);
    out.predictions.assign(rows.rows, 0);
    if (rows.rows == 0) return out;

    const int blocks = (rows.rows + 63) / 64;
    parallel_chunks(blocks, threads, [&](int, int begin, int end) {
        std::vector<std::uint64_t> in_words(c.input_width);
        std::vector<std::uint64_t> vals(c.nodes.size());
        for (int blk = begin; blk < end; ++blk) {
            const int row0 = blk * 64;
            const int lanes = std::min(64, rows.rows - row0);
            std::fill(in_words.begin(), in_words.end(), 0);
            for (int lane = 0; lane < lanes; ++lane) {
                const std::uint8_t* r = rows.row(row0 + lane);
                for (int i = 0; i < rows.cols; ++i)
                    if (r[i]) in_words[i] |= 1ull << lane;
            }
            auto word = [&](std::int32_t ref) {
                return is_input_ref(ref) ? in_words[input_index(ref)] : vals[ref];
            };
            for (size_t n = 0; n < c.nodes.size(); ++n)
                vals[n] = apply_gate_words(c.nodes[n].gate, word(c.nodes[n].a),
                                           word(c.nodes[n].b));
            for (int cls = 0; cls < c.class_count; ++cls) {
                for (std::int32_t e : c.bins[cls]) {
                    const std::uint64_t w = vals[e];
                    for (int lane = 0; lane < lanes; ++lane)
                        out.scores[static_cast<size_t>(row0 + lane) * c.class_count + cls] +=
                            (w >> lane) & 1;
                }
            }
            for (int lane = 0; lane < lanes; ++lane) {
                const std::int32_t* s =
                    &out.scores[static_cast<size_t>(row0 + lane) * c.class_count];
                out.predictions[row0 + lane] = static_cast<int>(
                    std::max_element(s, s + c.class_count) - s);
            }
        }
    });
    return out;
}

std::array<int, 17> gate_histogram(const DiscreteCircuit& c) {
    std::array<int, 17> hist{};
    for (const CircuitNode& n : c.nodes) ++hist[n.gate];
    return hist;
}

namespace {

std::string ref_text(std::int32_t ref) {
    return is_input_ref(ref) ? "in:" + std::to_string(input_index(ref))
                             : "n:" + std::to_string(ref);
}

}  // namespace

std::string export_netlist(const DiscreteCircuit& c) {
    c.validate();
    std::ostringstream os;
    os << "dlgn-netlist v1 inputs=" << c.input_width << " classes=" << c.class_count
       << "\n";
    for (int i = 0; i < c.input_width; ++i) os << "in " << i << "\n";
    for (size_t n = 0; n < c.nodes.size(); ++n)
        os << "node " << n << " " << gate_mnemonic(c.nodes[n].gate) << " "
           << ref_text(c.nodes[n].a) << " " << ref_text(c.nodes[n].b) << "\n";
    for (int cls = 0; cls < c.class_count; ++cls) {
        os << "bin " << cls;
        for (std::int32_t e : c.bins[cls]) os << " n:" << e;
        os << "\n";
    }
    return os.str();
}

namespace {

[[noreturn]] void netlist_fail(int line, const std::string& what) {
    throw ConfigError("netlist line " + std::to_string(line) + ": " + what);
}

long parse_int(const std::string& tok, int line, const char* what) {
    try {
        size_t pos = 0;
        const long v = std::stol(tok, &pos);
        if (pos != tok.size()) netlist_fail(line, std::string("malformed ") + what);
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        netlist_fail(line, std::string("malformed ") + what);
    }
}

std::int32_t parse_ref(const std::string& tok, int line, int inputs, std::int32_t node_count) {
    if (tok.rfind("in:", 0) == 0) {
        const long i = parse_int(tok.substr(3), line, "input ref");
        if (i < 0 || i >= inputs) netlist_fail(line, "input ref outside declared inputs");
        return input_ref(static_cast<int>(i));
    }
    if (tok.rfind("n:", 0) == 0) {
        const long i = parse_int(tok.substr(2), line, "node ref");
        if (i < 0) netlist_fail(line, "negative node ref");
        if (i >= node_count) netlist_fail(line, "forward reference to node " + std::to_string(i));
        return static_cast<std::int32_t>(i);
    }
    netlist_fail(line, "ref must be in:<i> or n:<id>, got '" + tok + "'");
}

}  // namespace

DiscreteCircuit import_netlist(const std::string& text) {
    std::istringstream is(text);
    std::string line_text;
    int line = 0;
    DiscreteCircuit c;
    int declared_inputs = 0;
    bool header_seen = false;
    int section = 0;  // 0 = in, 1 = node, 2 = bin (declarations must be grouped)

    while (std::getline(is, line_text)) {
        ++line;
        std::istringstream ls(line_text);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;

        if (!header_seen) {
            if (tok.size() != 4 || tok[0] != "dlgn-netlist")
                netlist_fail(line, "expected header 'dlgn-netlist v1 inputs=<n> classes=<C>'");
            if (tok[1] != "v1") netlist_fail(line, "unsupported version '" + tok[1] + "'");
            if (tok[2].rfind("inputs=", 0) != 0 || tok[3].rfind("classes=", 0) != 0)
                netlist_fail(line, "expected inputs=<n> classes=<C>");
            c.input_width = static_cast<int>(parse_int(tok[2].substr(7), line, "inputs"));
            c.class_count = static_cast<int>(parse_int(tok[3].substr(8), line, "classes"));
            if (c.input_width < 1) netlist_fail(line, "inputs must be positive");
            if (c.class_count < 1) netlist_fail(line, "classes must be positive");
            header_seen = true;
            continue;
        }

        if (tok[0] == "in") {
            if (section > 0) netlist_fail(line, "in declaration after node/bin section");
            if (tok.size() != 2) netlist_fail(line, "expected 'in <i>'");
            const long i = parse_int(tok[1], line, "input index");
            if (i != declared_inputs)
                netlist_fail(line, "input declarations must be sequential from 0");
            ++declared_inputs;
        } else if (tok[0] == "node") {
            if (section > 1) netlist_fail(line, "node declaration after bin section");
            section = 1;
            if (declared_inputs != c.input_width)
                netlist_fail(line, "declared inputs do not match header");
            if (tok.size() != 5) netlist_fail(line, "expected 'node <id> <GATE> <ref_a> <ref_b>'");
            const long id = parse_int(tok[1], line, "node id");
            if (id != static_cast<long>(c.nodes.size()))
                netlist_fail(line, "node ids must be sequential from 0");
            const GateId g = gate_from_mnemonic(tok[2]);
            if (g == 0) netlist_fail(line, "unknown gate mnemonic '" + tok[2] + "'");
            CircuitNode node;
            node.gate = g;
            node.a = parse_ref(tok[3], line, c.input_width,
                               static_cast<std::int32_t>(c.nodes.size()));
            node.b = parse_ref(tok[4], line, c.input_width,
                               static_cast<std::int32_t>(c.nodes.size()));
            c.nodes.push_back(node);
        } else if (tok[0] == "bin") {
            section = 2;
            if (declared_inputs != c.input_width)
                netlist_fail(line, "declared inputs do not match header");
            if (tok.size() < 2) netlist_fail(line, "expected 'bin <class> n:<id> ...'");
            const long cls = parse_int(tok[1], line, "bin class");
            if (cls != static_cast<long>(c.bins.size()))
                netlist_fail(line, "bin classes must be sequential from 0");
            std::vector<std::int32_t> entries;
            for (size_t i = 2; i < tok.size(); ++i) {
                if (tok[i].rfind("n:", 0) != 0)
                    netlist_fail(line, "bins may reference nodes only");
                entries.push_back(parse_ref(tok[i], line, c.input_width,
                                            static_cast<std::int32_t>(c.nodes.size())));
            }
            c.bins.push_back(std::move(entries));
        } else {
            netlist_fail(line, "unknown directive '" + tok[0] + "'");
        }
    }
    if (!header_seen) throw ConfigError("netlist line 1: missing header");
    if (declared_inputs != c.input_width)
        throw ConfigError("netlist: declared inputs do not match header");
    if (static_cast<int>(c.bins.size()) != c.class_count)
        throw ConfigError("netlist: bin count does not match classes");
    c.validate();
    return c;
}

GapReport discretization_gap(const Network& net, const Batch& encoded_rows,
                             const std::vector<int>& labels, int threads) {
    if (encoded_rows.rows != static_cast<int>(labels.size()))
        throw ConfigError("discretization_gap: label count does not match rows");
    GapReport rep;
    if (encoded_rows.rows == 0) return rep;

    ForwardOptions opts;
    opts.threads = threads;
    const ForwardTrace trace = forward(net, encoded_rows, opts);
    int cont_hits = 0;
    for (int r = 0; r < encoded_rows.rows; ++r) {
        const double* z = trace.logits.row(r);
        const int pred = static_cast<int>(
            std::max_element(z, z + net.cfg.class_count) - z);
        cont_hits += pred == labels[r];
    }

    const PackedCircuit pc = pack(discretize_network(net));
    const PackedScores ps = eval_packed(pc, threshold_batch(encoded_rows), threads);
    int disc_hits = 0;
    for (int r = 0; r < encoded_rows.rows; ++r)
        disc_hits += ps.predictions[r] == labels[r];

    rep.continuous_acc = static_cast<double>(cont_hits) / encoded_rows.rows;
    rep.discretized_acc = static_cast<double>(disc_hits) / encoded_rows.rows;
    rep.gap = rep.continuous_acc - rep.discretized_acc;
    return rep;
}

}  // namespace dlgn
