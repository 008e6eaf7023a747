#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dlgn/gates.hpp"
#include "dlgn/network.hpp"

namespace dlgn {

// Node refs: >= 0 -> index of an earlier node; < 0 -> input bit i encoded as -(i+1).
inline std::int32_t input_ref(int i) { return -(i + 1); }
inline bool is_input_ref(std::int32_t r) { return r < 0; }
inline int input_index(std::int32_t r) { return -(r + 1); }

struct CircuitNode {
    GateId gate = 1;
    std::int32_t a = 0;
    std::int32_t b = 0;
};

// Hardened circuit: nodes in topological order, class bins referencing nodes only.
struct DiscreteCircuit {
    int input_width = 0;
    int class_count = 0;
    std::vector<CircuitNode> nodes;
    std::vector<std::vector<std::int32_t>> bins;  // per class, node indices

    void validate() const;  // throws ConfigError naming the violated invariant
};

// Harden every neuron of the trained network; residual streams become pass-through
// gates. Node order follows layer order, so refs are always backward.
DiscreteCircuit discretize_network(const Network& net);

struct CircuitScores {
    std::vector<std::int32_t> scores;  // per class: bin-wise bit count
    int prediction = 0;                // argmax, lowest class on ties
};

CircuitScores eval_circuit(const DiscreteCircuit& c, std::span<const std::uint8_t> bits);

// Fixpoint of constant propagation, pass-through/negation folding, common
// subexpression elimination, and dead-node elimination. Semantics preserved.
DiscreteCircuit simplify(const DiscreteCircuit& c);

// Binary rows for hardened evaluation.
struct BitRows {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> data;  // row-major, values 0/1

    BitRows() = default;
    BitRows(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0) {}
    std::uint8_t* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
    const std::uint8_t* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }
};

BitRows threshold_batch(const Batch& b);  // x > 0.5 -> 1

// Word-parallel form: 64 sample lanes per machine word, gates compiled to
// bitwise-operator templates.
struct PackedCircuit {
    DiscreteCircuit circuit;
};

PackedCircuit pack(const DiscreteCircuit& c);

struct PackedScores {
    int rows = 0;
    int class_count = 0;
    std::vector<std::int32_t> scores;  // rows x class_count
    std::vector<std::int32_t> predictions;

    std::int32_t score(int r, int c) const { return scores[static_cast<size_t>(r) * class_count + c]; }
};

PackedScores eval_packed(const PackedCircuit& pc, const BitRows& rows, int threads = 1);

// Per-gate-id node counts (index 0 unused).
std::array<int, 17> gate_histogram(const DiscreteCircuit& c);

std::string export_netlist(const DiscreteCircuit& c);
DiscreteCircuit import_netlist(const std::string& text);  // throws ConfigError with line info

// Continuous argmax accuracy vs hardened-circuit accuracy on the same rows.
struct GapReport {
    double continuous_acc = 0.0;
    double discretized_acc = 0.0;
    double gap = 0.0;
};

GapReport discretization_gap(const Network& net, const Batch& encoded_rows,
                             const std::vector<int>& labels, int threads = 1);

}  // namespace dlgn
