#pragma once

#include <array>
#include <string_view>
#include <utility>

namespace dlgn {

// The 16 two-input Boolean functions, numbered 1..16. The numbering is the
// canonical truth-table order: gate id = 1 + (b00<<3 | b01<<2 | b10<<1 | b11)
// where b_ab is the output on inputs (a, b). Notable rows: 1 = constant 0,
// 2 = AND, 4 = pass-through A, 7 = XOR, 8 = OR, 16 = constant 1.
using GateId = int;

inline constexpr int kGateCount = 16;

// Corner order used everywhere: (a,b) = (0,0), (0,1), (1,0), (1,1).
inline constexpr int kCornerCount = 4;

// Output bits of a gate at the four corners, in corner order.
std::array<int, 4> truth_table(GateId gate);

// truth_table under its initialization-scheme name (sign assignment of the
// shifted-normal draws).
inline std::array<int, 4> target_bits(GateId gate) { return truth_table(gate); }

// The probabilistic surrogate: E[G(A,B)] for independent Bernoulli inputs
// with rates p and q. A bilinear polynomial; exact at the corners.
double surrogate_eval(GateId gate, double p, double q);

// Analytic (d/dp, d/dq) of the surrogate.
std::pair<double, double> surrogate_grad(GateId gate, double p, double q);

// The complementary gate: G_{17-i} = 1 - G_i.
GateId negation_of(GateId gate);

// Direct expectation over the four Bernoulli outcomes. Used as a test oracle
// for surrogate_eval; kept in the library so diagnostics can cross-check.
double expectation_oracle(GateId gate, double p, double q);

// Gate id for a set of corner output bits.
GateId gate_from_bits(int b00, int b01, int b10, int b11);

// Netlist mnemonics, ids 1..16 in order:
// FALSE AND ANOTB A BNOTA B XOR OR NOR XNOR NOTB BIMPA NOTA AIMPB NAND TRUE
std::string_view gate_mnemonic(GateId gate);
GateId gate_from_mnemonic(std::string_view name);  // 0 if unknown

}  // namespace dlgn
