#include "dlgn/gates.hpp"

#include <cmath>
#include <stdexcept>

namespace dlgn {

namespace {

void check_gate(GateId gate) {
    if (gate < 1 || gate > kGateCount)
        throw std::invalid_argument("gate id out of range [1,16]: " + std::to_string(gate));
}

void check_unit(double p, double q) {
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
        throw std::domain_error("surrogate inputs must lie in [0,1]");
}

constexpr std::array<std::array<int, 4>, 16> kTruth = {{
    {0, 0, 0, 0},  //  1: 0
    {0, 0, 0, 1},  //  2: a AND b
    {0, 0, 1, 0},  //  3: a AND NOT b
    {0, 0, 1, 1},  //  4: a
    {0, 1, 0, 0},  //  5: b AND NOT a
    {0, 1, 0, 1},  //  6: b
    {0, 1, 1, 0},  //  7: a XOR b
    {0, 1, 1, 1},  //  8: a OR b
    {1, 0, 0, 0},  //  9: NOR
    {1, 0, 0, 1},  // 10: XNOR
    {1, 0, 1, 0},  // 11: NOT b
    {1, 0, 1, 1},  // 12: b implies a
    {1, 1, 0, 0},  // 13: NOT a
    {1, 1, 0, 1},  // 14: a implies b
    {1, 1, 1, 0},  // 15: NAND
    {1, 1, 1, 1},  // 16: 1
}};

constexpr std::array<std::string_view, 16> kMnemonics = {
    "FALSE", "AND",  "ANOTB", "A",     "BNOTA", "B",    "XOR",  "OR",
    "NOR",   "XNOR", "NOTB",  "BIMPA", "NOTA",  "AIMPB", "NAND", "TRUE",
};

}  // namespace

std::array<int, 4> truth_table(GateId gate) {
    check_gate(gate);
    return kTruth[gate - 1];
}

double surrogate_eval(GateId gate, double p, double q) {
    check_gate(gate);
    check_unit(p, q);
    switch (gate) {
        case 1:  return 0.0;
        case 2:  return p * q;
        case 3:  return p - p * q;
        case 4:  return p;
        case 5:  return q - p * q;
        case 6:  return q;
        case 7:  return p + q - 2.0 * p * q;
        case 8:  return p + q - p * q;
        case 9:  return 1.0 - (p + q - p * q);
        case 10: return 1.0 - (p + q - 2.0 * p * q);
        case 11: return 1.0 - q;
        case 12: return 1.0 - q + p * q;
        case 13: return 1.0 - p;
        case 14: return 1.0 - p + p * q;
        case 15: return 1.0 - p * q;
        case 16: return 1.0;
    }
    return 0.0;  // unreachable
}

std::pair<double, double> surrogate_grad(GateId gate, double p, double q) {
    check_gate(gate);
    check_unit(p, q);
    switch (gate) {
        case 1:  return {0.0, 0.0};
        case 2:  return {q, p};
        case 3:  return {1.0 - q, -p};
        case 4:  return {1.0, 0.0};
        case 5:  return {-q, 1.0 - p};
        case 6:  return {0.0, 1.0};
        case 7:  return {1.0 - 2.0 * q, 1.0 - 2.0 * p};
        case 8:  return {1.0 - q, 1.0 - p};
        case 9:  return {-1.0 + q, -1.0 + p};
        case 10: return {-1.0 + 2.0 * q, -1.0 + 2.0 * p};
        case 11: return {0.0, -1.0};
        case 12: return {q, -1.0 + p};
        case 13: return {-1.0, 0.0};
        case 14: return {-1.0 + q, p};
        case 15: return {-q, -p};
        case 16: return {0.0, 0.0};
    }
    return {0.0, 0.0};  // unreachable
}

GateId negation_of(GateId gate) {
    check_gate(gate);
    return 17 - gate;
}

double expectation_oracle(GateId gate, double p, double q) {
    const auto bits = truth_table(gate);
    check_unit(p, q);
    const double prob[4] = {(1.0 - p) * (1.0 - q), (1.0 - p) * q, p * (1.0 - q), p * q};
    double e = 0.0;
    for (int c = 0; c < kCornerCount; ++c) e += prob[c] * bits[c];
    return e;
}

GateId gate_from_bits(int b00, int b01, int b10, int b11) {
    for (int v : {b00, b01, b10, b11})
        if (v != 0 && v != 1) throw std::invalid_argument("gate bits must be 0 or 1");
    return 1 + (b00 << 3 | b01 << 2 | b10 << 1 | b11);
}

std::string_view gate_mnemonic(GateId gate) {
    check_gate(gate);
    return kMnemonics[gate - 1];
}

GateId gate_from_mnemonic(std::string_view name) {
    for (int i = 0; i < kGateCount; ++i)
        if (kMnemonics[i] == name) return i + 1;
    return 0;
}

}  // namespace dlgn
