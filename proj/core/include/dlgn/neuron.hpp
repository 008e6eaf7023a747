#pragma once

#include <array>

#include "dlgn/estimator.hpp"
#include "dlgn/gates.hpp"

namespace dlgn {

// Original parametrization: one logit per gate; the neuron computes the
// softmax-weighted mixture of the 16 surrogates.
struct OpParams {
    std::array<double, 16> logits{};
};

// Input-wise parametrization: one logit per input corner; the neuron is the
// bilinear interpolation of the estimator-mapped corner values. The
// estimator is a network-level choice and is passed alongside.
struct IwpParams {
    std::array<double, 4> logits{};  // corners (0,0), (0,1), (1,0), (1,1)
};

struct OpGrad {
    double d_p = 0.0, d_q = 0.0;
    std::array<double, 16> d_logits{};
};

struct IwpGrad {
    double d_p = 0.0, d_q = 0.0;
    std::array<double, 4> d_logits{};
};

// Softmax with max-subtraction. Throws NumericError on non-finite logits.
std::array<double, 16> op_weights(const OpParams& params);

double op_forward(const OpParams& params, double p, double q);
// Mixture with explicit weights (simplex point); shared by forward and tests.
double op_mixture(const std::array<double, 16>& weights, double p, double q);

// d_p = upstream * sum_i w_i dg_i/dp (equal to the sign-symmetric pairing
// over i=1..8 because dg_{17-i} = -dg_i); d_logits via the exact softmax
// Jacobian.
OpGrad op_backward(const OpParams& params, double p, double q, double upstream);

std::array<double, 4> iwp_outputs(const IwpParams& params, Estimator est);

double iwp_forward(const IwpParams& params, Estimator est, double p, double q);

// d_p = upstream * [(1-q)(w10 - w00) + q(w11 - w01)], d_q symmetric;
// d_logit_ij = upstream * e_ij(p,q) * estimator'(logit_ij) with e_ij the
// bilinear basis factor.
IwpGrad iwp_backward(const IwpParams& params, Estimator est, double p, double q,
                     double upstream);

// Argmax weight; ties break to the lowest gate id.
GateId discretize_op(const OpParams& params);

// Threshold each corner at 0.5 (exactly 0.5 rounds to 0); the bit pattern
// selects the gate.
GateId discretize_iwp(const IwpParams& params, Estimator est);

// Gates minimizing the L1 / L2 distance between the corner outputs and the
// gate truth bits; ties break to the lowest id. Test oracles.
GateId l1_closest_gate(const std::array<double, 4>& outputs);
GateId l2_closest_gate(const std::array<double, 4>& outputs);

}  // namespace dlgn
