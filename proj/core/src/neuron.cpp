#include "dlgn/neuron.hpp"

#include <cmath>
#include <stdexcept>

#include "dlgn/errors.hpp"

namespace dlgn {

namespace {

void check_unit_inputs(double p, double q) {
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
        throw std::domain_error("neuron inputs must lie in [0,1]");
}

}  // namespace

std::array<double, 16> op_weights(const OpParams& params) {
    double hi = params.logits[0];
    for (double v : params.logits) {
        if (!std::isfinite(v)) throw NumericError("non-finite logit in op_weights");
        if (v > hi) hi = v;
    }
    std::array<double, 16> w;
    double z = 0.0;
    for (int i = 0; i < 16; ++i) {
        w[i] = std::exp(params.logits[i] - hi);
        z += w[i];
    }
    for (double& v : w) v /= z;
    return w;
}

double op_mixture(const std::array<double, 16>& weights, double p, double q) {
    check_unit_inputs(p, q);
    double y = 0.0;
    for (int i = 0; i < 16; ++i) y += weights[i] * surrogate_eval(i + 1, p, q);
    return y;
}

double op_forward(const OpParams& params, double p, double q) {
    return op_mixture(op_weights(params), p, q);
}

OpGrad op_backward(const OpParams& params, double p, double q, double upstream) {
    check_unit_inputs(p, q);
    const auto w = op_weights(params);
    OpGrad g;
    std::array<double, 16> vals;  // dy/dw_i = g_i(p, q)
    double mix = 0.0;
    for (int i = 0; i < 16; ++i) {
        vals[i] = surrogate_eval(i + 1, p, q);
        mix += w[i] * vals[i];
        const auto [dp, dq] = surrogate_grad(i + 1, p, q);
        g.d_p += w[i] * dp;
        g.d_q += w[i] * dq;
    }
    g.d_p *= upstream;
    g.d_q *= upstream;
    // Exact softmax Jacobian: dL/dlogit_i = u * w_i * (v_i - sum_j w_j v_j).
    for (int i = 0; i < 16; ++i) g.d_logits[i] = upstream * w[i] * (vals[i] - mix);
    return g;
}

std::array<double, 4> iwp_outputs(const IwpParams& params, Estimator est) {
    std::array<double, 4> w;
    for (int i = 0; i < 4; ++i) {
        if (!std::isfinite(params.logits[i]))
            throw NumericError("non-finite logit in iwp_outputs");
        w[i] = estimator_value(est, params.logits[i]);
    }
    return w;
}

double iwp_forward(const IwpParams& params, Estimator est, double p, double q) {
    check_unit_inputs(p, q);
    const auto w = iwp_outputs(params, est);
    return (1.0 - p) * (1.0 - q) * w[0] + (1.0 - p) * q * w[1] +
           p * (1.0 - q) * w[2] + p * q * w[3];
}

IwpGrad iwp_backward(const IwpParams& params, Estimator est, double p, double q,
                     double upstream) {
    check_unit_inputs(p, q);
    const auto w = iwp_outputs(params, est);
    IwpGrad g;
    g.d_p = upstream * ((1.0 - q) * (w[2] - w[0]) + q * (w[3] - w[1]));
    g.d_q = upstream * ((1.0 - p) * (w[1] - w[0]) + p * (w[3] - w[2]));
    const double basis[4] = {(1.0 - p) * (1.0 - q), (1.0 - p) * q,
                             p * (1.0 - q), p * q};
    for (int i = 0; i < 4; ++i)
        g.d_logits[i] = upstream * basis[i] * estimator_grad(est, params.logits[i]);
    return g;
}

GateId discretize_op(const OpParams& params) {
    const auto w = op_weights(params);
    int best = 0;
    for (int i = 1; i < 16; ++i)
        if (w[i] > w[best]) best = i;  // strict: ties keep the lowest id
    return best + 1;
}

GateId discretize_iwp(const IwpParams& params, Estimator est) {
    const auto w = iwp_outputs(params, est);
    int bits[4];
    for (int i = 0; i < 4; ++i) bits[i] = w[i] > 0.5 ? 1 : 0;  // 0.5 rounds to 0
    return gate_from_bits(bits[0], bits[1], bits[2], bits[3]);
}

namespace {

template <typename Dist>
GateId closest_gate(const std::array<double, 4>& outputs, Dist dist) {
    GateId best = 1;
    double best_d = dist(outputs, truth_table(1));
    for (GateId g = 2; g <= kGateCount; ++g) {
        const double d = dist(outputs, truth_table(g));
        if (d < best_d) {
            best_d = d;
            best = g;
        }
    }
    return best;
}

}  // namespace

GateId l1_closest_gate(const std::array<double, 4>& outputs) {
    return closest_gate(outputs, [](const auto& w, const auto& bits) {
        double d = 0.0;
        for (int c = 0; c < 4; ++c) d += std::abs(w[c] - bits[c]);
        return d;
    });
}

GateId l2_closest_gate(const std::array<double, 4>& outputs) {
    return closest_gate(outputs, [](const auto& w, const auto& bits) {
        double d = 0.0;
        for (int c = 0; c < 4; ++c) d += (w[c] - bits[c]) * (w[c] - bits[c]);
        return d;
    });
}

}  // namespace dlgn
