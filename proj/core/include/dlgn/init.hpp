#pragma once

#include <vector>

#include "dlgn/estimator.hpp"
#include "dlgn/neuron.hpp"
#include "dlgn/rng.hpp"

namespace dlgn {

// Initialization schemes.
//   gaussian:       OP logits ~ N(0, sigma^2); IWP logits ~ N(0, sigma^2)
//                   (the "inappropriate" baseline for IWP).
//   residual:       bias every neuron toward pass-through A (gate 4).
//                   OP: logit z at gate 4, 0 elsewhere. IWP: corner logits
//                   drawn N(+mu, sigma^2) where gate 4's truth bit is 1,
//                   N(-mu, sigma^2) where it is 0.
//   heavy_tail_set: per neuron, draw a target gate uniformly from
//                   target_gates, then bias toward it (OP: logit z at the
//                   target plus optional N(0, jitter_sigma^2) on all logits;
//                   IWP: the same +/-mu shifted draw keyed by the target's
//                   truth bits).
//   uniform16:      heavy_tail_set over all 16 gates.
struct InitScheme {
    enum class Kind { Gaussian, Residual, HeavyTailSet, Uniform16 };

    Kind kind = Kind::Residual;
    double sigma = -1.0;         // gaussian sd / IWP spread; <0 = use default
    double mu = -1.0;            // IWP shift magnitude; <0 = use default
    double z = 5.0;              // OP bias logit (residual / heavy-tail)
    double jitter_sigma = 0.0;   // OP heavy-tail jitter on all logits
    std::vector<GateId> target_gates;  // heavy_tail_set only; must be non-empty

    // True iff the effective target set contains no pair (i, 17-i).
    bool negation_asymmetric() const;

    // Fill unset (negative) mu/sigma with the per-kind, per-estimator
    // defaults; validates ranges. Returns the resolved copy.
    InitScheme resolved(Estimator est) const;  // throws ConfigError
};

OpParams init_op_neuron(const InitScheme& resolved, Rng& rng);
IwpParams init_iwp_neuron(const InitScheme& resolved, Estimator est, Rng& rng);

std::string_view init_kind_name(InitScheme::Kind kind);
InitScheme::Kind init_kind_from_name(std::string_view name);  // throws ConfigError

}  // namespace dlgn
