#include <cmath>
#include <set>

#include "doctest.h"
#include "dlgn/errors.hpp"
#include "dlgn/init.hpp"

using namespace dlgn;

TEST_SUITE_BEGIN("init");

TEST_CASE("residual OP puts logit z on the pass-through gate") {
    InitScheme s;
    s.kind = InitScheme::Kind::Residual;
    const auto r = s.resolved(Estimator::Sin01);
    Rng rng(1);
    const auto p = init_op_neuron(r, rng);
    for (int i = 0; i < 16; ++i) CHECK(p.logits[i] == (i == 3 ? 5.0 : 0.0));
}

TEST_CASE("gaussian OP: sigma=0 gives uniform weights; sigma=1 has the right moments") {
    InitScheme zero;
    zero.kind = InitScheme::Kind::Gaussian;
    zero.sigma = 0.0;
    Rng rng(2);
    const auto p0 = init_op_neuron(zero.resolved(Estimator::Sin01), rng);
    for (double l : p0.logits) CHECK(l == 0.0);

    InitScheme unit;
    unit.kind = InitScheme::Kind::Gaussian;
    unit.sigma = 1.0;
    const auto r = unit.resolved(Estimator::Sin01);
    double sum = 0, sq = 0;
    const int n = 100000;
    Rng rng2(3);
    for (int i = 0; i < n / 16; ++i) {
        const auto p = init_op_neuron(r, rng2);
        for (double l : p.logits) {
            sum += l;
            sq += l * l;
        }
    }
    const int m = (n / 16) * 16;
    const double mean = sum / m;
    const double sd = std::sqrt(sq / m - mean * mean);
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(sd - 1.0) < 0.02);
}

TEST_CASE("residual IWP corners at explicit mu, sigma=0") {
    InitScheme s;
    s.kind = InitScheme::Kind::Residual;
    s.mu = 1.2;
    s.sigma = 0.0;
    Rng rng(4);
    const auto p = init_iwp_neuron(s.resolved(Estimator::Sin01), Estimator::Sin01, rng);
    const auto w = iwp_outputs(p, Estimator::Sin01);
    // pass-through bits (0,0,1,1): low, low, high, high
    CHECK(w[0] == doctest::Approx(0.034).epsilon(0.002));
    CHECK(w[1] == doctest::Approx(0.034).epsilon(0.002));
    CHECK(w[2] == doctest::Approx(0.966).epsilon(0.002));
    CHECK(w[3] == doctest::Approx(0.966).epsilon(0.002));

    InitScheme g;
    g.kind = InitScheme::Kind::Residual;
    g.mu = 3.0;
    g.sigma = 0.0;
    const auto ps = init_iwp_neuron(g.resolved(Estimator::Sigmoid), Estimator::Sigmoid, rng);
    const auto ws = iwp_outputs(ps, Estimator::Sigmoid);
    CHECK(ws[0] == doctest::Approx(0.047).epsilon(0.002));
    CHECK(ws[3] == doctest::Approx(0.953).epsilon(0.002));
}

TEST_CASE("sigma=0 residual IWP discretizes to pass-through for every neuron") {
    for (auto est : {Estimator::Sigmoid, Estimator::Sin01, Estimator::CappedLinearST}) {
        InitScheme s;
        s.kind = InitScheme::Kind::Residual;
        s.sigma = 0.0;
        const auto r = s.resolved(est);
        Rng rng(5);
        for (int i = 0; i < 100; ++i)
            CHECK(discretize_iwp(init_iwp_neuron(r, est, rng), est) == 4);
    }
}

TEST_CASE("gaussian IWP covers all 16 gates after discretization") {
    InitScheme s;
    s.kind = InitScheme::Kind::Gaussian;
    s.sigma = 1.0;
    const auto r = s.resolved(Estimator::Sin01);
    Rng rng(6);
    std::set<GateId> seen;
    for (int i = 0; i < 100000 && seen.size() < 16; ++i)
        seen.insert(discretize_iwp(init_iwp_neuron(r, Estimator::Sin01, rng), Estimator::Sin01));
    CHECK(seen.size() == 16);
}

TEST_CASE("default heavy-tail inits concentrate corners outside (0.2, 0.8)") {
    struct Case {
        InitScheme::Kind kind;
        Estimator est;
        std::vector<GateId> gates;
    };
    const Case cases[] = {
        {InitScheme::Kind::Residual, Estimator::Sin01, {}},
        {InitScheme::Kind::Residual, Estimator::Sigmoid, {}},
        {InitScheme::Kind::HeavyTailSet, Estimator::Sin01, {2, 8}},
        {InitScheme::Kind::HeavyTailSet, Estimator::Sigmoid, {2, 8}},
    };
    for (const auto& c : cases) {
        InitScheme s;
        s.kind = c.kind;
        s.target_gates = c.gates;
        const auto r = s.resolved(c.est);
        Rng rng(7);
        int outside = 0, total = 0;
        for (int i = 0; i < 5000; ++i) {
            const auto w = iwp_outputs(init_iwp_neuron(r, c.est, rng), c.est);
            for (double v : w) {
                total++;
                if (v <= 0.2 || v >= 0.8) outside++;
            }
        }
        CHECK(outside >= (total * 95) / 100);
    }
}

TEST_CASE("negation asymmetry flag") {
    InitScheme and_or;
    and_or.kind = InitScheme::Kind::HeavyTailSet;
    and_or.target_gates = {2, 8};
    CHECK(and_or.negation_asymmetric());

    InitScheme mirrored;
    mirrored.kind = InitScheme::Kind::HeavyTailSet;
    mirrored.target_gates = {2, 15};  // 15 = negation of 2
    CHECK(!mirrored.negation_asymmetric());

    InitScheme uniform;
    uniform.kind = InitScheme::Kind::Uniform16;
    CHECK(!uniform.negation_asymmetric());
}

TEST_CASE("uniform16 draws every gate as a target") {
    InitScheme s;
    s.kind = InitScheme::Kind::Uniform16;
    s.sigma = 0.0;
    const auto r = s.resolved(Estimator::Sin01);
    Rng rng(8);
    std::set<GateId> seen;
    for (int i = 0; i < 2000; ++i)
        seen.insert(discretize_iwp(init_iwp_neuron(r, Estimator::Sin01, rng), Estimator::Sin01));
    CHECK(seen.size() == 16);
}

TEST_CASE("determinism and validation") {
    InitScheme s;
    s.kind = InitScheme::Kind::HeavyTailSet;
    s.target_gates = {7};
    const auto r = s.resolved(Estimator::Sin01);
    Rng a(9), b(9);
    for (int i = 0; i < 20; ++i) {
        const auto pa = init_op_neuron(r, a);
        const auto pb = init_op_neuron(r, b);
        CHECK(pa.logits == pb.logits);
    }

    InitScheme empty;
    empty.kind = InitScheme::Kind::HeavyTailSet;
    CHECK_THROWS_AS((void)empty.resolved(Estimator::Sin01), ConfigError);

    InitScheme neg;
    neg.kind = InitScheme::Kind::Gaussian;
    neg.sigma = 1.0;
    neg.z = 5.0;
    neg.jitter_sigma = -2.0;
    CHECK_THROWS_AS((void)neg.resolved(Estimator::Sin01), ConfigError);
}

TEST_CASE("kind names round-trip") {
    using K = InitScheme::Kind;
    for (auto k : {K::Gaussian, K::Residual, K::HeavyTailSet, K::Uniform16})
        CHECK(init_kind_from_name(init_kind_name(k)) == k);
    CHECK_THROWS_AS((void)init_kind_from_name("zeros"), ConfigError);
}

TEST_SUITE_END();
