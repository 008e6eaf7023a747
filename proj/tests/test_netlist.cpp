#include <string>
#include <vector>

#include "doctest.h"
#include "dlgn/circuit.hpp"
#include "dlgn/errors.hpp"

using namespace dlgn;

namespace {

DiscreteCircuit sample_circuit() {
    DiscreteCircuit c;
    c.input_width = 3;
    c.class_count = 2;
    c.nodes.push_back({2, input_ref(0), input_ref(1)});  // AND
    c.nodes.push_back({7, input_ref(2), 0});             // XOR(in2, n0)
    c.nodes.push_back({15, 0, 1});                       // NAND(n0, n1)
    c.nodes.push_back({4, 2, 2});                        // pass(n2)
    c.bins = {{0, 1}, {2, 3}};
    c.validate();
    return c;
}

}  // namespace

TEST_SUITE_BEGIN("netlist");

TEST_CASE("export emits the documented format") {
    const auto text = export_netlist(sample_circuit());
    CHECK(text.rfind("dlgn-netlist v1 inputs=3 classes=2\n", 0) == 0);
    CHECK(text.find("in 0\n") != std::string::npos);
    CHECK(text.find("node 0 AND in:0 in:1\n") != std::string::npos);
    CHECK(text.find("node 1 XOR in:2 n:0\n") != std::string::npos);
    CHECK(text.find("node 2 NAND n:0 n:1\n") != std::string::npos);
    CHECK(text.find("bin 0 n:0 n:1\n") != std::string::npos);
    CHECK(text.find("bin 1 n:2 n:3\n") != std::string::npos);
}

TEST_CASE("round-trip is the identity") {
    const auto c = sample_circuit();
    const auto text = export_netlist(c);
    const auto back = import_netlist(text);
    back.validate();
    CHECK(back.input_width == c.input_width);
    CHECK(back.class_count == c.class_count);
    REQUIRE(back.nodes.size() == c.nodes.size());
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        CHECK(back.nodes[i].gate == c.nodes[i].gate);
        CHECK(back.nodes[i].a == c.nodes[i].a);
        CHECK(back.nodes[i].b == c.nodes[i].b);
    }
    CHECK(back.bins == c.bins);
    CHECK(export_netlist(back) == text);  // byte-deterministic
}

TEST_CASE("single-node circuit exports header, input, node and bin lines") {
    DiscreteCircuit c;
    c.input_width = 1;
    c.class_count = 1;
    c.nodes.push_back({4, input_ref(0), input_ref(0)});
    c.bins = {{0}};
    const auto text = export_netlist(c);
    int lines = 0;
    for (char ch : text) lines += ch == '\n';
    CHECK(lines == 4);
}

TEST_CASE("import rejects malformed inputs with line information") {
    const std::string good = export_netlist(sample_circuit());

    auto expect_fail = [](const std::string& text, const char* what) {
        CAPTURE(what);
        CHECK_THROWS_AS((void)import_netlist(text), ConfigError);
    };

    expect_fail("bogus v1 inputs=1 classes=1\n", "bad header");
    expect_fail("dlgn-netlist v2 inputs=1 classes=1\n", "bad version");

    // unknown mnemonic
    std::string bad = good;
    const auto pos = bad.find("NAND");
    bad.replace(pos, 4, "NOPE");
    expect_fail(bad, "unknown mnemonic");

    // forward reference
    expect_fail(
        "dlgn-netlist v1 inputs=1 classes=1\n"
        "in 0\n"
        "node 0 AND n:1 in:0\n"
        "node 1 AND in:0 in:0\n"
        "bin 0 n:0\n",
        "forward ref");

    // bins must reference nodes, not inputs
    expect_fail(
        "dlgn-netlist v1 inputs=1 classes=1\n"
        "in 0\n"
        "node 0 A in:0 in:0\n"
        "bin 0 in:0\n",
        "bin on input");

    // non-sequential node ids
    expect_fail(
        "dlgn-netlist v1 inputs=1 classes=1\n"
        "in 0\n"
        "node 1 A in:0 in:0\n"
        "bin 0 n:1\n",
        "non-sequential id");

    // out-of-range input ref
    expect_fail(
        "dlgn-netlist v1 inputs=1 classes=1\n"
        "in 0\n"
        "node 0 A in:3 in:0\n"
        "bin 0 n:0\n",
        "input out of range");

    try {
        import_netlist(
            "dlgn-netlist v1 inputs=1 classes=1\n"
            "in 0\n"
            "node 0 NOPE in:0 in:0\n"
            "bin 0 n:0\n");
        FAIL("expected a parse error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("imported circuits evaluate like the original") {
    const auto c = sample_circuit();
    const auto back = import_netlist(export_netlist(c));
    for (unsigned v = 0; v < 8; ++v) {
        std::vector<std::uint8_t> row = {std::uint8_t(v & 1), std::uint8_t((v >> 1) & 1),
                                         std::uint8_t((v >> 2) & 1)};
        CHECK(eval_circuit(c, row).scores == eval_circuit(back, row).scores);
    }
}

TEST_SUITE_END();
