#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "dlgn/config.hpp"

namespace dlgn {

// Command-line overrides applied on top of the config file.
struct GlobalOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> threads;
};

RunConfig load_run_config(const std::string& config_path, const GlobalOverrides& ov);

// Writes effective_config.txt, metrics.csv (documented header), and
// checkpoint.ckpt (refreshed at every eval point) into the output directory.
// --resume continues a run from its checkpoint (mutually exclusive with
// --config; only out/threads/steps may change).
struct TrainArgs {
    std::string config_path;  // "" = all defaults
    GlobalOverrides overrides;
    std::string resume_path;  // "" = fresh run
    std::optional<int> steps;  // resume only: extend the step budget
};
void cmd_train(const TrainArgs& args, std::ostream& out);

// Accuracy report for a checkpoint or a netlist on a dataset split.
struct EvalArgs {
    std::string checkpoint_path;  // exactly one of checkpoint/netlist
    std::string netlist_path;
    std::string dataset;  // empty = config's dataset
    std::string split = "test";  // train | test | all
    bool packed = false;
    int threads = 1;
};
void cmd_eval(const EvalArgs& args, std::ostream& out);

// Hardens (and optionally simplifies) a checkpoint; writes the netlist and a
// report with node counts before/after and a per-gate histogram.
struct DiscretizeArgs {
    std::string checkpoint_path;
    std::string netlist_out;  // empty = <out>/circuit.netlist
    std::string report_out;   // empty = report to `out` stream
    bool simplify = false;
    std::string out_dir = "out";
};
void cmd_discretize(const DiscretizeArgs& args, std::ostream& out);

// which: gradnorms | histograms | gap | concentration. Writes <which>.csv.
struct DiagnoseArgs {
    std::string which;
    std::string checkpoint_path;  // required for gap; optional for gradnorms/histograms
    std::string config_path;      // used when no checkpoint is given
    GlobalOverrides overrides;
    std::string dataset;  // gap only; empty = config's dataset
    std::string out_dir = "out";
    int batch = 100;
};
void cmd_diagnose(const DiagnoseArgs& args, std::ostream& out);

}  // namespace dlgn
