#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dlgn/commands.hpp"
#include "dlgn/errors.hpp"

namespace {

struct GlobalFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> threads;

    dlgn::GlobalOverrides overrides() const { return {seed, out_dir, threads}; }
};

void add_global_flags(CLI::App& app, GlobalFlags& g) {
    app.add_option("--config", g.config_path, "Run configuration file (key=value)");
    app.add_option("--seed", [&g](const CLI::results_t& r) {
        g.seed = std::stoull(r[0]);
        return true;
    }, "Root seed (overrides the config)");
    app.add_option("--out", [&g](const CLI::results_t& r) {
        g.out_dir = r[0];
        return true;
    }, "Output directory (overrides the config)");
    app.add_option("--threads", [&g](const CLI::results_t& r) {
        g.threads = std::stoi(r[0]);
        return true;
    }, "Worker threads (overrides the config)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dlgn: train, harden, and evaluate differentiable logic gate networks"};
    app.require_subcommand(1);
    GlobalFlags g;
    add_global_flags(app, g);

    // train
    auto* train = app.add_subcommand("train", "Train a network and write metrics + checkpoints");
    train->fallthrough();
    std::string resume_path;
    int steps_flag = -1;
    train->add_option("--resume", resume_path, "Continue from a checkpoint");
    train->add_option("--steps", steps_flag, "Step budget (with --resume: extended target)");

    // eval
    auto* eval = app.add_subcommand("eval", "Accuracy report for a checkpoint or netlist");
    eval->fallthrough();
    dlgn::EvalArgs eval_args;
    eval->add_option("--checkpoint", eval_args.checkpoint_path, "Checkpoint to evaluate");
    eval->add_option("--netlist", eval_args.netlist_path, "Netlist to evaluate");
    eval->add_option("--data", eval_args.dataset, "Dataset spec (default: config's dataset)");
    eval->add_option("--split", eval_args.split, "train | test | all (default test)");
    eval->add_flag("--packed", eval_args.packed, "Bit-packed evaluation with throughput");

    // discretize
    auto* disc = app.add_subcommand("discretize", "Harden a checkpoint into a circuit");
    disc->fallthrough();
    dlgn::DiscretizeArgs disc_args;
    disc->add_option("--checkpoint", disc_args.checkpoint_path, "Checkpoint to harden")
        ->required();
    disc->add_flag("--simplify", disc_args.simplify, "Run logic simplification");

    // export
    auto* exp = app.add_subcommand("export", "Export a hardened circuit as a netlist file");
    exp->fallthrough();
    dlgn::DiscretizeArgs exp_args;
    exp->add_option("--checkpoint", exp_args.checkpoint_path, "Checkpoint to harden")
        ->required();
    exp->add_option("--netlist-out", exp_args.netlist_out, "Netlist output path")->required();
    exp->add_flag("--simplify", exp_args.simplify, "Run logic simplification");

    // diagnose
    auto* diag = app.add_subcommand("diagnose", "Write diagnostic CSVs");
    diag->fallthrough();
    dlgn::DiagnoseArgs diag_args;
    diag->add_option("--which", diag_args.which,
                     "gradnorms | histograms | gap | concentration")
        ->required();
    diag->add_option("--checkpoint", diag_args.checkpoint_path,
                     "Checkpoint (required for gap)");
    diag->add_option("--data", diag_args.dataset, "Dataset spec for gap");
    diag->add_option("--batch", diag_args.batch, "Probe batch size (default 100)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*train) {
            dlgn::TrainArgs args;
            args.config_path = g.config_path;
            args.overrides = g.overrides();
            args.resume_path = resume_path;
            if (steps_flag >= 0) args.steps = steps_flag;
            dlgn::cmd_train(args, std::cout);
        } else if (*eval) {
            eval_args.threads = g.threads.value_or(1);
            dlgn::cmd_eval(eval_args, std::cout);
        } else if (*disc) {
            disc_args.out_dir = g.out_dir.value_or("out");
            disc_args.report_out = disc_args.out_dir + "/discretize_report.txt";
            dlgn::cmd_discretize(disc_args, std::cout);
        } else if (*exp) {
            dlgn::cmd_discretize(exp_args, std::cout);
        } else if (*diag) {
            diag_args.config_path = g.config_path;
            diag_args.overrides = g.overrides();
            diag_args.out_dir = g.out_dir.value_or("out");
            dlgn::cmd_diagnose(diag_args, std::cout);
        }
    } catch (const dlgn::NumericError& e) {
        std::cerr << "numeric abort: " << e.what() << "\n";
        return 2;
    } catch (const dlgn::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
