#pragma once

#include <cstdint>
#include <string>

#include "dlgn/network.hpp"
#include "dlgn/train.hpp"

namespace dlgn {

// Aggregated run configuration. encoder.input_dim and class_count are derived
// from the dataset at run time and are not config keys.
struct RunConfig {
    std::string dataset = "parity:4";
    NetworkConfig net;
    TrainConfig train;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
};

// key=value lines; '#' comments and blank lines allowed; unknown or duplicate
// keys rejected. Returns the config with init defaults resolved.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Effective (fully defaulted) config as sorted key=value text. Reparsing the
// echo reproduces the same effective config.
std::string echo_config(const RunConfig& cfg);

}  // namespace dlgn
