#pragma once

#include <string>
#include <vector>

#include "dlgn/network.hpp"

namespace dlgn {

struct LabeledData {
    Batch features;  // rows x feature_dim, values in [0,1]
    std::vector<int> labels;
    int feature_dim = 0;
    int class_count = 0;
};

struct DatasetPair {
    LabeledData train;
    LabeledData test;
};

// Spec forms:
//   parity:<n>                      all 2^n bit rows, label = parity, n <= 20
//   idx:<images_path>,<labels_path> big-endian IDX files, pixels scaled to [0,1]
//   csv:<path>                      header row, feature columns in [0,1], last column label
// The test split is deterministic: every fifth row (index % 5 == 4).
DatasetPair ingest_dataset(const std::string& spec);

}  // namespace dlgn
