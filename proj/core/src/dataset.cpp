#include "dlgn/dataset.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "dlgn/errors.hpp"

namespace dlgn {

namespace {

struct FullSet {
    Batch features;
    std::vector<int> labels;
    int feature_dim = 0;
    int class_count = 0;
};

DatasetPair split_80_20(const FullSet& full) {
    DatasetPair out;
    out.train.feature_dim = out.test.feature_dim = full.feature_dim;
    out.train.class_count = out.test.class_count = full.class_count;
    int n_test = 0;
    for (int r = 0; r < full.features.rows; ++r) n_test += r % 5 == 4;
    out.train.features = Batch(full.features.rows - n_test, full.feature_dim);
    out.test.features = Batch(n_test, full.feature_dim);
    int ti = 0, si = 0;
    for (int r = 0; r < full.features.rows; ++r) {
        const bool is_test = r % 5 == 4;
        Batch& dst = is_test ? out.test.features : out.train.features;
        int& idx = is_test ? si : ti;
        std::copy_n(full.features.row(r), full.feature_dim, dst.row(idx));
        (is_test ? out.test.labels : out.train.labels).push_back(full.labels[r]);
        ++idx;
    }
    return out;
}

FullSet make_parity(const std::string& arg) {
    int n = 0;
    try {
        size_t pos = 0;
        n = std::stoi(arg, &pos);
        if (pos != arg.size()) throw std::invalid_argument("");
    } catch (...) {
        throw ConfigError("parity: malformed bit count '" + arg + "'");
    }
    if (n < 1 || n > 20)
        throw ConfigError("parity: bit count must be in [1, 20], got " + std::to_string(n));
    FullSet full;
    full.feature_dim = n;
    full.class_count = 2;
    const int rows = 1 << n;
    full.features = Batch(rows, n);
    full.labels.resize(rows);
    for (int r = 0; r < rows; ++r) {
        for (int j = 0; j < n; ++j) full.features.row(r)[j] = (r >> j) & 1;
        full.labels[r] = std::popcount(static_cast<unsigned>(r)) & 1;
    }
    return full;
}

std::uint32_t read_be_u32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw ConfigError("idx: truncated header in " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

FullSet make_idx(const std::string& arg) {
    const size_t comma = arg.find(',');
    if (comma == std::string::npos)
        throw ConfigError("idx: expected idx:<images_path>,<labels_path>");
    const std::string img_path = arg.substr(0, comma);
    const std::string lbl_path = arg.substr(comma + 1);

    std::ifstream img(img_path, std::ios::binary);
    if (!img) throw ConfigError("idx: cannot open " + img_path);
    if (read_be_u32(img, img_path) != 0x803)
        throw ConfigError("idx: bad image magic in " + img_path + " (expected 0x00000803)");
    const std::uint32_t n = read_be_u32(img, img_path);
    const std::uint32_t h = read_be_u32(img, img_path);
    const std::uint32_t w = read_be_u32(img, img_path);

    std::ifstream lbl(lbl_path, std::ios::binary);
    if (!lbl) throw ConfigError("idx: cannot open " + lbl_path);
    if (read_be_u32(lbl, lbl_path) != 0x801)
        throw ConfigError("idx: bad label magic in " + lbl_path + " (expected 0x00000801)");
    const std::uint32_t n_lbl = read_be_u32(lbl, lbl_path);
    if (n != n_lbl)
        throw ConfigError("idx: image count " + std::to_string(n) +
                          " does not match label count " + std::to_string(n_lbl));

    FullSet full;
    full.feature_dim = static_cast<int>(h * w);
    full.features = Batch(static_cast<int>(n), full.feature_dim);
    full.labels.resize(n);
    std::vector<unsigned char> px(full.feature_dim);
    for (std::uint32_t r = 0; r < n; ++r) {
        if (!img.read(reinterpret_cast<char*>(px.data()), px.size()))
            throw ConfigError("idx: truncated pixel data in " + img_path);
        double* row = full.features.row(static_cast<int>(r));
        for (size_t i = 0; i < px.size(); ++i) row[i] = px[i] / 255.0;
        unsigned char l;
        if (!lbl.read(reinterpret_cast<char*>(&l), 1))
            throw ConfigError("idx: truncated label data in " + lbl_path);
        full.labels[r] = l;
    }
    int max_label = 0;
    for (int l : full.labels) max_label = std::max(max_label, l);
    full.class_count = max_label + 1;
    return full;
}

FullSet make_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("csv: cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("csv: missing header row in " + path);

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    int cols = -1;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (cols < 0) {
            cols = static_cast<int>(cells.size());
            if (cols < 2) throw ConfigError("csv row " + std::to_string(line_no) +
                                            ": need at least one feature and a label");
        } else if (static_cast<int>(cells.size()) != cols) {
            throw ConfigError("csv row " + std::to_string(line_no) +
                              ": expected " + std::to_string(cols) + " columns");
        }
        std::vector<double> feats(cols - 1);
        for (int c = 0; c < cols - 1; ++c) {
            try {
                size_t pos = 0;
                feats[c] = std::stod(cells[c], &pos);
                if (pos != cells[c].size()) throw std::invalid_argument("");
            } catch (...) {
                throw ConfigError("csv row " + std::to_string(line_no) +
                                  ": non-numeric feature '" + cells[c] + "'");
            }
            if (!(feats[c] >= 0.0 && feats[c] <= 1.0))
                throw ConfigError("csv row " + std::to_string(line_no) +
                                  ": feature outside [0,1]: " + cells[c]);
        }
        int label = 0;
        try {
            size_t pos = 0;
            label = std::stoi(cells[cols - 1], &pos);
            if (pos != cells[cols - 1].size()) throw std::invalid_argument("");
        } catch (...) {
            throw ConfigError("csv row " + std::to_string(line_no) +
                              ": non-integer label '" + cells[cols - 1] + "'");
        }
        if (label < 0)
            throw ConfigError("csv row " + std::to_string(line_no) + ": negative label");
        rows.push_back(std::move(feats));
        labels.push_back(label);
    }
    if (rows.empty()) throw ConfigError("csv: no data rows in " + path);

    FullSet full;
    full.feature_dim = cols - 1;
    full.features = Batch(static_cast<int>(rows.size()), full.feature_dim);
    for (size_t r = 0; r < rows.size(); ++r)
        std::copy_n(rows[r].data(), full.feature_dim, full.features.row(static_cast<int>(r)));
    full.labels = std::move(labels);
    int max_label = 0;
    for (int l : full.labels) max_label = std::max(max_label, l);
    full.class_count = max_label + 1;
    return full;
}

}  // namespace

DatasetPair ingest_dataset(const std::string& spec) {
    const size_t colon = spec.find(':');
    if (colon == std::string::npos)
        throw ConfigError("dataset spec must be parity:<n>, idx:<img>,<lbl>, or csv:<path>");
    const std::string kind = spec.substr(0, colon);
    const std::string arg = spec.substr(colon + 1);
    FullSet full;
    if (kind == "parity")
        full = make_parity(arg);
    else if (kind == "idx")
        full = make_idx(arg);
    else if (kind == "csv")
        full = make_csv(arg);
    else
        throw ConfigError("unknown dataset kind '" + kind + "'");
    return split_80_20(full);
}

}  // namespace dlgn
