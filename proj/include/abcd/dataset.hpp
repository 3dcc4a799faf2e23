#pragma once

#include <Eigen/Core>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace abcd {

struct SparseDataset {
    // Dense at desk scale; one row per sample.
    Eigen::MatrixXd features;
    Eigen::VectorXd labels;  // -1 / +1
};

// Plain-text sparse format, one sample per line:
//   label idx:val idx:val ...
// with label in {-1,+1} and 0-based indices. Set one_based for
// LIBSVM-style 1-based indices.
inline SparseDataset load_sparse_dataset(std::istream& in, bool one_based = false) {
    struct Row {
        double label;
        std::vector<std::pair<int, double>> entries;
    };
    std::vector<Row> rows;
    int max_idx = -1;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Row row;
        if (!(ls >> row.label))
            throw std::runtime_error("dataset: bad label at line " + std::to_string(lineno));
        if (row.label != 1.0 && row.label != -1.0)
            throw std::runtime_error("dataset: label must be -1 or +1 at line " + std::to_string(lineno));
        std::string tok;
        while (ls >> tok) {
            auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error("dataset: expected idx:val at line " + std::to_string(lineno));
            int idx = std::stoi(tok.substr(0, colon));
            double val = std::stod(tok.substr(colon + 1));
            if (one_based) --idx;
            if (idx < 0)
                throw std::runtime_error("dataset: negative index at line " + std::to_string(lineno));
            row.entries.emplace_back(idx, val);
            max_idx = std::max(max_idx, idx);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("dataset: empty");
    SparseDataset ds;
    ds.features = Eigen::MatrixXd::Zero(static_cast<int>(rows.size()), max_idx + 1);
    ds.labels.resize(static_cast<int>(rows.size()));
    for (int m = 0; m < static_cast<int>(rows.size()); ++m) {
        ds.labels[m] = rows[m].label;
        for (auto [idx, val] : rows[m].entries) ds.features(m, idx) = val;
    }
    return ds;
}

inline SparseDataset load_sparse_dataset_file(const std::string& path, bool one_based = false) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("dataset: cannot open " + path);
    return load_sparse_dataset(f, one_based);
}

}  // namespace abcd
