#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace abcd {

// One completed update: iteration k, updated block i_k, per-block delay
// vector, and event times. k is ordered by completion.
struct TraceRecord {
    std::int64_t k = 0;
    int block = 0;
    std::vector<int> j_vec;
    double t_read = 0.0;
    double t_complete = 0.0;
    int worker = -1;  // set for measured traces
};

struct EventTrace {
    int num_blocks = 0;
    std::vector<TraceRecord> records;

    std::int64_t horizon() const { return static_cast<std::int64_t>(records.size()); }

    int current_delay(std::int64_t k) const {
        int m = 0;
        for (int v : records[k].j_vec) m = std::max(m, v);
        return m;
    }

    void validate() const {
        for (std::int64_t k = 0; k < horizon(); ++k) {
            const auto& r = records[k];
            if (r.k != k) throw std::runtime_error("trace: k must increase from 0 without gaps");
            if (r.block < 0 || r.block >= num_blocks) throw std::runtime_error("trace: block out of range");
            if (static_cast<int>(r.j_vec.size()) != num_blocks)
                throw std::runtime_error("trace: j_vec length mismatch");
            for (int v : r.j_vec)
                if (v < 0 || v > k) throw std::runtime_error("trace: need 0 <= j(k,i) <= k");
            if (k > 0 && r.t_complete < records[k - 1].t_complete)
                throw std::runtime_error("trace: completion times must be nondecreasing");
        }
    }
};

inline void write_trace_csv(const EventTrace& tr, std::ostream& out, bool measured = false) {
    out << "k,i_k,j_max,j_vec,t_read,t_complete";
    if (measured) out << ",worker,t_wall_read,t_wall_write";
    out << "\n";
    out << std::setprecision(17);
    for (const auto& r : tr.records) {
        out << r.k << ',' << r.block << ',';
        int jmax = 0;
        for (int v : r.j_vec) jmax = std::max(jmax, v);
        out << jmax << ',';
        for (size_t i = 0; i < r.j_vec.size(); ++i) {
            if (i) out << ';';
            out << r.j_vec[i];
        }
        out << ',' << r.t_read << ',' << r.t_complete;
        if (measured) out << ',' << r.worker << ',' << r.t_read << ',' << r.t_complete;
        out << "\n";
    }
}

inline void write_trace_csv_file(const EventTrace& tr, const std::string& path, bool measured = false) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("trace: cannot open " + path);
    write_trace_csv(tr, f, measured);
}

inline EventTrace read_trace_csv(std::istream& in) {
    EventTrace tr;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("trace: missing header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        TraceRecord r;
        std::getline(ls, cell, ',');
        r.k = std::stoll(cell);
        std::getline(ls, cell, ',');
        r.block = std::stoi(cell);
        std::getline(ls, cell, ',');  // j_max, redundant
        std::getline(ls, cell, ',');
        {
            std::istringstream js(cell);
            std::string v;
            while (std::getline(js, v, ';')) r.j_vec.push_back(std::stoi(v));
        }
        std::getline(ls, cell, ',');
        r.t_read = std::stod(cell);
        std::getline(ls, cell, ',');
        r.t_complete = std::stod(cell);
        if (std::getline(ls, cell, ',')) r.worker = std::stoi(cell);
        tr.num_blocks = static_cast<int>(r.j_vec.size());
        tr.records.push_back(std::move(r));
    }
    tr.validate();
    return tr;
}

inline EventTrace read_trace_csv_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("trace: cannot open " + path);
    return read_trace_csv(f);
}

}  // namespace abcd
