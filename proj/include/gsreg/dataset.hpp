#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gsreg/core_linalg.hpp"
#include "gsreg/errors.hpp"

namespace gsreg {

// A rectangular, fully-numeric table: one response column plus predictor
// columns, in file row order.
struct Dataset {
    std::vector<std::string> predictor_names;
    std::string response_name;
    MatrixX<double> predictors; // n x p
    VectorX<double> response;   // n
    std::string provenance;

    Index n() const { return predictors.rows(); }
    Index p() const { return predictors.cols(); }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    cells.push_back(cur);
    return cells;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_cell(const std::string& raw, Index row, Index col,
                         const std::string& col_name) {
    const std::string cell = trim(raw);
    const std::string where = "row " + std::to_string(row + 1) + ", column " +
                              std::to_string(col + 1) + " (" + col_name + ")";
    if (cell.empty()) throw MissingValue("empty cell at " + where);
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw NonNumericCell("cannot parse '" + cell + "' at " + where);
    return value;
}

} // namespace detail

// Read a header-first CSV (UTF-8, '.' decimal point, no quoting) and pull out
// the named response and predictors. Any missing or non-numeric cell is a
// hard error carrying 1-based coordinates.
inline Dataset ingest_csv(const std::string& path, const std::string& response,
                          std::vector<std::string> predictors = {}) {
    std::ifstream in(path);
    if (!in) throw MissingValue("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw EmptyData("file has no header row: " + path);
    std::vector<std::string> header = detail::split_csv_line(line);
    for (auto& h : header) h = detail::trim(h);

    auto col_index = [&](const std::string& name) -> Index {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw MissingColumn("column '" + name + "' not found in " + path);
        return static_cast<Index>(it - header.begin());
    };

    const Index resp_col = col_index(response);
    if (predictors.empty())
        for (const auto& h : header)
            if (h != response) predictors.push_back(h);
    std::vector<Index> pred_cols;
    pred_cols.reserve(predictors.size());
    for (const auto& name : predictors) pred_cols.push_back(col_index(name));

    std::vector<std::vector<double>> rows;
    Index file_row = 0;
    while (std::getline(in, line)) {
        ++file_row;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        std::vector<double> parsed(header.size());
        for (Index c = 0; c < static_cast<Index>(header.size()); ++c) {
            if (c >= static_cast<Index>(cells.size()))
                throw MissingValue("row " + std::to_string(file_row + 1) + " has only " +
                                   std::to_string(cells.size()) + " of " +
                                   std::to_string(header.size()) + " cells");
            parsed[static_cast<size_t>(c)] = detail::parse_cell(
                cells[static_cast<size_t>(c)], file_row, c, header[static_cast<size_t>(c)]);
        }
        rows.push_back(std::move(parsed));
    }
    if (rows.empty()) throw EmptyData("no data rows in " + path);

    Dataset ds;
    ds.response_name = response;
    ds.predictor_names = std::move(predictors);
    ds.provenance = path;
    const Index n = static_cast<Index>(rows.size());
    const Index p = static_cast<Index>(pred_cols.size());
    ds.predictors.resize(n, p);
    ds.response.resize(n);
    for (Index i = 0; i < n; ++i) {
        ds.response[i] = rows[static_cast<size_t>(i)][static_cast<size_t>(resp_col)];
        for (Index j = 0; j < p; ++j)
            ds.predictors(i, j) =
                rows[static_cast<size_t>(i)][static_cast<size_t>(pred_cols[static_cast<size_t>(j)])];
    }
    return ds;
}

// Emit the dataset back out as CSV at full round-trip precision.
inline std::string emit_csv(const Dataset& ds) {
    std::ostringstream out;
    out.precision(15);
    for (size_t j = 0; j < ds.predictor_names.size(); ++j)
        out << ds.predictor_names[j] << ',';
    out << ds.response_name << '\n';
    for (Index i = 0; i < ds.n(); ++i) {
        for (Index j = 0; j < ds.p(); ++j) out << ds.predictors(i, j) << ',';
        out << ds.response[i] << '\n';
    }
    return out.str();
}

inline DesignMatrix dataset_design(const Dataset& ds) {
    return make_design(ds.predictors, ds.predictor_names);
}

// FNV-1a 64-bit digest, used to pin the bundled fixture's bytes.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace gsreg
