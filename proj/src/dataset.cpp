// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "safenet/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>

namespace safenet {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_number(std::string_view cell) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) return std::nullopt;
    return v;
}

[[noreturn]] void cell_error(std::size_t row, std::string_view column, std::string_view cell) {
    std::ostringstream msg;
    msg << "row " << row << ", column '" << column << "': cannot parse '" << cell
        << "' as a number";
    throw DataError(msg.str());
}

struct Header {
    std::vector<std::size_t> feature_cols;  // position of q1..qD
    std::size_t accidents = 0;
    std::size_t company = 0;
    std::optional<std::size_t> label;
    std::vector<std::string> names;
};

Header parse_header(std::string_view line, std::optional<int> feature_dim) {
    Header h;
    std::map<std::string, std::size_t, std::less<>> by_name;
    for (auto f : split_fields(line)) {
        if (by_name.contains(f)) throw DataError("duplicate header column '" + std::string(f) + "'");
        by_name.emplace(std::string(f), h.names.size());
        h.names.emplace_back(f);
    }
    int found = 0;
    while (by_name.contains("q" + std::to_string(found + 1))) ++found;
    int questions = 0;
    for (const auto& n : h.names)
        if (n.size() > 1 && n[0] == 'q' &&
            std::all_of(n.begin() + 1, n.end(), [](char c) { return c >= '0' && c <= '9'; }))
            ++questions;
    if (questions != found)
        throw DataError("header feature columns are not contiguous q1..q" + std::to_string(found));
    if (feature_dim && found != *feature_dim)
        throw DataError("header names " + std::to_string(found) + " feature columns, expected " +
                        std::to_string(*feature_dim));
    if (found < 1) throw DataError("header names no feature columns");
    for (int j = 1; j <= found; ++j) h.feature_cols.push_back(by_name.at("q" + std::to_string(j)));
    auto need = [&](const char* name) {
        auto it = by_name.find(std::string_view(name));
        if (it == by_name.end()) throw DataError(std::string("header is missing column '") + name + "'");
        return it->second;
    };
    h.accidents = need("accidents");
    h.company = need("company");
    if (auto it = by_name.find(std::string_view("label")); it != by_name.end()) h.label = it->second;
    return h;
}

int parse_int_cell(std::string_view cell, std::size_t row, std::string_view column) {
    auto v = parse_number(cell);
    if (!v || *v != static_cast<double>(static_cast<long long>(*v))) cell_error(row, column, cell);
    return static_cast<int>(*v);
}

template <class RowFn>
void for_each_row(std::istream& in, std::optional<int> feature_dim, RowFn&& fn) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty input: no header row");
    Header h = parse_header(line, feature_dim);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        auto fields = split_fields(line);
        if (fields.size() != h.names.size()) {
            throw DataError("row " + std::to_string(row) + ": expected " +
                            std::to_string(h.names.size()) + " fields, found " +
                            std::to_string(fields.size()));
        }
        fn(h, fields, row);
    }
}

}  // namespace

Index Dataset::count(int label) const {
    return static_cast<Index>(std::count(labels.begin(), labels.end(), label));
}

void Dataset::validate() const {
    if (static_cast<Index>(labels.size()) != rows() || static_cast<Index>(company.size()) != rows())
        throw DataError("dataset shape mismatch: labels/company/features disagree on row count");
    for (int y : labels)
        if (y != 0 && y != 1) throw DataError("dataset label outside {0,1}");
    if (!features.allFinite()) throw DataError("dataset contains non-finite feature values");
}

Dataset take_rows(const Dataset& data, std::span<const Index> rows) {
    Dataset out;
    out.features.resize(static_cast<Index>(rows.size()), data.dim());
    out.labels.reserve(rows.size());
    out.company.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Index r = rows[i];
        if (r < 0 || r >= data.rows()) throw DataError("row index out of range");
        out.features.row(static_cast<Index>(i)) = data.features.row(r);
        out.labels.push_back(data.labels[static_cast<std::size_t>(r)]);
        out.company.push_back(data.company[static_cast<std::size_t>(r)]);
    }
    return out;
}

Dataset concat(std::span<const Dataset> parts) {
    Dataset out;
    if (parts.empty()) return out;
    Index total = 0;
    const Index dim = parts.front().dim();
    for (const auto& p : parts) {
        if (p.dim() != dim) throw DataError("cannot concatenate datasets of different feature_dim");
        total += p.rows();
    }
    out.features.resize(total, dim);
    Index at = 0;
    for (const auto& p : parts) {
        out.features.middleRows(at, p.rows()) = p.features;
        at += p.rows();
        out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
        out.company.insert(out.company.end(), p.company.begin(), p.company.end());
    }
    return out;
}

std::vector<Index> rows_with_label(const Dataset& data, int label) {
    std::vector<Index> out;
    for (std::size_t i = 0; i < data.labels.size(); ++i)
        if (data.labels[i] == label) out.push_back(static_cast<Index>(i));
    return out;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::vector<RawRecord> read_records(std::istream& in, int feature_dim) {
    std::vector<RawRecord> out;
    for_each_row(in, feature_dim, [&](const Header& h, const auto& fields, std::size_t row) {
        RawRecord rec;
        rec.features.reserve(h.feature_cols.size());
        for (std::size_t j = 0; j < h.feature_cols.size(); ++j) {
            auto cell = fields[h.feature_cols[j]];
            if (cell.empty()) {
                rec.features.emplace_back(std::nullopt);
                continue;
            }
            auto v = parse_number(cell);
            if (!v) cell_error(row, h.names[h.feature_cols[j]], cell);
            if (*v < 1.0 || *v > 5.0)
                throw DataError("row " + std::to_string(row) + ", column '" +
                                h.names[h.feature_cols[j]] + "': Likert value outside [1, 5]");
            rec.features.emplace_back(*v);
        }
        rec.accident_count = parse_int_cell(fields[h.accidents], row, "accidents");
        if (rec.accident_count < 0)
            throw DataError("row " + std::to_string(row) + ": negative accident count");
        rec.company_id = parse_int_cell(fields[h.company], row, "company");
        out.push_back(std::move(rec));
    });
    return out;
}

std::vector<RawRecord> load_records(const std::filesystem::path& path, int feature_dim) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return read_records(in, feature_dim);
}

namespace {

void write_header(std::ostream& out, Index dim, bool with_label) {
    for (Index j = 0; j < dim; ++j) out << 'q' << (j + 1) << ',';
    out << "accidents,company";
    if (with_label) out << ",label";
    out << '\n';
}

void write_file(const std::filesystem::path& path, auto&& writer) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    writer(out);
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace

void write_records(std::ostream& out, std::span<const RawRecord> records, int feature_dim) {
    write_header(out, feature_dim, false);
    for (const auto& r : records) {
        if (static_cast<int>(r.features.size()) != feature_dim)
            throw DataError("record has wrong number of features");
        for (const auto& f : r.features) {
            if (f) out << format_double(*f);
            out << ',';
        }
        out << r.accident_count << ',' << r.company_id << '\n';
    }
}

void save_records(const std::filesystem::path& path, std::span<const RawRecord> records,
                  int feature_dim) {
    write_file(path, [&](std::ostream& out) { write_records(out, records, feature_dim); });
}

void write_dataset(std::ostream& out, const Dataset& data) {
    write_header(out, data.dim(), true);
    for (Index i = 0; i < data.rows(); ++i) {
        for (Index j = 0; j < data.dim(); ++j) out << format_double(data.features(i, j)) << ',';
        const auto label = data.labels[static_cast<std::size_t>(i)];
        out << label << ',' << data.company[static_cast<std::size_t>(i)] << ',' << label << '\n';
    }
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
    write_file(path, [&](std::ostream& out) { write_dataset(out, data); });
}

Dataset read_dataset(std::istream& in) {
    std::vector<std::vector<double>> rows;
    Dataset out;
    for_each_row(in, std::nullopt, [&](const Header& h, const auto& fields, std::size_t row) {
        if (!h.label) throw DataError("processed dataset is missing the 'label' column");
        std::vector<double> values;
        values.reserve(h.feature_cols.size());
        for (auto c : h.feature_cols) {
            auto v = parse_number(fields[c]);
            if (!v) cell_error(row, h.names[c], fields[c]);
            values.push_back(*v);
        }
        rows.push_back(std::move(values));
        int label = parse_int_cell(fields[*h.label], row, "label");
        if (label != 0 && label != 1)
            throw DataError("row " + std::to_string(row) + ": label must be 0 or 1");
        out.labels.push_back(label);
        out.company.push_back(parse_int_cell(fields[h.company], row, "company"));
    });
    const Index dim = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
    out.features.resize(static_cast<Index>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (Index j = 0; j < dim; ++j)
            out.features(static_cast<Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    return out;
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return read_dataset(in);
}

}  // namespace safenet
