// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "safenet/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace safenet {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ExperimentError("cannot write '" + path.string() + "'");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw ExperimentError("write failed for '" + path.string() + "'");
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// Reads a CSV with a known header, handing each row's fields to fn.
template <class Fn>
void read_table(const std::filesystem::path& path, const std::string& header, std::size_t columns,
                Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw ExperimentError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != header)
        throw ExperimentError("'" + path.string() + "' does not start with header '" + header + "'");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split(line);
        if (fields.size() != columns)
            throw ExperimentError("'" + path.string() + "': malformed row '" + line + "'");
        fn(fields);
    }
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string cell_text(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::vector<CurvePoint> aggregate_curve(std::span<const PairedAccuracy> pairs) {
    std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_n;
    for (const auto& p : pairs) {
        by_n[p.per_class_n].first.push_back(p.a_pt);
        by_n[p.per_class_n].second.push_back(p.a_st);
    }
    std::vector<CurvePoint> out;
    for (const auto& [n, acc] : by_n) {
        CurvePoint c;
        c.per_class_n = n;
        c.mean_pt = mean_of(acc.first);
        c.std_pt = sample_std(acc.first, c.mean_pt);
        c.mean_st = mean_of(acc.second);
        c.std_st = sample_std(acc.second, c.mean_st);
        c.count = static_cast<int>(acc.first.size());
        out.push_back(c);
    }
    return out;
}

void write_curve(const std::filesystem::path& path, std::span<const CurvePoint> curve) {
    auto out = open_out(path);
    out << "per_class_n,mean_a_pt,std_a_pt,mean_a_st,std_a_st,count\n";
    for (const auto& c : curve)
        out << c.per_class_n << ',' << format_double(c.mean_pt) << ',' << format_double(c.std_pt)
            << ',' << format_double(c.mean_st) << ',' << format_double(c.std_st) << ',' << c.count
            << '\n';
    finish(out, path);
}

void emit_plot_data(const SweepResult& result, const std::filesystem::path& path) {
    write_curve(path, aggregate_curve(result.pairs));
}

std::vector<CurvePoint> read_curve(const std::filesystem::path& path) {
    std::vector<CurvePoint> out;
    read_table(path, "per_class_n,mean_a_pt,std_a_pt,mean_a_st,std_a_st,count", 6, [&](const auto& f) {
        out.push_back({std::stoi(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3]),
                       std::stod(f[4]), std::stoi(f[5])});
    });
    return out;
}

std::vector<SourceSizePoint> aggregate_by_source_size(std::span<const SweepResult> results) {
    std::map<int, std::vector<double>> by_size;
    for (const auto& r : results)
        for (const auto& p : r.pairs)
            by_size[static_cast<int>(r.config.source_company_ids.size())].push_back(
                difference_accuracy(p.a_pt, p.a_st));
    std::vector<SourceSizePoint> out;
    for (const auto& [size, da] : by_size) {
        const double m = mean_of(da);
        out.push_back({size, m, sample_std(da, m) / std::sqrt(static_cast<double>(da.size())),
                       static_cast<int>(da.size())});
    }
    return out;
}

void write_source_size_curve(const std::filesystem::path& path,
                             std::span<const SourceSizePoint> points) {
    auto out = open_out(path);
    out << "source_set_size,mean_da,std_err,count\n";
    for (const auto& p : points)
        out << p.source_set_size << ',' << format_double(p.mean_da) << ','
            << format_double(p.std_err) << ',' << p.count << '\n';
    finish(out, path);
}

std::vector<SourceSizePoint> read_source_size_curve(const std::filesystem::path& path) {
    std::vector<SourceSizePoint> out;
    read_table(path, "source_set_size,mean_da,std_err,count", 4, [&](const auto& f) {
        out.push_back({std::stoi(f[0]), std::stod(f[1]), std::stod(f[2]), std::stoi(f[3])});
    });
    return out;
}

MatrixReport single_cell_report(SweepResult result) {
    MatrixReport report;
    MatrixCell cell;
    cell.config = result.config;
    cell.result = std::move(result);
    report.cells.push_back(std::move(cell));
    return report;
}

void write_scores_csv(const std::filesystem::path& path, const MatrixReport& report) {
    auto out = open_out(path);
    out << "target,source_set,pretrain_acc,EP,ME,NME\n";
    for (const auto& c : report.cells) {
        out << c.config.target_company_id << ',' << c.config.source_label() << ',';
        if (c.result) {
            const auto& r = *c.result;
            out << format_double(r.pretrain_accuracy) << ',' << format_double(r.score.ep) << ','
                << format_double(r.score.me) << ',' << format_double(r.score.nme);
        } else {
            out << ",,,";
        }
        out << '\n';
    }
    finish(out, path);
}

std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path) {
    std::vector<ScoreRow> out;
    read_table(path, "target,source_set,pretrain_acc,EP,ME,NME", 6, [&](const auto& f) {
        ScoreRow row;
        row.target = std::stoi(f[0]);
        row.source_set = f[1];
        row.ok = !f[2].empty();
        if (row.ok) {
            row.pretrain_acc = std::stod(f[2]);
            row.score = {std::stod(f[3]), std::stod(f[4]), std::stod(f[5])};
        }
        out.push_back(row);
    });
    return out;
}

void write_pairs_csv(const std::filesystem::path& path, const MatrixReport& report) {
    auto out = open_out(path);
    out << "experiment,target,source_set,per_class_n,repeat,a_pt,a_st,da\n";
    for (const auto& c : report.cells) {
        if (!c.result) continue;
        for (const auto& p : c.result->pairs)
            out << c.config.display_name() << ',' << c.config.target_company_id << ','
                << c.config.source_label() << ',' << p.per_class_n << ',' << p.repeat_index << ','
                << format_double(p.a_pt) << ',' << format_double(p.a_st) << ','
                << format_double(difference_accuracy(p.a_pt, p.a_st)) << '\n';
    }
    finish(out, path);
}

std::vector<PairRecord> read_pairs_csv(const std::filesystem::path& path) {
    std::vector<PairRecord> out;
    read_table(path, "experiment,target,source_set,per_class_n,repeat,a_pt,a_st,da", 8,
               [&](const auto& f) {
                   PairRecord r;
                   r.experiment = f[0];
                   r.target = std::stoi(f[1]);
                   r.source_set = f[2];
                   r.pair = {std::stoi(f[3]), std::stod(f[5]), std::stod(f[6]), std::stoi(f[4])};
                   out.push_back(std::move(r));
               });
    return out;
}

std::vector<std::filesystem::path> write_matrix_tables(const std::filesystem::path& dir,
                                                       const MatrixReport& report) {
    const auto targets = report.targets();
    const auto sources = report.source_sets();
    std::vector<std::filesystem::path> written;

    auto write_metric = [&](const std::string& file, auto&& metric) {
        const auto path = dir / file;
        auto out = open_out(path);
        out << "target";
        for (const auto& s : sources) out << ',' << s;
        out << '\n';
        for (int t : targets) {
            out << t;
            for (const auto& s : sources) {
                const auto* cell = report.find(t, s);
                std::optional<double> v;
                if (cell && cell->result) v = metric(cell->result->score);
                out << ',' << cell_text(v);
            }
            out << '\n';
        }
        finish(out, path);
        written.push_back(path);
    };
    write_metric("ep_matrix.csv", [](const TransferScore& s) { return s.ep; });
    write_metric("me_matrix.csv", [](const TransferScore& s) { return s.me; });
    write_metric("nme_matrix.csv", [](const TransferScore& s) { return s.nme; });

    // One pretraining accuracy per source set; with several targets the first
    // successful cell is reported (every cell pretrains with its own seed).
    const auto path = dir / "pretrain_accuracy.csv";
    auto out = open_out(path);
    out << "source_set";
    for (const auto& s : sources) out << ',' << s;
    out << "\npretrain_acc";
    for (const auto& s : sources) {
        std::optional<double> v;
        for (const auto& c : report.cells)
            if (c.result && c.config.source_label() == s) {
                v = c.result->pretrain_accuracy;
                break;
            }
        out << ',' << cell_text(v);
    }
    out << '\n';
    finish(out, path);
    written.push_back(path);
    return written;
}

}  // namespace safenet
