// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "safenet/cli.hpp"

#include "safenet/config.hpp"
#include "safenet/random.hpp"
#include "safenet/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>

namespace safenet::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> sets;
    std::optional<int> jobs;
    // subcommand conveniences, folded into overrides
    std::string model_path;
    std::string stats_path;
    std::string report_input;
};

// Collects written files so the manifest can fingerprint them.
class Run {
  public:
    Run(std::string command, Json config, std::vector<std::string> overrides, fs::path out,
        std::ostream& log)
        : command_(std::move(command)),
          config_(std::move(config)),
          overrides_(std::move(overrides)),
          out_(std::move(out)),
          log_(log) {
        fs::create_directories(out_);
    }

    const Json& config() const { return config_; }
    fs::path path(const std::string& name) const { return out_ / name; }

    void wrote(const std::string& name) {
        artifacts_.push_back(name);
        log_ << "wrote " << (out_ / name).string() << '\n';
    }

    void note(const std::string& key, Json value) { extra_[key] = std::move(value); }

    void write_manifest() const {
        Json m;
        m["command"] = command_;
        m["config_hash"] = config_hash(config_);
        m["seeds"] = {{"global", global_seed(config_)}};
        m["overrides"] = overrides_;
        m["config"] = config_;
        Json artifacts = Json::object();
        for (const auto& a : artifacts_) artifacts[a] = file_hash(out_ / a);
        m["artifacts"] = artifacts;
        for (auto it = extra_.begin(); it != extra_.end(); ++it) m[it.key()] = it.value();
        std::ofstream f(out_ / "manifest.json", std::ios::binary);
        f << m.dump(2) << '\n';
        if (!f) throw std::runtime_error("cannot write manifest in '" + out_.string() + "'");
    }

  private:
    static std::string file_hash(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
        return buf;
    }

    std::string command_;
    Json config_;
    std::vector<std::string> overrides_;
    fs::path out_;
    std::ostream& log_;
    std::vector<std::string> artifacts_;
    Json extra_ = Json::object();
};

std::string safe_name(std::string s) {
    for (char& c : s)
        if (c == '/' || c == '\\' || c == ' ') c = '_';
    return s;
}

void cmd_generate(Run& run) {
    const auto spec = generator_spec(run.config());
    const auto data = generate(spec, derive_seed(global_seed(run.config()), "generate"));
    for (std::size_t i = 0; i < spec.companies.size(); ++i) {
        const auto name = "company_" + std::to_string(spec.companies[i].company_id) + ".csv";
        save_records(run.path(name), data[i], spec.feature_dim);
        run.wrote(name);
    }
}

void cmd_prepare(Run& run) {
    const auto& c = run.config();
    const auto table = load_company_table(c);
    const auto dc = data_config(c);
    Json sizes = Json::object();
    for (const auto& [id, company] : table) {
        const auto stem = "company_" + std::to_string(id);
        const auto split = split_company(company.balanced, derive_seed(global_seed(c), "prepare_split", id),
                                         dc.test_rounding);
        const std::pair<const char*, const Dataset*> outputs[] = {{"_clean.csv", &company.cleaned},
                                                                  {"_balanced.csv", &company.balanced},
                                                                  {"_train_pool.csv", &split.train_pool},
                                                                  {"_test.csv", &split.test_set}};
        for (const auto& [suffix, data] : outputs) {
            save_dataset(run.path(stem + suffix), *data);
            run.wrote(stem + suffix);
        }
        sizes[std::to_string(id)] = {{"cleaned", company.cleaned.rows()},
                                     {"balanced", company.balanced.rows()},
                                     {"train_pool", split.train_pool.rows()},
                                     {"test", split.test_set.rows()}};
    }
    run.note("sizes", sizes);
}

void cmd_pretrain(Run& run) {
    const auto& c = run.config();
    const auto table = load_company_table(c);
    const auto cfg = experiment_config(c);
    Dataset source = assemble_source(table, cfg.source_company_ids);
    if (cfg.scramble_source_labels) source = scramble_labels(source, derive_seed(cfg.seed, "scramble"));
    const auto model = pretrain(source, cfg.pretrain, derive_seed(cfg.seed, "pretrain"));
    save_model(run.path("model.bin"), model.params);
    run.wrote("model.bin");
    save_history(run.path("history.csv"), model.history);
    run.wrote("history.csv");
    save_stats(run.path("stats.csv"), *model.input_stats);
    run.wrote("stats.csv");
    run.note("pretrain", {{"sources", cfg.source_label()},
                          {"selected_epoch", model.selected_epoch},
                          {"accuracy", model.selected_accuracy()}});
}

void cmd_finetune(Run& run) {
    const auto& c = run.config();
    const auto table = load_company_table(c);
    const auto cfg = experiment_config(c);
    const auto& fr = c.at("finetune_run");
    const auto model_path = fr.at("model").get<std::string>();
    const auto stats_path = fr.at("stats").get<std::string>();
    const int n = fr.at("per_class_n").get<int>();
    const int repeat = fr.at("repeat").get<int>();

    ExperimentPlan plan;
    if (!model_path.empty()) {
        if (stats_path.empty())
            throw ConfigError("finetune_run.stats is required together with finetune_run.model");
        TrainedModel given;
        given.params = load_model(model_path);
        given.input_stats = load_stats(stats_path);
        plan = plan_experiment(cfg, table, given);
    } else {
        plan = plan_experiment(cfg, table);
    }
    if (n < 1 || n > plan.pool_bound)
        throw ConfigError("finetune_run.per_class_n must be in [1, " + std::to_string(plan.pool_bound) + "]");

    const auto draw = draw_sweep_point(plan, n, repeat);
    const auto pt = finetune(plan.pretrained.params, draw.train, draw.test, cfg.finetune, draw.train_seed);
    const auto st = train_from_scratch(draw.train, draw.test, cfg.finetune, draw.train_seed);
    const double a_pt = evaluate_accuracy(pt.params, draw.test);
    const double a_st = evaluate_accuracy(st.params, draw.test);

    save_model(run.path("model_pt.bin"), pt.params);
    run.wrote("model_pt.bin");
    save_model(run.path("model_st.bin"), st.params);
    run.wrote("model_st.bin");
    save_history(run.path("history_pt.csv"), pt.history);
    run.wrote("history_pt.csv");
    save_history(run.path("history_st.csv"), st.history);
    run.wrote("history_st.csv");
    {
        std::ofstream f(run.path("comparison.csv"), std::ios::binary);
        f << "target,source_set,per_class_n,repeat,a_pt,a_st,da\n"
          << cfg.target_company_id << ',' << cfg.source_label() << ',' << n << ',' << repeat << ','
          << format_double(a_pt) << ',' << format_double(a_st) << ','
          << format_double(difference_accuracy(a_pt, a_st)) << '\n';
        if (!f) throw std::runtime_error("cannot write comparison.csv");
    }
    run.wrote("comparison.csv");
}

void write_cell_curves(Run& run, const MatrixReport& report) {
    for (const auto& cell : report.cells) {
        if (!cell.result) continue;
        const auto name = "curve_" + safe_name(cell.config.display_name()) + ".csv";
        emit_plot_data(*cell.result, run.path(name));
        run.wrote(name);
    }
}

void write_results(Run& run, const MatrixReport& report) {
    write_scores_csv(run.path("scores.csv"), report);
    run.wrote("scores.csv");
    write_pairs_csv(run.path("pairs.csv"), report);
    run.wrote("pairs.csv");
    write_cell_curves(run, report);
}

void cmd_sweep(Run& run, int jobs_n) {
    const auto& c = run.config();
    const auto table = load_company_table(c);
    const auto result = run_experiment(experiment_config(c), table, jobs_n);
    run.note("score", {{"EP", result.score.ep}, {"ME", result.score.me}, {"NME", result.score.nme},
                       {"pretrain_acc", result.pretrain_accuracy}});
    write_results(run, single_cell_report(result));
}

void cmd_matrix(Run& run, int jobs_n, std::ostream& err) {
    const auto& c = run.config();
    const auto configs = matrix_configs(c);
    if (configs.empty()) throw ConfigError("matrix: no experiments configured (matrix.experiments or matrix.grid)");
    const auto table = load_company_table(c);
    const auto report = run_matrix(configs, table, jobs_n);

    write_results(run, report);
    for (const auto& p : write_matrix_tables(run.path(""), report)) run.wrote(p.filename().string());

    std::vector<SweepResult> done;
    Json failed = Json::array();
    for (const auto& cell : report.cells) {
        if (cell.result) {
            done.push_back(*cell.result);
        } else {
            failed.push_back({{"experiment", cell.config.display_name()}, {"error", cell.error}});
            err << "safenet: warning: " << cell.config.display_name() << " failed: " << cell.error << '\n';
        }
    }
    write_source_size_curve(run.path("source_size_curve.csv"), aggregate_by_source_size(done));
    run.wrote("source_size_curve.csv");
    run.note("failed_cells", failed);
}

void cmd_report(Run& run) {
    const auto input = run.config().at("report").at("input").get<std::string>();
    if (input.empty()) throw ConfigError("report: set report.input (or --input) to a pairs.csv file");
    const auto records = read_pairs_csv(input);

    std::map<std::string, SweepResult> by_experiment;
    for (const auto& r : records) {
        auto& res = by_experiment[r.experiment];
        if (res.pairs.empty()) {
            res.config.name = r.experiment;
            res.config.target_company_id = r.target;
            std::stringstream ss(r.source_set);
            std::string id;
            while (std::getline(ss, id, '+')) res.config.source_company_ids.push_back(std::stoi(id));
        }
        res.pairs.push_back(r.pair);
    }
    std::vector<SweepResult> all;
    for (auto& [name, res] : by_experiment) {
        const auto file = "curve_" + safe_name(name) + ".csv";
        emit_plot_data(res, run.path(file));
        run.wrote(file);
        all.push_back(std::move(res));
    }
    write_source_size_curve(run.path("source_size_curve.csv"), aggregate_by_source_size(all));
    run.wrote("source_size_curve.csv");
}

int dispatch(const std::string& command, const Options& opt, std::ostream& out, std::ostream& err) {
    std::vector<std::string> overrides = opt.sets;
    if (opt.seed) overrides.push_back("seeds.global=" + std::to_string(*opt.seed));
    if (opt.jobs) overrides.push_back("jobs=" + std::to_string(*opt.jobs));
    if (!opt.model_path.empty()) overrides.push_back("finetune_run.model=" + Json(opt.model_path).dump());
    if (!opt.stats_path.empty()) overrides.push_back("finetune_run.stats=" + Json(opt.stats_path).dump());
    if (!opt.report_input.empty()) overrides.push_back("report.input=" + Json(opt.report_input).dump());

    Json config = load_config(opt.config_path, overrides);
    // Resolve every section up front so a bad value is a config error, not a
    // failure halfway through a run.
    global_seed(config);
    const int jobs_n = jobs(config);
    data_config(config);
    pretrain_config(config);
    finetune_config(config);

    fs::path out_dir = opt.out_dir;
    if (out_dir.empty()) {
        const char* env = std::getenv(kOutputEnv);
        out_dir = env && *env ? env : "out";
    }
    Run run(command, std::move(config), overrides, out_dir, out);
    if (command == "generate") cmd_generate(run);
    else if (command == "prepare") cmd_prepare(run);
    else if (command == "pretrain") cmd_pretrain(run);
    else if (command == "finetune") cmd_finetune(run);
    else if (command == "sweep") cmd_sweep(run, jobs_n);
    else if (command == "matrix") cmd_matrix(run, jobs_n, err);
    else if (command == "report") cmd_report(run);
    run.write_manifest();
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Transfer-learning experiments for accident-risk prediction from safety-climate surveys",
                 "safenet"};
    Options opt;
    app.add_option("--config", opt.config_path, "JSON config file (defaults are built in)");
    app.add_option("--out", opt.out_dir, std::string("output directory (default: $") + kOutputEnv + " or ./out)");
    app.add_option("--seed", opt.seed, "global seed (overrides seeds.global)");
    app.add_option("--set", opt.sets, "override a config key, e.g. optimizer.base_lr=0.001 (repeatable)");
    app.add_option("--jobs", opt.jobs, "worker threads")->check(CLI::PositiveNumber);
    app.require_subcommand(1);
    app.fallthrough();

    app.add_subcommand("generate", "write synthetic company survey files");
    app.add_subcommand("prepare", "clean, balance and split every company");
    app.add_subcommand("pretrain", "pretrain on the experiment's source companies");
    auto* ft = app.add_subcommand("finetune", "fine-tune vs from-scratch at one training size");
    ft->add_option("--model", opt.model_path, "pretrained model file (pretrains when omitted)");
    ft->add_option("--stats", opt.stats_path, "standardization statistics of the pretrained model");
    app.add_subcommand("sweep", "run the configured experiment's full sweep");
    app.add_subcommand("matrix", "run every configured experiment and tabulate EP/ME/NME");
    auto* rep = app.add_subcommand("report", "rebuild plot data from a pairs.csv");
    rep->add_option("--input", opt.report_input, "pairs.csv produced by sweep or matrix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return dispatch(command, opt, out, err);
    } catch (const ConfigError& e) {
        err << "safenet: config error: " << e.what() << '\n';
    } catch (const nlohmann::json::exception& e) {
        err << "safenet: config error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "safenet: error: " << e.what() << '\n';
    }
    return kExitFailure;
}

}  // namespace safenet::cli
