// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "safenet/config.hpp"

#include "safenet/random.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

namespace safenet {

namespace {

// Sections whose keys are fixed; an override naming an unknown key there is
// almost certainly a typo.
const std::set<std::string> kStrictSections = {"seeds", "model",    "optimizer", "pretrain",
                                               "finetune", "sweep", "finetune_run"};

void merge_into(Json& base, const Json& patch) {
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object())
            merge_into(base[it.key()], it.value());
        else
            base[it.key()] = it.value();
    }
}

template <class T>
T read(const Json& j, const char* section, const char* key) {
    try {
        return j.at(section).at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config: '") + section + "." + key + "' is missing or has the wrong type");
    }
}

template <class T>
T read_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config: '") + key + "' has the wrong type");
    }
}

InitScheme parse_init(const std::string& s) {
    if (s == "paper") return InitScheme::paper;
    if (s == "scaled") return InitScheme::scaled;
    throw ConfigError("config: model.init must be 'paper' or 'scaled', got '" + s + "'");
}

TestSizeRounding parse_rounding(const std::string& s) {
    if (s == "nearest") return TestSizeRounding::nearest;
    if (s == "floor") return TestSizeRounding::floor;
    throw ConfigError("config: data.test_rounding must be 'nearest' or 'floor', got '" + s + "'");
}

OptimizerConfig optimizer_config(const Json& c) {
    OptimizerConfig o;
    o.base_lr = read<double>(c, "optimizer", "base_lr");
    o.beta1 = read<double>(c, "optimizer", "beta1");
    o.beta2 = read<double>(c, "optimizer", "beta2");
    o.eps = read<double>(c, "optimizer", "eps");
    o.weight_decay = read<double>(c, "optimizer", "weight_decay");
    o.step_size = read<int>(c, "optimizer", "step_size");
    o.gamma = read<double>(c, "optimizer", "gamma");
    return o;
}

std::vector<int> id_list(const Json& j, const char* what) {
    if (j.is_number_integer()) return {j.get<int>()};
    if (!j.is_array()) throw ConfigError(std::string("config: ") + what + " must be an id or a list of ids");
    std::vector<int> out;
    for (const auto& v : j) {
        if (!v.is_number_integer()) throw ConfigError(std::string("config: ") + what + " must contain integers");
        out.push_back(v.get<int>());
    }
    return out;
}

// Applies one experiment description (the `experiment` section or a matrix
// entry) on top of the shared settings.
ExperimentConfig build_experiment(const Json& c, const Json& e, std::size_t index) {
    ExperimentConfig x;
    try {
        x.name = read_or<std::string>(e, "name", "");
        if (x.name.find(',') != std::string::npos) throw ConfigError("config: experiment names may not contain ','");
        if (!e.contains("sources")) throw ConfigError("config: experiment has no 'sources'");
        x.source_company_ids = id_list(e.at("sources"), "sources");
        if (!e.contains("target")) throw ConfigError("config: experiment has no 'target'");
        x.target_company_id = e.at("target").get<int>();
        x.allow_overlap = read_or<bool>(e, "allow_overlap", false);
        x.same_company_disjoint = read_or<bool>(e, "same_company_disjoint", false);
        x.scramble_source_labels = read_or<bool>(e, "scramble_source_labels", false);
        x.restandardize_on_target = read_or<bool>(e, "restandardize_on_target", false);
    } catch (const nlohmann::json::exception& err) {
        throw ConfigError(std::string("config: malformed experiment: ") + err.what());
    }
    const Json& s = c.at("sweep");
    x.sweep.start = read<int>(c, "sweep", "start");
    x.sweep.stop = read<int>(c, "sweep", "stop");
    x.sweep.step = read<int>(c, "sweep", "step");
    x.sweep.points = read_or<std::vector<int>>(s, "points", {});
    x.repeats_per_point = read<int>(c, "sweep", "repeats");
    x.data = data_config(c);
    x.pretrain = pretrain_config(c);
    x.finetune = finetune_config(c);
    x.seed = derive_seed(global_seed(c), "experiment", index);
    return x;
}

}  // namespace

Json default_config() {
    Json generator = {
        {"shared_weights_seed", 1},
        {"feature_dim", kSurveyItems},
        {"companies", Json::array()},
    };
    // Seven stand-in companies with the row counts and accident rates of the
    // original survey.
    const struct {
        int id, rows;
        double minority;
    } table[] = {{1, 1831, 0.405}, {2, 432, 0.484}, {3, 257, 0.105}, {4, 244, 0.189},
                 {5, 218, 0.266},  {6, 3493, 0.223}, {7, 406, 0.276}};
    for (const auto& t : table)
        generator["companies"].push_back({{"id", t.id},
                                          {"n_rows", t.rows},
                                          {"minority_fraction", t.minority},
                                          {"weight_perturbation", 0.5},
                                          {"noise_level", 0.5},
                                          {"missing_rate", 0.02}});
    return Json{
        {"seeds", {{"global", 0}}},
        {"jobs", 1},
        {"data",
         {{"feature_dim", kSurveyItems},
          {"missing_threshold", kDefaultMissingThreshold},
          {"smote_k", kDefaultSmoteNeighbors},
          {"smote_after_split", false},
          {"test_rounding", "nearest"},
          {"files", Json::object()},
          {"generator", generator}}},
        {"model", {{"init", "paper"}}},
        {"optimizer",
         {{"base_lr", 3e-4},
          {"beta1", 0.9},
          {"beta2", 0.999},
          {"eps", 1e-8},
          {"weight_decay", 0.01},
          {"step_size", 30},
          {"gamma", 0.1}}},
        {"pretrain", {{"epochs", 100}, {"batch_size", 32}, {"use_schedule", true}}},
        {"finetune", {{"epochs", 20}, {"batch_size", 4}, {"base_lr", 1e-3}, {"use_schedule", false}}},
        {"sweep", {{"start", 1}, {"stop", 0}, {"step", 0}, {"points", Json::array()}, {"repeats", 5}}},
        {"experiment",
         {{"name", ""},
          {"sources", Json::array({6})},
          {"target", 7},
          {"allow_overlap", false},
          {"same_company_disjoint", false},
          {"scramble_source_labels", false},
          {"restandardize_on_target", false}}},
        {"matrix", {{"experiments", Json::array()}}},
        {"finetune_run", {{"model", ""}, {"stats", ""}, {"per_class_n", 10}, {"repeat", 0}}},
        {"report", {{"input", ""}}},
    };
}

void apply_override(Json& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0)
        throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
    const std::string key(assignment.substr(0, eq));
    const std::string text(assignment.substr(eq + 1));

    std::vector<std::string> path;
    std::size_t start = 0;
    while (true) {
        auto dot = key.find('.', start);
        path.push_back(key.substr(start, dot - start));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    for (const auto& p : path)
        if (p.empty()) throw ConfigError("override key '" + key + "' has an empty component");

    Json* node = &config;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (!node->is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
        node = &(*node)[path[i]];
        if (node->is_null()) *node = Json::object();
    }
    if (!node->is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
    if (path.size() == 2 && kStrictSections.contains(path[0]) && !node->contains(path[1]))
        throw ConfigError("unknown config key '" + key + "'");

    Json value;
    try {
        value = Json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
        value = text;
    }
    (*node)[path.back()] = std::move(value);
}

Json load_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
    Json config = default_config();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
        Json file;
        try {
            file = Json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
        }
        if (!file.is_object()) throw ConfigError("config '" + path.string() + "' must be a JSON object");
        merge_into(config, file);
    }
    for (const auto& o : overrides) apply_override(config, o);
    return config;
}

std::string config_hash(const Json& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config.dump())));
    return buf;
}

std::uint64_t global_seed(const Json& config) { return read<std::uint64_t>(config, "seeds", "global"); }

int jobs(const Json& config) {
    const int n = read_or<int>(config, "jobs", 1);
    if (n < 1) throw ConfigError("config: jobs must be >= 1");
    return n;
}

DataConfig data_config(const Json& c) {
    DataConfig d;
    d.missing_threshold = read<double>(c, "data", "missing_threshold");
    d.smote_k = read<int>(c, "data", "smote_k");
    d.smote_after_split = read<bool>(c, "data", "smote_after_split");
    d.test_rounding = parse_rounding(read<std::string>(c, "data", "test_rounding"));
    return d;
}

TrainRunConfig pretrain_config(const Json& c) {
    TrainRunConfig t;
    t.epochs = read<int>(c, "pretrain", "epochs");
    t.batch_size = read<int>(c, "pretrain", "batch_size");
    t.use_schedule = read<bool>(c, "pretrain", "use_schedule");
    t.optimizer = optimizer_config(c);
    t.init = parse_init(read<std::string>(c, "model", "init"));
    return t;
}

TrainRunConfig finetune_config(const Json& c) {
    TrainRunConfig t;
    t.epochs = read<int>(c, "finetune", "epochs");
    t.batch_size = read<int>(c, "finetune", "batch_size");
    t.use_schedule = read<bool>(c, "finetune", "use_schedule");
    t.optimizer = optimizer_config(c);
    t.optimizer.base_lr = read<double>(c, "finetune", "base_lr");
    t.init = parse_init(read<std::string>(c, "model", "init"));
    return t;
}

GeneratorSpec generator_spec(const Json& c) {
    GeneratorSpec g;
    try {
        const Json& j = c.at("data").at("generator");
        g.shared_weights_seed = j.at("shared_weights_seed").get<std::uint64_t>();
        g.feature_dim = read_or<int>(j, "feature_dim", read<int>(c, "data", "feature_dim"));
        for (const auto& e : j.at("companies")) {
            CompanySpec s;
            s.company_id = e.at("id").get<int>();
            s.n_rows = e.at("n_rows").get<int>();
            s.minority_fraction = e.at("minority_fraction").get<double>();
            s.weight_perturbation = read_or<double>(e, "weight_perturbation", 0.0);
            s.noise_level = read_or<double>(e, "noise_level", 0.5);
            s.missing_rate = read_or<double>(e, "missing_rate", 0.0);
            g.companies.push_back(s);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: malformed data.generator: ") + e.what());
    }
    std::set<int> ids;
    for (const auto& s : g.companies)
        if (!ids.insert(s.company_id).second)
            throw ConfigError("config: duplicate generator company id " + std::to_string(s.company_id));
    try {
        g.validate();
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    return g;
}

ExperimentConfig experiment_config(const Json& config, std::size_t index) {
    return build_experiment(config, config.at("experiment"), index);
}

std::vector<ExperimentConfig> matrix_configs(const Json& c) {
    std::vector<Json> entries;
    const Json& m = c.at("matrix");
    const Json base = c.at("experiment");
    auto with_base = [&](const Json& e) {
        Json merged = base;
        merged.erase("name");
        merge_into(merged, e);
        return merged;
    };
    if (m.contains("experiments"))
        for (const auto& e : m.at("experiments")) entries.push_back(with_base(e));
    if (m.contains("grid")) {
        const Json& g = m.at("grid");
        const std::string diagonal = read_or<std::string>(g, "diagonal", "overlap");
        if (diagonal != "overlap" && diagonal != "disjoint" && diagonal != "skip")
            throw ConfigError("config: matrix.grid.diagonal must be overlap, disjoint or skip");
        const auto disjoint_ids = read_or<std::vector<int>>(g, "disjoint_ids", {});
        if (!g.contains("sources") || !g.contains("targets"))
            throw ConfigError("config: matrix.grid needs 'sources' and 'targets'");
        for (const auto& src : g.at("sources")) {
            const auto ids = id_list(src, "matrix.grid.sources");
            for (int t : id_list(g.at("targets"), "matrix.grid.targets")) {
                Json e = {{"sources", ids}, {"target", t}};
                if (ids.size() == 1 && ids.front() == t) {
                    const bool disjoint = diagonal == "disjoint" ||
                                          std::find(disjoint_ids.begin(), disjoint_ids.end(), t) !=
                                              disjoint_ids.end();
                    if (diagonal == "skip" && !disjoint) continue;
                    e[disjoint ? "same_company_disjoint" : "allow_overlap"] = true;
                }
                entries.push_back(with_base(e));
            }
        }
    }
    std::vector<ExperimentConfig> out;
    for (std::size_t i = 0; i < entries.size(); ++i) out.push_back(build_experiment(c, entries[i], i));
    return out;
}

std::map<int, std::vector<RawRecord>> load_raw_companies(const Json& c) {
    std::map<int, std::vector<RawRecord>> raw;
    const int dim = read<int>(c, "data", "feature_dim");
    const Json& files = c.at("data").at("files");
    if (!files.is_object()) throw ConfigError("config: data.files must map company ids to paths");
    if (!files.empty()) {
        for (auto it = files.begin(); it != files.end(); ++it) {
            int id = 0;
            try {
                id = std::stoi(it.key());
            } catch (const std::exception&) {
                throw ConfigError("config: data.files key '" + it.key() + "' is not a company id");
            }
            auto records = load_records(it.value().get<std::string>(), dim);
            for (auto& r : records)
                if (r.company_id != id)
                    throw DataError("file for company " + std::to_string(id) + " contains a row of company " +
                                    std::to_string(r.company_id));
            raw.emplace(id, std::move(records));
        }
        return raw;
    }
    const auto spec = generator_spec(c);
    auto generated = generate(spec, derive_seed(global_seed(c), "generate"));
    for (std::size_t i = 0; i < spec.companies.size(); ++i)
        raw.emplace(spec.companies[i].company_id, std::move(generated[i]));
    return raw;
}

CompanyTable load_company_table(const Json& c) {
    return prepare_companies(load_raw_companies(c), data_config(c), derive_seed(global_seed(c), "prepare"));
}

}  // namespace safenet
