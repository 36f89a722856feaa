// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "safenet/harness.hpp"
#include "safenet/synthetic.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace safenet {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;

/// Built-in defaults: the reference pretraining / fine-tuning regime.
Json default_config();

/// Sets one dotted key, e.g. "optimizer.base_lr=0.001". The value is parsed
/// as JSON when possible and kept as a string otherwise.
void apply_override(Json& config, std::string_view assignment);

/// defaults <- file <- overrides. An empty path yields defaults + overrides.
Json load_config(const std::filesystem::path& path, std::span<const std::string> overrides);

/// Stable fingerprint of a config document.
std::string config_hash(const Json& config);

std::uint64_t global_seed(const Json& config);
int jobs(const Json& config);

DataConfig data_config(const Json& config);
TrainRunConfig pretrain_config(const Json& config);
TrainRunConfig finetune_config(const Json& config);
GeneratorSpec generator_spec(const Json& config);

/// The `experiment` section as a runnable config, seeded from the global
/// seed and `index`.
ExperimentConfig experiment_config(const Json& config, std::size_t index = 0);

/// Every experiment listed under `matrix` (explicit list and/or grid).
std::vector<ExperimentConfig> matrix_configs(const Json& config);

/// Raw records per company: from `data.files` when given, otherwise generated.
std::map<int, std::vector<RawRecord>> load_raw_companies(const Json& config);

/// load_raw_companies() followed by prepare_companies().
CompanyTable load_company_table(const Json& config);

}  // namespace safenet
