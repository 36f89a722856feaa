// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "safenet/dataset.hpp"

#include <cstdint>
#include <vector>

namespace safenet {

/// Generation parameters for one synthetic company.
///
/// Labels follow a logistic-linear law in the centred Likert answers:
/// the company's weight vector is the shared latent vector plus
/// `weight_perturbation` times a company-specific Gaussian direction, and
/// `noise_level` is the scale of the logistic noise added to the score.
/// With zero noise the classes are linearly separable in feature space.
struct CompanySpec {
    int company_id = 1;
    int n_rows = 400;
    double minority_fraction = 0.25;  // (0, 0.5]
    double weight_perturbation = 0.0;
    double noise_level = 0.5;
    double missing_rate = 0.0;  // [0, 0.3]
};

struct GeneratorSpec {
    std::uint64_t shared_weights_seed = 0;
    std::vector<CompanySpec> companies;
    int feature_dim = kSurveyItems;

    /// Throws DataError describing the first violated constraint.
    void validate() const;
};

/// Likert answer (1..5) for a standard-normal latent, cut at its quintiles.
int likert_from_latent(double z);

/// Raw records for every company, in the order of `spec.companies`.
std::vector<std::vector<RawRecord>> generate(const GeneratorSpec& spec, std::uint64_t seed);

}  // namespace safenet
