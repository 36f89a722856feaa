// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "safenet/synthetic.hpp"

#include "safenet/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace safenet {

namespace {

// Quintile cut points of the standard normal distribution.
constexpr double kQuintiles[4] = {-0.8416212335729143, -0.2533471031357997, 0.2533471031357997,
                                  0.8416212335729143};

Eigen::VectorXd normal_vector(Index dim, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(dim);
    for (Index j = 0; j < dim; ++j) v(j) = normal(rng);
    return v;
}

std::vector<RawRecord> generate_company(const CompanySpec& c, const Eigen::VectorXd& shared,
                                        std::uint64_t seed) {
    const Index dim = shared.size();
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const Eigen::VectorXd weights = shared + c.weight_perturbation * normal_vector(dim, rng);

    std::vector<RawRecord> rows(static_cast<std::size_t>(c.n_rows));
    std::vector<double> score(rows.size());
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& r = rows[i];
        r.company_id = c.company_id;
        r.features.resize(static_cast<std::size_t>(dim));
        double s = 0.0;
        for (Index j = 0; j < dim; ++j) {
            const int answer = likert_from_latent(normal(rng));
            r.features[static_cast<std::size_t>(j)] = static_cast<double>(answer);
            s += weights(j) * (answer - 3);
        }
        // Standard logistic variate by inversion; the open interval keeps log finite.
        double u = unit(rng);
        u = std::clamp(u, 1e-12, 1.0 - 1e-12);
        score[i] = s * scale + c.noise_level * std::log(u / (1.0 - u));
    }

    // The top round(fraction * n) scores form the accident class, so the
    // threshold is the empirical (1 - fraction) quantile of the score.
    const auto positives =
        static_cast<std::size_t>(std::llround(c.minority_fraction * static_cast<double>(c.n_rows)));
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    std::uniform_int_distribution<int> extra_accidents(0, 2);
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        auto& r = rows[order[rank]];
        r.accident_count = rank < positives ? 1 + extra_accidents(rng) : 0;
    }

    if (c.missing_rate > 0.0) {
        for (auto& r : rows)
            for (auto& f : r.features)
                if (unit(rng) < c.missing_rate) f.reset();
    }
    return rows;
}

}  // namespace

int likert_from_latent(double z) {
    int answer = 1;
    for (double cut : kQuintiles)
        if (z > cut) ++answer;
    return answer;
}

void GeneratorSpec::validate() const {
    if (companies.empty()) throw DataError("generator: no companies specified");
    if (feature_dim < 2) throw DataError("generator: feature_dim must be >= 2");
    for (const auto& c : companies) {
        const std::string who = "generator: company " + std::to_string(c.company_id) + ": ";
        if (c.n_rows < 20) throw DataError(who + "n_rows must be >= 20");
        if (!(c.minority_fraction > 0.0 && c.minority_fraction <= 0.5))
            throw DataError(who + "minority_fraction must lie in (0, 0.5]");
        if (std::llround(c.minority_fraction * c.n_rows) < 2)
            throw DataError(who + "minority_fraction yields fewer than 2 minority rows");
        if (!(c.weight_perturbation >= 0.0)) throw DataError(who + "weight_perturbation must be >= 0");
        if (!(c.noise_level >= 0.0)) throw DataError(who + "noise_level must be >= 0");
        if (!(c.missing_rate >= 0.0 && c.missing_rate <= 0.3))
            throw DataError(who + "missing_rate must lie in [0, 0.3]");
    }
}

std::vector<std::vector<RawRecord>> generate(const GeneratorSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng shared_rng(derive_seed(spec.shared_weights_seed, "shared_weights"));
    const Eigen::VectorXd shared = normal_vector(spec.feature_dim, shared_rng);

    std::vector<std::vector<RawRecord>> out;
    out.reserve(spec.companies.size());
    for (std::size_t i = 0; i < spec.companies.size(); ++i)
        out.push_back(generate_company(spec.companies[i], shared,
                                       derive_seed(seed, "company", i)));
    return out;
}

}  // namespace safenet
