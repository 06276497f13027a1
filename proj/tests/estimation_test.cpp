// Copyright 2026 The qfic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qfic/estimation.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace qfic;

namespace {

std::vector<CountRecord> sweep(const FringeModel& model, double mean_photons, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<CountRecord> out;
    for (double th : phase_sweep(-90.0, 270.0, 2.5)) {
        out.push_back(simulate_counts(th, model, mean_photons, rng));
    }
    return out;
}

// Noise-free "counts": expected values rounded at a huge photon number.
std::vector<CountRecord> exact_sweep(const FringeModel& model) {
    std::vector<CountRecord> out;
    const double n = 1e12;
    for (double th : phase_sweep(-90.0, 270.0, 2.5)) {
        out.push_back({th, std::llround(n * fringe_probability(th, model, Sign::plus)),
                       std::llround(n * fringe_probability(th, model, Sign::minus)), 1.0});
    }
    return out;
}

}  // namespace

TEST(fringe_probability, examples) {
    EXPECT_DOUBLE_EQ(fringe_probability(0.0, FringeModel::ideal(), Sign::plus), 1.0);
    EXPECT_NEAR(fringe_probability(kPi / 4, FringeModel::ideal(), Sign::plus), 0.5, 1e-15);
    EXPECT_NEAR(fringe_probability(kPi / 4, FringeModel::ideal(), Sign::minus), 0.5, 1e-15);
    EXPECT_NEAR(fringe_probability(0.0, {0.9, 0.0, 0.0}, Sign::plus), 0.95, 1e-15);
    EXPECT_NEAR(fringe_probability(kPi / 2, FringeModel::uncompressed(), Sign::plus), 0.5, 1e-15);
    EXPECT_THROW((FringeModel{1.2, 0.0, 0.0}).validate(), std::invalid_argument);
}

TEST(simulate_counts, examples) {
    std::mt19937_64 rng(1);
    auto r = simulate_counts(0.0, FringeModel::ideal(), 1e6, rng);
    EXPECT_LT(static_cast<double>(r.n_minus) / static_cast<double>(r.total()), 1e-3);

    std::mt19937_64 a(77);
    std::mt19937_64 b(77);
    auto ra = simulate_counts(0.3, FringeModel::ideal(), 277, a);
    auto rb = simulate_counts(0.3, FringeModel::ideal(), 277, b);
    EXPECT_EQ(ra.n_plus, rb.n_plus);
    EXPECT_EQ(ra.n_minus, rb.n_minus);
    EXPECT_THROW(simulate_counts(0.3, FringeModel::ideal(), 0.0, a), std::invalid_argument);
    EXPECT_EQ(sweep(FringeModel::ideal(), 277, 3).size(), 145u);
}

TEST(estimate_arccos, examples) {
    const auto ideal = FringeModel::ideal();
    EXPECT_NEAR(estimate_arccos({0.0, 50, 50}, ideal).theta, kPi / 4, 1e-15);
    EXPECT_EQ(estimate_arccos({0.0, 50, 0}, ideal).theta, 0.0);
    EXPECT_NEAR(estimate_arccos({0.0, 0, 50}, ideal).theta, kPi / 2, 1e-15);
    EXPECT_THROW(estimate_arccos({0.0, 0, 0}, ideal), std::invalid_argument);

    auto clamped = estimate_arccos({0.0, 100, 0}, {0.9, 0.0, 0.0});
    EXPECT_TRUE(clamped.clamped);
    EXPECT_EQ(clamped.theta, 0.0);

    // -phi is applied after dividing by the frequency.
    FringeModel shifted{1.0, 0.5, 0.2};
    EXPECT_NEAR(estimate_arccos({0.0, 50, 50}, shifted).theta, (kPi / 2) / 2.5 - 0.2, 1e-15);
}

TEST(estimate_arccos, consistent_on_ideal_data) {
    std::mt19937_64 rng(11);
    const auto ideal = FringeModel::ideal();
    const long long trials = 10000;
    const double n = 1e4;
    for (double theta : {0.3, 0.7, 1.2}) {
        std::vector<double> est;
        for (long long t = 0; t < trials; ++t) {
            est.push_back(estimate_arccos(simulate_counts(theta, ideal, n, rng), ideal).theta);
        }
        auto rec = error_statistics(est, theta, n);
        EXPECT_LT(std::abs(rec.mean_error), 3.0 * rec.std_dev / std::sqrt(static_cast<double>(trials)));
    }
}

TEST(estimate_optimal_basis, examples) {
    EXPECT_EQ(estimate_optimal_basis({0.0, 100, 100}, 0.4).theta, 0.4);
    const double eps = 1e-4;
    const long long n = 1000000;
    auto r = estimate_optimal_basis({0.0, std::llround(n * (1 + eps) / 2), std::llround(n * (1 - eps) / 2)}, 0.4);
    EXPECT_NEAR(r.theta, 0.4 + eps / 2, 1e-9);
    EXPECT_THROW(estimate_optimal_basis({0.0, 0, 0}, 0.4), std::invalid_argument);
    EXPECT_THROW(estimate_optimal_basis({0.0, 1, 1}, 0.4, 0), std::invalid_argument);
}

TEST(estimate_optimal_basis, saturates_compressed_and_uncompressed_bounds) {
    std::mt19937_64 rng(12);
    auto compressed = optimal_basis_study(0.5, 2, 1.0, 2000, 10000, rng);
    EXPECT_NEAR(compressed.scaled_std(), 0.5, 0.025);
    auto uncompressed = optimal_basis_study(0.5, 1, 1.0, 2000, 10000, rng);
    EXPECT_NEAR(uncompressed.scaled_std(), 1.0, 0.05);
}

TEST(fit_fringe, recovers_ideal_model) {
    auto fit = fit_fringe(exact_sweep(FringeModel::ideal()));
    EXPECT_TRUE(fit.converged);
    EXPECT_TRUE(fit.identifiable);
    EXPECT_NEAR(fit.model.amplitude, 1.0, 1e-3);
    EXPECT_NEAR(fit.model.frequency_offset, 0.0, 1e-3);
    EXPECT_NEAR(fit.model.phase_offset, 0.0, 1e-3);
    EXPECT_LT(fit.residual_sum, 1e-12);
}

TEST(fit_fringe, recovers_perturbed_model_within_three_sigma) {
    const FringeModel truth{0.95, 0.02, 0.1};
    auto fit = fit_fringe(sweep(truth, 5000, 21));
    ASSERT_TRUE(fit.identifiable);
    EXPECT_NEAR(fit.model.amplitude, truth.amplitude, 3 * fit.sigma_amplitude);
    EXPECT_NEAR(fit.model.frequency_offset, truth.frequency_offset, 3 * fit.sigma_delta);
    EXPECT_NEAR(fit.model.phase_offset, truth.phase_offset, 3 * fit.sigma_phi);
    EXPECT_GT(fit.sigma_amplitude, 0.0);
}

TEST(fit_fringe, uncompressed_sweep_has_unit_frequency) {
    FringeFitOptions opts;
    opts.base_frequency = 1.0;
    auto fit = fit_fringe(exact_sweep(FringeModel::uncompressed()), opts);
    EXPECT_NEAR(fit.model.frequency(), 1.0, 1e-3);
    // Same data fitted around a compressed base finds delta = -1.
    auto wide = fit_fringe(exact_sweep(FringeModel::uncompressed()));
    EXPECT_NEAR(wide.model.frequency(), 1.0, 1e-3);
}

TEST(fit_fringe, flat_data_is_unidentifiable) {
    auto fit = fit_fringe(exact_sweep({0.0, 0.0, 0.0}));
    EXPECT_FALSE(fit.identifiable);
    EXPECT_NEAR(fit.model.amplitude, 0.0, 1e-6);
}

TEST(fit_fringe, rejects_too_few_or_too_narrow_records) {
    std::vector<CountRecord> few(5, CountRecord{0.0, 1, 1});
    EXPECT_THROW(fit_fringe(few), std::invalid_argument);
    std::vector<CountRecord> narrow;
    for (int i = 0; i < 10; ++i) {
        narrow.push_back({0.01 * i, 5, 5});
    }
    EXPECT_THROW(fit_fringe(narrow), std::invalid_argument);
}

TEST(error_statistics, examples) {
    auto rec = error_statistics({1.3, 1.3, 1.3}, 1.0, 100);
    EXPECT_EQ(rec.std_dev, 0.0);
    EXPECT_NEAR(rec.rmse, 0.3, 1e-15);
    EXPECT_NEAR(rec.bias, 0.3, 1e-15);
    EXPECT_NEAR(rec.scaled_bias(), 3.0, 1e-14);
    EXPECT_THROW(error_statistics({1.0}, 1.0, 1), std::invalid_argument);
}

TEST(error_statistics, rmse_decomposes_into_std_and_bias) {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g(0.05, 0.2);
    std::vector<double> est;
    for (int i = 0; i < 20000; ++i) {
        est.push_back(1.0 + g(rng));
    }
    auto rec = error_statistics(est, 1.0, 1.0);
    EXPECT_NEAR(rec.rmse * rec.rmse, rec.std_dev * rec.std_dev + rec.bias * rec.bias, 1e-5);
    EXPECT_NEAR(rec.bias, 0.05, 0.01);
    EXPECT_GE(rec.rmse, rec.bias);
}

TEST(drift_study, drift_produces_sign_changing_error) {
    std::mt19937_64 rng(14);
    auto phases = phase_sweep(5, 85, 10);
    auto recs = drift_study(phases, FringeModel::ideal(), {1.0, 0.02}, 277, 2000, rng);
    ASSERT_EQ(recs.size(), phases.size());
    bool pos = false;
    bool neg = false;
    for (const auto& r : recs) {
        pos = pos || r.mean_error > 0;
        neg = neg || r.mean_error < 0;
    }
    EXPECT_TRUE(pos && neg);
    EXPECT_THROW(drift_study({}, FringeModel::ideal(), {}, 1, 1, rng), std::invalid_argument);
}

TEST(phase_sweep, fringe_grid_has_145_points) {
    auto p = phase_sweep(-90, 270, 2.5);
    ASSERT_EQ(p.size(), 145u);
    EXPECT_NEAR(p.front(), -kPi / 2, 1e-15);
    EXPECT_NEAR(p.back(), 1.5 * kPi, 1e-14);
    EXPECT_THROW(phase_sweep(0, -1, 1), std::invalid_argument);
}
