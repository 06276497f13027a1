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

// Acceptance checks. `acceptance` runs all of them; `acceptance --criterion N`
// runs one. Each prints a single PASS/FAIL line; exit status is nonzero if
// any selected check fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qfic/qfic.hpp"
#include "test_util.hpp"

using namespace qfic;

namespace {

// Pinned tolerances and budgets.
constexpr double kBlockAmplitudeTol = 1e-12;
constexpr double kBlockRuntimeMs = 1.0;
constexpr double kCascadeQfiTol = 1e-9;
constexpr double kCascadeRuntimeS = 1.0;
constexpr int kCompressionCases = 1000;
constexpr double kMixtureTol = 1e-10;
constexpr double kCompletenessTol = 1e-10;
constexpr double kMeanTol = 1e-10;
constexpr double kEncodedQfiTol = 1e-9;
constexpr double kCompressionRuntimeS = 10.0;
constexpr double kPbsAmplitudeTol = 1e-12;
constexpr long long kFusionTrials = 1000000;
constexpr double kSigmas = 5.0;
constexpr long long kTreeTrials = 100000;
constexpr double kTreeQfiRelTol = 0.02;
constexpr long long kQcrbTrials = 10000;
constexpr double kQcrbRelTol = 0.05;
constexpr double kQcrbRuntimeS = 30.0;
constexpr double kFringeDeltaTol = 0.01;
constexpr double kFringeMinAmplitude = 0.999;
constexpr double kFringePhotons = 1e6;
constexpr double kDriftEta = 0.02;
constexpr double kDriftPhotons = 277;
constexpr long long kDriftTrials = 2000;
constexpr double kBiasLow = 0.01;
constexpr double kBiasHigh = 0.05;
constexpr int kConventionFamilies = 100;
constexpr double kConventionTol = 1e-6;

struct Result {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// Two-qubit block: statevector CNOT + target readout versus the phase rule.
Result criterion_1() {
    double worst = 0.0;
    double worst_p = 0.0;
    double fastest = 1e9;
    for (double theta : {0.0, 0.3, 1.1, 2.5, 4.0, 5.9}) {
        const auto t0 = Clock::now();
        const auto e = equatorial_state(EquatorialPhase(theta));
        const auto out = measure_projective(apply_unitary(tensor(e, e), gates::cnot(), {0, 1}), 1);
        fastest = std::min(fastest, seconds_since(t0) * 1e3);
        const auto rule = two_qubit_block(EquatorialPhase(theta), EquatorialPhase(theta));
        for (int m = 0; m < 2; ++m) {
            worst_p = std::max(worst_p, std::abs(out[m].probability - rule[m].probability));
            const StateVector control{out[m].post_state[static_cast<std::size_t>(m)],
                                      out[m].post_state[static_cast<std::size_t>(2 + m)]};
            worst = std::max(worst, phase_aligned_distance(control, equatorial_state(rule[m].phase)));
        }
        // The phase rule itself: {2 theta, 0}.
        worst = std::max(worst, std::abs(phase_distance(rule[0].phase.radians(), 2 * theta)));
        worst = std::max(worst, std::abs(phase_distance(rule[1].phase.radians(), 0.0)));
    }
    const bool ok = worst <= kBlockAmplitudeTol && worst_p <= kBlockAmplitudeTol && fastest < kBlockRuntimeMs;
    return {ok, "max amplitude error " + fmt(worst) + ", probability error " + fmt(worst_p) + ", runtime " +
                    fmt(fastest) + " ms"};
}

// Cascade QFI conservation for N = 2..12.
Result criterion_2() {
    double worst = 0.0;
    double runtime12 = 0.0;
    for (int n = 2; n <= 12; ++n) {
        const auto t0 = Clock::now();
        const auto branches = cascade_enumerate(equal_phases(n, EquatorialPhase(0.37)));
        if (n == 12) {
            runtime12 = seconds_since(t0);
        }
        std::vector<double> weight(static_cast<std::size_t>(n), 0.0);
        for (const auto& b : branches) {
            weight[static_cast<std::size_t>(b.k_zero_count)] += b.probability;
        }
        double acc = 0.0;
        for (int k = 0; k < n; ++k) {
            const double c = 2 * k + 2 - n;
            acc += weight[static_cast<std::size_t>(k)] * c * c;
        }
        worst = std::max(worst, std::abs(acc - n));
    }
    const bool ok = worst <= kCascadeQfiTol && runtime12 < kCascadeRuntimeS;
    return {ok, "max |avg QFI - N| " + fmt(worst) + ", N=12 enumeration " + fmt(runtime12) + " s"};
}

// General compression on random distributions.
Result criterion_3() {
    auto rng = gen::independent_rng(300);
    std::uniform_int_distribution<int> dim(2, 16);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    double mix = 0.0;
    double comp = 0.0;
    double mean = 0.0;
    double qfi = 0.0;
    int size_violations = 0;
    int support_violations = 0;
    const auto t0 = Clock::now();
    for (int i = 0; i < kCompressionCases; ++i) {
        const auto d = static_cast<std::size_t>(dim(rng));
        const auto parent = gen::random_distribution(d, rng);
        const auto ens = decompose_two_point(parent);
        size_violations += ens.size() > d - 1 ? 1 : 0;
        support_violations += ens.max_support() > 2 ? 1 : 0;
        mix = std::max(mix, oracle::mixture_error(ens));
        comp = std::max(comp, ens.completeness_residual());
        mean = std::max(mean, ens.mean_residual());
        const auto encoded = compress_state(ens, angle(rng));
        qfi = std::max(qfi, std::abs(average_encoded_qfi(encoded) - qfi_variance(parent)));
    }
    const double runtime = seconds_since(t0);
    const bool ok = size_violations == 0 && support_violations == 0 && mix <= kMixtureTol && comp <= kCompletenessTol &&
                    mean <= kMeanTol && qfi <= kEncodedQfiTol && runtime < kCompressionRuntimeS;
    return {ok, "K>d-1: " + std::to_string(size_violations) + ", support>2: " + std::to_string(support_violations) +
                    ", mixture " + fmt(mix) + ", completeness " + fmt(comp) + ", mean " + fmt(mean) + ", QFI " +
                    fmt(qfi) + ", runtime " + fmt(runtime) + " s"};
}

// Fusion gate: PBS amplitudes, steering, and sampled statistics.
Result criterion_4() {
    using P = Polarization;
    double amp = 0.0;
    double steer = 0.0;
    double succ = 0.0;
    auto rng = gen::independent_rng(400);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    for (int i = 0; i < 100; ++i) {
        const double t1 = angle(rng);
        const double t2 = i % 2 ? t1 : angle(rng);
        const auto out = pbs_transform(TwoPhotonState::product(equatorial_state(EquatorialPhase(t1)), 1,
                                                               equatorial_state(EquatorialPhase(t2)), 2));
        const auto ref = oracle::pbs_expected(t1, t2);
        amp = std::max({amp, std::abs(out.amplitude({3, P::H}, {4, P::H}) - ref.h3h4),
                        std::abs(out.amplitude({3, P::V}, {4, P::V}) - ref.v3v4),
                        std::abs(out.amplitude({3, P::H}, {3, P::V}) - ref.h3v3),
                        std::abs(out.amplitude({4, P::V}, {4, P::H}) - ref.v4h4)});
        const auto optics = fusion_optics(EquatorialPhase(t1), EquatorialPhase(t1));
        succ = std::max(succ, std::abs((1.0 - optics.discard_probability) - 0.5));
        for (int bit = 0; bit < 2; ++bit) {
            const auto& h = optics.heralded[static_cast<std::size_t>(bit)];
            const auto target = equatorial_state(EquatorialPhase(2 * t1 + kPi * bit));
            steer = std::max(steer, std::abs(1.0 - fidelity(h.polarization, target)));
            succ = std::max(succ, std::abs(h.probability / (1.0 - optics.discard_probability) - 0.5));
        }
    }
    std::mt19937_64 mc(401);
    long long success = 0;
    long long v = 0;
    const EquatorialPhase t(0.8);
    for (long long i = 0; i < kFusionTrials; ++i) {
        const auto f = fusion_gate(t, t, mc);
        success += f.succeeded() ? 1 : 0;
        v += f.succeeded() && f.herald_bit == 1 ? 1 : 0;
    }
    const double n = static_cast<double>(kFusionTrials);
    const double z_success = std::abs(success / n - 0.5) / std::sqrt(0.25 / n);
    const double z_herald = std::abs(static_cast<double>(v) / success - 0.5) / std::sqrt(0.25 / success);
    const bool ok = amp < kPbsAmplitudeTol && steer < kPbsAmplitudeTol && succ < kPbsAmplitudeTol &&
                    z_success <= kSigmas && z_herald <= kSigmas;
    return {ok, "amplitude error " + fmt(amp) + ", steering " + fmt(steer) + ", success-prob error " + fmt(succ) +
                    ", MC z(success) " + fmt(z_success) + ", z(herald) " + fmt(z_herald)};
}

// Fusion tree depth and survivor bounds.
Result criterion_5() {
    bool ok = true;
    std::ostringstream s;
    std::mt19937_64 rng(500);
    for (int n : {2, 3, 4, 8, 16}) {
        const auto st = fusion_tree(n, EquatorialPhase(0.4), rng, kTreeTrials);
        const int bound = floor_log2(n);
        const bool depth_ok = st.max_depth <= bound;
        const bool surv_ok = st.max_survivors <= bound;
        const bool qfi_ok = std::abs(st.mean_total_qfi - n) <= kTreeQfiRelTol * n;
        ok = ok && depth_ok && surv_ok && qfi_ok;
        s << "n=" << n << " depth " << st.max_depth << "/" << bound << (depth_ok ? "" : "!") << " survivors "
          << st.max_survivors << "/" << bound << (surv_ok ? "" : "!") << " QFI " << fmt(st.mean_total_qfi)
          << (qfi_ok ? "" : "!") << "; ";
    }
    return {ok, s.str()};
}

// QCRB saturation with the optimal-basis estimator.
Result criterion_6() {
    bool ok = true;
    std::ostringstream s;
    std::mt19937_64 rng(600);
    const auto t0 = Clock::now();
    for (double photons : {277.0, 522.0}) {
        const auto comp = optimal_basis_study(0.4, 2, 1.0, photons, kQcrbTrials, rng);
        const auto unc = optimal_basis_study(0.4, 1, 1.0, photons, kQcrbTrials, rng);
        const bool c_ok = std::abs(comp.scaled_std() - 0.5) <= kQcrbRelTol * 0.5;
        const bool u_ok = std::abs(unc.scaled_std() - 1.0) <= kQcrbRelTol * 1.0;
        ok = ok && c_ok && u_ok;
        s << "N=" << photons << " compressed " << fmt(comp.scaled_std()) << " uncompressed " << fmt(unc.scaled_std())
          << "; ";
    }
    const double runtime = seconds_since(t0);
    ok = ok && runtime < kQcrbRuntimeS;
    s << "runtime " << fmt(runtime) << " s";
    return {ok, s.str()};
}

// Fringe doubling on synthetic sweeps.
Result criterion_7() {
    std::mt19937_64 rng(700);
    std::vector<CountRecord> compressed;
    std::vector<CountRecord> uncompressed;
    for (double th : phase_sweep(-90.0, 270.0, 2.5)) {
        compressed.push_back(simulate_counts(th, FringeModel::ideal(), kFringePhotons, rng));
        uncompressed.push_back(simulate_counts(th, FringeModel::uncompressed(), kFringePhotons, rng));
    }
    const auto fc = fit_fringe(compressed);
    // Fitted on the same compressed-qubit grid, so the frequency is found, not assumed.
    const auto fu = fit_fringe(uncompressed);
    const bool ok = compressed.size() == 145 && std::abs(fc.model.frequency_offset) < kFringeDeltaTol &&
                    fc.model.amplitude > kFringeMinAmplitude && std::abs(fu.model.frequency() - 1.0) < kFringeDeltaTol;
    return {ok, "compressed f=" + fmt(fc.model.frequency()) + " A=" + fmt(fc.model.amplitude) +
                    ", uncompressed f=" + fmt(fu.model.frequency())};
}

// Bias from visibility drift.
Result criterion_8() {
    std::mt19937_64 rng(800);
    const auto phases = phase_sweep(5.0, 85.0, 10.0);
    const auto recs = drift_study(phases, FringeModel::ideal(), {1.0, kDriftEta}, kDriftPhotons, kDriftTrials, rng);
    double max_bias = 0.0;
    bool pos = false;
    bool neg = false;
    std::ostringstream s;
    for (const auto& r : recs) {
        max_bias = std::max(max_bias, r.bias);
        pos = pos || r.mean_error > 0.0;
        neg = neg || r.mean_error < 0.0;
    }
    const bool ok = max_bias >= kBiasLow && max_bias <= kBiasHigh && pos && neg;
    s << "max bias " << fmt(max_bias) << " rad (sqrt(N)-scaled " << fmt(max_bias * std::sqrt(kDriftPhotons))
      << "), signed error changes sign: " << (pos && neg ? "yes" : "no");
    return {ok, s.str()};
}

// Factor-4 convention: derivative and variance forms agree.
Result criterion_9() {
    auto rng = gen::independent_rng(900);
    std::uniform_int_distribution<int> dim(1, 8);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    double worst = 0.0;
    for (int i = 0; i < kConventionFamilies; ++i) {
        const auto dist = gen::random_distribution(static_cast<std::size_t>(dim(rng)), rng, 3.0);
        const double fd = qfi_derivative([&](double t) { return dist.state(t); }, angle(rng));
        worst = std::max(worst, std::abs(fd - qfi_variance(dist)));
    }
    const double e1 = qfi_derivative([](double t) { return equatorial_state(EquatorialPhase(t)); }, 0.3);
    const double e2 = qfi_derivative([](double t) { return equatorial_state(EquatorialPhase(2 * t)); }, 0.3);
    worst = std::max({worst, std::abs(e1 - 1.0), std::abs(e2 - 4.0)});
    return {worst <= kConventionTol, "max |derivative - variance| " + fmt(worst)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Result()>> checks{criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                                                      criterion_6, criterion_7, criterion_8, criterion_9};
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            const int c = std::atoi(argv[++i]);
            if (c < 1 || c > static_cast<int>(checks.size())) {
                std::fprintf(stderr, "unknown criterion %d\n", c);
                return 2;
            }
            selected.push_back(c);
        } else {
            std::fprintf(stderr, "usage: acceptance [--criterion N]...\n");
            return 2;
        }
    }
    if (selected.empty()) {
        for (int c = 1; c <= static_cast<int>(checks.size()); ++c) {
            selected.push_back(c);
        }
    }
    int failures = 0;
    for (int c : selected) {
        Result r;
        try {
            r = checks[static_cast<std::size_t>(c - 1)]();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %d: %s  %s\n", c, r.pass ? "PASS" : "FAIL", r.detail.c_str());
        failures += r.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
