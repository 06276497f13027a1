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

#pragma once

// QFI compression protocols.
//
// Equatorial inputs: the CNOT sum/difference block and the N-qubit cascade
// that keeps qubit 0 as control. General pure states: a decomposition of the
// energy distribution p(E) into mean-preserving components supported on at
// most two energies, the diagonal measurement realizing it, and the
// re-encoding of each post-measurement state into a single qubit.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfic/qfi.hpp"
#include "qfic/state.hpp"

namespace qfic {

/// Outcome of measuring the target after CNOT(control=theta1, target=theta2).
struct BlockOutcome {
    int bit = 0;
    double probability = 0.0;
    EquatorialPhase phase;
};

/// Outcome 0 heralds theta1 + theta2, outcome 1 heralds theta1 - theta2.
inline std::vector<BlockOutcome> two_qubit_block(EquatorialPhase theta1, EquatorialPhase theta2) {
    return {{0, 0.5, theta1 + theta2}, {1, 0.5, theta1 - theta2}};
}

inline constexpr int kMaxCascadeQubits = 20;

/// One branch of the cascade. `outcome_bits[j]` is the measurement on qubit j+1.
struct CascadeResult {
    std::vector<int> outcome_bits;
    EquatorialPhase final_phase;
    double probability = 0.0;
    int k_zero_count = 0;

    int qubits() const { return static_cast<int>(outcome_bits.size()) + 1; }

    /// c in theta_tot = c * theta when all inputs share the phase theta; c = 2k + 2 - N.
    int common_phase_multiplier() const { return 2 * k_zero_count + 2 - qubits(); }

    /// QFI of the surviving qubit with respect to a shared input phase.
    double common_phase_qfi() const {
        const double c = common_phase_multiplier();
        return c * c;
    }
};

namespace detail {

inline void check_cascade_size(std::size_t n) {
    if (n < 2 || n > kMaxCascadeQubits) {
        throw std::invalid_argument("cascade: qubit count " + std::to_string(n) + " outside [2, " +
                                    std::to_string(kMaxCascadeQubits) + "]");
    }
}

// Branch index i encodes m_2 as its most significant bit and m_N as its least.
inline CascadeResult cascade_branch(std::span<const EquatorialPhase> phases, std::uint32_t index) {
    const std::size_t measured = phases.size() - 1;
    CascadeResult r;
    r.outcome_bits.resize(measured);
    double total = phases[0].radians();
    for (std::size_t j = 0; j < measured; ++j) {
        const int bit = static_cast<int>((index >> (measured - 1 - j)) & 1U);
        r.outcome_bits[j] = bit;
        total += bit ? -phases[j + 1].radians() : phases[j + 1].radians();
        r.k_zero_count += bit ? 0 : 1;
    }
    r.final_phase = EquatorialPhase(total);
    r.probability = std::ldexp(1.0, -static_cast<int>(measured));
    return r;
}

}  // namespace detail

/// All 2^{N-1} branches of the cascade, ordered by outcome bit string.
inline std::vector<CascadeResult> cascade_enumerate(std::span<const EquatorialPhase> phases) {
    detail::check_cascade_size(phases.size());
    const std::uint32_t branches = std::uint32_t{1} << (phases.size() - 1);
    std::vector<CascadeResult> out;
    out.reserve(branches);
    for (std::uint32_t i = 0; i < branches; ++i) {
        out.push_back(detail::cascade_branch(phases, i));
    }
    return out;
}

inline std::vector<EquatorialPhase> equal_phases(int n, EquatorialPhase theta) {
    return std::vector<EquatorialPhase>(static_cast<std::size_t>(std::max(n, 0)), theta);
}

/// sum over branches of p * QFI, with QFI taken with respect to a shared phase.
inline double cascade_average_qfi(std::span<const CascadeResult> branches) {
    double acc = 0.0;
    for (const auto& b : branches) {
        acc += b.probability * b.common_phase_qfi();
    }
    return acc;
}

/// Monte Carlo tally of cascade branches.
struct CascadeSample {
    std::vector<EquatorialPhase> phases;
    long long trials = 0;
    /// Hits per branch index, same indexing as `cascade_enumerate`.
    std::vector<long long> counts;

    int qubits() const { return static_cast<int>(phases.size()); }

    double frequency(std::size_t branch) const { return static_cast<double>(counts[branch]) / static_cast<double>(trials); }

    /// Hits per k (number of zero outcomes), k = 0..N-1.
    std::vector<long long> k_histogram() const {
        std::vector<long long> h(phases.size(), 0);
        const int measured = qubits() - 1;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            const int ones = std::popcount(static_cast<std::uint32_t>(i));
            h[static_cast<std::size_t>(measured - ones)] += counts[i];
        }
        return h;
    }

    /// Empirical mean of (2k + 2 - N)^2.
    double mean_common_phase_qfi() const {
        const auto h = k_histogram();
        const int n = qubits();
        double acc = 0.0;
        for (std::size_t k = 0; k < h.size(); ++k) {
            const double c = 2.0 * static_cast<double>(k) + 2.0 - n;
            acc += c * c * static_cast<double>(h[k]);
        }
        return acc / static_cast<double>(trials);
    }

    CascadeResult branch(std::uint32_t index) const { return detail::cascade_branch(phases, index); }
};

/// Draws `trials` cascade runs. Each run consumes one 64-bit draw whose top
/// N-1 bits are the fair measurement outcomes, so results depend only on the seed.
inline CascadeSample cascade_sample(std::span<const EquatorialPhase> phases, std::uint64_t rng_seed, long long trials) {
    detail::check_cascade_size(phases.size());
    if (trials < 1) {
        throw std::invalid_argument("cascade_sample: trials must be >= 1");
    }
    const int measured = static_cast<int>(phases.size()) - 1;
    CascadeSample s;
    s.phases.assign(phases.begin(), phases.end());
    s.trials = trials;
    s.counts.assign(std::size_t{1} << measured, 0);
    std::mt19937_64 rng(rng_seed);
    for (long long t = 0; t < trials; ++t) {
        const std::uint64_t bits = rng() >> (64 - measured);
        ++s.counts[bits];
    }
    return s;
}

/// Classical bits needed to record k, which takes n values: ceil(log2 n).
inline int classical_register_size(int n) {
    if (n < 2) {
        throw std::invalid_argument("classical_register_size: n must be >= 2");
    }
    return std::bit_width(static_cast<unsigned>(n - 1));
}

/// Support point of a component: parent basis index, energy, and p(E|k).
struct SupportPoint {
    std::size_t index = 0;
    double energy = 0.0;
    double conditional = 0.0;
};

/// Mean-preserving component p(E|k) supported on one or two energies.
struct TwoPointComponent {
    double weight = 0.0;
    std::vector<SupportPoint> support;
    double mean = 0.0;

    EnergyDistribution distribution() const {
        std::vector<EnergyLevel> levels;
        for (const auto& s : support) {
            levels.push_back({s.energy, s.conditional});
        }
        return EnergyDistribution(std::move(levels), kTolerances.algebraic);
    }
};

struct CompressionEnsemble {
    std::vector<TwoPointComponent> components;
    /// Diagonal M_k over the parent's energy basis.
    std::vector<ComplexMatrix> measurement_ops;
    EnergyDistribution parent;

    std::size_t size() const { return components.size(); }

    /// max_E |sum_k p_k p(E|k) - p(E)|.
    double mixture_residual() const {
        std::vector<double> mix(parent.size(), 0.0);
        for (const auto& c : components) {
            for (const auto& s : c.support) {
                mix[s.index] += c.weight * s.conditional;
            }
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < parent.size(); ++i) {
            worst = std::max(worst, std::abs(mix[i] - parent[i].probability));
        }
        return worst;
    }

    /// max_k |mean_k - epsilon|.
    double mean_residual() const {
        double worst = 0.0;
        for (const auto& c : components) {
            worst = std::max(worst, std::abs(c.mean - parent.mean()));
        }
        return worst;
    }

    double completeness_residual() const { return qfic::completeness_residual(measurement_ops); }

    /// sum_k p_k F(p(.|k)).
    double average_qfi() const {
        std::vector<WeightedDistribution> outcomes;
        for (const auto& c : components) {
            outcomes.push_back({c.weight, c.distribution()});
        }
        return qfic::average_qfi(outcomes);
    }

    std::size_t max_support() const {
        std::size_t m = 0;
        for (const auto& c : components) {
            m = std::max(m, c.support.size());
        }
        return m;
    }
};

/// M_k = sum_E sqrt(p(k|E)) |E><E| with p(k|E) = p(E|k) p_k / p(E).
/// Each column p(.|E) is renormalized to absorb rounding left by the decomposition.
inline std::vector<ComplexMatrix> build_measurement(const CompressionEnsemble& ensemble) {
    const EnergyDistribution& parent = ensemble.parent;
    const auto d = static_cast<Eigen::Index>(parent.size());
    for (std::size_t i = 0; i < parent.size(); ++i) {
        if (parent[i].probability < kTolerances.zero_probability) {
            throw std::invalid_argument("build_measurement: parent has zero probability at E=" +
                                        std::to_string(parent[i].energy));
        }
    }
    const std::size_t k_count = ensemble.components.size();
    // given[k][i] = p(k | E_i)
    std::vector<std::vector<double>> given(k_count, std::vector<double>(parent.size(), 0.0));
    std::vector<double> column(parent.size(), 0.0);
    for (std::size_t k = 0; k < k_count; ++k) {
        const auto& c = ensemble.components[k];
        for (const auto& s : c.support) {
            if (s.index >= parent.size()) {
                throw std::out_of_range("build_measurement: component references an energy outside the parent");
            }
            const double v = s.conditional * c.weight / parent[s.index].probability;
            given[k][s.index] = v;
            column[s.index] += v;
        }
    }
    std::vector<ComplexMatrix> ops;
    ops.reserve(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
        ComplexMatrix m = ComplexMatrix::Zero(d, d);
        for (std::size_t i = 0; i < parent.size(); ++i) {
            if (column[i] > 0.0) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = std::sqrt(given[k][i] / column[i]);
            }
        }
        ops.push_back(std::move(m));
    }
    return ops;
}

/// Greedy Caratheodory decomposition of p(E) into components of support <= 2
/// and mean epsilon.
///
/// Repeatedly pairs the most probable residual energy below epsilon with the
/// most probable one above it (ties go to the smaller energy), extracts the
/// largest multiple of the unique two-point distribution on that pair with
/// mean epsilon, and zeroes whichever endpoint is exhausted. Mass sitting at
/// epsilon itself becomes a trailing point-mass component. Every extraction
/// empties at least one energy and the last empties two, so K <= d - 1 for
/// d >= 2. Entries below the zero-probability threshold are pruned first.
inline CompressionEnsemble decompose_two_point(const EnergyDistribution& input) {
    bool needs_prune = false;
    for (const auto& e : input.entries()) {
        needs_prune = needs_prune || e.probability < kTolerances.zero_probability;
    }
    CompressionEnsemble ens;
    ens.parent = needs_prune ? input.pruned() : input;
    const EnergyDistribution& parent = ens.parent;
    const double eps = parent.mean();
    const std::size_t d = parent.size();

    double scale = 1.0;
    for (const auto& e : parent.entries()) {
        scale = std::max(scale, std::abs(e.energy));
    }
    const double at_mean_tol = kTolerances.norm * scale;

    std::vector<double> residual(d);
    for (std::size_t i = 0; i < d; ++i) {
        residual[i] = parent[i].probability;
    }
    auto better = [&](std::size_t cand, std::ptrdiff_t best) {
        if (best < 0) {
            return true;
        }
        const auto b = static_cast<std::size_t>(best);
        if (residual[cand] != residual[b]) {
            return residual[cand] > residual[b];
        }
        return parent[cand].energy < parent[b].energy;
    };

    while (true) {
        std::ptrdiff_t lo = -1;
        std::ptrdiff_t hi = -1;
        for (std::size_t i = 0; i < d; ++i) {
            if (residual[i] <= 0.0) {
                continue;
            }
            const double e = parent[i].energy;
            if (e < eps - at_mean_tol) {
                if (better(i, lo)) {
                    lo = static_cast<std::ptrdiff_t>(i);
                }
            } else if (e > eps + at_mean_tol) {
                if (better(i, hi)) {
                    hi = static_cast<std::ptrdiff_t>(i);
                }
            }
        }
        if (lo < 0 || hi < 0) {
            break;
        }
        const auto a = static_cast<std::size_t>(lo);
        const auto b = static_cast<std::size_t>(hi);
        const double ea = parent[a].energy;
        const double eb = parent[b].energy;
        const double qa = (eb - eps) / (eb - ea);
        const double qb = (eps - ea) / (eb - ea);
        const double wa = residual[a] / qa;
        const double wb = residual[b] / qb;
        const double w = std::min(wa, wb);
        if (wa <= wb) {
            residual[a] = 0.0;
            residual[b] = std::max(0.0, residual[b] - w * qb);
        } else {
            residual[b] = 0.0;
            residual[a] = std::max(0.0, residual[a] - w * qa);
        }
        ens.components.push_back({w, {{a, ea, qa}, {b, eb, qb}}, qa * ea + qb * eb});
    }

    // What remains is mass at epsilon plus rounding debris on one side.
    double debris = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        if (residual[i] <= 0.0) {
            continue;
        }
        if (std::abs(parent[i].energy - eps) <= at_mean_tol) {
            ens.components.push_back({residual[i], {{i, parent[i].energy, 1.0}}, parent[i].energy});
        } else {
            debris += residual[i];
        }
    }
    if (debris > kTolerances.algebraic) {
        throw std::logic_error("decompose_two_point: unpaired residual mass " + std::to_string(debris));
    }
    ens.measurement_ops = build_measurement(ens);
    return ens;
}

/// Post-measurement state re-encoded into a qubit by W_k = |0><E_0| + |1><E_1|.
struct QubitEncoding {
    StateVector qubit;
    double energy0 = 0.0;
    double energy1 = 0.0;

    /// QFI with respect to theta under the effective generator diag(E_0, E_1).
    double qfi() const { return qfi_of_state(Generator({energy0, energy1}), qubit); }
};

/// Maps the component's support onto |0>, |1>. A point-mass component maps to
/// |0> with E_1 = E_0.
inline QubitEncoding encode_to_qubit(const StateVector& post_state, const TwoPointComponent& component) {
    if (component.support.empty() || component.support.size() > 2) {
        throw std::invalid_argument("encode_to_qubit: component support must have one or two points");
    }
    double inside = 0.0;
    for (const auto& s : component.support) {
        if (s.index >= post_state.basis_dim()) {
            throw std::out_of_range("encode_to_qubit: support index outside the state");
        }
        inside += std::norm(post_state[s.index]);
    }
    const double leakage = post_state.amplitudes().squaredNorm() - inside;
    if (leakage > kTolerances.algebraic) {
        throw std::invalid_argument("encode_to_qubit: state has weight " + std::to_string(leakage) +
                                    " outside the component support");
    }
    const SupportPoint& p0 = component.support[0];
    const Complex a0 = post_state[p0.index];
    const Complex a1 = component.support.size() == 2 ? post_state[component.support[1].index] : Complex{0.0};
    QubitEncoding enc{StateVector{a0, a1}.normalized(), p0.energy,
                      component.support.size() == 2 ? component.support[1].energy : p0.energy};
    return enc;
}

struct CompressedOutcome {
    int label = 0;
    double probability = 0.0;
    bool valid = false;
    QubitEncoding encoding;
};

/// Measures the parent state at `theta` with the ensemble's operators and
/// encodes every valid outcome into a qubit.
inline std::vector<CompressedOutcome> compress_state(const CompressionEnsemble& ensemble, double theta) {
    const auto outcomes = apply_kraus(ensemble.parent.state(theta), ensemble.measurement_ops);
    std::vector<CompressedOutcome> out;
    out.reserve(outcomes.size());
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        CompressedOutcome c{outcomes[k].label, outcomes[k].probability, outcomes[k].valid, {}};
        if (c.valid) {
            c.encoding = encode_to_qubit(outcomes[k].post_state, ensemble.components[k]);
        }
        out.push_back(std::move(c));
    }
    return out;
}

/// sum_k p_k F(encoded qubit k).
inline double average_encoded_qfi(std::span<const CompressedOutcome> outcomes) {
    double acc = 0.0;
    for (const auto& o : outcomes) {
        if (o.valid) {
            acc += o.probability * o.encoding.qfi();
        }
    }
    return acc;
}

/// True when no perturbation f supported inside the component satisfies
/// sum f = 0 and sum E f = 0, i.e. the constraint matrix [1; E] restricted
/// to the support has trivial null space.
inline bool is_extreme_component(const TwoPointComponent& c) {
    std::vector<const SupportPoint*> live;
    for (const auto& s : c.support) {
        if (s.conditional > 0.0) {
            live.push_back(&s);
        }
    }
    if (live.empty()) {
        return false;
    }
    Eigen::MatrixXd constraints(2, static_cast<Eigen::Index>(live.size()));
    for (std::size_t i = 0; i < live.size(); ++i) {
        constraints(0, static_cast<Eigen::Index>(i)) = 1.0;
        constraints(1, static_cast<Eigen::Index>(i)) = live[i]->energy;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(constraints);
    return lu.dimensionOfKernel() == 0;
}

}  // namespace qfic
