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

// Quantum Fisher information of pure-state phase families.
//
// Convention: F = 4 Var(H) for |Psi_theta> = exp(-i theta H)|Psi>, so an
// equatorial qubit carries F = 1 and |e_{2 theta}> carries F = 4.

#include <algorithm>
#include <bit>
#include <cmath>
#include <concepts>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfic/state.hpp"

namespace qfic {

struct EnergyLevel {
    double energy = 0.0;
    double probability = 0.0;
};

/// Probability distribution over generator eigenvalues, p(E).
/// Entry order defines the energy basis |E_0>, |E_1>, ... used by `state()`.
class EnergyDistribution {
   public:
    EnergyDistribution() = default;

    /// Validates p >= 0, sum p = 1 within `tol`, and distinct energies.
    explicit EnergyDistribution(std::vector<EnergyLevel> entries, double tol = kTolerances.norm)
        : entries_(std::move(entries)) {
        if (entries_.empty()) {
            throw std::invalid_argument("EnergyDistribution: no entries");
        }
        double total = 0.0;
        for (const auto& e : entries_) {
            if (!std::isfinite(e.energy) || !std::isfinite(e.probability)) {
                throw std::invalid_argument("EnergyDistribution: non-finite entry");
            }
            if (e.probability < 0.0) {
                throw std::invalid_argument("EnergyDistribution: negative probability " + std::to_string(e.probability) +
                                            " at E=" + std::to_string(e.energy));
            }
            total += e.probability;
        }
        if (std::abs(total - 1.0) > tol) {
            throw std::invalid_argument("EnergyDistribution: probabilities sum to " + std::to_string(total));
        }
        std::vector<double> energies;
        for (const auto& e : entries_) {
            energies.push_back(e.energy);
        }
        std::sort(energies.begin(), energies.end());
        if (std::adjacent_find(energies.begin(), energies.end()) != energies.end()) {
            throw std::invalid_argument("EnergyDistribution: repeated energy value");
        }
        mean_ = 0.0;
        for (const auto& e : entries_) {
            mean_ += e.probability * e.energy;
        }
    }

    /// Rescales non-negative weights to unit mass.
    static EnergyDistribution from_weights(std::vector<EnergyLevel> weights) {
        double total = 0.0;
        for (const auto& w : weights) {
            total += w.probability;
        }
        if (!(total > 0.0)) {
            throw std::invalid_argument("EnergyDistribution::from_weights: total weight must be positive");
        }
        for (auto& w : weights) {
            w.probability /= total;
        }
        return EnergyDistribution(std::move(weights));
    }

    std::size_t size() const { return entries_.size(); }
    const std::vector<EnergyLevel>& entries() const { return entries_; }
    const EnergyLevel& operator[](std::size_t i) const { return entries_[i]; }

    /// epsilon = sum_E p(E) E.
    double mean() const { return mean_; }

    /// Central second moment; computed around the mean for stability.
    double variance() const {
        double v = 0.0;
        for (const auto& e : entries_) {
            const double d = e.energy - mean_;
            v += e.probability * d * d;
        }
        return v;
    }

    /// Copy with entries below `threshold` removed and the rest renormalized.
    EnergyDistribution pruned(double threshold = kTolerances.zero_probability) const {
        std::vector<EnergyLevel> kept;
        for (const auto& e : entries_) {
            if (e.probability >= threshold) {
                kept.push_back(e);
            }
        }
        return from_weights(std::move(kept));
    }

    /// sum_E sqrt(p(E)) exp(-i theta E) |E>, in entry order.
    StateVector state(double theta) const {
        ComplexVector v(static_cast<Eigen::Index>(entries_.size()));
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            v[static_cast<Eigen::Index>(i)] = std::polar(std::sqrt(entries_[i].probability), -theta * entries_[i].energy);
        }
        return StateVector(std::move(v));
    }

   private:
    std::vector<EnergyLevel> entries_;
    double mean_ = 0.0;
};

/// Self-adjoint generator H. Without explicit eigenvectors it is diagonal in
/// the computational basis.
class Generator {
   public:
    explicit Generator(std::vector<double> eigenvalues) : eigenvalues_(std::move(eigenvalues)) {
        if (eigenvalues_.empty()) {
            throw std::invalid_argument("Generator: no eigenvalues");
        }
    }

    /// Columns of `eigenvectors` are the eigenvectors for `eigenvalues`, in order.
    Generator(std::vector<double> eigenvalues, ComplexMatrix eigenvectors)
        : eigenvalues_(std::move(eigenvalues)), eigenvectors_(std::move(eigenvectors)) {
        const auto d = static_cast<Eigen::Index>(eigenvalues_.size());
        if (eigenvectors_->rows() != d || eigenvectors_->cols() != d) {
            throw std::invalid_argument("Generator: eigenvector matrix must be square with one column per eigenvalue");
        }
        double residual = unitarity_residual(*eigenvectors_);
        if (residual > kTolerances.algebraic) {
            throw std::invalid_argument("Generator: eigenvectors not orthonormal (residual " + std::to_string(residual) + ")");
        }
    }

    /// Diagonal generator sum_j c |1><1|_j on n qubits (qubit-0-major ordering).
    static Generator excitation_number(int qubits, double coefficient = 1.0) {
        std::vector<double> ev(std::size_t{1} << qubits);
        for (std::size_t b = 0; b < ev.size(); ++b) {
            ev[b] = coefficient * static_cast<double>(std::popcount(b));
        }
        return Generator(std::move(ev));
    }

    std::size_t dim() const { return eigenvalues_.size(); }
    const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    bool is_diagonal() const { return !eigenvectors_.has_value(); }

    /// Components of `state` in the eigenbasis.
    ComplexVector to_eigenbasis(const StateVector& state) const {
        check_dim(state);
        if (is_diagonal()) {
            return state.amplitudes();
        }
        return eigenvectors_->adjoint() * state.amplitudes();
    }

    ComplexVector from_eigenbasis(const ComplexVector& coeffs) const {
        if (is_diagonal()) {
            return coeffs;
        }
        return *eigenvectors_ * coeffs;
    }

    /// exp(-i theta H) |state>.
    StateVector evolve(const StateVector& state, double theta) const {
        ComplexVector c = to_eigenbasis(state);
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            c[i] *= std::polar(1.0, -theta * eigenvalues_[static_cast<std::size_t>(i)]);
        }
        return StateVector(from_eigenbasis(c));
    }

    /// p(E) of `state`, merging degenerate eigenvalues that agree within `merge_tol`.
    EnergyDistribution energy_distribution(const StateVector& state, double merge_tol = kTolerances.algebraic) const {
        ComplexVector c = to_eigenbasis(state);
        std::vector<std::pair<double, double>> pairs;
        for (std::size_t i = 0; i < eigenvalues_.size(); ++i) {
            pairs.emplace_back(eigenvalues_[i], std::norm(c[static_cast<Eigen::Index>(i)]));
        }
        std::sort(pairs.begin(), pairs.end());
        std::vector<EnergyLevel> levels;
        for (const auto& [e, p] : pairs) {
            if (!levels.empty() && std::abs(levels.back().energy - e) <= merge_tol) {
                levels.back().probability += p;
            } else {
                levels.push_back({e, p});
            }
        }
        return EnergyDistribution::from_weights(std::move(levels));
    }

   private:
    void check_dim(const StateVector& state) const {
        if (state.basis_dim() != dim()) {
            throw std::invalid_argument("Generator: state dimension mismatch");
        }
    }

    std::vector<double> eigenvalues_;
    std::optional<ComplexMatrix> eigenvectors_;
};

struct DerivativeOptions {
    double step = 1e-5;
    /// Combine steps h and h/2 to cancel the O(h^2) truncation term.
    bool richardson = false;
};

template <typename F>
concept StateFamily = std::invocable<F, double> && std::convertible_to<std::invoke_result_t<F, double>, StateVector>;

/// 4(<dPsi|dPsi> - |<Psi|dPsi>|^2) with dPsi from central differences.
template <StateFamily F>
double qfi_derivative(F&& family, double theta, DerivativeOptions options = {}) {
    if (!(options.step > 0.0 && options.step <= 1e-3)) {
        throw std::invalid_argument("qfi_derivative: step must lie in (0, 1e-3]");
    }
    auto eval = [&](double t) {
        StateVector s = family(t);
        if (!s.is_normalized(kTolerances.algebraic)) {
            throw std::invalid_argument("qfi_derivative: family returned a non-normalized state (norm " +
                                        std::to_string(s.norm()) + ")");
        }
        return s;
    };
    auto central = [&](double h) -> ComplexVector {
        return (eval(theta + h).amplitudes() - eval(theta - h).amplitudes()) / (2.0 * h);
    };
    const StateVector psi = eval(theta);
    ComplexVector d = central(options.step);
    if (options.richardson) {
        d = (4.0 * central(options.step / 2.0) - d) / 3.0;
    }
    const double dd = d.squaredNorm();
    const double overlap = std::norm(psi.amplitudes().dot(d));
    return 4.0 * (dd - overlap);
}

/// 4 Var_p(E).
inline double qfi_variance(const EnergyDistribution& dist) { return 4.0 * dist.variance(); }

/// 4 (<H^2> - <H>^2) evaluated directly on a state.
inline double qfi_of_state(const Generator& generator, const StateVector& state) {
    ComplexVector c = generator.to_eigenbasis(state);
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < generator.dim(); ++i) {
        const double p = std::norm(c[static_cast<Eigen::Index>(i)]);
        const double e = generator.eigenvalues()[i];
        m1 += p * e;
        m2 += p * e * e;
    }
    return 4.0 * (m2 - m1 * m1);
}

struct WeightedDistribution {
    double probability = 0.0;
    EnergyDistribution distribution;
};

/// sum_k p_k F(dist_k).
inline double average_qfi(std::span<const WeightedDistribution> outcomes) {
    double total = 0.0;
    double acc = 0.0;
    for (const auto& o : outcomes) {
        total += o.probability;
        acc += o.probability * qfi_variance(o.distribution);
    }
    if (std::abs(total - 1.0) > kTolerances.algebraic) {
        throw std::invalid_argument("average_qfi: outcome probabilities sum to " + std::to_string(total));
    }
    return acc;
}

/// Cramer-Rao variance bound 1/(F * trials).
inline double qcrb_variance(double qfi, long long trials) {
    if (!(qfi > 0.0)) {
        throw std::invalid_argument("qcrb_variance: QFI must be positive");
    }
    if (trials < 1) {
        throw std::invalid_argument("qcrb_variance: trials must be >= 1");
    }
    return 1.0 / (qfi * static_cast<double>(trials));
}

}  // namespace qfic
