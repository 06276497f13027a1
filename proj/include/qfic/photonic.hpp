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

// Dual-rail linear optics for the photonic compression experiments.
//
// Polarization qubits use |H> = |0> and |V> = |1>. Two-photon states are
// stored as amplitudes over unordered mode pairs in the normalized Fock
// basis, so a doubly occupied mode {m, m} carries the amplitude of |2_m>.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qfic/state.hpp"

namespace qfic {

enum class Polarization : int { H = 0, V = 1 };

struct OpticalMode {
    int path = 0;
    Polarization polarization = Polarization::H;

    auto operator<=>(const OpticalMode&) const = default;
};

inline std::string to_string(const OpticalMode& m) {
    return std::string(m.polarization == Polarization::H ? "H" : "V") + std::to_string(m.path);
}

/// Half-wave plate with fast axis at `angle` from horizontal.
inline ComplexMatrix jones_hwp(double angle) {
    ComplexMatrix m(2, 2);
    const double c = std::cos(2.0 * angle);
    const double s = std::sin(2.0 * angle);
    m << c, s, s, -c;
    return m;
}

/// Quarter-wave plate with fast axis at `angle`; diag(1, i) at angle 0.
inline ComplexMatrix jones_qwp(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const Complex i{0.0, 1.0};
    ComplexMatrix m(2, 2);
    m << c * c + i * s * s, (1.0 - i) * s * c, (1.0 - i) * s * c, s * s + i * c * c;
    return m;
}

/// PBS (transmit H) -> HWP at pi/8 - theta/4 -> QWP at 45 degrees, applied to |H>.
/// The output is X|e_theta> up to a global phase: the chain realizes the
/// equatorial state in the frame with |V> as logical |0>.
inline StateVector prepare_polarization(double theta) {
    ComplexVector h(2);
    h << 1.0, 0.0;
    ComplexVector out = jones_qwp(kPi / 4.0) * (jones_hwp(kPi / 8.0 - theta / 4.0) * h);
    return StateVector(std::move(out));
}

/// Fixed unitary taking `prepare_polarization(theta)` to `equatorial_state(theta)`.
inline ComplexMatrix preparation_frame() { return gates::pauli_x(); }

using ModePair = std::pair<OpticalMode, OpticalMode>;

inline ModePair make_pair_sorted(OpticalMode a, OpticalMode b) { return a <= b ? ModePair{a, b} : ModePair{b, a}; }

/// Two photons over a set of optical modes.
class TwoPhotonState {
   public:
    TwoPhotonState() = default;

    /// Product of one polarization qubit on `path_a` and one on `path_b`.
    static TwoPhotonState product(const StateVector& pol_a, int path_a, const StateVector& pol_b, int path_b) {
        if (pol_a.basis_dim() != 2 || pol_b.basis_dim() != 2) {
            throw std::invalid_argument("TwoPhotonState::product: polarization states must be qubits");
        }
        if (path_a == path_b) {
            throw std::invalid_argument("TwoPhotonState::product: photons must start on distinct paths");
        }
        TwoPhotonState s;
        for (int pa = 0; pa < 2; ++pa) {
            for (int pb = 0; pb < 2; ++pb) {
                Complex amp = pol_a[static_cast<std::size_t>(pa)] * pol_b[static_cast<std::size_t>(pb)];
                if (amp != Complex{0.0}) {
                    s.add({path_a, static_cast<Polarization>(pa)}, {path_b, static_cast<Polarization>(pb)}, amp);
                }
            }
        }
        return s;
    }

    void add(OpticalMode a, OpticalMode b, Complex amplitude) { amps_[make_pair_sorted(a, b)] += amplitude; }

    Complex amplitude(OpticalMode a, OpticalMode b) const {
        auto it = amps_.find(make_pair_sorted(a, b));
        return it == amps_.end() ? Complex{0.0} : it->second;
    }

    const std::map<ModePair, Complex>& terms() const { return amps_; }

    double squared_norm() const {
        double n = 0.0;
        for (const auto& [_, a] : amps_) {
            n += std::norm(a);
        }
        return n;
    }

    /// Probability mass of terms where both photons share a path.
    double same_path_probability() const {
        double p = 0.0;
        for (const auto& [modes, a] : amps_) {
            if (modes.first.path == modes.second.path) {
                p += std::norm(a);
            }
        }
        return p;
    }

   private:
    std::map<ModePair, Complex> amps_;
};

/// Linear map on creation operators: a_in^dagger -> sum_out c a_out^dagger.
/// Modes without an entry pass through unchanged.
class ModeTransform {
   public:
    void set(OpticalMode in, std::vector<std::pair<OpticalMode, Complex>> out) { map_[in] = std::move(out); }

    std::vector<std::pair<OpticalMode, Complex>> image(OpticalMode in) const {
        auto it = map_.find(in);
        if (it == map_.end()) {
            return {{in, Complex{1.0}}};
        }
        return it->second;
    }

    TwoPhotonState apply(const TwoPhotonState& state) const {
        // Work with coefficients of ordered creation-operator products, then
        // convert back to normalized Fock amplitudes.
        std::map<std::pair<OpticalMode, OpticalMode>, Complex> ops;
        for (const auto& [modes, amp] : state.terms()) {
            const Complex coeff = modes.first == modes.second ? amp / std::numbers::sqrt2 : amp;
            for (const auto& [x, cx] : image(modes.first)) {
                for (const auto& [y, cy] : image(modes.second)) {
                    ops[make_pair_sorted(x, y)] += coeff * cx * cy;
                }
            }
        }
        TwoPhotonState out;
        for (const auto& [modes, c] : ops) {
            const Complex amp = modes.first == modes.second ? c * std::numbers::sqrt2 : c;
            if (std::abs(amp) > 0.0) {
                out.add(modes.first, modes.second, amp);
            }
        }
        return out;
    }

   private:
    std::map<OpticalMode, std::vector<std::pair<OpticalMode, Complex>>> map_;
};

/// PBS reflecting V and transmitting H: H1->H3, V1->V4, H2->H4, V2->V3.
inline ModeTransform pbs_mode_map() {
    using P = Polarization;
    ModeTransform t;
    t.set({1, P::H}, {{{3, P::H}, 1.0}});
    t.set({1, P::V}, {{{4, P::V}, 1.0}});
    t.set({2, P::H}, {{{4, P::H}, 1.0}});
    t.set({2, P::V}, {{{3, P::V}, 1.0}});
    return t;
}

/// Applies the fusion PBS to photons entering on ports 1 and 2.
inline TwoPhotonState pbs_transform(const TwoPhotonState& state) {
    for (const auto& [modes, _] : state.terms()) {
        for (const OpticalMode& m : {modes.first, modes.second}) {
            if (m.path != 1 && m.path != 2) {
                throw std::invalid_argument("pbs_transform: photon on unknown input port " + std::to_string(m.path));
            }
        }
    }
    return pbs_mode_map().apply(state);
}

/// Waveplate with Jones matrix `jones` acting on the polarization of `path`.
inline ModeTransform waveplate_on_path(int path, const ComplexMatrix& jones) {
    using P = Polarization;
    ModeTransform t;
    t.set({path, P::H}, {{{path, P::H}, jones(0, 0)}, {{path, P::V}, jones(1, 0)}});
    t.set({path, P::V}, {{{path, P::H}, jones(0, 1)}, {{path, P::V}, jones(1, 1)}});
    return t;
}

/// Conditional polarization state of the photon on `kept_path` after a click in `herald`.
struct HeraldedPhoton {
    double probability = 0.0;
    StateVector polarization;
};

inline HeraldedPhoton herald(const TwoPhotonState& state, OpticalMode herald_mode, int kept_path) {
    if (herald_mode.path == kept_path) {
        throw std::invalid_argument("herald: herald and kept photon must be on different paths");
    }
    const Complex h = state.amplitude(herald_mode, {kept_path, Polarization::H});
    const Complex v = state.amplitude(herald_mode, {kept_path, Polarization::V});
    HeraldedPhoton out;
    out.probability = std::norm(h) + std::norm(v);
    out.polarization = out.probability >= kTolerances.zero_probability ? StateVector{h, v}.normalized()
                                                                       : StateVector::zero(2);
    return out;
}

enum class FusionStatus { success, discard };

/// Result of one fusion attempt. On success the path-3 photon is
/// |e_{output_phase + pi * pi_shift_bit}>; a V herald sets the pi-shift bit.
struct FusionOutcome {
    FusionStatus status = FusionStatus::discard;
    int herald_bit = 0;
    EquatorialPhase output_phase;
    int pi_shift_bit = 0;

    bool succeeded() const { return status == FusionStatus::success; }
    /// Phase actually carried by the surviving photon.
    EquatorialPhase state_phase() const { return output_phase + EquatorialPhase(kPi * pi_shift_bit); }
};

struct FusionBranch {
    double probability = 0.0;
    FusionOutcome outcome;
};

/// Exact branch table of the fusion gate on equatorial inputs.
inline std::vector<FusionBranch> fusion_branches(EquatorialPhase theta1, EquatorialPhase theta2) {
    const EquatorialPhase sum = theta1 + theta2;
    return {
        {0.5, {FusionStatus::discard, 0, EquatorialPhase{}, 0}},
        {0.25, {FusionStatus::success, 0, sum, 0}},
        {0.25, {FusionStatus::success, 1, sum, 1}},
    };
}

/// Samples one fusion attempt using the top two bits of a single draw:
/// 0b0x discards, 0b10 heralds H, 0b11 heralds V.
template <typename Rng>
FusionOutcome fusion_gate(EquatorialPhase theta1, EquatorialPhase theta2, Rng& rng) {
    static_assert(std::is_same_v<typename Rng::result_type, std::uint64_t>, "fusion_gate expects a 64-bit engine");
    const std::uint64_t draw = rng() >> 62;
    if (draw < 2) {
        return {FusionStatus::discard, 0, EquatorialPhase{}, 0};
    }
    const int bit = static_cast<int>(draw & 1U);
    return {FusionStatus::success, bit, theta1 + theta2, bit};
}

/// Statevector simulation of the fusion gate: PBS, HWP at 22.5 degrees on
/// path 4, and an H/V measurement of the path-4 photon.
struct FusionOptics {
    TwoPhotonState after_pbs;
    TwoPhotonState after_hwp;
    double discard_probability = 0.0;
    /// Indexed by herald bit (0 = H, 1 = V).
    std::array<HeraldedPhoton, 2> heralded;
};

inline FusionOptics fusion_optics(EquatorialPhase theta1, EquatorialPhase theta2) {
    FusionOptics r;
    r.after_pbs = pbs_transform(
        TwoPhotonState::product(equatorial_state(theta1), 1, equatorial_state(theta2), 2));
    r.discard_probability = r.after_pbs.same_path_probability();
    r.after_hwp = waveplate_on_path(4, jones_hwp(kPi / 8.0)).apply(r.after_pbs);
    r.heralded[0] = herald(r.after_hwp, {4, Polarization::H}, 3);
    r.heralded[1] = herald(r.after_hwp, {4, Polarization::V}, 3);
    return r;
}

/// Path-3 polarization density matrix after a herald, with two-photon
/// interference cross terms scaled by the visibility `a` in [0, 1].
inline ComplexMatrix heralded_density_matrix(EquatorialPhase theta1, EquatorialPhase theta2, int herald_bit,
                                             double visibility) {
    if (visibility < 0.0 || visibility > 1.0) {
        throw std::invalid_argument("heralded_density_matrix: visibility must lie in [0, 1]");
    }
    if (herald_bit != 0 && herald_bit != 1) {
        throw std::invalid_argument("heralded_density_matrix: herald bit must be 0 or 1");
    }
    const auto optics = fusion_optics(theta1, theta2);
    const ComplexVector& psi = optics.heralded[static_cast<std::size_t>(herald_bit)].polarization.amplitudes();
    ComplexMatrix rho = psi * psi.adjoint();
    rho(0, 1) *= visibility;
    rho(1, 0) *= visibility;
    return rho;
}

/// A qubit left at the end of a fusion tree: phase multiplier * theta + pi * pi_shift_bit.
struct SurvivingQubit {
    int multiplier = 1;
    int pi_shift_bit = 0;

    double qfi() const { return static_cast<double>(multiplier) * multiplier; }
    EquatorialPhase phase(EquatorialPhase theta) const {
        return theta.scaled(multiplier) + EquatorialPhase(kPi * pi_shift_bit);
    }
};

struct FusionTreeTrial {
    int depth = 0;
    int fusions = 0;
    int discards = 0;
    int buffer_losses = 0;
    std::vector<SurvivingQubit> survivors;

    double total_qfi() const {
        double q = 0.0;
        for (const auto& s : survivors) {
            q += s.qfi();
        }
        return q;
    }
    /// One pi-shift bit is stored per surviving qubit.
    int classical_bits() const { return static_cast<int>(survivors.size()); }
};

struct FusionTreeOptions {
    /// Probability that a qubit survives buffering before the next level.
    double buffer_survival = 1.0;
};

/// One run of the iterative pairing: pair up the pool, fuse each pair, set
/// aside the odd qubit, and repeat on the successes while at least two remain.
template <typename Rng>
FusionTreeTrial run_fusion_tree(int n, Rng& rng, FusionTreeOptions options = {}) {
    if (n < 1) {
        throw std::invalid_argument("fusion_tree: n must be >= 1");
    }
    if (options.buffer_survival < 0.0 || options.buffer_survival > 1.0) {
        throw std::invalid_argument("fusion_tree: buffer survival must lie in [0, 1]");
    }
    FusionTreeTrial trial;
    std::vector<SurvivingQubit> pool(static_cast<std::size_t>(n), SurvivingQubit{1, 0});
    while (pool.size() >= 2) {
        ++trial.depth;
        std::vector<SurvivingQubit> next;
        for (std::size_t i = 0; i + 1 < pool.size(); i += 2) {
            const auto& a = pool[i];
            const auto& b = pool[i + 1];
            // Pairs always share a level, hence a multiplier.
            const FusionOutcome f = fusion_gate(EquatorialPhase{}, EquatorialPhase{}, rng);
            ++trial.fusions;
            if (!f.succeeded()) {
                ++trial.discards;
                continue;
            }
            SurvivingQubit fused{a.multiplier + b.multiplier, (a.pi_shift_bit + b.pi_shift_bit + f.pi_shift_bit) & 1};
            if (options.buffer_survival < 1.0) {
                const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
                if (u >= options.buffer_survival) {
                    ++trial.buffer_losses;
                    continue;
                }
            }
            next.push_back(fused);
        }
        if (pool.size() % 2 == 1) {
            trial.survivors.push_back(pool.back());
        }
        pool = std::move(next);
    }
    if (pool.size() == 1) {
        trial.survivors.push_back(pool.front());
    }
    return trial;
}

struct FusionTreeStats {
    int n = 0;
    EquatorialPhase theta;
    long long trials = 0;
    /// Indexed by depth / survivor count.
    std::vector<long long> depth_histogram;
    std::vector<long long> survivor_histogram;
    int max_depth = 0;
    int max_survivors = 0;
    double mean_total_qfi = 0.0;
    double mean_classical_bits = 0.0;
    long long fusions = 0;
    long long discards = 0;
    /// Survivor phases as (multiplier of theta, pi-shift bit) -> count.
    std::map<std::pair<int, int>, long long> phase_histogram;

    double discard_fraction() const { return fusions ? static_cast<double>(discards) / static_cast<double>(fusions) : 0.0; }
};

/// floor(log2 n); 0 for n < 1.
inline int floor_log2(int n) { return n < 1 ? 0 : std::bit_width(static_cast<unsigned>(n)) - 1; }

template <typename Rng>
FusionTreeStats fusion_tree(int n, EquatorialPhase theta, Rng& rng, long long trials, FusionTreeOptions options = {}) {
    if (trials < 1) {
        throw std::invalid_argument("fusion_tree: trials must be >= 1");
    }
    FusionTreeStats st;
    st.n = n;
    st.theta = theta;
    st.trials = trials;
    double qfi_acc = 0.0;
    double bits_acc = 0.0;
    for (long long t = 0; t < trials; ++t) {
        const FusionTreeTrial r = run_fusion_tree(n, rng, options);
        const auto survivors = static_cast<std::size_t>(r.survivors.size());
        if (st.depth_histogram.size() <= static_cast<std::size_t>(r.depth)) {
            st.depth_histogram.resize(static_cast<std::size_t>(r.depth) + 1, 0);
        }
        if (st.survivor_histogram.size() <= survivors) {
            st.survivor_histogram.resize(survivors + 1, 0);
        }
        ++st.depth_histogram[static_cast<std::size_t>(r.depth)];
        ++st.survivor_histogram[survivors];
        st.max_depth = std::max(st.max_depth, r.depth);
        st.max_survivors = std::max(st.max_survivors, static_cast<int>(survivors));
        qfi_acc += r.total_qfi();
        bits_acc += r.classical_bits();
        st.fusions += r.fusions;
        st.discards += r.discards;
        for (const auto& q : r.survivors) {
            ++st.phase_histogram[{q.multiplier, q.pi_shift_bit}];
        }
    }
    st.mean_total_qfi = qfi_acc / static_cast<double>(trials);
    st.mean_classical_bits = bits_acc / static_cast<double>(trials);
    return st;
}

/// Post-selection accounting for a cascade of N - 1 probabilistic CNOTs.
struct CnotResourceRecord {
    int qubits = 0;
    double success_prob = 0.0;
    int gates = 0;
    double cascade_throughput = 0.0;
    double fusion_pair_throughput = 0.5;
};

inline CnotResourceRecord cnot_resource_model(int n, double success_prob = 1.0 / 9.0) {
    if (!(success_prob > 0.0 && success_prob <= 1.0)) {
        throw std::invalid_argument("cnot_resource_model: success probability must lie in (0, 1]");
    }
    if (n < 2) {
        throw std::invalid_argument("cnot_resource_model: need at least two qubits");
    }
    CnotResourceRecord r;
    r.qubits = n;
    r.success_prob = success_prob;
    r.gates = n - 1;
    r.cascade_throughput = std::pow(success_prob, n - 1);
    return r;
}

}  // namespace qfic
