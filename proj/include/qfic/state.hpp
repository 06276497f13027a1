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

// Dense pure-state simulation.
//
// Amplitude ordering is row-major with qubit 0 as the most significant bit:
// basis index b of an n-qubit register holds qubit q in bit (n - 1 - q).
// Global phases are never canonicalized; use `fidelity` to compare states
// up to a global phase.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfic/tolerances.hpp"

namespace qfic {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduces an angle to its representative in [0, 2pi).
inline double wrap_phase(double radians) {
    double r = std::fmod(radians, kTwoPi);
    if (r < 0) {
        r += kTwoPi;
    }
    // fmod of a value just below 2pi can round up to exactly 2pi after the shift.
    if (r >= kTwoPi) {
        r = 0.0;
    }
    return r;
}

/// Signed distance between two angles, in (-pi, pi].
inline double phase_distance(double a, double b) {
    double d = wrap_phase(a - b);
    return d > kPi ? d - kTwoPi : d;
}

/// Phase of an equatorial qubit (|0> + e^{i theta}|1>)/sqrt(2), stored mod 2pi.
class EquatorialPhase {
   public:
    constexpr EquatorialPhase() = default;
    explicit EquatorialPhase(double radians) : theta_(wrap_phase(radians)) {}

    static EquatorialPhase from_degrees(double degrees) { return EquatorialPhase(degrees * kPi / 180.0); }

    double radians() const { return theta_; }
    double degrees() const { return theta_ * 180.0 / kPi; }

    EquatorialPhase operator+(EquatorialPhase other) const { return EquatorialPhase(theta_ + other.theta_); }
    EquatorialPhase operator-(EquatorialPhase other) const { return EquatorialPhase(theta_ - other.theta_); }
    EquatorialPhase operator-() const { return EquatorialPhase(-theta_); }
    EquatorialPhase scaled(int factor) const { return EquatorialPhase(factor * theta_); }

    /// Equality mod 2pi within `tol` radians.
    bool near(EquatorialPhase other, double tol = kTolerances.algebraic) const {
        return std::abs(phase_distance(theta_, other.theta_)) <= tol;
    }

   private:
    double theta_ = 0.0;
};

/// Normalized complex amplitude vector over a labeled computational basis.
class StateVector {
   public:
    StateVector() = default;

    /// Wraps `amplitudes` as-is. Call `normalized()` when the input is not a unit vector.
    explicit StateVector(ComplexVector amplitudes) : amps_(std::move(amplitudes)) {
        if (amps_.size() == 0) {
            throw std::invalid_argument("StateVector: empty amplitude vector");
        }
    }

    StateVector(std::initializer_list<Complex> amplitudes) : amps_(static_cast<Eigen::Index>(amplitudes.size())) {
        if (amplitudes.size() == 0) {
            throw std::invalid_argument("StateVector: empty amplitude vector");
        }
        Eigen::Index i = 0;
        for (const Complex& a : amplitudes) {
            amps_[i++] = a;
        }
    }

    static StateVector basis(std::size_t dim, std::size_t index) {
        if (index >= dim) {
            throw std::out_of_range("StateVector::basis: index out of range");
        }
        ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
        v[static_cast<Eigen::Index>(index)] = 1.0;
        return StateVector(std::move(v));
    }

    /// All-zero vector of the given dimension; only used as the post-state of an impossible outcome.
    static StateVector zero(std::size_t dim) {
        StateVector s;
        s.amps_ = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
        return s;
    }

    const ComplexVector& amplitudes() const { return amps_; }
    Complex operator[](std::size_t i) const { return amps_[static_cast<Eigen::Index>(i)]; }
    std::size_t basis_dim() const { return static_cast<std::size_t>(amps_.size()); }

    /// Number of qubits when the dimension is a power of two.
    std::optional<int> qubit_count() const {
        std::size_t d = basis_dim();
        if (d == 0 || (d & (d - 1)) != 0) {
            return std::nullopt;
        }
        int n = 0;
        while ((std::size_t{1} << n) < d) {
            ++n;
        }
        return n;
    }

    double norm() const { return amps_.norm(); }

    bool is_normalized(double tol = kTolerances.norm) const { return std::abs(amps_.squaredNorm() - 1.0) <= tol; }

    StateVector normalized() const {
        double n = norm();
        if (n == 0.0) {
            throw std::domain_error("StateVector::normalized: zero vector");
        }
        return StateVector(ComplexVector(amps_ / n));
    }

    Complex inner(const StateVector& other) const {
        if (other.basis_dim() != basis_dim()) {
            throw std::invalid_argument("StateVector::inner: dimension mismatch");
        }
        return amps_.dot(other.amps_);
    }

   private:
    ComplexVector amps_;
};

/// |<a|b>|^2, insensitive to global phase.
inline double fidelity(const StateVector& a, const StateVector& b) { return std::norm(a.inner(b)); }

/// Largest amplitude difference after aligning `b` to `a`'s global phase.
inline double phase_aligned_distance(const StateVector& a, const StateVector& b) {
    Complex overlap = b.inner(a);
    Complex align = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : Complex{1.0};
    return (a.amplitudes() - align * b.amplitudes()).cwiseAbs().maxCoeff();
}

/// One branch of a measurement. `valid` is false when the branch probability
/// is below the zero-probability threshold, in which case `post_state` is zero.
struct MeasurementOutcome {
    int label = 0;
    double probability = 0.0;
    StateVector post_state;
    bool valid = false;
};

/// (|0> + e^{i theta}|1>)/sqrt(2).
inline StateVector equatorial_state(EquatorialPhase phase) {
    const double r = 1.0 / std::numbers::sqrt2;
    return StateVector{Complex{r, 0.0}, std::polar(r, phase.radians())};
}

/// Kronecker product, `a` index major.
inline StateVector tensor(const StateVector& a, const StateVector& b) {
    const std::size_t da = a.basis_dim();
    const std::size_t db = b.basis_dim();
    if (da > (std::size_t{1} << kMaxQubits) / db) {
        throw std::length_error("tensor: result exceeds " + std::to_string(kMaxQubits) + " qubits");
    }
    ComplexVector out(static_cast<Eigen::Index>(da * db));
    for (std::size_t i = 0; i < da; ++i) {
        out.segment(static_cast<Eigen::Index>(i * db), static_cast<Eigen::Index>(db)) = a[i] * b.amplitudes();
    }
    return StateVector(std::move(out));
}

inline StateVector tensor_power(const StateVector& s, int copies) {
    if (copies < 1) {
        throw std::invalid_argument("tensor_power: copies must be >= 1");
    }
    StateVector out = s;
    for (int i = 1; i < copies; ++i) {
        out = tensor(out, s);
    }
    return out;
}

/// Largest |U^dagger U - I| entry.
inline double unitarity_residual(const ComplexMatrix& u) {
    if (u.rows() != u.cols()) {
        return std::numeric_limits<double>::infinity();
    }
    return (u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

namespace detail {

inline int require_qubits(const StateVector& state, const char* op) {
    auto n = state.qubit_count();
    if (!n) {
        throw std::invalid_argument(std::string(op) + ": state dimension is not a power of two");
    }
    return *n;
}

inline std::size_t bit_of(int n, int qubit) { return std::size_t{1} << (n - 1 - qubit); }

}  // namespace detail

/// Applies `u` to `target_qubits` (first target is the most significant index of `u`).
inline StateVector apply_unitary(const StateVector& state, const ComplexMatrix& u, const std::vector<int>& target_qubits) {
    const int n = detail::require_qubits(state, "apply_unitary");
    const std::size_t m = target_qubits.size();
    if (m == 0 || u.rows() != (Eigen::Index{1} << m) || u.cols() != u.rows()) {
        throw std::invalid_argument("apply_unitary: matrix size does not match target count");
    }
    for (std::size_t i = 0; i < m; ++i) {
        int t = target_qubits[i];
        if (t < 0 || t >= n) {
            throw std::out_of_range("apply_unitary: target qubit " + std::to_string(t) + " out of range");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (target_qubits[j] == t) {
                throw std::invalid_argument("apply_unitary: duplicate target qubit");
            }
        }
    }
    double residual = unitarity_residual(u);
    if (residual > kTolerances.algebraic) {
        std::ostringstream msg;
        msg << "apply_unitary: matrix is not unitary (residual " << residual << ")";
        throw std::invalid_argument(msg.str());
    }

    std::size_t target_mask = 0;
    std::vector<std::size_t> bits(m);
    for (std::size_t i = 0; i < m; ++i) {
        bits[i] = detail::bit_of(n, target_qubits[i]);
        target_mask |= bits[i];
    }
    const std::size_t sub = std::size_t{1} << m;
    auto offset = [&](std::size_t local) {
        std::size_t off = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (local & (std::size_t{1} << (m - 1 - i))) {
                off |= bits[i];
            }
        }
        return off;
    };
    std::vector<std::size_t> offsets(sub);
    for (std::size_t l = 0; l < sub; ++l) {
        offsets[l] = offset(l);
    }

    const ComplexVector& in = state.amplitudes();
    ComplexVector out(in.size());
    ComplexVector gathered(static_cast<Eigen::Index>(sub));
    for (std::size_t base = 0; base < state.basis_dim(); ++base) {
        if (base & target_mask) {
            continue;
        }
        for (std::size_t l = 0; l < sub; ++l) {
            gathered[static_cast<Eigen::Index>(l)] = in[static_cast<Eigen::Index>(base | offsets[l])];
        }
        ComplexVector mixed = u * gathered;
        for (std::size_t l = 0; l < sub; ++l) {
            out[static_cast<Eigen::Index>(base | offsets[l])] = mixed[static_cast<Eigen::Index>(l)];
        }
    }
    return StateVector(std::move(out));
}

/// Computational-basis measurement of one qubit. Always returns outcomes 0 and 1.
inline std::vector<MeasurementOutcome> measure_projective(const StateVector& state, int target_qubit) {
    const int n = detail::require_qubits(state, "measure_projective");
    if (target_qubit < 0 || target_qubit >= n) {
        throw std::out_of_range("measure_projective: target qubit out of range");
    }
    const std::size_t bit = detail::bit_of(n, target_qubit);
    std::vector<MeasurementOutcome> outcomes;
    for (int label = 0; label < 2; ++label) {
        ComplexVector projected = ComplexVector::Zero(state.amplitudes().size());
        for (std::size_t b = 0; b < state.basis_dim(); ++b) {
            if (((b & bit) != 0) == (label == 1)) {
                projected[static_cast<Eigen::Index>(b)] = state[b];
            }
        }
        double p = projected.squaredNorm();
        MeasurementOutcome o{label, p, StateVector::zero(state.basis_dim()), false};
        if (p >= kTolerances.zero_probability) {
            o.post_state = StateVector(ComplexVector(projected / std::sqrt(p)));
            o.valid = true;
        }
        outcomes.push_back(std::move(o));
    }
    return outcomes;
}

/// Raised when a Kraus set fails sum_k M_k^dagger M_k = I.
class CompletenessError : public std::invalid_argument {
   public:
    explicit CompletenessError(double residual)
        : std::invalid_argument("Kraus operators are not complete (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const { return residual_; }

   private:
    double residual_;
};

/// Largest entry of |sum_k M_k^dagger M_k - I|.
inline double completeness_residual(const std::vector<ComplexMatrix>& operators) {
    if (operators.empty()) {
        return std::numeric_limits<double>::infinity();
    }
    const Eigen::Index d = operators.front().cols();
    ComplexMatrix acc = ComplexMatrix::Zero(d, d);
    for (const auto& m : operators) {
        if (m.cols() != d || m.rows() != d) {
            throw std::invalid_argument("completeness_residual: operator dimensions differ");
        }
        acc += m.adjoint() * m;
    }
    return (acc - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
}

/// Generalized measurement with Kraus operators acting on the full state space.
/// Outcome k is labeled by its index in `operators`.
inline std::vector<MeasurementOutcome> apply_kraus(const StateVector& state, const std::vector<ComplexMatrix>& operators) {
    for (const auto& m : operators) {
        if (m.cols() != static_cast<Eigen::Index>(state.basis_dim())) {
            throw std::invalid_argument("apply_kraus: operator does not act on the state space");
        }
    }
    double residual = completeness_residual(operators);
    if (!(residual <= kTolerances.algebraic)) {
        throw CompletenessError(residual);
    }
    std::vector<MeasurementOutcome> outcomes;
    outcomes.reserve(operators.size());
    for (std::size_t k = 0; k < operators.size(); ++k) {
        ComplexVector v = operators[k] * state.amplitudes();
        double p = v.squaredNorm();
        MeasurementOutcome o{static_cast<int>(k), p, StateVector::zero(static_cast<std::size_t>(v.size())), false};
        if (p >= kTolerances.zero_probability) {
            o.post_state = StateVector(ComplexVector(v / std::sqrt(p)));
            o.valid = true;
        }
        outcomes.push_back(std::move(o));
    }
    return outcomes;
}

namespace gates {

inline ComplexMatrix identity(int qubits = 1) {
    const Eigen::Index d = Eigen::Index{1} << qubits;
    return ComplexMatrix::Identity(d, d);
}

inline ComplexMatrix cnot() {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(2, 3) = 1.0;
    m(3, 2) = 1.0;
    return m;
}

inline ComplexMatrix pauli_x() {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    return m;
}

inline ComplexMatrix hadamard() {
    ComplexMatrix m(2, 2);
    const double r = 1.0 / std::numbers::sqrt2;
    m << r, r, r, -r;
    return m;
}

inline ComplexMatrix projector(int qubit_value) {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(qubit_value, qubit_value) = 1.0;
    return m;
}

}  // namespace gates

}  // namespace qfic
