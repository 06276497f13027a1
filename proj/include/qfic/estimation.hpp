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

// Fringe models, phase estimators and Monte Carlo error analysis for
// compressed (fringe frequency 2) and uncompressed (frequency 1) qubits.

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfic/state.hpp"

namespace qfic {

/// Pr_+-(theta) = (1 +- A cos((f0 + delta) theta + phi)) / 2.
struct FringeModel {
    double amplitude = 1.0;
    double frequency_offset = 0.0;
    double phase_offset = 0.0;
    /// f0: 2 for a compressed qubit |e_{2 theta}>, 1 for an uncompressed one.
    double base_frequency = 2.0;

    double frequency() const { return base_frequency + frequency_offset; }

    static FringeModel ideal() { return {}; }
    static FringeModel uncompressed() { return {1.0, 0.0, 0.0, 1.0}; }

    void validate() const {
        if (!(amplitude >= 0.0 && amplitude <= 1.0)) {
            throw std::invalid_argument("FringeModel: amplitude must lie in [0, 1]");
        }
        if (!std::isfinite(frequency_offset) || !std::isfinite(phase_offset) || !(base_frequency > 0.0)) {
            throw std::invalid_argument("FringeModel: invalid frequency or phase");
        }
    }
};

enum class Sign : int { plus = 1, minus = -1 };

inline double fringe_probability(double theta, const FringeModel& model, Sign sign) {
    const double s = static_cast<double>(static_cast<int>(sign));
    const double p = 0.5 * (1.0 + s * model.amplitude * std::cos(model.frequency() * theta + model.phase_offset));
    return std::clamp(p, 0.0, 1.0);
}

/// Counts for the |+><+| and |-><-| projectors at one phase setting.
struct CountRecord {
    double theta_set = 0.0;
    long long n_plus = 0;
    long long n_minus = 0;
    double duration = 1.0;

    long long total() const { return n_plus + n_minus; }
    double plus_fraction() const { return static_cast<double>(n_plus) / static_cast<double>(total()); }
};

/// Poisson counts with means mean_photons * Pr_+-(theta).
template <typename Rng>
CountRecord simulate_counts(double theta, const FringeModel& model, double mean_photons, Rng& rng, double duration = 1.0) {
    if (!(mean_photons > 0.0)) {
        throw std::invalid_argument("simulate_counts: mean photon number must be positive");
    }
    model.validate();
    CountRecord r{theta, 0, 0, duration};
    const double mp = mean_photons * fringe_probability(theta, model, Sign::plus);
    const double mm = mean_photons * fringe_probability(theta, model, Sign::minus);
    if (mp > 0.0) {
        r.n_plus = std::poisson_distribution<long long>(mp)(rng);
    }
    if (mm > 0.0) {
        r.n_minus = std::poisson_distribution<long long>(mm)(rng);
    }
    return r;
}

struct PhaseEstimate {
    double theta = 0.0;
    /// The count ratio fell outside [-1, 1] and was clamped to the boundary.
    bool clamped = false;
};

namespace detail {

inline double count_ratio(long long n_plus, long long n_minus, double amplitude, bool& clamped) {
    const long long total = n_plus + n_minus;
    if (total <= 0) {
        throw std::invalid_argument("phase estimator: zero total counts");
    }
    if (!(amplitude > 0.0)) {
        throw std::invalid_argument("phase estimator: fringe amplitude must be positive");
    }
    const double r = static_cast<double>(n_plus - n_minus) / (amplitude * static_cast<double>(total));
    clamped = r > 1.0 || r < -1.0;
    return std::clamp(r, -1.0, 1.0);
}

}  // namespace detail

/// arccos((N+ - N-) / (A (N+ + N-))) / (f0 + delta) - phi, principal branch.
inline PhaseEstimate estimate_arccos(const CountRecord& record, const FringeModel& model) {
    PhaseEstimate e;
    const double r = detail::count_ratio(record.n_plus, record.n_minus, model.amplitude, e.clamped);
    e.theta = std::acos(r) / model.frequency() - model.phase_offset;
    return e;
}

/// Pr_+- for a qubit |e_{m theta}> measured in {|e_{m theta0 + pi/2}>, |e_{m theta0 - pi/2}>}:
/// (1 +- A sin(m (theta - theta0))) / 2.
inline double optimal_basis_probability(double theta, double theta0, int multiplier, double visibility, Sign sign) {
    const double s = static_cast<double>(static_cast<int>(sign));
    return std::clamp(0.5 * (1.0 + s * visibility * std::sin(multiplier * (theta - theta0))), 0.0, 1.0);
}

template <typename Rng>
CountRecord simulate_optimal_basis_counts(double theta, double theta0, int multiplier, double visibility,
                                          double mean_photons, Rng& rng) {
    if (!(mean_photons > 0.0)) {
        throw std::invalid_argument("simulate_optimal_basis_counts: mean photon number must be positive");
    }
    CountRecord r{theta, 0, 0, 1.0};
    const double mp = mean_photons * optimal_basis_probability(theta, theta0, multiplier, visibility, Sign::plus);
    const double mm = mean_photons * optimal_basis_probability(theta, theta0, multiplier, visibility, Sign::minus);
    if (mp > 0.0) {
        r.n_plus = std::poisson_distribution<long long>(mp)(rng);
    }
    if (mm > 0.0) {
        r.n_minus = std::poisson_distribution<long long>(mm)(rng);
    }
    return r;
}

/// theta0 + arcsin((N+ - N-) / (A (N+ + N-))) / m, linearized at theta0.
inline PhaseEstimate estimate_optimal_basis(const CountRecord& record, double theta0, int multiplier = 2,
                                            double visibility = 1.0) {
    if (multiplier < 1) {
        throw std::invalid_argument("estimate_optimal_basis: multiplier must be >= 1");
    }
    PhaseEstimate e;
    const double r = detail::count_ratio(record.n_plus, record.n_minus, visibility, e.clamped);
    e.theta = theta0 + std::asin(r) / multiplier;
    return e;
}

struct FringeFitOptions {
    double base_frequency = 2.0;
    double delta_min = -1.5;
    double delta_max = 1.5;
    double delta_step = 0.002;
    /// Stop when the relative parameter step falls below this.
    double parameter_tolerance = 1e-9;
};

struct FringeFit {
    FringeModel model;
    double residual_sum = 0.0;
    /// Poisson-propagated standard errors of (A, delta, phi).
    double sigma_amplitude = 0.0;
    double sigma_delta = 0.0;
    double sigma_phi = 0.0;
    bool converged = false;
    /// False when the fringe amplitude is indistinguishable from zero; delta and phi are then meaningless.
    bool identifiable = true;
    long iterations = 0;
};

namespace detail {

struct FringeResidual {
    std::span<const double> theta;
    std::span<const double> y;
    double base;

    int values() const { return static_cast<int>(y.size()); }

    // x = (A, delta, phi)
    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& fvec) const {
        for (std::size_t i = 0; i < y.size(); ++i) {
            fvec[static_cast<Eigen::Index>(i)] = 0.5 * (1.0 + x[0] * std::cos((base + x[1]) * theta[i] + x[2])) - y[i];
        }
        return 0;
    }

    int df(const Eigen::VectorXd& x, Eigen::MatrixXd& fjac) const {
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double arg = (base + x[1]) * theta[i] + x[2];
            const auto r = static_cast<Eigen::Index>(i);
            fjac(r, 0) = 0.5 * std::cos(arg);
            fjac(r, 1) = -0.5 * x[0] * std::sin(arg) * theta[i];
            fjac(r, 2) = -0.5 * x[0] * std::sin(arg);
        }
        return 0;
    }
};

inline double wrap_signed(double phi) { return phase_distance(phi, 0.0); }

}  // namespace detail

/// Least-squares fit of (A, delta, phi) to N+/(N+ + N-).
///
/// Seeds delta on a grid; for each grid value A cos(f theta + phi) is linear in
/// (A cos phi, -A sin phi) and is solved exactly. The best seed is polished
/// with Levenberg-Marquardt on all three parameters.
inline FringeFit fit_fringe(std::span<const CountRecord> records, FringeFitOptions options = {}) {
    std::vector<double> theta;
    std::vector<double> y;
    std::vector<double> n;
    for (const auto& r : records) {
        if (r.n_plus < 0 || r.n_minus < 0) {
            throw std::invalid_argument("fit_fringe: negative counts");
        }
        if (r.total() > 0) {
            theta.push_back(r.theta_set);
            y.push_back(r.plus_fraction());
            n.push_back(static_cast<double>(r.total()));
        }
    }
    if (theta.size() < 8) {
        throw std::invalid_argument("fit_fringe: need at least 8 records with counts");
    }
    const auto [lo, hi] = std::minmax_element(theta.begin(), theta.end());
    if ((*hi - *lo) * options.base_frequency < kTwoPi - 1e-9) {
        throw std::invalid_argument("fit_fringe: records must span at least one fringe period");
    }
    const std::size_t m = theta.size();

    struct Seed {
        double delta = 0.0;
        double a = 0.0;
        double phi = 0.0;
        double rss = std::numeric_limits<double>::infinity();
        double sigma_a = 0.0;
    } best;

    const int steps = static_cast<int>(std::floor((options.delta_max - options.delta_min) / options.delta_step + 0.5));
    for (int g = 0; g <= steps; ++g) {
        const double delta = options.delta_min + g * options.delta_step;
        const double f = options.base_frequency + delta;
        Eigen::Matrix2d xtx = Eigen::Matrix2d::Zero();
        Eigen::Vector2d xty = Eigen::Vector2d::Zero();
        for (std::size_t i = 0; i < m; ++i) {
            const Eigen::Vector2d row(0.5 * std::cos(f * theta[i]), 0.5 * std::sin(f * theta[i]));
            xtx += row * row.transpose();
            xty += row * (y[i] - 0.5);
        }
        if (std::abs(xtx.determinant()) < 1e-14) {
            continue;
        }
        const Eigen::Vector2d coef = xtx.ldlt().solve(xty);
        double rss = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double pred = 0.5 + 0.5 * (coef[0] * std::cos(f * theta[i]) + coef[1] * std::sin(f * theta[i]));
            rss += (y[i] - pred) * (y[i] - pred);
        }
        if (rss < best.rss) {
            best.delta = delta;
            best.a = coef.norm();
            best.phi = std::atan2(-coef[1], coef[0]);
            best.rss = rss;
            const double s2 = m > 3 ? rss / static_cast<double>(m - 3) : 0.0;
            const Eigen::Matrix2d cov = s2 * xtx.inverse();
            best.sigma_a = std::sqrt(std::max(0.0, 0.5 * cov.trace()));
        }
    }
    if (!std::isfinite(best.rss)) {
        throw std::runtime_error("fit_fringe: no admissible frequency in the search range");
    }

    FringeFit fit;
    fit.model = {best.a, best.delta, best.phi, options.base_frequency};
    fit.residual_sum = best.rss;
    fit.identifiable = best.a > 1e-6 && best.a > 5.0 * best.sigma_a;
    if (!fit.identifiable) {
        fit.converged = true;
        fit.sigma_amplitude = best.sigma_a;
        return fit;
    }

    detail::FringeResidual functor{theta, y, options.base_frequency};
    Eigen::LevenbergMarquardt<detail::FringeResidual> lm(functor);
    lm.parameters.xtol = options.parameter_tolerance;
    lm.parameters.ftol = 1e-15;
    lm.parameters.maxfev = 2000;
    Eigen::VectorXd x(3);
    x << best.a, best.delta, best.phi;
    const auto status = lm.minimize(x);
    fit.iterations = static_cast<long>(lm.iter);
    using namespace Eigen::LevenbergMarquardtSpace;
    fit.converged = status == RelativeReductionTooSmall || status == RelativeErrorTooSmall ||
                    status == RelativeErrorAndReductionTooSmall || status == CosinusTooSmall ||
                    status == XtolTooSmall || status == FtolTooSmall;

    double a = x[0];
    double phi = x[2];
    if (a < 0.0) {
        a = -a;
        phi += kPi;
    }
    fit.model = {a, x[1], detail::wrap_signed(phi), options.base_frequency};
    Eigen::VectorXd fvec(static_cast<Eigen::Index>(m));
    functor(Eigen::Vector3d(a, x[1], fit.model.phase_offset), fvec);
    fit.residual_sum = fvec.squaredNorm();

    // Sandwich covariance with binomial variances p(1 - p)/n at the fitted model.
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(m), 3);
    functor.df(Eigen::Vector3d(a, x[1], fit.model.phase_offset), jac);
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(3, 3);
    for (std::size_t i = 0; i < m; ++i) {
        const double p = std::clamp(y[i] + fvec[static_cast<Eigen::Index>(i)], 1e-12, 1.0 - 1e-12);
        const Eigen::RowVector3d row = jac.row(static_cast<Eigen::Index>(i));
        meat += row.transpose() * row * (p * (1.0 - p) / n[i]);
    }
    const Eigen::Matrix3d bread = (jac.transpose() * jac).inverse();
    const Eigen::Matrix3d cov = bread * meat * bread;
    fit.sigma_amplitude = std::sqrt(std::max(0.0, cov(0, 0)));
    fit.sigma_delta = std::sqrt(std::max(0.0, cov(1, 1)));
    fit.sigma_phi = std::sqrt(std::max(0.0, cov(2, 2)));
    return fit;
}

/// Error summary of repeated estimates of one phase.
struct EstimationRecord {
    double theta_true = 0.0;
    std::vector<double> estimates;
    double mean_error = 0.0;
    double std_dev = 0.0;
    double rmse = 0.0;
    double bias = 0.0;
    double mean_photons = 0.0;

    /// Values multiplied by sqrt(mean photons), comparable to the QCRB lines 1/sqrt(F).
    double scaled_std() const { return std::sqrt(mean_photons) * std_dev; }
    double scaled_rmse() const { return std::sqrt(mean_photons) * rmse; }
    double scaled_bias() const { return std::sqrt(mean_photons) * bias; }
};

/// Sample std, RMSE about `theta_true`, and bias = sqrt(max(RMSE^2 - std^2, 0)).
inline EstimationRecord error_statistics(std::vector<double> estimates, double theta_true, double mean_photons) {
    if (estimates.size() < 2) {
        throw std::invalid_argument("error_statistics: need at least two estimates");
    }
    EstimationRecord rec;
    rec.theta_true = theta_true;
    rec.mean_photons = mean_photons;
    const double count = static_cast<double>(estimates.size());
    double mean = 0.0;
    double sq_err = 0.0;
    for (double e : estimates) {
        mean += e;
        sq_err += (e - theta_true) * (e - theta_true);
    }
    mean /= count;
    double var = 0.0;
    for (double e : estimates) {
        var += (e - mean) * (e - mean);
    }
    rec.std_dev = std::sqrt(var / (count - 1.0));
    rec.rmse = std::sqrt(sq_err / count);
    rec.mean_error = mean - theta_true;
    rec.bias = std::sqrt(std::max(rec.rmse * rec.rmse - rec.std_dev * rec.std_dev, 0.0));
    rec.estimates = std::move(estimates);
    return rec;
}

/// Linear visibility decay A(t) = A0 (1 - eta t) over normalized acquisition time t in [0, 1].
struct DriftModel {
    double initial_visibility = 1.0;
    double eta = 0.0;

    double visibility_at(double t) const { return initial_visibility * (1.0 - eta * t); }
    /// Time-averaged visibility, the value a fit to the whole run recovers.
    double mean_visibility() const { return initial_visibility * (1.0 - 0.5 * eta); }
};

/// Repeated optimal-basis estimation at theta0 = theta_true.
template <typename Rng>
EstimationRecord optimal_basis_study(double theta, int multiplier, double visibility, double mean_photons,
                                     long long trials, Rng& rng) {
    std::vector<double> est;
    est.reserve(static_cast<std::size_t>(trials));
    for (long long t = 0; t < trials; ++t) {
        CountRecord c = simulate_optimal_basis_counts(theta, theta, multiplier, visibility, mean_photons, rng);
        if (c.total() == 0) {
            continue;
        }
        est.push_back(estimate_optimal_basis(c, theta, multiplier, visibility).theta);
    }
    return error_statistics(std::move(est), theta, mean_photons);
}

/// Sequential acquisition of `phases` under visibility drift, estimated with
/// the arccos estimator calibrated to the run-averaged visibility. Phase i is
/// recorded at time t = i / (P - 1).
template <typename Rng>
std::vector<EstimationRecord> drift_study(std::span<const double> phases, const FringeModel& model, const DriftModel& drift,
                                          double mean_photons, long long trials_per_phase, Rng& rng) {
    if (phases.empty()) {
        throw std::invalid_argument("drift_study: no phases");
    }
    FringeModel assumed = model;
    assumed.amplitude = drift.mean_visibility();
    std::vector<EstimationRecord> out;
    for (std::size_t i = 0; i < phases.size(); ++i) {
        const double t = phases.size() > 1 ? static_cast<double>(i) / static_cast<double>(phases.size() - 1) : 0.0;
        FringeModel actual = model;
        actual.amplitude = drift.visibility_at(t);
        std::vector<double> est;
        est.reserve(static_cast<std::size_t>(trials_per_phase));
        for (long long k = 0; k < trials_per_phase; ++k) {
            CountRecord c = simulate_counts(phases[i], actual, mean_photons, rng);
            if (c.total() == 0) {
                continue;
            }
            est.push_back(estimate_arccos(c, assumed).theta);
        }
        out.push_back(error_statistics(std::move(est), phases[i], mean_photons));
    }
    return out;
}

/// Phase settings from `start_deg` to `stop_deg` inclusive in `step_deg` increments, in radians.
inline std::vector<double> phase_sweep(double start_deg, double stop_deg, double step_deg) {
    if (!(step_deg > 0.0) || stop_deg < start_deg) {
        throw std::invalid_argument("phase_sweep: invalid range");
    }
    std::vector<double> out;
    const auto steps = static_cast<long long>(std::floor((stop_deg - start_deg) / step_deg + 1e-9));
    for (long long i = 0; i <= steps; ++i) {
        out.push_back((start_deg + static_cast<double>(i) * step_deg) * kPi / 180.0);
    }
    return out;
}

}  // namespace qfic
