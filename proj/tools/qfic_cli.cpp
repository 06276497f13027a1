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

// qfic: command-line front end.
//
//   qfic --command cascade   --n 4 --theta-deg 30 --out cascade.json
//   qfic --command fusion    --n 8 --trials 100000 --seed 1 --out tree.json
//   qfic --command fusion    --theta-deg 30 --theta2-deg 60 --trials 10000 --out pair.json
//   qfic --command decompose --dist-file dist.csv --out ensemble.json
//   qfic --command fringe    --mean-photons 277 --seed 1 --out fringe.csv
//   qfic --command estimate  --mean-photons 522 --trials 10000 --theta-deg 40 --out est.json
//
// Exit status: 0 ok, 2 bad configuration, 3 a numerical self-check failed.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "qfic/qfic.hpp"

namespace {

using qfic::Json;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    std::string command;
    int n = 2;
    double theta_deg = 0.0;
    std::optional<double> theta2_deg;
    long long trials = 10000;
    double mean_photons = 277.0;
    std::uint64_t seed = 1;
    std::string dist_file;
    double model_a = 1.0;
    double model_delta = 0.0;
    double model_phi = 0.0;
    double drift_eta = 0.0;
    bool uncompressed = false;
    std::string estimator = "optimal";
    std::string out;
};

double rad(double deg) { return deg * qfic::kPi / 180.0; }
double deg(double r) { return r * 180.0 / qfic::kPi; }

Json config_echo(const Config& c) {
    Json j{{"command", c.command},
           {"n", c.n},
           {"theta_deg", c.theta_deg},
           {"theta2_deg", c.theta2_deg ? Json(*c.theta2_deg) : Json(nullptr)},
           {"trials", c.trials},
           {"mean_photons", c.mean_photons},
           {"seed", c.seed},
           {"dist_file", c.dist_file},
           {"model_a", c.model_a},
           {"model_delta", c.model_delta},
           {"model_phi", c.model_phi},
           {"drift_eta", c.drift_eta},
           {"uncompressed", c.uncompressed},
           {"estimator", c.estimator},
           {"out", c.out}};
    return j;
}

Json metadata(const Config& c) {
    return Json{{"command", c.command}, {"version", qfic::kVersion}, {"seed", c.seed}, {"config", config_echo(c)}};
}

qfic::FringeModel model_of(const Config& c) {
    qfic::FringeModel m{c.model_a, c.model_delta, rad(c.model_phi), c.uncompressed ? 1.0 : 2.0};
    m.validate();
    return m;
}

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw ConfigError(what);
    }
}

// Result of one command: text to write and whether its self-checks held.
struct Output {
    std::string text;
    bool checks_ok = true;
    std::string failure;
};

Output cmd_cascade(const Config& c) {
    require(c.n >= 2 && c.n <= qfic::kMaxCascadeQubits, "cascade: --n must lie in [2, 20]");
    const auto phases = qfic::equal_phases(c.n, qfic::EquatorialPhase(rad(c.theta_deg)));
    const auto branches = qfic::cascade_enumerate(phases);
    const double avg = qfic::cascade_average_qfi(branches);
    Json table = Json::array();
    for (const auto& b : branches) {
        Json row = qfic::to_json(b);
        row["phase_deg"] = deg(b.final_phase.radians());
        table.push_back(std::move(row));
    }
    Output o;
    o.checks_ok = std::abs(avg - c.n) <= 1e-9;
    if (!o.checks_ok) {
        o.failure = "average QFI " + qfic::format_double(avg) + " differs from N";
    }
    Json j{{"metadata", metadata(c)},
           {"summary",
            {{"qubits", c.n},
             {"branches", branches.size()},
             {"average_qfi", avg},
             {"input_qfi", c.n},
             {"classical_register_bits", qfic::classical_register_size(c.n)}}},
           {"branches", table}};
    o.text = j.dump(2) + "\n";
    return o;
}

Output cmd_fusion_pair(const Config& c) {
    require(c.trials >= 1, "fusion: --trials must be >= 1");
    const qfic::EquatorialPhase t1(rad(c.theta_deg));
    const qfic::EquatorialPhase t2(rad(*c.theta2_deg));
    std::mt19937_64 rng(c.seed);
    long long discards = 0;
    long long heralds[2] = {0, 0};
    for (long long t = 0; t < c.trials; ++t) {
        const auto f = qfic::fusion_gate(t1, t2, rng);
        if (f.succeeded()) {
            ++heralds[f.herald_bit];
        } else {
            ++discards;
        }
    }
    // Cross-check the sampled branch table against the optics simulation.
    const auto optics = qfic::fusion_optics(t1, t2);
    double worst = std::abs(optics.discard_probability - 0.5);
    Json branches = Json::array();
    for (const auto& b : qfic::fusion_branches(t1, t2)) {
        Json row{{"status", b.outcome.succeeded() ? "success" : "discard"}, {"probability", b.probability}};
        if (b.outcome.succeeded()) {
            const auto& h = optics.heralded[static_cast<std::size_t>(b.outcome.herald_bit)];
            const double fid = qfic::fidelity(h.polarization, qfic::equatorial_state(b.outcome.state_phase()));
            worst = std::max({worst, std::abs(h.probability - b.probability), std::abs(1.0 - fid)});
            row["herald"] = b.outcome.herald_bit ? "V" : "H";
            row["output_phase_deg"] = deg(b.outcome.output_phase.radians());
            row["pi_shift_bit"] = b.outcome.pi_shift_bit;
            row["state_phase_deg"] = deg(b.outcome.state_phase().radians());
        }
        branches.push_back(std::move(row));
    }
    Output o;
    o.checks_ok = worst <= 1e-12;
    if (!o.checks_ok) {
        o.failure = "optics simulation disagrees with the branch table by " + qfic::format_double(worst);
    }
    const double n = static_cast<double>(c.trials);
    Json j{{"metadata", metadata(c)},
           {"mode", "pair"},
           {"theta1_deg", c.theta_deg},
           {"theta2_deg", *c.theta2_deg},
           {"branches", branches},
           {"optics_max_deviation", worst},
           {"sampled",
            {{"trials", c.trials},
             {"discards", discards},
             {"herald_h", heralds[0]},
             {"herald_v", heralds[1]},
             {"success_fraction", static_cast<double>(heralds[0] + heralds[1]) / n},
             {"output_phase_deg", deg((t1 + t2).radians())}}}};
    o.text = j.dump(2) + "\n";
    return o;
}

Output cmd_fusion(const Config& c) {
    if (c.theta2_deg) {
        return cmd_fusion_pair(c);
    }
    require(c.n >= 1, "fusion: --n must be >= 1");
    require(c.trials >= 1, "fusion: --trials must be >= 1");
    std::mt19937_64 rng(c.seed);
    const auto stats = qfic::fusion_tree(c.n, qfic::EquatorialPhase(rad(c.theta_deg)), rng, c.trials);
    Json j = qfic::to_json(stats);
    const double success = stats.fusions ? 1.0 - stats.discard_fraction() : 1.0;
    Json out{{"metadata", metadata(c)},
             {"mode", "tree"},
             {"statistics", j},
             {"success_fraction", success},
             {"depth_bound", qfic::floor_log2(c.n)},
             {"input_qfi", c.n},
             {"cnot_comparison", {{"cascade_throughput", c.n >= 2 ? qfic::cnot_resource_model(c.n).cascade_throughput : 1.0},
                                  {"fusion_pair_throughput", 0.5}}}};
    Output o;
    o.text = out.dump(2) + "\n";
    return o;
}

Output cmd_decompose(const Config& c) {
    require(!c.dist_file.empty(), "decompose: --dist-file is required");
    std::ifstream in(c.dist_file);
    require(static_cast<bool>(in), "decompose: cannot open " + c.dist_file);
    qfic::EnergyDistribution parent;
    try {
        parent = qfic::read_distribution(in);
    } catch (const std::exception& e) {
        throw ConfigError(c.dist_file + ": " + e.what());
    }
    const auto ens = qfic::decompose_two_point(parent);
    const double parent_qfi = qfic::qfi_variance(ens.parent);
    const double avg = ens.average_qfi();
    const double completeness = ens.completeness_residual();
    const double mixture = ens.mixture_residual();
    Output o;
    o.checks_ok = completeness <= 1e-10 && mixture <= 1e-10 && std::abs(avg - parent_qfi) <= 1e-9 &&
                  ens.size() <= std::max<std::size_t>(ens.parent.size() - 1, 1);
    if (!o.checks_ok) {
        o.failure = "ensemble failed its completeness, mixture, size or QFI check";
    }
    Json j{{"metadata", metadata(c)},
           {"ensemble", qfic::to_json(ens)},
           {"components", ens.size()},
           {"completeness_residual", completeness},
           {"mixture_residual", mixture},
           {"qfi_check", {{"parent", parent_qfi}, {"average", avg}}}};
    o.text = j.dump(2) + "\n";
    return o;
}

Output cmd_fringe(const Config& c) {
    require(c.mean_photons > 0, "fringe: --mean-photons must be positive");
    const auto model = model_of(c);
    std::mt19937_64 rng(c.seed);
    std::vector<qfic::CountRecord> records;
    for (double th : qfic::phase_sweep(-90.0, 270.0, 2.5)) {
        records.push_back(qfic::simulate_counts(th, model, c.mean_photons, rng));
    }
    qfic::FringeFitOptions opts;
    opts.base_frequency = model.base_frequency;
    const auto fit = qfic::fit_fringe(records, opts);

    std::ostringstream s;
    s << "# qfic " << qfic::kVersion << " fringe\n";
    s << "# seed: " << c.seed << "\n";
    s << "# config: " << config_echo(c).dump() << "\n";
    s << "# fit: " << Json{{"amplitude", fit.model.amplitude},
                           {"delta", fit.model.frequency_offset},
                           {"phi", fit.model.phase_offset},
                           {"frequency", fit.model.frequency()},
                           {"sigma_amplitude", fit.sigma_amplitude},
                           {"sigma_delta", fit.sigma_delta},
                           {"sigma_phi", fit.sigma_phi},
                           {"residual_sum", fit.residual_sum},
                           {"converged", fit.converged},
                           {"identifiable", fit.identifiable}}
                          .dump()
      << "\n";
    qfic::write_count_records(s, records);
    return {s.str(), true, {}};
}

Output cmd_estimate(const Config& c) {
    require(c.mean_photons > 0, "estimate: --mean-photons must be positive");
    require(c.trials >= 2, "estimate: --trials must be >= 2");
    require(c.estimator == "optimal" || c.estimator == "arccos", "estimate: --estimator must be optimal or arccos");
    require(c.drift_eta >= 0.0 && c.drift_eta < 1.0, "estimate: --drift-eta must lie in [0, 1)");
    const auto model = model_of(c);
    require(model.amplitude > 0.0, "estimate: --model-a must be positive");
    const int multiplier = c.uncompressed ? 1 : 2;
    std::mt19937_64 rng(c.seed);

    std::vector<qfic::EstimationRecord> records;
    std::string estimator = c.estimator;
    if (c.drift_eta > 0.0) {
        // Drift runs sweep the phase over one estimator branch in acquisition order.
        estimator = "arccos";
        const double stop = 90.0 / model.frequency() * 2.0 - 5.0;
        const auto phases = qfic::phase_sweep(5.0, stop, 10.0 / model.frequency() * 2.0);
        records = qfic::drift_study(phases, model, {model.amplitude, c.drift_eta}, c.mean_photons, c.trials, rng);
    } else if (estimator == "optimal") {
        records.push_back(
            qfic::optimal_basis_study(rad(c.theta_deg), multiplier, model.amplitude, c.mean_photons, c.trials, rng));
    } else {
        std::vector<double> est;
        for (long long t = 0; t < c.trials; ++t) {
            auto rec = qfic::simulate_counts(rad(c.theta_deg), model, c.mean_photons, rng);
            if (rec.total() > 0) {
                est.push_back(qfic::estimate_arccos(rec, model).theta);
            }
        }
        records.push_back(qfic::error_statistics(std::move(est), rad(c.theta_deg), c.mean_photons));
    }

    Json rows = Json::array();
    Output o;
    for (const auto& r : records) {
        rows.push_back(qfic::to_json(r));
        if (!std::isfinite(r.rmse) || !std::isfinite(r.std_dev)) {
            o.checks_ok = false;
            o.failure = "non-finite error statistics";
        }
    }
    Json j{{"metadata", metadata(c)},
           {"estimator", estimator},
           {"qubit", c.uncompressed ? "uncompressed" : "compressed"},
           {"qcrb_sqrt_n_std", {{"compressed", 0.5}, {"uncompressed", 1.0}}},
           {"records", rows}};
    o.text = j.dump(2) + "\n";
    return o;
}

int run(const Config& c) {
    require(!c.out.empty(), "--out is required");
    Output o;
    if (c.command == "cascade") {
        o = cmd_cascade(c);
    } else if (c.command == "fusion") {
        o = cmd_fusion(c);
    } else if (c.command == "decompose") {
        o = cmd_decompose(c);
    } else if (c.command == "fringe") {
        o = cmd_fringe(c);
    } else if (c.command == "estimate") {
        o = cmd_estimate(c);
    } else {
        throw ConfigError("unknown command " + c.command);
    }
    try {
        qfic::write_file_atomic(c.out, o.text);
    } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
    }
    if (!o.checks_ok) {
        std::cerr << "qfic: numerical check failed: " << o.failure << "\n";
        return kExitNumerical;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum Fisher information compression simulator"};
    app.set_version_flag("--version", qfic::kVersion);
    Config c;
    double theta2 = 0.0;
    app.add_option("--command", c.command, "cascade | fusion | decompose | fringe | estimate")
        ->required()
        ->check(CLI::IsMember({"cascade", "fusion", "decompose", "fringe", "estimate"}));
    app.add_option("--n", c.n, "number of qubits");
    app.add_option("--theta-deg", c.theta_deg, "phase in degrees");
    auto* t2 = app.add_option("--theta2-deg", theta2, "second phase in degrees (fusion pair mode)");
    app.add_option("--trials", c.trials, "Monte Carlo trials");
    app.add_option("--mean-photons", c.mean_photons, "mean detected photons per setting");
    app.add_option("--seed", c.seed, "RNG seed");
    app.add_option("--dist-file", c.dist_file, "CSV of E,p rows");
    app.add_option("--model-a", c.model_a, "fringe amplitude A");
    app.add_option("--model-delta", c.model_delta, "frequency offset delta");
    app.add_option("--model-phi", c.model_phi, "phase offset phi in degrees");
    app.add_option("--drift-eta", c.drift_eta, "fractional visibility loss over the run");
    app.add_flag("--uncompressed", c.uncompressed, "single-qubit fringe (frequency 1) instead of compressed");
    app.add_option("--estimator", c.estimator, "optimal | arccos");
    app.add_option("--out", c.out, "output file");
    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    if (t2->count() > 0) {
        c.theta2_deg = theta2;
    }
    try {
        return run(c);
    } catch (const ConfigError& e) {
        std::cerr << "qfic: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "qfic: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "qfic: " << e.what() << "\n";
        return kExitNumerical;
    }
}
