#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "stablesde/euler.hpp"
#include "stablesde/harness.hpp"
#include "stablesde/sampling.hpp"

using namespace stablesde;

namespace {

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file: " + path);
    nlohmann::json j;
    f >> j;
    return ExperimentConfig::from_json(j);
}

int verdict_code(const std::string& verdict) {
    return (verdict == "consistent" || verdict == "inconclusive") ? 0 : 1;
}

int report_and_exit(const ExperimentReport& report) {
    std::cout << report.to_json().dump(2) << std::endl;
    return verdict_code(report.verdict);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"alpha-stable SDE scheme experiments"};
    app.require_subcommand(1);

    // --- simulate: one scheme run, endpoint samples to disk
    auto* sim = app.add_subcommand("simulate", "run the scheme and write endpoint samples");
    double sim_alpha = 1.5;
    int sim_d = 1;
    long sim_n = 64, sim_paths = 10000;
    double sim_T = 1.0;
    std::uint64_t sim_seed = 0;
    int sim_threads = 0;
    std::string sim_drift = "sin", sim_out = "samples.bin";
    double sim_amp = 1.0;
    bool sim_csv = false;
    sim->add_option("--alpha", sim_alpha, "stability index in (1,2)");
    sim->add_option("--dimension", sim_d, "state dimension (1 or 2)");
    sim->add_option("--n", sim_n, "steps per unit time");
    sim->add_option("--paths", sim_paths, "Monte Carlo paths");
    sim->add_option("--horizon", sim_T, "time horizon T");
    sim->add_option("--seed", sim_seed, "master seed");
    sim->add_option("--threads", sim_threads, "worker threads (0 = all cores)");
    sim->add_option("--drift", sim_drift, "drift type: zero | const | sin");
    sim->add_option("--amplitude", sim_amp, "drift amplitude");
    sim->add_option("--out", sim_out, "output file");
    sim->add_flag("--csv", sim_csv, "write CSV instead of binary");

    // --- rates: bounded / distributional rate experiment from a config file
    auto* rates = app.add_subcommand("rates", "run a convergence-rate experiment");
    std::string rates_config, rates_out;
    rates->add_option("--config", rates_config, "experiment config JSON")->required();
    rates->add_option("--out", rates_out, "output directory (overrides config)");

    // --- stability: mollification stability probe
    auto* stab = app.add_subcommand("stability", "run the drift-stability probe");
    std::string stab_config, stab_out;
    stab->add_option("--config", stab_config, "experiment config JSON")->required();
    stab->add_option("--out", stab_out, "output directory (overrides config)");

    // --- suite: property matrices
    auto* suite = app.add_subcommand("suite", "run a module property suite");
    std::string suite_kind = "sampler";
    int suite_dim = 2;
    long suite_paths = 1000000;
    std::uint64_t suite_seed = 0;
    std::string suite_out;
    suite->add_option("--kind", suite_kind, "sampler | besov | kernel")->required();
    suite->add_option("--dimension", suite_dim, "max dimension to cover");
    suite->add_option("--paths", suite_paths, "draws per sampler check");
    suite->add_option("--seed", suite_seed, "master seed");
    suite->add_option("--out", suite_out, "output directory");

    // --- exponent: theoretical-rate calculator
    auto* expo = app.add_subcommand("exponent", "evaluate the predicted error exponent");
    double e_alpha = 1.5, e_beta = 0.0, e_gamma = 0.0, e_theta = 0.0, e_eps = 0.0;
    std::string e_regime = "bounded";
    expo->add_option("--alpha", e_alpha)->required();
    expo->add_option("--beta", e_beta);
    expo->add_option("--gamma", e_gamma);
    expo->add_option("--theta", e_theta);
    expo->add_option("--eps", e_eps);
    expo->add_option("--regime", e_regime, "bounded | dist_i | dist_ii");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*sim) {
            const auto spec = StableSpec::make(sim_alpha, SpectralMeasure::uniform(sim_d, 1.0));
            const auto sampler = IncrementSampler::build(spec);
            EulerConfig ec;
            ec.steps_per_unit = sim_n;
            ec.horizon = sim_T;
            ec.x0.assign(sim_d, 0.0);
            ec.paths = sim_paths;
            ec.master_seed = sim_seed;
            ec.threads = sim_threads;
            Drift drift;
            if (sim_drift == "zero")
                drift = [sim_d](const double*, double* out) {
                    for (int i = 0; i < sim_d; ++i) out[i] = 0.0;
                };
            else if (sim_drift == "const")
                drift = [sim_d, sim_amp](const double*, double* out) {
                    for (int i = 0; i < sim_d; ++i) out[i] = sim_amp;
                };
            else if (sim_drift == "sin")
                drift = [sim_d, sim_amp](const double* x, double* out) {
                    for (int i = 0; i < sim_d; ++i) out[i] = sim_amp * std::sin(x[i]);
                };
            else
                throw std::invalid_argument("unknown drift type: " + sim_drift);
            const auto run = simulate_population(ec, sampler, drift, {sim_T});
            if (sim_csv)
                write_population_csv(sim_out, run.endpoints[0], sim_d);
            else
                write_population_binary(sim_out, run.endpoints[0], sim_d, sim_T);
            std::cout << "wrote " << sim_paths << " endpoint samples to " << sim_out << std::endl;
            return 0;
        }
        if (*rates) {
            auto config = load_config(rates_config);
            if (!rates_out.empty()) config.out_dir = rates_out;
            return report_and_exit(run_experiment(config));
        }
        if (*stab) {
            auto config = load_config(stab_config);
            config.kind = ExperimentKind::StabilityProbe;
            if (!stab_out.empty()) config.out_dir = stab_out;
            return report_and_exit(run_stability_probe(config));
        }
        if (*suite) {
            ExperimentConfig config;
            if (suite_kind == "sampler")
                config.kind = ExperimentKind::SamplerSuite;
            else if (suite_kind == "besov")
                config.kind = ExperimentKind::BesovSuite;
            else if (suite_kind == "kernel")
                config.kind = ExperimentKind::KernelSuite;
            else
                throw std::invalid_argument("unknown suite kind: " + suite_kind);
            config.dimension = suite_dim;
            config.paths = suite_paths;
            config.seed = suite_seed;
            config.out_dir = suite_out;
            return report_and_exit(run_suite(config));
        }
        if (*expo) {
            Regime regime;
            if (e_regime == "bounded")
                regime = Regime::Bounded;
            else if (e_regime == "dist_i")
                regime = Regime::DistI;
            else if (e_regime == "dist_ii")
                regime = Regime::DistII;
            else
                throw std::invalid_argument("unknown regime: " + e_regime);
            std::cout << theoretical_exponent(e_alpha, e_beta, e_gamma, e_theta, e_eps, regime)
                      << std::endl;
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 2;
}
