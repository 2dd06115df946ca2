#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "stablesde/metrics.hpp"
#include "stablesde/stable_model.hpp"

namespace stablesde {

enum class ExperimentKind {
    BoundedRate,
    DistRateI,
    DistRateII,
    MomentCheck,
    KernelSuite,
    BesovSuite,
    SamplerSuite,
    StabilityProbe,
};

std::string kind_name(ExperimentKind kind);
ExperimentKind kind_from_name(const std::string& name);

// Drift descriptor: bounded closed forms ("zero", "const", "sin") or a
// lacunary spectral synthesis ("lacunary") used by the distributional runs.
struct DriftDescriptor {
    std::string type = "sin";
    double amplitude = 1.0;   // sin / const value
    double beta = 0.1;        // lacunary regularity
    int levels = 8;           // lacunary J
    std::uint64_t seed = 7;   // lacunary phase seed
    bool divergence_free = false;

    nlohmann::json to_json() const;
    static DriftDescriptor from_json(const nlohmann::json& j);
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::BoundedRate;
    double alpha = 1.5;
    int dimension = 1;
    nlohmann::json measure;  // SpectralMeasure json; empty -> uniform mass 1
    DriftDescriptor drift;

    std::vector<long> n_ladder;
    double gamma = 0.0;   // smoothing coupling m = n^gamma (dist regimes)
    double theta = 0.0;   // 0 -> regime default
    double eps = 0.05;
    double horizon = 1.0;
    std::vector<double> t_obs;  // empty -> {horizon}
    long paths = 1000000;
    int ref_multiplier = 16;    // n_ref = max(n_ladder) * ref_multiplier
    long n_ref_override = 0;    // nonzero pins n_ref directly

    std::vector<double> m_ladder;  // stability probe smoothing levels
    long n_fine = 64;              // stability probe step count
    double theta_norm = 0.0;       // stability probe Besov index; 0 -> beta + 0.5

    std::uint64_t seed = 0;
    int threads = 0;
    std::string out_dir;
    bool save_samples = false;
    int bins = 200;
    double slope_tol = 0.25;       // two-sided band (bounded regime)
    double one_sided_slack = 0.3;  // dist regimes: slope <= theoretical + slack

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    void validate() const;  // throws naming the violated constraint
    SpectralMeasure resolve_measure() const;
    long n_ref() const;
};

struct ExperimentReport {
    nlohmann::json config;
    std::vector<RatePoint> table;
    std::vector<double> m_per_point;  // dist/stability: smoothing level per row
    RateFit fit;
    double theoretical = 0.0;
    std::string verdict;  // consistent | inconsistent | inconclusive
    double wall_seconds = 0.0;
    long total_paths = 0;
    nlohmann::json extra;  // suite check tables, diagnostics

    nlohmann::json to_json() const;  // deterministic part only
};

ExperimentReport run_bounded_rate(const ExperimentConfig& config);
ExperimentReport run_dist_rate(const ExperimentConfig& config);
ExperimentReport run_stability_probe(const ExperimentConfig& config);
ExperimentReport run_moment_check(const ExperimentConfig& config);
// kernel_suite | besov_suite | sampler_suite property matrices
ExperimentReport run_suite(const ExperimentConfig& config);
ExperimentReport run_experiment(const ExperimentConfig& config);

// report.json (timestamps confined to a separate metadata block) + errors.csv
void write_report(const ExperimentReport& report, const std::string& dir);

// nearest power of two in log space, at least 1
long round_pow2(double x);

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace stablesde
