#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stablesde/rng.hpp"
#include "stablesde/sampling.hpp"

namespace stablesde {

// Drift callback: writes b(x) into out (both of dimension d).
using Drift = std::function<void(const double* x, double* out)>;

struct EulerConfig {
    long steps_per_unit = 1;      // n
    double horizon = 1.0;         // T
    std::vector<double> x0;
    long paths = 1;               // N
    std::uint64_t master_seed = 0;
    int threads = 0;              // 0 = hardware concurrency

    void validate() const;
};

// pi_n(t) = floor(n t)/n, the left grid node
double grid_time(long n, double t, double horizon);

// One Euler path; returns the state at each checkpoint (sorted, within
// [0,T]). Checkpoints strictly inside a step use independent sub-increments
// of the step's noise, preserving the joint law.
std::vector<std::vector<double>> integrate_path(const EulerConfig& config,
                                                const IncrementSampler& sampler,
                                                const Drift& drift, RngStream& stream,
                                                const std::vector<double>& checkpoints);

struct EulerRun {
    EulerConfig config;
    std::vector<double> t_obs;
    // endpoints[i]: paths x d flat array of states at t_obs[i]
    std::vector<std::vector<double>> endpoints;
};

// N independent paths, per-path streams (stream_id = path index). The result
// is bit-identical for any thread count.
EulerRun simulate_population(const EulerConfig& config, const IncrementSampler& sampler,
                             const Drift& drift, const std::vector<double>& t_obs);

struct IncrementMomentReport {
    struct Point {
        long n;
        double moment;  // E |X^n_r - X^n_{pi_n(r)}|^p at a mid-step offset
    };
    std::vector<Point> points;
    double slope;  // log-log slope vs n
};

// Empirical check of the one-step moment bound: p in (0, alpha).
IncrementMomentReport increment_moment_check(const IncrementSampler& sampler,
                                             const Drift& drift,
                                             const std::vector<double>& x0, double horizon,
                                             const std::vector<long>& n_ladder, double p,
                                             long paths, std::uint64_t seed, int threads = 0);

// Deterministic pairwise summation (order-fixed, thread-count independent).
double pairwise_sum(const double* data, std::size_t count);

// Endpoint population export: little-endian binary (magic "STBLPOP1",
// u32 d, u64 N, f64 t, then N*d doubles) and CSV.
void write_population_binary(const std::string& path, const std::vector<double>& samples,
                             int dimension, double t);
std::vector<double> read_population_binary(const std::string& path, int& dimension, double& t);
void write_population_csv(const std::string& path, const std::vector<double>& samples,
                          int dimension);

}  // namespace stablesde
