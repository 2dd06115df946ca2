#include "stablesde/euler.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace stablesde {

void EulerConfig::validate() const {
    if (steps_per_unit < 1) throw std::invalid_argument("EulerConfig: n >= 1 required");
    if (!(horizon > 0.0)) throw std::invalid_argument("EulerConfig: T > 0 required");
    if (paths < 1) throw std::invalid_argument("EulerConfig: N >= 1 required");
    if (x0.empty()) throw std::invalid_argument("EulerConfig: x0 must be set");
}

double grid_time(long n, double t, double horizon) {
    if (t < 0.0 || t > horizon + 1e-12)
        throw std::invalid_argument("grid_time: t outside [0,T]");
    const long k = std::min(long(std::floor(double(n) * t)), long(std::floor(double(n) * horizon)));
    return double(k) / double(n);
}

std::vector<std::vector<double>> integrate_path(const EulerConfig& config,
                                                const IncrementSampler& sampler,
                                                const Drift& drift, RngStream& stream,
                                                const std::vector<double>& checkpoints) {
    config.validate();
    const int d = sampler.dimension();
    const long n = config.steps_per_unit;
    const double T = config.horizon;
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
        throw std::invalid_argument("integrate_path: checkpoints must be sorted");
    if (!checkpoints.empty() && (checkpoints.front() < 0.0 || checkpoints.back() > T + 1e-12))
        throw std::invalid_argument("integrate_path: checkpoints outside [0,T]");

    std::vector<std::vector<double>> out;
    out.reserve(checkpoints.size());
    std::size_t ck = 0;
    while (ck < checkpoints.size() && checkpoints[ck] <= 0.0) {
        out.push_back(config.x0);
        ++ck;
    }

    const long last_node = long(std::floor(double(n) * T));
    std::vector<double> x = config.x0;
    std::vector<double> bval(d), inc(d), state(d);
    for (long k = 0; k <= last_node; ++k) {
        const double left = double(k) / double(n);
        const double right = (k == last_node) ? T : double(k + 1) / double(n);
        if (right <= left) break;  // nT integer: empty trailing interval
        drift(x.data(), bval.data());

        // accumulated noise since the left node; split at interior checkpoints
        std::vector<double> acc(d, 0.0);
        double pos = left;
        while (ck < checkpoints.size() && checkpoints[ck] < right) {
            const double t = checkpoints[ck];
            if (t > pos) {
                sampler.sample_increment_into(t - pos, stream, inc.data());
                for (int i = 0; i < d; ++i) acc[i] += inc[i];
                pos = t;
            }
            for (int i = 0; i < d; ++i) state[i] = x[i] + bval[i] * (t - left) + acc[i];
            out.push_back(state);
            ++ck;
        }
        sampler.sample_increment_into(right - pos, stream, inc.data());
        for (int i = 0; i < d; ++i) acc[i] += inc[i];
        for (int i = 0; i < d; ++i) x[i] += bval[i] * (right - left) + acc[i];
        for (int i = 0; i < d; ++i)
            if (!std::isfinite(x[i]))
                throw std::runtime_error("integrate_path: state became non-finite at t=" +
                                         std::to_string(right));
        while (ck < checkpoints.size() && checkpoints[ck] <= right + 1e-15) {
            out.push_back(x);
            ++ck;
        }
    }
    while (ck < checkpoints.size()) {  // checkpoints equal to T up to rounding
        out.push_back(x);
        ++ck;
    }
    return out;
}

EulerRun simulate_population(const EulerConfig& config, const IncrementSampler& sampler,
                             const Drift& drift, const std::vector<double>& t_obs) {
    config.validate();
    const int d = sampler.dimension();
    const long N = config.paths;

    EulerRun run;
    run.config = config;
    run.t_obs = t_obs;
    run.endpoints.assign(t_obs.size(), std::vector<double>(std::size_t(N) * d));

    int threads = config.threads > 0 ? config.threads
                                     : int(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    threads = int(std::min<long>(threads, N));

    std::vector<std::string> errors(threads);
    auto worker = [&](int w) {
        try {
            for (long path = w; path < N; path += threads) {
                RngStream stream(config.master_seed, std::uint64_t(path));
                const auto states = integrate_path(config, sampler, drift, stream, t_obs);
                for (std::size_t ti = 0; ti < t_obs.size(); ++ti)
                    std::copy(states[ti].begin(), states[ti].end(),
                              run.endpoints[ti].begin() + std::size_t(path) * d);
            }
        } catch (const std::exception& e) {
            errors[w] = e.what();
        }
    };

    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (!e.empty()) throw std::runtime_error("simulate_population: path aborted: " + e);
    return run;
}

double pairwise_sum(const double* data, std::size_t count) {
    if (count <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < count; ++i) s += data[i];
        return s;
    }
    const std::size_t half = count / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, count - half);
}

IncrementMomentReport increment_moment_check(const IncrementSampler& sampler,
                                             const Drift& drift,
                                             const std::vector<double>& x0, double horizon,
                                             const std::vector<long>& n_ladder, double p,
                                             long paths, std::uint64_t seed, int threads) {
    const double alpha = sampler.spec().alpha();
    if (!(p > 0.0 && p < alpha))
        throw std::invalid_argument("increment_moment_check: p in (0, alpha) required");

    IncrementMomentReport report;
    for (long n : n_ladder) {
        // step containing T/2; observe the scheme at its mid-step offset
        const long k = long(std::floor(double(n) * horizon / 2.0));
        const double left = double(k) / double(n);
        const double delta = 0.5 / double(n);

        EulerConfig cfg;
        cfg.steps_per_unit = n;
        cfg.horizon = horizon;
        cfg.x0 = x0;
        cfg.paths = paths;
        cfg.master_seed = seed;
        cfg.threads = threads;

        const int d = sampler.dimension();
        std::vector<double> vals(paths);
        int nthreads = threads > 0 ? threads : int(std::thread::hardware_concurrency());
        if (nthreads < 1) nthreads = 1;
        nthreads = int(std::min<long>(nthreads, paths));
        auto worker = [&](int w) {
            std::vector<double> bval(d), inc(d);
            for (long path = w; path < paths; path += nthreads) {
                RngStream stream(seed, std::uint64_t(path));
                const auto states = integrate_path(cfg, sampler, drift, stream, {left});
                const auto& xk = states[0];
                drift(xk.data(), bval.data());
                sampler.sample_increment_into(delta, stream, inc.data());
                double mag2 = 0.0;
                for (int i = 0; i < d; ++i) {
                    const double diff = bval[i] * delta + inc[i];
                    mag2 += diff * diff;
                }
                vals[path] = std::pow(mag2, p / 2.0);
            }
        };
        if (nthreads == 1) {
            worker(0);
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < nthreads; ++w) pool.emplace_back(worker, w);
            for (auto& t : pool) t.join();
        }
        report.points.push_back({n, pairwise_sum(vals.data(), vals.size()) / double(paths)});
    }

    // OLS slope of log moment vs log n
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = double(report.points.size());
    for (const auto& pt : report.points) {
        const double lx = std::log(double(pt.n)), ly = std::log(pt.moment);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    report.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return report;
}

void write_population_binary(const std::string& path, const std::vector<double>& samples,
                             int dimension, double t) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_population_binary: cannot open " + path);
    const char magic[8] = {'S', 'T', 'B', 'L', 'P', 'O', 'P', '1'};
    f.write(magic, 8);
    const std::uint32_t d32 = std::uint32_t(dimension);
    const std::uint64_t n64 = samples.size() / std::size_t(dimension);
    f.write(reinterpret_cast<const char*>(&d32), 4);
    f.write(reinterpret_cast<const char*>(&n64), 8);
    f.write(reinterpret_cast<const char*>(&t), 8);
    f.write(reinterpret_cast<const char*>(samples.data()),
            std::streamsize(samples.size() * sizeof(double)));
}

std::vector<double> read_population_binary(const std::string& path, int& dimension, double& t) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_population_binary: cannot open " + path);
    char magic[8];
    f.read(magic, 8);
    if (std::memcmp(magic, "STBLPOP1", 8) != 0)
        throw std::runtime_error("read_population_binary: bad magic");
    std::uint32_t d32 = 0;
    std::uint64_t n64 = 0;
    f.read(reinterpret_cast<char*>(&d32), 4);
    f.read(reinterpret_cast<char*>(&n64), 8);
    f.read(reinterpret_cast<char*>(&t), 8);
    dimension = int(d32);
    std::vector<double> samples(std::size_t(n64) * d32);
    f.read(reinterpret_cast<char*>(samples.data()),
           std::streamsize(samples.size() * sizeof(double)));
    if (!f) throw std::runtime_error("read_population_binary: truncated file");
    return samples;
}

void write_population_csv(const std::string& path, const std::vector<double>& samples,
                          int dimension) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_population_csv: cannot open " + path);
    f.precision(17);
    const std::size_t n = samples.size() / std::size_t(dimension);
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < dimension; ++c) {
            if (c) f << ',';
            f << samples[i * dimension + c];
        }
        f << '\n';
    }
}

}  // namespace stablesde
