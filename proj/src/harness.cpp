#include "stablesde/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "stablesde/besov.hpp"
#include "stablesde/euler.hpp"
#include "stablesde/heat_kernel.hpp"
#include "stablesde/sampling.hpp"

namespace stablesde {

std::string kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::BoundedRate: return "bounded_rate";
        case ExperimentKind::DistRateI: return "dist_rate_i";
        case ExperimentKind::DistRateII: return "dist_rate_ii";
        case ExperimentKind::MomentCheck: return "moment_check";
        case ExperimentKind::KernelSuite: return "kernel_suite";
        case ExperimentKind::BesovSuite: return "besov_suite";
        case ExperimentKind::SamplerSuite: return "sampler_suite";
        case ExperimentKind::StabilityProbe: return "stability_probe";
    }
    throw std::logic_error("kind_name: unknown kind");
}

ExperimentKind kind_from_name(const std::string& name) {
    for (auto k : {ExperimentKind::BoundedRate, ExperimentKind::DistRateI,
                   ExperimentKind::DistRateII, ExperimentKind::MomentCheck,
                   ExperimentKind::KernelSuite, ExperimentKind::BesovSuite,
                   ExperimentKind::SamplerSuite, ExperimentKind::StabilityProbe})
        if (kind_name(k) == name) return k;
    throw std::invalid_argument("unknown experiment kind: " + name);
}

nlohmann::json DriftDescriptor::to_json() const {
    return {{"type", type},     {"amplitude", amplitude}, {"beta", beta},
            {"levels", levels}, {"seed", seed},           {"divergence_free", divergence_free}};
}

DriftDescriptor DriftDescriptor::from_json(const nlohmann::json& j) {
    DriftDescriptor d;
    d.type = j.value("type", d.type);
    d.amplitude = j.value("amplitude", d.amplitude);
    d.beta = j.value("beta", d.beta);
    d.levels = j.value("levels", d.levels);
    d.seed = j.value("seed", d.seed);
    d.divergence_free = j.value("divergence_free", d.divergence_free);
    return d;
}

nlohmann::json ExperimentConfig::to_json() const {
    return {{"kind", kind_name(kind)},
            {"alpha", alpha},
            {"dimension", dimension},
            {"measure", measure},
            {"drift", drift.to_json()},
            {"n_ladder", n_ladder},
            {"gamma", gamma},
            {"theta", theta},
            {"eps", eps},
            {"horizon", horizon},
            {"t_obs", t_obs},
            {"paths", paths},
            {"ref_multiplier", ref_multiplier},
            {"n_ref_override", n_ref_override},
            {"m_ladder", m_ladder},
            {"n_fine", n_fine},
            {"theta_norm", theta_norm},
            {"seed", seed},
            {"threads", threads},
            {"out_dir", out_dir},
            {"save_samples", save_samples},
            {"bins", bins},
            {"slope_tol", slope_tol},
            {"one_sided_slack", one_sided_slack}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.kind = kind_from_name(j.at("kind").get<std::string>());
    c.alpha = j.value("alpha", c.alpha);
    c.dimension = j.value("dimension", c.dimension);
    if (j.contains("measure")) c.measure = j["measure"];
    if (j.contains("drift")) c.drift = DriftDescriptor::from_json(j["drift"]);
    c.n_ladder = j.value("n_ladder", c.n_ladder);
    c.gamma = j.value("gamma", c.gamma);
    c.theta = j.value("theta", c.theta);
    c.eps = j.value("eps", c.eps);
    c.horizon = j.value("horizon", c.horizon);
    c.t_obs = j.value("t_obs", c.t_obs);
    c.paths = j.value("paths", c.paths);
    c.ref_multiplier = j.value("ref_multiplier", c.ref_multiplier);
    c.n_ref_override = j.value("n_ref_override", c.n_ref_override);
    c.m_ladder = j.value("m_ladder", c.m_ladder);
    c.n_fine = j.value("n_fine", c.n_fine);
    c.theta_norm = j.value("theta_norm", c.theta_norm);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.save_samples = j.value("save_samples", c.save_samples);
    c.bins = j.value("bins", c.bins);
    c.slope_tol = j.value("slope_tol", c.slope_tol);
    c.one_sided_slack = j.value("one_sided_slack", c.one_sided_slack);
    return c;
}

SpectralMeasure ExperimentConfig::resolve_measure() const {
    if (measure.is_null() || measure.empty()) return SpectralMeasure::uniform(dimension, 1.0);
    return SpectralMeasure::from_json(measure);
}

long ExperimentConfig::n_ref() const {
    if (n_ref_override > 0) return n_ref_override;
    if (n_ladder.empty()) throw std::invalid_argument("n_ref: empty n-ladder");
    return n_ladder.back() * ref_multiplier;
}

void ExperimentConfig::validate() const {
    if (!(alpha > 1.0 && alpha < 2.0))
        throw std::invalid_argument("config: violated alpha in (1,2)");
    if (dimension < 1 || dimension > 2)
        throw std::invalid_argument("config: violated dimension in {1,2}");
    if (paths < 1) throw std::invalid_argument("config: violated paths >= 1");
    if (!(horizon > 0.0)) throw std::invalid_argument("config: violated horizon > 0");
    const bool needs_ladder = kind == ExperimentKind::BoundedRate ||
                              kind == ExperimentKind::DistRateI ||
                              kind == ExperimentKind::DistRateII ||
                              kind == ExperimentKind::MomentCheck;
    if (needs_ladder) {
        if (n_ladder.empty()) throw std::invalid_argument("config: violated n_ladder nonempty");
        for (std::size_t i = 0; i + 1 < n_ladder.size(); ++i)
            if (n_ladder[i] >= n_ladder[i + 1])
                throw std::invalid_argument("config: violated n_ladder strictly increasing");
        if (n_ladder.front() < 1)
            throw std::invalid_argument("config: violated n_ladder entries >= 1");
    }
    if (kind == ExperimentKind::DistRateI) {
        const double beta = drift.beta;
        if (!(beta > 0.0 && beta < (alpha - 1.0) / 2.0))
            throw std::invalid_argument("config: violated beta in (0, (alpha-1)/2)");
        // strict upper bound here: the exponent degenerates to 0 at the endpoint
        if (!(gamma > 0.0 && gamma < (alpha - 1.0) / (2.0 * alpha * beta)))
            throw std::invalid_argument("config: violated gamma in (0, (alpha-1)/(2 alpha beta))");
        const double th = theta != 0.0 ? theta : alpha - 1.0 - beta - alpha * eps;
        if (!(th > beta && th < alpha - 1.0 - beta))
            throw std::invalid_argument("config: violated theta in (beta, alpha-1-beta)");
    }
    if (kind == ExperimentKind::DistRateII) {
        const double beta = drift.beta;
        if (!(beta >= (alpha - 1.0) / 2.0 && beta < alpha - 1.0))
            throw std::invalid_argument("config: violated beta in [(alpha-1)/2, alpha-1)");
        if (!(gamma > 0.0 && gamma < (alpha - 1.0 - beta) / (alpha * beta)))
            throw std::invalid_argument(
                "config: violated gamma in (0, (alpha-1-beta)/(alpha beta))");
        if (dimension != 2 || !drift.divergence_free)
            throw std::invalid_argument("config: violated divergence-free d=2 drift (regime ii)");
    }
    if (kind == ExperimentKind::StabilityProbe) {
        if (m_ladder.size() < 2 && !m_ladder.empty())
            throw std::invalid_argument("config: violated m_ladder with >= 2 levels");
    }
}

long round_pow2(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("round_pow2: x > 0 required");
    const double e = std::round(std::log2(x));
    return long(std::ldexp(1.0, std::max(0, int(e))));
}

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("spearman_correlation: need two equal series, size >= 2");
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
        std::vector<double> r(v.size());
        for (std::size_t pos = 0; pos < idx.size(); ++pos) r[idx[pos]] = double(pos);
        return r;
    };
    const auto ra = ranks(a), rb = ranks(b);
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= double(ra.size());
    mb /= double(rb.size());
    double num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    return num / std::sqrt(da * db);
}

namespace {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Drift bounded_drift(const DriftDescriptor& desc, int d) {
    const double a = desc.amplitude;
    if (desc.type == "zero")
        return [d](const double*, double* out) {
            for (int i = 0; i < d; ++i) out[i] = 0.0;
        };
    if (desc.type == "const")
        return [d, a](const double*, double* out) {
            for (int i = 0; i < d; ++i) out[i] = a;
        };
    if (desc.type == "sin")
        return [d, a](const double* x, double* out) {
            for (int i = 0; i < d; ++i) out[i] = a * std::sin(x[i]);
        };
    throw std::invalid_argument("bounded_drift: unsupported type " + desc.type);
}

Drift spec_drift(const DriftSpec& spec) {
    return [&spec](const double* x, double* out) { spec.evaluate_into(x, out); };
}

EmpiricalLaw simulate_endpoint(const ExperimentConfig& config, const IncrementSampler& sampler,
                               const Drift& drift, long n, std::uint64_t master_seed,
                               const std::string& tag) {
    EulerConfig ec;
    ec.steps_per_unit = n;
    ec.horizon = config.horizon;
    ec.x0.assign(config.dimension, 0.0);
    ec.paths = config.paths;
    ec.master_seed = master_seed;
    ec.threads = config.threads;
    const double t = config.t_obs.empty() ? config.horizon : config.t_obs.front();
    auto run = simulate_population(ec, sampler, drift, {t});
    return EmpiricalLaw::from_samples(std::move(run.endpoints[0]), config.dimension, t, tag);
}

std::string finish_rate_report(ExperimentReport& report, const ExperimentConfig& config,
                               bool one_sided) {
    report.fit = fit_rate(report.table);
    report.fit.theoretical = report.theoretical;
    if (report.fit.verdict == "inconclusive") {
        report.verdict = "inconclusive";
    } else if (one_sided) {
        report.verdict = report.fit.slope <= report.theoretical + config.one_sided_slack
                             ? "consistent"
                             : "inconsistent";
    } else {
        report.verdict = std::abs(report.fit.slope - report.theoretical) <= config.slope_tol
                             ? "consistent"
                             : "inconsistent";
    }
    report.fit.verdict = report.verdict;
    return report.verdict;
}

void maybe_save_samples(const ExperimentConfig& config, const EmpiricalLaw& law, long n) {
    if (!config.save_samples || config.out_dir.empty()) return;
    std::filesystem::create_directories(config.out_dir);
    write_population_binary(config.out_dir + "/samples-" + std::to_string(n) + ".bin",
                            law.samples, law.dimension, law.t);
}

void finalize(ExperimentReport& report, const ExperimentConfig& config,
              std::chrono::steady_clock::time_point t0) {
    report.config = config.to_json();
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!config.out_dir.empty()) write_report(report, config.out_dir);
}

nlohmann::json check_json(const CheckReport& c) {
    return {{"name", c.name},
            {"passed", c.passed},
            {"statistic", c.statistic},
            {"threshold", c.threshold},
            {"details", c.details}};
}

CheckReport make_check(std::string name, double statistic, double threshold,
                       nlohmann::json details = nlohmann::json::object()) {
    CheckReport c;
    c.name = std::move(name);
    c.statistic = statistic;
    c.threshold = threshold;
    c.passed = statistic <= threshold;
    c.details = std::move(details);
    return c;
}

}  // namespace

ExperimentReport run_bounded_rate(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    config.validate();
    ExperimentReport report;

    const auto spec = StableSpec::make(config.alpha, config.resolve_measure());
    const auto sampler = IncrementSampler::build(spec);
    const Drift drift = bounded_drift(config.drift, config.dimension);
    const auto dict = TestDictionary::standard(config.dimension);

    const long nr = config.n_ref();
    const auto ref = simulate_endpoint(config, sampler, drift, nr, derive_seed(config.seed, nr),
                                       "ref-n" + std::to_string(nr));
    maybe_save_samples(config, ref, nr);
    report.total_paths = config.paths;

    for (long n : config.n_ladder) {
        const auto law = simulate_endpoint(config, sampler, drift, n, derive_seed(config.seed, n),
                                           "n" + std::to_string(n));
        const auto we = weak_error(law, ref, dict);
        report.table.push_back({double(n), we.max_gap, we.ci});
        report.total_paths += config.paths;
        maybe_save_samples(config, law, n);
    }

    report.theoretical = theoretical_exponent(config.alpha, 0.0, 0.0, 0.0, 0.0, Regime::Bounded);
    finish_rate_report(report, config, /*one_sided=*/false);
    finalize(report, config, t0);
    return report;
}

ExperimentReport run_dist_rate(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    config.validate();
    const bool regime_ii = config.kind == ExperimentKind::DistRateII;
    ExperimentReport report;

    const double beta = config.drift.beta;
    const double theta =
        config.theta != 0.0 ? config.theta : config.alpha - 1.0 - beta - config.alpha * config.eps;
    report.theoretical =
        theoretical_exponent(config.alpha, beta, config.gamma, regime_ii ? 0.0 : theta,
                             config.eps, regime_ii ? Regime::DistII : Regime::DistI);

    const auto spec = StableSpec::make(config.alpha, config.resolve_measure());
    const auto sampler = IncrementSampler::build(spec);
    const auto dict = TestDictionary::standard(config.dimension);
    const auto b = synthesize_drift(beta, config.drift.levels, config.drift.amplitude,
                                    config.drift.seed, config.dimension,
                                    config.drift.divergence_free);
    const Mollifier moll(config.dimension);

    auto law_at = [&](long n) {
        const long m = round_pow2(std::pow(double(n), config.gamma));
        const auto bm = mollify_drift(b, moll, double(m));
        const auto law = simulate_endpoint(config, sampler, spec_drift(bm), n,
                                           derive_seed(config.seed, n), "n" + std::to_string(n));
        return std::make_pair(m, law);
    };

    const long nr = config.n_ref();
    const auto [m_ref, ref] = law_at(nr);
    maybe_save_samples(config, ref, nr);
    report.total_paths = config.paths;
    report.extra["m_ref"] = m_ref;

    for (long n : config.n_ladder) {
        const auto [m, law] = law_at(n);
        const auto we = weak_error(law, ref, dict);
        report.table.push_back({double(n), we.max_gap, we.ci});
        report.m_per_point.push_back(double(m));
        report.total_paths += config.paths;
        maybe_save_samples(config, law, n);
    }

    finish_rate_report(report, config, /*one_sided=*/true);
    finalize(report, config, t0);
    return report;
}

ExperimentReport run_moment_check(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    config.validate();
    ExperimentReport report;

    const auto spec = StableSpec::make(config.alpha, config.resolve_measure());
    const auto sampler = IncrementSampler::build(spec);
    const Drift drift = bounded_drift(config.drift, config.dimension);
    const double p = config.alpha / 2.0;

    const auto mc = increment_moment_check(sampler, drift, std::vector<double>(config.dimension, 0.0),
                                           config.horizon, config.n_ladder, p, config.paths,
                                           config.seed, config.threads);
    for (const auto& pt : mc.points) report.table.push_back({double(pt.n), pt.moment, 0.0});
    report.total_paths = config.paths * long(config.n_ladder.size());
    report.theoretical = -p / config.alpha;  // one-step scale n^{-1/alpha} to the p-th power
    report.fit = fit_rate(report.table);
    report.fit.theoretical = report.theoretical;
    report.extra["p"] = p;
    report.verdict = report.fit.verdict == "inconclusive"
                         ? "inconclusive"
                         : (std::abs(report.fit.slope - report.theoretical) <= 0.1
                                ? "consistent"
                                : "inconsistent");
    report.fit.verdict = report.verdict;
    finalize(report, config, t0);
    return report;
}

ExperimentReport run_stability_probe(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    config.validate();
    ExperimentReport report;

    const double beta = config.drift.beta;
    const double theta = config.theta_norm != 0.0 ? config.theta_norm : beta + 0.5;
    const auto spec = StableSpec::make(config.alpha, config.resolve_measure());
    const auto sampler = IncrementSampler::build(spec);
    const auto dict = TestDictionary::standard(config.dimension);
    const auto b1 = synthesize_drift(beta, config.drift.levels, config.drift.amplitude,
                                     config.drift.seed, config.dimension,
                                     config.drift.divergence_free);
    const Mollifier moll(config.dimension);
    std::vector<double> m_ladder = config.m_ladder;
    if (m_ladder.empty()) m_ladder = {4, 8, 16, 32, 64};

    const auto law1 = simulate_endpoint(config, sampler, spec_drift(b1), config.n_fine,
                                        derive_seed(config.seed, 0), "base");
    report.total_paths = config.paths;

    // Besov norm of b1 - b_m on a grid resolving every lacunary level
    const DyadicPartition part;
    int grid = 4;
    while (grid < 8 * (1 << config.drift.levels)) grid *= 2;

    std::vector<double> proxies, norms;
    for (double m : m_ladder) {
        const auto bm = mollify_drift(b1, moll, m);
        std::vector<FieldOnGrid> diff;
        for (int c = 0; c < config.dimension; ++c) {
            auto f1 = b1.render(c, grid, 1);
            const auto fm = bm.render(c, grid, 1);
            auto& v = f1.mutable_values();
            const auto& vm = fm.values();
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= vm[i];
            diff.push_back(std::move(f1));
        }
        const double norm = besov_norm(diff, part, -theta);

        const auto law_m =
            simulate_endpoint(config, sampler, spec_drift(bm), config.n_fine,
                              derive_seed(config.seed, std::uint64_t(m) + 1000), "m");
        const auto we = weak_error(law_m, law1, dict);
        proxies.push_back(we.max_gap);
        norms.push_back(norm);
        report.table.push_back({m, we.max_gap, we.ci});
        report.m_per_point.push_back(m);
        report.total_paths += config.paths;
    }

    const double rho = spearman_correlation(proxies, norms);
    report.extra["besov_norms"] = norms;
    report.extra["theta_norm"] = theta;
    report.extra["spearman"] = rho;
    report.theoretical = 0.9;
    report.fit = fit_rate(report.table);
    report.verdict = rho > 0.9 ? "consistent" : "inconsistent";
    finalize(report, config, t0);
    return report;
}

// ---------------------------------------------------------------------------
// property suites

namespace {

std::vector<std::vector<double>> ecf_grid(int d) {
    std::vector<std::vector<double>> grid;
    if (d == 1) {
        for (double m : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0}) {
            grid.push_back({m});
            grid.push_back({-m});
        }
    } else {
        for (double m : {0.5, 1.0, 2.0, 4.0})
            for (int a = 0; a < 4; ++a) {
                const double phi = M_PI * a / 4.0;
                grid.push_back({m * std::cos(phi), m * std::sin(phi)});
            }
    }
    return grid;
}

double max_ecf_deviation(const StableSpec& spec, double dt, long N, std::uint64_t seed) {
    const auto sampler = IncrementSampler::build(spec);
    const int d = spec.dimension();
    const auto grid = ecf_grid(d);
    std::vector<double> re(grid.size(), 0.0), im(grid.size(), 0.0), inc(d);
    RngStream stream(seed, 0);
    for (long i = 0; i < N; ++i) {
        sampler.sample_increment_into(dt, stream, inc.data());
        for (std::size_t q = 0; q < grid.size(); ++q) {
            double a = 0.0;
            for (int c = 0; c < d; ++c) a += grid[q][c] * inc[c];
            re[q] += std::cos(a);
            im[q] += std::sin(a);
        }
    }
    double worst = 0.0;
    for (std::size_t q = 0; q < grid.size(); ++q) {
        const double target = std::exp(-dt * spec.characteristic_exponent(grid[q]));
        worst = std::max(worst, std::hypot(re[q] / double(N) - target, im[q] / double(N)));
    }
    return worst;
}

ExperimentReport run_sampler_suite(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport report;
    const long N = config.paths;
    const double threshold = 4.0 / std::sqrt(double(N));
    const double dt = 0.5;

    nlohmann::json checks = nlohmann::json::array();
    bool all_pass = true;
    std::uint64_t salt = 0;
    for (double alpha : {1.2, 1.5, 1.8}) {
        for (int d : {1, 2}) {
            std::vector<std::pair<std::string, SpectralMeasure>> measures;
            measures.emplace_back("uniform", SpectralMeasure::uniform(d, 1.0));
            {
                std::vector<SpectralMeasure::Atom> atoms;
                for (int axis = 0; axis < d; ++axis) {
                    std::vector<double> e(d, 0.0);
                    e[axis] = 1.0;
                    atoms.push_back({e, 0.5});
                    for (double& c : e) c = -c;
                    atoms.push_back({e, 0.5});
                }
                measures.emplace_back("cylindrical", SpectralMeasure::atoms(d, atoms));
            }
            {
                // d=1: a single +-1 pair; d=2: the two diagonal pairs (a lone
                // pair would not span the plane and is rejected as degenerate)
                std::vector<SpectralMeasure::Atom> atoms;
                if (d == 1) {
                    atoms = {{{1.0}, 1.0}, {{-1.0}, 1.0}};
                } else {
                    const double r = 1.0 / std::sqrt(2.0);
                    atoms = {{{r, r}, 0.5}, {{-r, -r}, 0.5}, {{r, -r}, 0.5}, {{-r, r}, 0.5}};
                }
                measures.emplace_back("diagonal", SpectralMeasure::atoms(d, atoms));
            }
            for (const auto& [tag, m] : measures) {
                const auto spec = StableSpec::make(alpha, m);
                const double dev =
                    max_ecf_deviation(spec, dt, N, derive_seed(config.seed, salt++));
                const bool ok = dev <= threshold;
                all_pass = all_pass && ok;
                checks.push_back({{"name", "ecf_a" + std::to_string(alpha) + "_d" +
                                               std::to_string(d) + "_" + tag},
                                  {"passed", ok},
                                  {"statistic", dev},
                                  {"threshold", threshold}});
            }
        }
    }
    report.extra["checks"] = checks;
    report.total_paths = N * 18;
    report.verdict = all_pass ? "consistent" : "inconsistent";
    finalize(report, config, t0);
    return report;
}

namespace {

// Fits y = c * x^rho - c0 over exact (noise-free) points by profiling the
// linear pair (c, c0) out with least squares on y and scanning rho; the cost
// is the squared log residual so all points carry comparable weight.
double offset_power_exponent(const std::vector<RatePoint>& pts) {
    const auto cost_at = [&](double rho) {
        double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
        for (const auto& p : pts) {
            const double u = std::pow(p.n, rho);
            s11 += u * u;
            s12 += -u;
            s22 += 1.0;
            b1 += u * p.error;
            b2 += -p.error;
        }
        const double det = s11 * s22 - s12 * s12;
        const double c = (b1 * s22 - b2 * s12) / det;
        const double c0 = (s11 * b2 - s12 * b1) / det;
        double cost = 0.0;
        for (const auto& p : pts) {
            const double pred = std::max(c * std::pow(p.n, rho) - c0, 1e-300);
            const double r = std::log(pred) - std::log(p.error);
            cost += r * r;
        }
        return cost;
    };
    double best_rho = 0.0, best_cost = std::numeric_limits<double>::infinity();
    for (double lo = 0.005, hi = 1.5, step = 0.01; step > 1e-5;) {
        for (double rho = lo; rho <= hi; rho += step) {
            const double c = cost_at(rho);
            if (c < best_cost) {
                best_cost = c;
                best_rho = rho;
            }
        }
        lo = best_rho - 2.0 * step;
        hi = best_rho + 2.0 * step;
        step *= 0.1;
    }
    return best_rho;
}

}  // namespace

ExperimentReport run_besov_suite(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport report;
    const DyadicPartition part;
    std::vector<CheckReport> checks;

    {  // partition of unity: telescoping identity on a wide radial grid
        const int K = 10;
        double worst = 0.0;
        for (int i = 1; i <= 4000; ++i) {
            const double r = 0.001 * std::pow(1.004, i) * std::exp(0.002 * i);
            double sum = part.multiplier(-1, r);
            for (int j = 0; j <= K; ++j) sum += part.multiplier(j, r);
            worst = std::max(worst, std::abs(sum - part.chi(std::ldexp(r, -K))));
        }
        checks.push_back(make_check("partition_residual", worst, 1e-12));
    }

    {  // single lacunary frequency: the norm is read off one block exactly
        double worst = 0.0;
        for (const auto& [k, j] : std::vector<std::pair<int, int>>{{1, 0}, {2, 1}, {7, 3}, {13, 4}})
            for (double s : {-0.5, 0.3}) {
                const auto f = FieldOnGrid::from_function(
                    1, 512, 1, [k](const std::vector<double>& x) { return std::cos(k * x[0]); });
                const double norm = besov_norm(f, part, s);
                worst = std::max(worst, std::abs(norm - std::pow(2.0, s * j)));
            }
        checks.push_back(make_check("single_frequency_norms", worst, 1e-10));
    }

    {  // distant blocks annihilate each other
        const auto b = synthesize_drift(0.3, 6, 1.0, 11, 1);
        const auto f = b.render(0, 1024, 1);
        double worst = 0.0;
        for (int j = 0; j <= 6; ++j)
            for (int i = -1; i <= 6; ++i) {
                if (std::abs(i - j) < 2) continue;
                const auto rj = littlewood_paley_block(f, part, j);
                worst = std::max(worst, littlewood_paley_block(rj, part, i).max_abs());
            }
        checks.push_back(make_check("block_orthogonality", worst, 1e-10));
    }

    {
        const auto b = synthesize_drift(0.2, 6, 1.0, 5, 1);
        const auto f = b.render(0, 1024, 1);
        for (int k : {1, 2}) {
            const auto rep = bernstein_check(f, part, k);
            checks.push_back(make_check("bernstein_k" + std::to_string(k), rep.max_ratio, 8.0));
        }
        const auto rep = interpolation_check(f, part, -0.4, 0.6);
        checks.push_back(make_check("interpolation", rep.ratio, 16.0));
    }

    // mollification laws: growth of the sup bound and decay of the Besov gap
    const double eps = 0.1;
    for (double beta : {0.1, 0.2}) {
        const int J = 12;
        const auto b = synthesize_drift(beta, J, 1.0, 17, 1);
        const Mollifier moll(1);
        const int grid = 16384;
        std::vector<RatePoint> sup_pts, gap_pts;
        const auto f1 = b.render(0, grid, 1);
        for (int e = 4; e <= 10; ++e) {
            const double m = std::ldexp(1.0, e);
            const auto bm = mollify_drift(b, moll, m);
            sup_pts.push_back({m, bm.sup_bound(), 0.0});
            auto diff = b.render(0, grid, 1);
            const auto fm = bm.render(0, grid, 1);
            auto& v = diff.mutable_values();
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= fm.values()[i];
            gap_pts.push_back({m, besov_norm(diff, part, -beta - eps), 0.0});
        }
        // the sup bound is a truncated geometric level sum c m^rho - c0; the
        // additive offset from the finitely many fully-kept low levels biases
        // a plain log-log slope upward at this m range, so the growth
        // exponent is fitted with the offset profiled out
        const double sup_rho = offset_power_exponent(sup_pts);
        const auto gap_fit = fit_rate(gap_pts);
        checks.push_back(make_check("mollify_sup_slope_b" + std::to_string(beta),
                                    std::abs(sup_rho - beta), 0.05,
                                    {{"slope", sup_rho}, {"expected", beta}}));
        checks.push_back(make_check("mollify_gap_slope_b" + std::to_string(beta),
                                    std::abs(gap_fit.slope + eps), 0.1,
                                    {{"slope", gap_fit.slope}, {"expected", -eps}}));
    }

    nlohmann::json out = nlohmann::json::array();
    bool all_pass = true;
    for (const auto& c : checks) {
        out.push_back(check_json(c));
        all_pass = all_pass && c.passed;
    }
    report.extra["checks"] = out;
    report.verdict = all_pass ? "consistent" : "inconsistent";
    finalize(report, config, t0);
    return report;
}

// closed-form target densities for the inversion validations
double cauchy_density(int d, double t, double r2) {
    if (d == 1) return t / (M_PI * (t * t + r2));
    return t / (2.0 * M_PI * std::pow(t * t + r2, 1.5));
}
double gauss_density(int d, double t, double r2) {
    return std::exp(-r2 / (4.0 * t)) / std::pow(4.0 * M_PI * t, 0.5 * d);
}

CheckReport inversion_check(const std::string& name, const KernelGrid& grid, double t,
                            const std::function<double(double)>& target_of_r2, double tol) {
    const auto field = grid.density_field(0.0, t, {});
    const int d = grid.dimension();
    const int n = grid.points();
    double worst = 0.0;
    // probe bins within |x| <= 5 on each axis
    const int reach = std::min(n / 2 - 1, int(5.0 / grid.dx()));
    const int stride = std::max(1, reach / 8);
    auto probe = [&](std::size_t flat) {
        const auto x = grid.x_vector(flat);
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        worst = std::max(worst, std::abs(field[flat] - target_of_r2(r2)));
    };
    if (d == 1) {
        for (int b = 0; b <= reach; b += stride) {
            probe(std::size_t(b));
            if (b) probe(std::size_t(n - b));
        }
    } else {
        for (int b1 = 0; b1 <= reach; b1 += stride)
            for (int b2 = 0; b2 <= reach; b2 += stride) {
                probe(std::size_t(b1) * n + b2);
                if (b1 && b2) probe(std::size_t(n - b1) * n + (n - b2));
            }
    }
    return make_check(name, worst, tol);
}

std::vector<std::vector<double>> periodic_test_family(const KernelGrid& grid) {
    const int d = grid.dimension();
    const int n = grid.points();
    const std::size_t total = d == 1 ? std::size_t(n) : std::size_t(n) * n;
    std::vector<std::vector<double>> family;
    const double base = grid.dxi();  // fundamental grid frequency
    for (int mult : {4, 16, 64}) {
        std::vector<double> f(total);
        for (std::size_t i = 0; i < total; ++i) {
            const auto x = grid.x_vector(i);
            double a = 0.0;
            for (double v : x) a += mult * base * v;
            f[i] = std::cos(a);
        }
        family.push_back(std::move(f));
    }
    {  // periodic bump, sup-norm 1
        const double L = 2.0 * grid.domain_half_width();
        std::vector<double> f(total);
        for (std::size_t i = 0; i < total; ++i) {
            const auto x = grid.x_vector(i);
            double a = 0.0;
            for (double v : x) a += std::cos(2.0 * M_PI * v / L) - 1.0;
            f[i] = std::exp(20.0 * a);
        }
        family.push_back(std::move(f));
    }
    return family;
}

void kernel_checks_for_dim(int d, std::vector<CheckReport>& checks) {
    const std::string suffix = "_" + std::to_string(d) + "d";
    const Symbol cauchy{1.0, [d](const std::vector<double>& xi) {
                            double s = 0.0;
                            for (double v : xi) s += v * v;
                            return std::sqrt(s);
                        }};

    if (d == 1) {
        const KernelGrid fine(1, 1 << 18, 80.0 / double(1 << 18), cauchy);
        checks.push_back(inversion_check("cauchy_inversion" + suffix, fine, 1.0,
                                         [](double r2) { return cauchy_density(1, 1.0, r2); },
                                         1e-8));
        const KernelGrid gfine(1, 1 << 17, 80.0 / double(1 << 17), gaussian_symbol());
        checks.push_back(inversion_check("gaussian_inversion" + suffix, gfine, 1.0,
                                         [](double r2) { return gauss_density(1, 1.0, r2); },
                                         1e-8));
    } else {
        // the Cauchy kernel decays only like r^-3, so the spatial period must
        // be large enough that the wrapped images stay below the tolerance
        const KernelGrid fine(2, 8192, 72.0 / 8192.0, cauchy);
        checks.push_back(inversion_check("cauchy_inversion" + suffix, fine, 1.0,
                                         [](double r2) { return cauchy_density(2, 1.0, r2); },
                                         1e-8));
        const KernelGrid gfine(2, 4096, 72.0 / 4096.0, gaussian_symbol());
        checks.push_back(inversion_check("gaussian_inversion" + suffix, gfine, 1.0,
                                         [](double r2) { return gauss_density(2, 1.0, r2); },
                                         1e-8));
    }

    // alpha-stable machinery below
    const auto spec = StableSpec::make(1.5, SpectralMeasure::uniform(d, 1.0));
    const auto sym = symbol_from_spec(spec);

    {  // self-similarity p(t,x) = t^{-d/a} p(1, t^{-1/a} x)
        const double a = 1.5;
        const KernelGrid grid(d, d == 1 ? (1 << 14) : 2048,
                              d == 1 ? 82.0 / double(1 << 14) : 82.0 / 2048.0, sym);
        double worst = 0.0;
        for (double t : {0.5, 2.0})
            for (double xv : {0.0, 1.0}) {
                std::vector<double> x(d, 0.0);
                x[0] = xv;
                std::vector<double> xs(x);
                for (double& c : xs) c *= std::pow(t, -1.0 / a);
                const double lhs = grid.density(0.0, t, x);
                const double rhs = std::pow(t, -double(d) / a) * grid.density(0.0, 1.0, xs);
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        checks.push_back(make_check("self_similarity" + suffix, worst, 1e-7));
    }

    {  // total mass of the inverted density
        const KernelGrid grid(d, d == 1 ? (1 << 14) : 1024,
                              d == 1 ? 82.0 / double(1 << 14) : 82.0 / 1024.0, sym);
        const auto field = grid.density_field(0.0, 1.0, {});
        double mass = 0.0;
        for (double v : field) mass += v;
        mass *= grid.cell_volume();
        checks.push_back(make_check("mass" + suffix, std::abs(mass - 1.0), 1e-6));
    }

    {  // moment-integral slopes
        const KernelGrid grid(d, d == 1 ? (1 << 14) : 1024,
                              d == 1 ? 82.0 / double(1 << 14) : 52.0 / 1024.0, sym);
        const std::vector<double> ladder = {0.5, 0.7, 1.0, 1.4, 2.0};
        std::vector<std::pair<int, double>> cases = {{0, 0.5}, {1, 0.0}, {1, 0.5}};
        if (d == 1) cases.push_back({2, 0.5});
        for (auto [k, beta] : cases) {
            auto rep = moment_integral_check(grid, ladder, k, beta);
            rep.name = "moment_k" + std::to_string(k) + "_b" + std::to_string(beta) + suffix;
            checks.push_back(std::move(rep));
        }
    }

    {  // gradient bound over a t-ladder
        const KernelGrid grid(d, d == 1 ? 4096 : 256, d == 1 ? 0.05 : 0.15, sym);
        const auto family = periodic_test_family(grid);
        const std::vector<double> ladder = {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
        for (int k : {0, 1}) {
            auto rep = gradient_bound_check(grid, ladder, family, k);
            rep.name = "gradient_k" + std::to_string(k) + suffix;
            checks.push_back(std::move(rep));
        }
    }

    {  // dyadic block moments
        const DyadicPartition part;
        const KernelGrid grid(d, d == 1 ? (1 << 16) : 512, d == 1 ? 0.01 : 0.1, sym);
        const std::vector<int> j_range = d == 1 ? std::vector<int>{2, 3, 4, 5}
                                                : std::vector<int>{1, 2, 3};
        const std::vector<double> ladder = {0.02, 0.05, 0.1, 0.2};
        for (int nd : {0, 1}) {
            auto rep = block_moment_check(grid, part, j_range, nd, 0.5, 0.5, ladder);
            rep.name = "block_n" + std::to_string(nd) + suffix;
            checks.push_back(std::move(rep));
        }
    }

    {  // semigroup time increments
        const KernelGrid grid(d, d == 1 ? 4096 : 256, d == 1 ? 0.05 : 0.15, sym);
        const auto family = periodic_test_family(grid);
        for (int k : {0, 1}) {
            auto rep = time_increment_check(grid, 0.0, {0.25, 0.5}, {0.3, 0.5, 0.75, 1.0},
                                            family, k);
            rep.name = "time_increment_k" + std::to_string(k) + suffix;
            checks.push_back(std::move(rep));
        }
    }
}

ExperimentReport run_kernel_suite(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport report;
    std::vector<CheckReport> checks;
    kernel_checks_for_dim(1, checks);
    if (config.dimension >= 2) kernel_checks_for_dim(2, checks);

    nlohmann::json out = nlohmann::json::array();
    bool all_pass = true;
    for (const auto& c : checks) {
        out.push_back(check_json(c));
        all_pass = all_pass && c.passed;
    }
    report.extra["checks"] = out;
    report.verdict = all_pass ? "consistent" : "inconsistent";
    finalize(report, config, t0);
    return report;
}

}  // namespace

ExperimentReport run_suite(const ExperimentConfig& config) {
    switch (config.kind) {
        case ExperimentKind::SamplerSuite: return run_sampler_suite(config);
        case ExperimentKind::BesovSuite: return run_besov_suite(config);
        case ExperimentKind::KernelSuite: return run_kernel_suite(config);
        default: throw std::invalid_argument("run_suite: not a suite kind");
    }
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    switch (config.kind) {
        case ExperimentKind::BoundedRate: return run_bounded_rate(config);
        case ExperimentKind::DistRateI:
        case ExperimentKind::DistRateII: return run_dist_rate(config);
        case ExperimentKind::MomentCheck: return run_moment_check(config);
        case ExperimentKind::StabilityProbe: return run_stability_probe(config);
        default: return run_suite(config);
    }
}

nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json table_json = nlohmann::json::array();
    for (std::size_t i = 0; i < table.size(); ++i) {
        nlohmann::json row = {{"n", table[i].n}, {"error", table[i].error}, {"ci", table[i].ci}};
        if (i < m_per_point.size()) row["m"] = m_per_point[i];
        table_json.push_back(row);
    }
    // thread count and output directory are execution details, not part of
    // the experiment identity: dropping them keeps the report byte-identical
    // across thread counts and destinations
    nlohmann::json cfg = config;
    if (cfg.is_object()) {
        cfg.erase("threads");
        cfg.erase("out_dir");
    }
    return {{"config", cfg},
            {"table", table_json},
            {"fit", fit.to_json()},
            {"theoretical", theoretical},
            {"verdict", verdict},
            {"total_paths", total_paths},
            {"extra", extra}};
}

void write_report(const ExperimentReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir + "/report.json");
        f << report.to_json().dump(2) << '\n';
    }
    {
        // wall clock and environment live here so report.json and errors.csv
        // stay byte-identical across reruns
        const auto now = std::chrono::system_clock::now().time_since_epoch();
        nlohmann::json meta = {
            {"wall_seconds", report.wall_seconds},
            {"unix_millis",
             std::chrono::duration_cast<std::chrono::milliseconds>(now).count()},
            {"compiler", __VERSION__}};
        std::ofstream f(dir + "/meta.json");
        f << meta.dump(2) << '\n';
    }
    {
        std::ofstream f(dir + "/errors.csv");
        f.precision(17);
        f << "n,m,error,ci,estimator,slope_partial\n";
        for (std::size_t i = 0; i < report.table.size(); ++i) {
            const auto& p = report.table[i];
            f << p.n << ',';
            if (i < report.m_per_point.size()) f << report.m_per_point[i];
            f << ',' << p.error << ',' << p.ci << ",dictionary,";
            if (i > 0 && p.error > 0.0 && report.table[i - 1].error > 0.0)
                f << (std::log(p.error) - std::log(report.table[i - 1].error)) /
                         (std::log(p.n) - std::log(report.table[i - 1].n));
            f << '\n';
        }
    }
}

}  // namespace stablesde
