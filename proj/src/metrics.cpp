#include "stablesde/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stablesde {

EmpiricalLaw EmpiricalLaw::from_samples(std::vector<double> samples, int dimension, double t,
                                        std::string provenance) {
    if (dimension < 1) throw std::invalid_argument("EmpiricalLaw: dimension >= 1 required");
    if (samples.empty() || samples.size() % std::size_t(dimension) != 0)
        throw std::invalid_argument("EmpiricalLaw: sample array size not a multiple of d");
    EmpiricalLaw law;
    law.samples = std::move(samples);
    law.dimension = dimension;
    law.t = t;
    law.provenance = std::move(provenance);
    return law;
}

TestDictionary TestDictionary::standard(int dimension) {
    if (dimension < 1 || dimension > 2)
        throw std::invalid_argument("TestDictionary: dimension must be 1 or 2");
    std::vector<Member> members;

    const double mags[] = {0.5, 1.0, 2.0, 4.0};
    std::vector<std::vector<double>> dirs;
    if (dimension == 1) {
        dirs.push_back({1.0});
    } else {
        for (int i = 0; i < 8; ++i) {
            const double phi = M_PI * i / 8.0;  // half circle; cos/sin cover both signs
            dirs.push_back({std::cos(phi), std::sin(phi)});
        }
    }
    for (double mag : mags) {
        for (std::size_t di = 0; di < dirs.size(); ++di) {
            std::vector<double> k(dirs[di]);
            for (double& c : k) c *= mag;
            const std::string tag = "k" + std::to_string(mag) + "_d" + std::to_string(di);
            members.push_back({"cos_" + tag, [k, dimension](const double* x) {
                                   double s = 0.0;
                                   for (int i = 0; i < dimension; ++i) s += k[i] * x[i];
                                   return std::cos(s);
                               }});
            members.push_back({"sin_" + tag, [k, dimension](const double* x) {
                                   double s = 0.0;
                                   for (int i = 0; i < dimension; ++i) s += k[i] * x[i];
                                   return std::sin(s);
                               }});
        }
    }

    // 12 smoothed half-space indicators tanh((v.x - c)/h)
    const double h = 0.5;
    const int n_ind = 12;
    const int ind_dirs = dimension == 1 ? 1 : 4;
    const int per_dir = n_ind / ind_dirs;
    for (int di = 0; di < ind_dirs; ++di) {
        const double phi = M_PI * di / ind_dirs;
        std::vector<double> v =
            dimension == 1 ? std::vector<double>{1.0}
                           : std::vector<double>{std::cos(phi), std::sin(phi)};
        for (int ci = 0; ci < per_dir; ++ci) {
            const double c = -3.0 + 6.0 * (ci + 0.5) / per_dir;
            members.push_back({"tanh_d" + std::to_string(di) + "_c" + std::to_string(ci),
                               [v, c, h, dimension](const double* x) {
                                   double s = 0.0;
                                   for (int i = 0; i < dimension; ++i) s += v[i] * x[i];
                                   return std::tanh((s - c) / h);
                               }});
        }
    }

    // 6 Gaussian bumps exp(-|x - c|^2 / (2 w^2)), peak value 1
    const double w = 1.0;
    for (int ci = 0; ci < 6; ++ci) {
        const double c0 = -2.5 + ci;
        std::vector<double> center(dimension, 0.0);
        center[0] = c0;
        if (dimension == 2) center[1] = 0.5 * c0;
        members.push_back({"bump_" + std::to_string(ci), [center, w, dimension](const double* x) {
                               double r2 = 0.0;
                               for (int i = 0; i < dimension; ++i) {
                                   const double d = x[i] - center[i];
                                   r2 += d * d;
                               }
                               return std::exp(-r2 / (2.0 * w * w));
                           }});
    }
    return TestDictionary(std::move(members));
}

namespace {

// pooled per-axis quantiles (lo, hi) at levels 0.001 and 0.999
std::pair<double, double> pooled_quantiles(const EmpiricalLaw& a, const EmpiricalLaw& b,
                                           int axis) {
    std::vector<double> pool;
    pool.reserve(a.size() + b.size());
    const int d = a.dimension;
    for (std::size_t i = 0; i < a.size(); ++i) pool.push_back(a.samples[i * d + axis]);
    for (std::size_t i = 0; i < b.size(); ++i) pool.push_back(b.samples[i * d + axis]);
    std::sort(pool.begin(), pool.end());
    const auto at = [&](double q) {
        const double pos = q * (pool.size() - 1);
        const std::size_t lo = std::size_t(pos);
        const double frac = pos - double(lo);
        return lo + 1 < pool.size() ? pool[lo] * (1.0 - frac) + pool[lo + 1] * frac : pool[lo];
    };
    double lo = at(0.001), hi = at(0.999);
    if (!(hi > lo)) hi = lo + 1.0;  // degenerate cloud: any box works
    return {lo, hi};
}

}  // namespace

double tv_histogram(const EmpiricalLaw& a, const EmpiricalLaw& b, int bins) {
    if (a.samples.empty() || b.samples.empty())
        throw std::invalid_argument("tv_histogram: empty samples");
    if (a.dimension != b.dimension)
        throw std::invalid_argument("tv_histogram: dimension mismatch");
    if (bins < 2) throw std::invalid_argument("tv_histogram: bins >= 2 required");
    const int d = a.dimension;
    if (d > 2) throw std::invalid_argument("tv_histogram: d <= 2 supported");

    std::vector<double> lo(d), hi(d);
    for (int axis = 0; axis < d; ++axis) std::tie(lo[axis], hi[axis]) = pooled_quantiles(a, b, axis);

    // in-box cells plus 2d per-side overflow bins; heavy tails land in the
    // overflow bins instead of stretching the box
    const std::size_t cells = d == 1 ? std::size_t(bins) : std::size_t(bins) * bins;
    const std::size_t total = cells + std::size_t(2 * d);
    std::vector<double> pa(total, 0.0), pb(total, 0.0);

    auto accumulate = [&](const EmpiricalLaw& law, std::vector<double>& p) {
        const double unit = 1.0 / double(law.size());
        for (std::size_t i = 0; i < law.size(); ++i) {
            const double* x = &law.samples[i * d];
            std::size_t cell = 0;
            bool outside = false;
            for (int axis = 0; axis < d && !outside; ++axis) {
                if (x[axis] < lo[axis]) {
                    p[cells + 2 * axis] += unit;
                    outside = true;
                } else if (x[axis] > hi[axis]) {
                    p[cells + 2 * axis + 1] += unit;
                    outside = true;
                } else {
                    int k = int(double(bins) * (x[axis] - lo[axis]) / (hi[axis] - lo[axis]));
                    if (k >= bins) k = bins - 1;
                    cell = cell * bins + std::size_t(k);
                }
            }
            if (!outside) p[cell] += unit;
        }
    };
    accumulate(a, pa);
    accumulate(b, pb);

    double tv = 0.0;
    for (std::size_t i = 0; i < total; ++i) tv += std::abs(pa[i] - pb[i]);
    return 0.5 * tv;
}

WeakErrorResult weak_error(const EmpiricalLaw& a, const EmpiricalLaw& b,
                           const TestDictionary& dict) {
    if (a.samples.empty() || b.samples.empty())
        throw std::invalid_argument("weak_error: empty samples");
    if (a.dimension != b.dimension) throw std::invalid_argument("weak_error: dimension mismatch");
    if (dict.size() == 0) throw std::invalid_argument("weak_error: empty dictionary");
    const int d = a.dimension;
    const std::size_t na = a.size(), nb = b.size();

    WeakErrorResult result;
    result.max_gap = -1.0;
    for (const auto& member : dict.members()) {
        double sa = 0.0, sa2 = 0.0, sb = 0.0, sb2 = 0.0;
        for (std::size_t i = 0; i < na; ++i) {
            const double v = member.phi(&a.samples[i * d]);
            sa += v;
            sa2 += v * v;
        }
        for (std::size_t i = 0; i < nb; ++i) {
            const double v = member.phi(&b.samples[i * d]);
            sb += v;
            sb2 += v * v;
        }
        const double ma = sa / double(na), mb = sb / double(nb);
        const double va = std::max(0.0, sa2 / double(na) - ma * ma);
        const double vb = std::max(0.0, sb2 / double(nb) - mb * mb);
        const double gap = std::abs(ma - mb);
        const double ci = 1.96 * std::sqrt(va / double(na) + vb / double(nb));
        if (gap > result.max_gap) {
            result.max_gap = gap;
            result.argmax_name = member.name;
            result.ci = ci;
        }
    }
    return result;
}

nlohmann::json RateFit::to_json() const {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points) pts.push_back({{"n", p.n}, {"error", p.error}, {"ci", p.ci}});
    return {{"points", pts},       {"excluded", excluded},       {"slope", slope},
            {"intercept", intercept}, {"slope_se", slope_se},
            {"theoretical", theoretical}, {"verdict", verdict}};
}

RateFit fit_rate(const std::vector<RatePoint>& points) {
    RateFit fit;
    fit.points = points;
    std::vector<double> lx, ly, weight;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (!(p.n > 0.0)) throw std::invalid_argument("fit_rate: n > 0 required");
        if (!(p.error > 3.0 * p.ci) || !(p.error > 0.0)) {
            fit.excluded.push_back(i);
            continue;
        }
        lx.push_back(std::log(p.n));
        ly.push_back(std::log(p.error));
        // delta method: sd of log error ~ (ci / 1.96) / error
        const double sd = std::max(p.ci / 1.96 / p.error, 1e-12);
        weight.push_back(1.0 / (sd * sd));
    }
    if (lx.size() < 4) {
        fit.verdict = "inconclusive";
        return fit;
    }

    double sw = 0, swx = 0, swy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sw += weight[i];
        swx += weight[i] * lx[i];
        swy += weight[i] * ly[i];
    }
    const double xbar = swx / sw, ybar = swy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += weight[i] * (lx[i] - xbar) * (lx[i] - xbar);
        sxy += weight[i] * (lx[i] - xbar) * (ly[i] - ybar);
    }
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;

    // known-variance WLS standard error, inflated by the reduced chi^2 when
    // the scatter exceeds the stated CIs
    double chi2 = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - fit.intercept - fit.slope * lx[i];
        chi2 += weight[i] * r * r;
    }
    const double dof = double(lx.size()) - 2.0;
    fit.slope_se = std::sqrt(std::max(1.0, chi2 / dof) / sxx);
    fit.verdict = "fitted";
    return fit;
}

double theoretical_exponent(double alpha, double beta, double gamma, double theta, double eps,
                            Regime regime) {
    auto reject = [](const std::string& constraint) {
        throw std::invalid_argument("theoretical_exponent: violated " + constraint);
    };
    if (!(alpha > 1.0 && alpha < 2.0)) reject("alpha in (1,2)");
    switch (regime) {
        case Regime::Bounded: {
            if (!(beta >= 0.0 && beta < alpha - 1.0)) reject("beta in [0, alpha-1)");
            const double delta = alpha - 1.0 - beta;
            return -std::min({delta, delta / alpha, (alpha - 1.0) / alpha});
        }
        case Regime::DistI: {
            if (!(beta > 0.0 && beta < (alpha - 1.0) / 2.0)) reject("beta in (0, (alpha-1)/2)");
            // closed upper endpoint admitted here (exponent degenerates to 0);
            // experiment configs additionally require the open interval
            if (!(gamma > 0.0 && gamma <= (alpha - 1.0) / (2.0 * alpha * beta)))
                reject("gamma in (0, (alpha-1)/(2 alpha beta)]");
            if (!(theta > beta && theta < alpha - 1.0 - beta))
                reject("theta in (beta, alpha-1-beta)");
            const double first =
                -(alpha - 1.0) / alpha + beta * (gamma + std::max(gamma, 1.0 / alpha));
            const double second = -gamma * (theta - beta);
            return std::max(first, second);
        }
        case Regime::DistII: {
            if (!(beta >= (alpha - 1.0) / 2.0 && beta < alpha - 1.0))
                reject("beta in [(alpha-1)/2, alpha-1)");
            if (!(gamma > 0.0 && gamma < (alpha - 1.0 - beta) / (alpha * beta)))
                reject("gamma in (0, (alpha-1-beta)/(alpha beta))");
            if (!(eps >= 0.0)) reject("eps >= 0");
            const double first = -(alpha - 1.0) / alpha + beta * (gamma + 1.0 / alpha);
            const double second = -gamma * (alpha - 1.0 - beta) + eps;
            return std::max(first, second);
        }
    }
    throw std::logic_error("theoretical_exponent: unknown regime");
}

}  // namespace stablesde
