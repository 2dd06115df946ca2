#include "stablesde/besov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stablesde/fft_internal.hpp"
#include "stablesde/quadrature.hpp"
#include "stablesde/rng.hpp"

namespace stablesde {

namespace {

using detail::fft_inplace;

double bump(double s) {  // on (0,1), zero outside
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return std::exp(-1.0 / (s * (1.0 - s)));
}

}  // namespace

DyadicPartition::DyadicPartition() {
    // cumulative integral of the bump on [0,1]; Hermite interpolation later
    cum_.assign(kTable + 1, 0.0);
    const double h = 1.0 / kTable;
    for (int i = 1; i <= kTable; ++i) {
        const double a = (i - 1) * h, b = i * h;
        // Simpson per cell; the integrand is smooth with flat endpoints
        cum_[i] = cum_[i - 1] + (b - a) / 6.0 * (bump(a) + 4.0 * bump(0.5 * (a + b)) + bump(b));
    }
    total_ = cum_[kTable];
}

double DyadicPartition::smooth_step(double t) const {
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    const double u = t * kTable;
    const int i = std::min(int(u), kTable - 1);
    const double frac = u - i;
    const double h = 1.0 / kTable;
    const double a = i * h;
    // cubic Hermite with exact derivatives cum' = bump
    const double y0 = cum_[i], y1 = cum_[i + 1];
    const double d0 = bump(a) * h, d1 = bump(a + h) * h;
    const double f2 = frac * frac, f3 = f2 * frac;
    const double val = (2 * f3 - 3 * f2 + 1) * y0 + (f3 - 2 * f2 + frac) * d0 +
                       (-2 * f3 + 3 * f2) * y1 + (f3 - f2) * d1;
    return 1.0 - val / total_;
}

double DyadicPartition::chi(double r) const {
    if (r <= 1.0) return 1.0;
    if (r >= 1.5) return 0.0;
    return smooth_step(2.0 * (r - 1.0));
}

double DyadicPartition::multiplier(int j, double r) const {
    if (j < -1) throw std::invalid_argument("DyadicPartition: j >= -1 required");
    if (j == -1) return chi(2.0 * r);
    const double scale = std::ldexp(1.0, -j);  // 2^-j
    return chi(scale * r) - chi(2.0 * scale * r);
}

FieldOnGrid::FieldOnGrid(int dimension, int grid_size, int period_mult)
    : d_(dimension), m_(grid_size), p_(period_mult) {
    if (dimension < 1 || dimension > 2)
        throw std::invalid_argument("FieldOnGrid: dimension must be 1 or 2");
    if (grid_size < 2 || (grid_size & (grid_size - 1)) != 0)
        throw std::invalid_argument("FieldOnGrid: grid size must be a power of two");
    if (period_mult < 1) throw std::invalid_argument("FieldOnGrid: period multiplier >= 1");
    values_.assign(dimension == 1 ? grid_size : std::size_t(grid_size) * grid_size, 0.0);
}

FieldOnGrid FieldOnGrid::from_function(
    int dimension, int grid_size, int period_mult,
    const std::function<double(const std::vector<double>&)>& f) {
    FieldOnGrid g(dimension, grid_size, period_mult);
    auto& v = g.mutable_values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(g.point(i));
    return g;
}

std::vector<double>& FieldOnGrid::mutable_values() {
    spectrum_valid_ = false;
    return values_;
}

std::vector<double> FieldOnGrid::point(std::size_t flat) const {
    const double step = 2.0 * M_PI * p_ / m_;
    if (d_ == 1) return {double(flat) * step};
    return {double(flat / m_) * step, double(flat % m_) * step};
}

double FieldOnGrid::freq(int bin) const {
    const int k = bin < m_ / 2 ? bin : bin - m_;
    return double(k) / p_;
}

std::vector<double> FieldOnGrid::freq_vector(std::size_t flat) const {
    if (d_ == 1) return {freq(int(flat))};
    return {freq(int(flat / m_)), freq(int(flat % m_))};
}

const std::vector<std::complex<double>>& FieldOnGrid::spectrum() const {
    if (!spectrum_valid_) {
        spectrum_.assign(values_.begin(), values_.end());
        fft_inplace(spectrum_, d_, m_, FFTW_FORWARD);
        const double norm = 1.0 / double(values_.size());
        for (auto& c : spectrum_) c *= norm;
        spectrum_valid_ = true;
    }
    return spectrum_;
}

FieldOnGrid FieldOnGrid::apply_multiplier(
    const std::function<std::complex<double>(const std::vector<double>&)>& g) const {
    const auto& spec = spectrum();
    std::vector<std::complex<double>> buf(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) buf[i] = spec[i] * g(freq_vector(i));
    fft_inplace(buf, d_, m_, FFTW_BACKWARD);
    FieldOnGrid out(d_, m_, p_);
    auto& v = out.mutable_values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = buf[i].real();
    return out;
}

double FieldOnGrid::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

int FieldOnGrid::max_level() const {
    const double nyquist = double(m_) / (2.0 * p_);
    if (1.5 >= nyquist) return -1;
    int j = 0;
    while (1.5 * std::ldexp(1.0, j + 1) < nyquist) ++j;
    return j;
}

FieldOnGrid littlewood_paley_block(const FieldOnGrid& f, const DyadicPartition& part, int j) {
    const double nyquist = double(f.grid_size()) / (2.0 * f.period_mult());
    if (j >= 0 && 1.5 * std::ldexp(1.0, j) >= nyquist)
        throw std::invalid_argument("littlewood_paley_block: level above grid Nyquist");
    return f.apply_multiplier([&part, j](const std::vector<double>& xi) {
        double r2 = 0.0;
        for (double x : xi) r2 += x * x;
        return std::complex<double>(part.multiplier(j, std::sqrt(r2)), 0.0);
    });
}

double besov_norm(const FieldOnGrid& f, const DyadicPartition& part, double s) {
    double norm = 0.0;
    for (int j = -1; j <= f.max_level(); ++j) {
        const double block_sup = littlewood_paley_block(f, part, j).max_abs();
        norm = std::max(norm, std::pow(2.0, s * j) * block_sup);
    }
    return norm;
}

double besov_norm(const std::vector<FieldOnGrid>& components, const DyadicPartition& part,
                  double s) {
    if (components.empty()) throw std::invalid_argument("besov_norm: empty component list");
    double norm = 0.0;
    for (int j = -1; j <= components[0].max_level(); ++j) {
        std::vector<FieldOnGrid> blocks;
        blocks.reserve(components.size());
        for (const auto& c : components) blocks.push_back(littlewood_paley_block(c, part, j));
        double sup = 0.0;
        for (std::size_t i = 0; i < blocks[0].values().size(); ++i) {
            double mag2 = 0.0;
            for (const auto& b : blocks) mag2 += b.values()[i] * b.values()[i];
            sup = std::max(sup, mag2);
        }
        norm = std::max(norm, std::pow(2.0, s * j) * std::sqrt(sup));
    }
    return norm;
}

namespace {

// pointwise |grad^k g| on the grid (k = 1: Euclidean, k = 2: Frobenius)
std::vector<double> gradient_magnitude(const FieldOnGrid& g, int k) {
    const int d = g.dimension();
    std::vector<double> mag2(g.values().size(), 0.0);
    auto accumulate = [&](const std::vector<int>& axes) {
        auto df = g.apply_multiplier([&axes](const std::vector<double>& xi) {
            std::complex<double> m(1.0, 0.0);
            for (int a : axes) m *= std::complex<double>(0.0, xi[a]);
            return m;
        });
        for (std::size_t i = 0; i < mag2.size(); ++i)
            mag2[i] += df.values()[i] * df.values()[i];
    };
    if (k == 1) {
        for (int a = 0; a < d; ++a) accumulate({a});
    } else if (k == 2) {
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) accumulate({a, b});
    } else {
        throw std::invalid_argument("gradient_magnitude: k in {1,2}");
    }
    for (auto& v : mag2) v = std::sqrt(v);
    return mag2;
}

}  // namespace

BernsteinReport bernstein_check(const FieldOnGrid& f, const DyadicPartition& part, int k,
                                double c_bern) {
    if (k != 1 && k != 2) throw std::invalid_argument("bernstein_check: k in {1,2}");
    BernsteinReport report;
    for (int j = -1; j <= f.max_level(); ++j) {
        const auto block = littlewood_paley_block(f, part, j);
        const double sup = block.max_abs();
        if (sup < 1e-14) continue;
        const auto grad = gradient_magnitude(block, k);
        const double gsup = *std::max_element(grad.begin(), grad.end());
        const double scale = std::pow(2.0, double(k) * std::max(j, 0));
        const double ratio = gsup / (scale * sup);
        report.entries.push_back({j, sup, ratio});
        report.max_ratio = std::max(report.max_ratio, ratio);
    }
    report.passed = report.max_ratio <= c_bern;
    return report;
}

InterpolationReport interpolation_check(const FieldOnGrid& f, const DyadicPartition& part,
                                        double s1, double s2, double c_int) {
    if (!(s1 < 0.0 && s2 > 0.0))
        throw std::invalid_argument("interpolation_check: need s1 < 0 < s2");
    const double sup = f.max_abs();
    if (sup < 1e-300) throw std::invalid_argument("interpolation_check: zero field");
    const double theta = s2 / (s2 - s1);
    const double n1 = besov_norm(f, part, s1);
    const double n2 = besov_norm(f, part, s2);
    const double rhs = std::pow(n1, theta) * std::pow(n2, 1.0 - theta);
    const double ratio = sup / rhs;
    return {sup, rhs, ratio, ratio <= c_int};
}

DriftSpec::DriftSpec(int dimension, double beta, std::vector<DriftLevel> levels,
                     bool divergence_free)
    : d_(dimension), beta_(beta), divergence_free_(divergence_free), levels_(std::move(levels)) {
    if (dimension < 1 || dimension > 2)
        throw std::invalid_argument("DriftSpec: dimension must be 1 or 2");
    for (const auto& lv : levels_) {
        double r = 0.0;
        for (double k : lv.freq) r += k * k;
        r = std::sqrt(r);
        const double lo = 0.75 * std::ldexp(1.0, lv.j), hi = std::ldexp(1.0, lv.j);
        if (!(r > lo && r <= hi + 1e-9))
            throw std::invalid_argument("DriftSpec: frequency outside its dyadic annulus");
    }
}

double DriftSpec::designed_norm() const {
    double n = 0.0;
    for (const auto& lv : levels_)
        n = std::max(n, std::pow(2.0, -beta_ * lv.j) * std::abs(lv.amplitude));
    return n;
}

double DriftSpec::sup_bound() const {
    double s = 0.0;
    for (const auto& lv : levels_) s += std::abs(lv.amplitude);
    return s;
}

std::vector<double> DriftSpec::evaluate(const std::vector<double>& x) const {
    std::vector<double> out(d_, 0.0);
    evaluate_into(x.data(), out.data());
    return out;
}

void DriftSpec::evaluate_into(const double* x, double* out) const {
    for (int i = 0; i < d_; ++i) out[i] = 0.0;
    for (const auto& lv : levels_) {
        double arg = lv.phase;
        for (int i = 0; i < d_; ++i) arg += lv.freq[i] * x[i];
        const double c = lv.amplitude * std::cos(arg);
        for (int i = 0; i < d_; ++i) out[i] += c * lv.direction[i];
    }
}

FieldOnGrid DriftSpec::render(int component, int grid_size, int period_mult) const {
    return FieldOnGrid::from_function(d_, grid_size, period_mult,
                                      [this, component](const std::vector<double>& x) {
                                          return evaluate(x)[component];
                                      });
}

std::vector<FieldOnGrid> DriftSpec::render_all(int grid_size, int period_mult) const {
    std::vector<FieldOnGrid> out;
    for (int c = 0; c < d_; ++c) out.push_back(render(c, grid_size, period_mult));
    return out;
}

nlohmann::json DriftSpec::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& lv : levels_)
        arr.push_back({{"j", lv.j},
                       {"freq", lv.freq},
                       {"amplitude", lv.amplitude},
                       {"phase", lv.phase},
                       {"direction", lv.direction}});
    return {{"dimension", d_},
            {"beta", beta_},
            {"divergence_free", divergence_free_},
            {"levels", arr}};
}

DriftSpec DriftSpec::from_json(const nlohmann::json& j) {
    std::vector<DriftLevel> levels;
    for (const auto& lj : j.at("levels"))
        levels.push_back({lj.at("j").get<int>(), lj.at("freq").get<std::vector<double>>(),
                          lj.at("amplitude").get<double>(), lj.at("phase").get<double>(),
                          lj.at("direction").get<std::vector<double>>()});
    return DriftSpec(j.at("dimension").get<int>(), j.at("beta").get<double>(),
                     std::move(levels), j.at("divergence_free").get<bool>());
}

DriftSpec synthesize_drift(double beta, int levels_J, double amplitude, std::uint64_t seed,
                           int dimension, bool divergence_free) {
    if (!(beta > 0.0)) throw std::invalid_argument("synthesize_drift: beta > 0 required");
    if (levels_J < 0) throw std::invalid_argument("synthesize_drift: J >= 0 required");
    if (divergence_free && dimension != 2)
        throw std::invalid_argument("synthesize_drift: divergence-free drift requires d = 2");

    std::vector<DriftLevel> levels;
    for (int j = 0; j <= levels_J; ++j) {
        RngStream stream(seed, std::uint64_t(j));
        DriftLevel lv;
        lv.j = j;
        lv.amplitude = amplitude * std::pow(2.0, beta * j);
        lv.phase = 2.0 * M_PI * stream.next_double();
        const double two_j = std::ldexp(1.0, j);
        if (dimension == 1) {
            lv.freq = {two_j};
            lv.direction = {1.0};
        } else {
            // lattice frequency with |k| in (0.9, 1] * 2^j, random direction
            std::vector<double> k = {two_j, 0.0};
            for (int attempt = 0; attempt < 200; ++attempt) {
                const double phi = 2.0 * M_PI * stream.next_double();
                const double rho = 0.95 * two_j;
                std::vector<double> cand = {std::round(rho * std::cos(phi)),
                                            std::round(rho * std::sin(phi))};
                const double r = std::hypot(cand[0], cand[1]);
                if (r >= 0.9 * two_j && r <= two_j && r > 0.0) {
                    k = cand;
                    break;
                }
            }
            lv.freq = k;
            const double kn = std::hypot(k[0], k[1]);
            if (divergence_free) {
                lv.direction = {-k[1] / kn, k[0] / kn};
            } else {
                const double a = 2.0 * M_PI * stream.next_double();
                lv.direction = {std::cos(a), std::sin(a)};
            }
        }
        levels.push_back(std::move(lv));
    }
    return DriftSpec(dimension, beta, std::move(levels), divergence_free);
}

Mollifier::Mollifier(int dimension) : d_(dimension) {
    if (dimension < 1 || dimension > 2)
        throw std::invalid_argument("Mollifier: dimension must be 1 or 2");
    if (dimension == 1) {
        const double z =
            2.0 * integrate([](double y) { return std::exp(-1.0 / (1.0 - y * y)); }, 0.0, 1.0,
                            1e-14);
        norm_const_ = 1.0 / z;
    } else {
        const double z =
            2.0 * M_PI *
            integrate([](double r) { return std::exp(-1.0 / (1.0 - r * r)) * r; }, 0.0, 1.0,
                      1e-14);
        norm_const_ = 1.0 / z;
    }
}

double Mollifier::density(const std::vector<double>& x) const {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    if (r2 >= 1.0) return 0.0;
    return norm_const_ * std::exp(-1.0 / (1.0 - r2));
}

double Mollifier::multiplier_exact(double r) const {
    const int n_outer = std::max(96, int(4.0 * r));
    if (d_ == 1) {
        return 2.0 * norm_const_ *
               gauss_legendre(
                   [r](double y) { return std::cos(r * y) * std::exp(-1.0 / (1.0 - y * y)); },
                   0.0, 1.0, n_outer);
    }
    // d = 2: integrate the 1-d marginal against cos(r y1)
    return 2.0 *
           gauss_legendre(
               [this, r](double y1) {
                   const double half_width = std::sqrt(std::max(0.0, 1.0 - y1 * y1));
                   const double marginal =
                       2.0 * norm_const_ *
                       gauss_legendre(
                           [y1](double y2) {
                               const double s = 1.0 - y1 * y1 - y2 * y2;
                               return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
                           },
                           0.0, half_width, 64);
                   return std::cos(r * y1) * marginal;
               },
               0.0, 1.0, n_outer);
}

double Mollifier::multiplier(double r) const {
    r = std::abs(r);
    for (const auto& [key, val] : cache_)
        if (key == r) return val;
    const double val = multiplier_exact(r);
    cache_.push_back({r, val});
    return val;
}

DriftSpec mollify_drift(const DriftSpec& drift, const Mollifier& mollifier, double m) {
    if (!(m > 0.0)) throw std::invalid_argument("mollify_drift: m > 0 required");
    if (mollifier.dimension() != drift.dimension())
        throw std::invalid_argument("mollify_drift: dimension mismatch");
    auto levels = drift.levels();
    for (auto& lv : levels) {
        double kn = 0.0;
        for (double k : lv.freq) kn += k * k;
        kn = std::sqrt(kn);
        lv.amplitude *= mollifier.multiplier(kn / m);
    }
    return DriftSpec(drift.dimension(), drift.beta(), std::move(levels),
                     drift.divergence_free());
}

}  // namespace stablesde
