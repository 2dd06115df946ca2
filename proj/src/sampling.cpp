#include "stablesde/sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace stablesde {

double sample_standard_1d(double alpha, RngStream& stream) {
    if (!(alpha > 0.0 && alpha < 2.0) || alpha == 1.0)
        throw std::invalid_argument("sample_standard_1d: alpha in (0,2)\\{1} required");
    const double u = M_PI * (stream.next_double() - 0.5);
    const double e = stream.next_exponential();
    return std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha) *
           std::pow(std::cos((1.0 - alpha) * u) / e, (1.0 - alpha) / alpha);
}

double sample_positive_stable(double beta, RngStream& stream) {
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("sample_positive_stable: beta in (0,1) required");
    const double u = M_PI * (stream.next_double() - 0.5);
    const double e = stream.next_exponential();
    const double shifted = u + M_PI / 2.0;
    return std::sin(beta * shifted) / std::pow(std::cos(u), 1.0 / beta) *
           std::pow(std::cos(u - beta * shifted) / e, (1.0 - beta) / beta);
}

IncrementSampler IncrementSampler::build(const StableSpec& spec) {
    const auto nd = check_nondegeneracy(spec.measure());
    if (!nd.nondegenerate)
        throw std::invalid_argument("IncrementSampler: degenerate spectral measure");

    IncrementSampler s(spec);
    const double alpha = spec.alpha();
    if (spec.measure().variant() == SpectralMeasure::Variant::Uniform) {
        s.kind_ = Kind::Isotropic;
        // psi(xi) = c_alpha * mass * avg * |xi|^alpha; the subordinated Gaussian
        // sqrt(2S) Z has CF exp(-|xi|^alpha), so scaling by s_iso matches psi.
        std::vector<double> e1(spec.dimension(), 0.0);
        e1[0] = 1.0;
        const double rate = spec.characteristic_exponent(e1);
        s.iso_scale_ = std::pow(rate, 1.0 / alpha);
    } else {
        s.kind_ = Kind::AtomSum;
        const auto& atoms = spec.measure().atom_list();
        // one term per symmetric pair; canonical representative has positive
        // first nonzero coordinate
        for (const auto& a : atoms) {
            bool canonical = false;
            for (double c : a.dir) {
                if (std::abs(c) > 1e-13) {
                    canonical = c > 0.0;
                    break;
                }
            }
            if (!canonical) continue;
            s.pairs_.push_back({a.dir, 2.0 * a.weight * spec.c_alpha()});
        }
        if (s.pairs_.empty())
            throw std::invalid_argument("IncrementSampler: no canonical atom pairs found");
    }
    return s;
}

std::vector<double> IncrementSampler::sample_increment(double dt, RngStream& stream) const {
    std::vector<double> out(dimension(), 0.0);
    sample_increment_into(dt, stream, out.data());
    return out;
}

void IncrementSampler::sample_increment_into(double dt, RngStream& stream, double* out) const {
    if (!(dt > 0.0)) throw std::invalid_argument("sample_increment: dt must be > 0");
    const int d = dimension();
    const double alpha = spec_.alpha();
    if (kind_ == Kind::Isotropic) {
        const double sub = sample_positive_stable(alpha / 2.0, stream);
        const double amp = std::pow(dt, 1.0 / alpha) * iso_scale_ * std::sqrt(2.0 * sub);
        for (int i = 0; i < d; ++i) out[i] = amp * stream.next_gaussian();
    } else {
        for (int i = 0; i < d; ++i) out[i] = 0.0;
        for (const auto& p : pairs_) {
            const double x = sample_standard_1d(alpha, stream);
            const double amp = std::pow(dt * p.rate, 1.0 / alpha) * x;
            for (int i = 0; i < d; ++i) out[i] += amp * p.dir[i];
        }
    }
}

std::vector<double> IncrementSampler::sample_scaled_increment(const TimeScaling& scaling,
                                                              double s, double t,
                                                              RngStream& stream) const {
    if (!(s >= 0.0 && s < t)) throw std::invalid_argument("sample_scaled_increment: need s < t");
    if (t > scaling.horizon() + 1e-12)
        throw std::invalid_argument("sample_scaled_increment: [s,t] outside scaling domain");
    const int d = dimension();
    std::vector<double> out(d, 0.0);
    for (const auto& piece : scaling.pieces()) {
        const double lo = std::max(s, piece.t0);
        const double hi = std::min(t, piece.t1);
        if (hi - lo <= 0.0) continue;
        const auto inc = sample_increment(hi - lo, stream);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out[i] += piece.matrix[i * d + j] * inc[j];
    }
    return out;
}

}  // namespace stablesde
