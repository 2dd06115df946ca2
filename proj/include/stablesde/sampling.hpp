#pragma once

#include <vector>

#include "stablesde/rng.hpp"
#include "stablesde/stable_model.hpp"

namespace stablesde {

// Symmetric 1-d alpha-stable draw with characteristic function exp(-|xi|^alpha)
// (Chambers-Mallows-Stuck). alpha in (0,2), alpha != 1.
double sample_standard_1d(double alpha, RngStream& stream);

// Positive stable draw with Laplace transform exp(-s^beta), beta in (0,1).
double sample_positive_stable(double beta, RngStream& stream);

// Exact-in-law increment sampler for a StableSpec: the increment over dt has
// characteristic function exp(-dt * psi(xi)).
class IncrementSampler {
public:
    enum class Kind { Isotropic, AtomSum };

    static IncrementSampler build(const StableSpec& spec);

    Kind kind() const { return kind_; }
    int dimension() const { return spec_.dimension(); }
    const StableSpec& spec() const { return spec_; }

    std::vector<double> sample_increment(double dt, RngStream& stream) const;
    // allocation-free variant for hot loops; out must have size dimension()
    void sample_increment_into(double dt, RngStream& stream, double* out) const;

    // Increment of L^sigma over [s,t] for piecewise-constant sigma:
    // sum of sigma_i * dL_i over the pieces intersecting [s,t].
    std::vector<double> sample_scaled_increment(const TimeScaling& scaling, double s, double t,
                                                RngStream& stream) const;

private:
    struct AtomPair {
        std::vector<double> dir;
        double rate;  // 2 * w * c_alpha
    };

    explicit IncrementSampler(StableSpec spec) : spec_(std::move(spec)) {}
    StableSpec spec_;
    Kind kind_ = Kind::Isotropic;
    double iso_scale_ = 0.0;  // (c_alpha * mass * angular_avg)^{1/alpha}
    std::vector<AtomPair> pairs_;
};

inline IncrementSampler build_sampler(const StableSpec& spec) {
    return IncrementSampler::build(spec);
}

}  // namespace stablesde
