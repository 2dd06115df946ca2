#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "json.hpp"

namespace stablesde {

// Smooth radial dyadic partition of unity: chi == 1 on |xi| <= 1, == 0 on
// |xi| > 3/2, psi_j(xi) = chi(2^-j xi) - chi(2^-j+1 xi). The transition
// profile is the integral of the standard bump, so the telescoping identity
// chi(2 xi) + sum_j psi_j = chi(2^-k xi) holds to rounding.
class DyadicPartition {
public:
    DyadicPartition();

    double chi(double r) const;  // radial, r = |xi|
    // multiplier of block j: j = -1 gives chi(2 r), j >= 0 gives psi_j(r)
    double multiplier(int j, double r) const;

private:
    double smooth_step(double t) const;  // 1 at t<=0, 0 at t>=1, C^inf profile
    std::vector<double> cum_;            // cumulative bump integral table
    double total_;
    static constexpr int kTable = 8192;
};

// Real scalar field sampled on a periodic grid: d in {1,2}, M points per
// axis (power of two), period 2*pi*P. Spectrum cached on first use.
class FieldOnGrid {
public:
    FieldOnGrid(int dimension, int grid_size, int period_mult);
    static FieldOnGrid from_function(int dimension, int grid_size, int period_mult,
                                     const std::function<double(const std::vector<double>&)>& f);

    int dimension() const { return d_; }
    int grid_size() const { return m_; }
    int period_mult() const { return p_; }
    std::size_t point_count() const { return values_.size(); }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& mutable_values();  // invalidates cached spectrum

    // grid coordinates of flat index
    std::vector<double> point(std::size_t flat) const;
    // frequency xi = k/P for FFT bin along one axis (wrapped ordering)
    double freq(int bin) const;
    std::vector<double> freq_vector(std::size_t flat) const;

    // normalized DFT coefficients c_k with f(x) = sum_k c_k e^{i xi_k . x}
    const std::vector<std::complex<double>>& spectrum() const;

    // new field with spectrum multiplied by g(xi); g may be complex
    FieldOnGrid apply_multiplier(
        const std::function<std::complex<double>(const std::vector<double>&)>& g) const;

    double max_abs() const;
    int max_level() const;  // largest j with 1.5 * 2^j < Nyquist

private:
    int d_, m_, p_;
    std::vector<double> values_;
    mutable std::vector<std::complex<double>> spectrum_;
    mutable bool spectrum_valid_ = false;
};

// R_j f: inverse transform of psi_j * f_hat (j >= -1)
FieldOnGrid littlewood_paley_block(const FieldOnGrid& f, const DyadicPartition& part, int j);

// sup_j 2^{sj} max |R_j f| over representable blocks
double besov_norm(const FieldOnGrid& f, const DyadicPartition& part, double s);
// vector-field variant: pointwise Euclidean norm across component blocks
double besov_norm(const std::vector<FieldOnGrid>& components, const DyadicPartition& part,
                  double s);

struct BernsteinReport {
    struct Entry {
        int j;
        double block_sup;
        double ratio;  // ||grad^k R_j f|| / (2^{kj} ||R_j f||)
    };
    std::vector<Entry> entries;
    double max_ratio = 0.0;
    bool passed = true;
};
BernsteinReport bernstein_check(const FieldOnGrid& f, const DyadicPartition& part, int k,
                                double c_bern = 8.0);

struct InterpolationReport {
    double sup_norm;
    double rhs;  // ||f||^theta_{B^{s1}} ||f||^{1-theta}_{B^{s2}}
    double ratio;
    bool passed;
};
InterpolationReport interpolation_check(const FieldOnGrid& f, const DyadicPartition& part,
                                        double s1, double s2, double c_int = 16.0);

// Lacunary cosine drift: one frequency per dyadic annulus, so the Besov norm
// is known exactly by construction.
struct DriftLevel {
    int j;
    std::vector<double> freq;       // integer lattice vector, |freq| in (0.75, 1] * 2^j
    double amplitude;
    double phase;
    std::vector<double> direction;  // unit vector; {1} for scalar drift
};

class DriftSpec {
public:
    DriftSpec(int dimension, double beta, std::vector<DriftLevel> levels, bool divergence_free);

    int dimension() const { return d_; }
    double beta() const { return beta_; }
    bool divergence_free() const { return divergence_free_; }
    const std::vector<DriftLevel>& levels() const { return levels_; }
    double designed_norm() const;      // sup_j 2^{-beta j} |a_j|
    double sup_bound() const;          // sum_j |a_j|

    std::vector<double> evaluate(const std::vector<double>& x) const;
    // allocation-free variant for scheme hot loops
    void evaluate_into(const double* x, double* out) const;
    // component c rendered on a grid
    FieldOnGrid render(int component, int grid_size, int period_mult) const;
    std::vector<FieldOnGrid> render_all(int grid_size, int period_mult) const;

    nlohmann::json to_json() const;
    static DriftSpec from_json(const nlohmann::json& j);

private:
    int d_;
    double beta_;
    bool divergence_free_;
    std::vector<DriftLevel> levels_;
};

DriftSpec synthesize_drift(double beta, int levels_J, double amplitude, std::uint64_t seed,
                           int dimension, bool divergence_free = false);

// Standard bump mollifier; multiplier(r) is its radial Fourier profile
// mu(r) = int cos(r e . y) phi(y) dy with mu(0) = 1.
class Mollifier {
public:
    explicit Mollifier(int dimension);
    int dimension() const { return d_; }
    double density(const std::vector<double>& x) const;
    double multiplier(double r) const;

private:
    int d_;
    double norm_const_;
    std::vector<double> marginal_;  // d = 2: tabulated 1-d marginal on [0,1]
    mutable std::vector<std::pair<double, double>> cache_;
    double multiplier_exact(double r) const;
};

// Exact closed form of b * phi_m: amplitudes scaled by mu(|k_j|/m).
DriftSpec mollify_drift(const DriftSpec& drift, const Mollifier& mollifier, double m);

}  // namespace stablesde
