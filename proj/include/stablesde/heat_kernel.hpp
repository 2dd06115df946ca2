#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "json.hpp"
#include "stablesde/besov.hpp"
#include "stablesde/stable_model.hpp"

namespace stablesde {

// Levy symbol psi with its stability index; the characteristic function of
// L_t is exp(-t psi(xi)) (sigma = identity).
struct Symbol {
    double alpha;
    std::function<double(const std::vector<double>&)> psi;
};

Symbol symbol_from_spec(const StableSpec& spec);
// Validation symbols for closed-form machinery checks.
Symbol gaussian_symbol();  // psi = |xi|^2 (alpha = 2), density N(0, 2t I)

// Fourier-inversion workspace for the density p^sigma(t, x): a symmetric
// xi-grid with n points per axis and spacing dxi (cutoff Xi = n*dxi/2).
// The x-grid is the FFT-dual grid with spacing 2*pi/(n*dxi).
class KernelGrid {
public:
    KernelGrid(int dimension, int points_per_axis, double dxi, Symbol symbol,
               std::optional<TimeScaling> scaling = std::nullopt);

    int dimension() const { return d_; }
    int points() const { return n_; }
    double dxi() const { return dxi_; }
    double cutoff() const { return 0.5 * n_ * dxi_; }
    double dx() const { return 2.0 * M_PI / (n_ * dxi_); }
    double domain_half_width() const { return 0.5 * n_ * dx(); }
    const Symbol& symbol() const { return symbol_; }

    // int_s^t psi(sigma_r^T xi) dr (piecewise-constant sum)
    double exponent(double s, double t, const std::vector<double>& xi) const;

    // Truncation residual bound for the inversion at time step t - s; the
    // construction requires this to be < 1e-10 for the smallest t used.
    double truncation_bound(double dt) const;

    // Pointwise density by direct midpoint quadrature over the xi-grid.
    double density(double s, double t, const std::vector<double>& x) const;

    // Density (or a derivative/block filtered version) on the full x-grid
    // via FFT. Values are in wrapped order; x_coord() maps index to x.
    // filter: optional extra spectral multiplier (e.g. psi_j or psi(xi)).
    std::vector<double> density_field(double s, double t, const std::vector<int>& deriv_axes,
                                      const std::function<double(const std::vector<double>&)>&
                                          filter = nullptr) const;
    double x_coord(int bin) const;
    std::vector<double> x_vector(std::size_t flat) const;
    double cell_volume() const;

    // sum over grid of |x|^beta |field| dx^d
    double moment_integral(const std::vector<double>& field, double beta) const;
    // surrogate tail estimate: fit C |x|^{-d-alpha} at the domain edge
    double tail_estimate(const std::vector<double>& field, double beta) const;

    // P_{s,t} applied to a periodic test function given on the x-grid
    // (period = FFT domain): spectral multiplication with exp(-exponent).
    // deriv_axes applies d/dx factors; generator=true inserts -psi(xi).
    std::vector<double> semigroup_apply(double s, double t, const std::vector<double>& f,
                                        const std::vector<int>& deriv_axes = {},
                                        bool generator = false) const;

private:
    int d_, n_;
    double dxi_;
    Symbol symbol_;
    TimeScaling scaling_;
    double psi_min_unit_;  // min of psi over unit directions
};

struct CheckReport {
    std::string name;
    bool passed;
    double statistic;   // the quantity compared against the threshold
    double threshold;
    nlohmann::json details;
};

// ||grad^k P_{0,t} f||_inf * t^{k/alpha} / ||f||_inf bounded over the ladder,
// with no blow-up as t decreases (smallest-t/median ratio <= 4).
CheckReport gradient_bound_check(const KernelGrid& grid, const std::vector<double>& t_ladder,
                                 const std::vector<std::vector<double>>& f_family, int k,
                                 double c_grad = 32.0);

// int |x|^beta |grad^k p(t,.)| dx ~ t^{-(k-beta)/alpha}: fitted slope within
// +-0.1 of the predicted exponent.
CheckReport moment_integral_check(const KernelGrid& grid, const std::vector<double>& t_ladder,
                                  int k, double beta, double slope_tol = 0.1);

// int |x|^gamma |grad^n R_j p(t,.)| dx against the dyadic bound; sup ratio
// over the (j, t) lattice must stay below c_block.
CheckReport block_moment_check(const KernelGrid& grid, const DyadicPartition& part,
                               const std::vector<int>& j_range, int n_deriv, double gamma,
                               double theta, const std::vector<double>& t_ladder,
                               double c_block = 64.0);

// ||grad^k P_{u,t} f - grad^k P_{u,s} f||_inf against the bracketed minimum,
// plus the generator-bound variant via the spectral multiplier.
CheckReport time_increment_check(const KernelGrid& grid, double u,
                                 const std::vector<double>& s_ladder,
                                 const std::vector<double>& t_ladder,
                                 const std::vector<std::vector<double>>& f_family, int k,
                                 double c_time = 32.0);

}  // namespace stablesde
