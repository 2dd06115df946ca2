#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace stablesde {

// Finite symmetric measure on the unit sphere S^{d-1}: either the uniform
// (rotation-invariant) measure with a given total mass, or finitely many
// symmetric atoms. These are the two cases with exact increment samplers.
class SpectralMeasure {
public:
    enum class Variant { Uniform, Atoms };

    struct Atom {
        std::vector<double> dir;  // unit vector in R^d
        double weight;
    };

    static SpectralMeasure uniform(int dimension, double total_mass);
    // Atoms must come in +/- pairs with matching weights (tolerance 1e-12).
    static SpectralMeasure atoms(int dimension, std::vector<Atom> atoms);

    int dimension() const { return dimension_; }
    Variant variant() const { return variant_; }
    double total_mass() const;
    const std::vector<Atom>& atom_list() const { return atoms_; }

    nlohmann::json to_json() const;
    static SpectralMeasure from_json(const nlohmann::json& j);

private:
    SpectralMeasure() = default;
    int dimension_ = 1;
    Variant variant_ = Variant::Uniform;
    double mass_ = 0.0;            // Uniform only
    std::vector<Atom> atoms_;      // Atoms only
};

struct NondegeneracyResult {
    bool nondegenerate;
    double min_value;              // min over theta0 of g(theta0)
    std::vector<double> witness;   // minimizing direction
};

// g(theta0) = int |theta . theta0| Sigma(dtheta), minimized over the sphere
// by a deterministic probe grid plus local refinement.
NondegeneracyResult check_nondegeneracy(const SpectralMeasure& measure,
                                        double tolerance = 1e-10, int probe_count = 256);

// C_alpha = int_0^inf (1 - cos u) u^{-1-alpha} du. The default range is the
// model range (1,2); extended_range admits (0,2) for kernel validation.
double radial_constant(double alpha, bool extended_range = false);

// Mean of |theta . e|^p over the uniform probability measure on S^{d-1}.
double uniform_angular_average(int dimension, double p);

// alpha-stable noise specification: index, spectral measure, and the cached
// radial constant. The law of L_1 is pinned by its characteristic function
// exp(-psi(xi)) with psi given by characteristic_exponent().
class StableSpec {
public:
    static StableSpec make(double alpha, SpectralMeasure measure);
    // alpha in (0,2); used only by heat-kernel machinery validation.
    static StableSpec make_extended(double alpha, SpectralMeasure measure);

    double alpha() const { return alpha_; }
    double c_alpha() const { return c_alpha_; }
    const SpectralMeasure& measure() const { return measure_; }
    int dimension() const { return measure_.dimension(); }

    // psi(xi) = c_alpha * int |theta . xi|^alpha Sigma(dtheta)
    double characteristic_exponent(std::span<const double> xi) const;

    nlohmann::json to_json() const;
    static StableSpec from_json(const nlohmann::json& j);

private:
    StableSpec(double alpha, SpectralMeasure measure, double c_alpha, double angular_avg)
        : alpha_(alpha), measure_(std::move(measure)), c_alpha_(c_alpha),
          angular_avg_(angular_avg) {}
    double alpha_;
    SpectralMeasure measure_;
    double c_alpha_;
    double angular_avg_;  // uniform variant only
};

// Piecewise-constant time scaling sigma(t) on [0,T], each piece a d x d
// matrix with singular values in [1/kappa0, kappa0].
class TimeScaling {
public:
    struct Piece {
        double t0, t1;
        std::vector<double> matrix;  // row-major d x d
    };

    static TimeScaling identity(int dimension, double horizon);
    static TimeScaling make(int dimension, std::vector<Piece> pieces, double kappa0);

    int dimension() const { return dimension_; }
    double horizon() const { return pieces_.back().t1; }
    double kappa0() const { return kappa0_; }
    const std::vector<Piece>& pieces() const { return pieces_; }

    // sigma(t)^T xi for the piece containing t (right-open intervals).
    std::vector<double> transpose_apply(double t, std::span<const double> xi) const;
    std::vector<double> apply(double t, std::span<const double> v) const;

private:
    TimeScaling() = default;
    int dimension_ = 1;
    double kappa0_ = 1.0;
    std::vector<Piece> pieces_;
};

// The two integrals of the Levy-measure moment fact: gamma1 in [0,alpha),
// gamma2 > alpha. Returns (inner, outer).
std::pair<double, double> levy_moment_check(const StableSpec& spec, double gamma1,
                                            double gamma2);

}  // namespace stablesde
