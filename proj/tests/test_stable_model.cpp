#include "doctest.h"

#include <cmath>

#include "stablesde/quadrature.hpp"
#include "stablesde/stable_model.hpp"

using namespace stablesde;

namespace {

// independent oracle: Gamma(2-a) |cos(pi a / 2)| / (a |a - 1|)
double radial_constant_oracle(double a) {
    if (a == 1.0) return M_PI / 2.0;
    return std::tgamma(2.0 - a) * std::abs(std::cos(M_PI * a / 2.0)) / (a * std::abs(a - 1.0));
}

}  // namespace

TEST_CASE("spectral measure factories and validation") {
    const auto u = SpectralMeasure::uniform(2, 1.5);
    CHECK(u.dimension() == 2);
    CHECK(u.total_mass() == doctest::Approx(1.5));

    const auto a = SpectralMeasure::atoms(
        2, {{{1.0, 0.0}, 0.5}, {{-1.0, 0.0}, 0.5}, {{0.0, 1.0}, 0.25}, {{0.0, -1.0}, 0.25}});
    CHECK(a.total_mass() == doctest::Approx(1.5));

    // missing mirror atom
    CHECK_THROWS(SpectralMeasure::atoms(2, {{{1.0, 0.0}, 0.5}}));
    // weight mismatch between a pair
    CHECK_THROWS(SpectralMeasure::atoms(2, {{{1.0, 0.0}, 0.5}, {{-1.0, 0.0}, 0.4}}));
    // non-unit direction
    CHECK_THROWS(SpectralMeasure::atoms(2, {{{2.0, 0.0}, 0.5}, {{-2.0, 0.0}, 0.5}}));
    // negative weight
    CHECK_THROWS(SpectralMeasure::atoms(1, {{{1.0}, -0.5}, {{-1.0}, -0.5}}));
    CHECK_THROWS(SpectralMeasure::uniform(1, -1.0));
}

TEST_CASE("spectral measure json round trip") {
    for (const auto& m :
         {SpectralMeasure::uniform(2, 0.7),
          SpectralMeasure::atoms(2, {{{0.0, 1.0}, 0.3}, {{0.0, -1.0}, 0.3}})}) {
        const auto back = SpectralMeasure::from_json(m.to_json());
        CHECK(back.dimension() == m.dimension());
        CHECK(back.variant() == m.variant());
        CHECK(back.total_mass() == doctest::Approx(m.total_mass()));
    }
}

TEST_CASE("nondegeneracy detection") {
    const auto uni = check_nondegeneracy(SpectralMeasure::uniform(2, 1.0));
    CHECK(uni.nondegenerate);
    // uniform probability measure on the circle: E|cos| = 2/pi
    CHECK(uni.min_value == doctest::Approx(2.0 / M_PI).epsilon(1e-6));

    std::vector<SpectralMeasure::Atom> axes;
    for (int s : {1, -1}) {
        axes.push_back({{double(s), 0.0}, 0.5});
        axes.push_back({{0.0, double(s)}, 0.5});
    }
    const auto cyl = check_nondegeneracy(SpectralMeasure::atoms(2, axes));
    CHECK(cyl.nondegenerate);
    // g = |cos| + |sin| is minimized on the axes with value 1
    CHECK(cyl.min_value == doctest::Approx(1.0).epsilon(1e-6));

    // a single pair cannot span d = 2: witness direction is orthogonal
    const auto deg =
        check_nondegeneracy(SpectralMeasure::atoms(2, {{{1.0, 0.0}, 0.5}, {{-1.0, 0.0}, 0.5}}));
    CHECK_FALSE(deg.nondegenerate);
    CHECK(std::abs(deg.witness[0]) < 1e-4);
    CHECK(std::abs(std::abs(deg.witness[1]) - 1.0) < 1e-4);

    CHECK_THROWS(check_nondegeneracy(SpectralMeasure::uniform(2, 1.0), 1e-10, 8));
}

TEST_CASE("radial constant against the gamma-function oracle") {
    for (double a : {1.05, 1.2, 1.5, 1.8, 1.95})
        CHECK(radial_constant(a) == doctest::Approx(radial_constant_oracle(a)).epsilon(1e-10));
    for (double a : {0.3, 0.5, 0.9, 1.1})
        CHECK(radial_constant(a, true) ==
              doctest::Approx(radial_constant_oracle(a)).epsilon(1e-10));
    CHECK_THROWS(radial_constant(0.5));       // model range is (1,2)
    CHECK_THROWS(radial_constant(2.0, true));
}

TEST_CASE("uniform angular average") {
    CHECK(uniform_angular_average(1, 1.7) == doctest::Approx(1.0));
    CHECK(uniform_angular_average(3, 1.5) == doctest::Approx(1.0 / 2.5).epsilon(1e-10));
    // circle: E|cos|^p = Gamma((p+1)/2) / (sqrt(pi) Gamma(p/2 + 1))
    for (double p : {1.0, 1.2, 1.5, 1.8}) {
        const double oracle =
            std::tgamma((p + 1.0) / 2.0) / (std::sqrt(M_PI) * std::tgamma(p / 2.0 + 1.0));
        CHECK(uniform_angular_average(2, p) == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("characteristic exponent") {
    const double a = 1.5;
    const auto iso = StableSpec::make(a, SpectralMeasure::uniform(2, 1.0));
    const double avg = uniform_angular_average(2, a);
    const std::vector<double> xi = {3.0, 4.0};  // |xi| = 5
    CHECK(iso.characteristic_exponent(xi) ==
          doctest::Approx(iso.c_alpha() * avg * std::pow(5.0, a)).epsilon(1e-12));
    // rotation invariance
    const std::vector<double> xi2 = {5.0, 0.0};
    CHECK(iso.characteristic_exponent(xi) ==
          doctest::Approx(iso.characteristic_exponent(xi2)).epsilon(1e-12));

    std::vector<SpectralMeasure::Atom> axes;
    for (int s : {1, -1}) {
        axes.push_back({{double(s), 0.0}, 1.0});
        axes.push_back({{0.0, double(s)}, 1.0});
    }
    const auto cyl = StableSpec::make(a, SpectralMeasure::atoms(2, axes));
    // cylindrical symbol: 2 c_alpha (|xi_1|^a + |xi_2|^a)
    CHECK(cyl.characteristic_exponent(xi) ==
          doctest::Approx(2.0 * cyl.c_alpha() * (std::pow(3.0, a) + std::pow(4.0, a)))
              .epsilon(1e-12));
    // homogeneity
    const std::vector<double> xi3 = {6.0, 8.0};
    CHECK(cyl.characteristic_exponent(xi3) ==
          doctest::Approx(std::pow(2.0, a) * cyl.characteristic_exponent(xi)).epsilon(1e-12));

    CHECK_THROWS(StableSpec::make(1.0, SpectralMeasure::uniform(1, 1.0)));
    CHECK_THROWS(StableSpec::make(2.0, SpectralMeasure::uniform(1, 1.0)));
}

TEST_CASE("stable spec json round trip") {
    const auto spec = StableSpec::make(1.7, SpectralMeasure::uniform(2, 0.9));
    const auto back = StableSpec::from_json(spec.to_json());
    CHECK(back.alpha() == doctest::Approx(1.7));
    CHECK(back.c_alpha() == doctest::Approx(spec.c_alpha()));
    const std::vector<double> xi = {1.0, -2.0};
    CHECK(back.characteristic_exponent(xi) ==
          doctest::Approx(spec.characteristic_exponent(xi)));
}

TEST_CASE("time scaling") {
    const auto id = TimeScaling::identity(2, 1.0);
    const std::vector<double> xi = {1.0, 2.0};
    CHECK(id.transpose_apply(0.5, xi) == std::vector<double>{1.0, 2.0});

    TimeScaling::Piece p1{0.0, 0.5, {2.0, 0.0, 0.0, 0.5}};
    TimeScaling::Piece p2{0.5, 1.0, {0.0, -1.0, 1.0, 0.0}};
    const auto sc = TimeScaling::make(2, {p1, p2}, 2.0);
    const auto v = sc.transpose_apply(0.25, xi);
    CHECK(v[0] == doctest::Approx(2.0));
    CHECK(v[1] == doctest::Approx(1.0));
    const auto w = sc.apply(0.75, xi);  // rotation
    CHECK(w[0] == doctest::Approx(-2.0));
    CHECK(w[1] == doctest::Approx(1.0));

    // singular value outside [1/kappa0, kappa0]
    TimeScaling::Piece bad{0.0, 1.0, {3.0, 0.0, 0.0, 1.0}};
    CHECK_THROWS(TimeScaling::make(2, {bad}, 2.0));
    // gap between pieces
    TimeScaling::Piece gap{0.6, 1.0, {1.0, 0.0, 0.0, 1.0}};
    CHECK_THROWS(TimeScaling::make(2, {p1, gap}, 2.0));
}

TEST_CASE("levy measure moment split") {
    const auto spec = StableSpec::make(1.5, SpectralMeasure::uniform(1, 2.0));
    const auto [inner, outer] = levy_moment_check(spec, 0.5, 2.5);
    // closed forms: mass/(a - g1) inside the unit ball, mass/(g2 - a) outside
    CHECK(inner == doctest::Approx(2.0 / (1.5 - 0.5)).epsilon(1e-8));
    CHECK(outer == doctest::Approx(2.0 / (2.5 - 1.5)).epsilon(1e-8));
    CHECK_THROWS(levy_moment_check(spec, 1.6, 2.5));  // gamma1 must stay below alpha
    CHECK_THROWS(levy_moment_check(spec, 0.5, 1.4));  // gamma2 must exceed alpha
}
