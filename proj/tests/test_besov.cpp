#include "doctest.h"

#include <cmath>

#include "stablesde/besov.hpp"
#include "stablesde/quadrature.hpp"

using namespace stablesde;

TEST_CASE("dyadic partition profile and telescoping identity") {
    const DyadicPartition part;
    CHECK(part.chi(0.0) == 1.0);
    CHECK(part.chi(1.0) == 1.0);
    CHECK(part.chi(1.5000001) == 0.0);
    CHECK(part.chi(1.25) > 0.0);
    CHECK(part.chi(1.25) < 1.0);

    const int K = 8;
    double worst = 0.0;
    for (int i = 0; i <= 3000; ++i) {
        const double r = 1e-3 * std::pow(10.0, 6.0 * i / 3000.0);
        double sum = part.multiplier(-1, r);
        for (int j = 0; j <= K; ++j) sum += part.multiplier(j, r);
        worst = std::max(worst, std::abs(sum - part.chi(std::ldexp(r, -K))));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("field frequencies and block projection") {
    const auto f = FieldOnGrid::from_function(
        1, 256, 1, [](const std::vector<double>& x) { return std::cos(7.0 * x[0]); });
    CHECK(f.freq(1) == doctest::Approx(1.0));
    CHECK(f.freq(255) == doctest::Approx(-1.0));

    const DyadicPartition part;
    // |k| = 7 lies in the pure zone of block j = 3: projection is the identity
    const auto r3 = littlewood_paley_block(f, part, 3);
    double worst = 0.0;
    for (std::size_t i = 0; i < f.point_count(); ++i)
        worst = std::max(worst, std::abs(r3.values()[i] - f.values()[i]));
    CHECK(worst < 1e-12);
    // far blocks vanish
    CHECK(littlewood_paley_block(f, part, 0).max_abs() < 1e-12);
    CHECK(littlewood_paley_block(f, part, 6).max_abs() < 1e-12);
}

TEST_CASE("block reconstruction sums back to the field") {
    const auto b = synthesize_drift(0.3, 5, 1.0, 3, 1);
    const auto f = b.render(0, 512, 1);
    const DyadicPartition part;
    std::vector<double> acc(f.point_count(), 0.0);
    for (int j = -1; j <= f.max_level(); ++j) {
        const auto rj = littlewood_paley_block(f, part, j);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += rj.values()[i];
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < acc.size(); ++i)
        worst = std::max(worst, std::abs(acc[i] - f.values()[i]));
    CHECK(worst < 1e-10);
}

TEST_CASE("besov norm of single lacunary frequencies is exact") {
    const DyadicPartition part;
    for (const auto& [k, j] : std::vector<std::pair<int, int>>{{1, 0}, {2, 1}, {7, 3}, {13, 4}})
        for (double s : {-0.7, -0.2, 0.4}) {
            const auto f = FieldOnGrid::from_function(
                1, 512, 1, [k](const std::vector<double>& x) { return std::cos(k * x[0]); });
            CHECK(std::abs(besov_norm(f, part, s) - std::pow(2.0, s * j)) < 1e-10);
        }
}

TEST_CASE("distant blocks are orthogonal") {
    const auto b = synthesize_drift(0.25, 6, 1.0, 9, 1);
    const auto f = b.render(0, 1024, 1);
    const DyadicPartition part;
    for (int j : {0, 2, 5}) {
        const auto rj = littlewood_paley_block(f, part, j);
        for (int i = -1; i <= 6; ++i) {
            if (std::abs(i - j) < 2) continue;
            CHECK(littlewood_paley_block(rj, part, i).max_abs() < 1e-10);
        }
    }
}

TEST_CASE("bernstein and interpolation inequalities hold on synthesized fields") {
    const DyadicPartition part;
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto b = synthesize_drift(0.2, 6, 1.0, seed, 1);
        const auto f = b.render(0, 1024, 1);
        for (int k : {1, 2}) {
            const auto rep = bernstein_check(f, part, k);
            CHECK(rep.passed);
        }
        const auto rep = interpolation_check(f, part, -0.4, 0.6);
        CHECK(rep.passed);
        CHECK(rep.sup_norm <= 16.0 * rep.rhs + 1e-12);
    }
}

TEST_CASE("synthesized lacunary drift invariants") {
    const auto b = synthesize_drift(0.3, 6, 2.0, 17, 1);
    CHECK(b.levels().size() == 7);  // j = 0..J
    for (const auto& lv : b.levels()) {
        double r = 0.0;
        for (double c : lv.freq) r += c * c;
        r = std::sqrt(r);
        CHECK(r > 0.75 * std::ldexp(1.0, lv.j));
        CHECK(r <= std::ldexp(1.0, lv.j) + 1e-12);
        CHECK(lv.amplitude == doctest::Approx(2.0 * std::pow(2.0, 0.3 * lv.j)));
    }
    CHECK(b.designed_norm() == doctest::Approx(2.0));

    // rendered Besov norm at s = beta matches the designed norm (up to the
    // phase quantization of the grid maxima)
    const DyadicPartition part;
    const auto f = b.render(0, 1024, 1);
    CHECK(besov_norm(f, part, -0.3) == doctest::Approx(2.0).epsilon(1e-4));

    const auto back = DriftSpec::from_json(b.to_json());
    CHECK(back.levels().size() == b.levels().size());
    const std::vector<double> x = {0.7};
    CHECK(back.evaluate(x)[0] == doctest::Approx(b.evaluate(x)[0]));

    // divergence-free d = 2 field: freq . direction = 0
    const auto v = synthesize_drift(0.3, 5, 1.0, 4, 2, true);
    CHECK(v.divergence_free());
    for (const auto& lv : v.levels()) {
        CHECK(std::abs(lv.freq[0] * lv.direction[0] + lv.freq[1] * lv.direction[1]) < 1e-12);
        CHECK(lv.direction[0] * lv.direction[0] + lv.direction[1] * lv.direction[1] ==
              doctest::Approx(1.0));
    }
}

TEST_CASE("mollifier profile and exact closed-form convolution") {
    const Mollifier moll(1);
    CHECK(moll.multiplier(0.0) == doctest::Approx(1.0));
    CHECK(moll.multiplier(1.0) < 1.0);
    CHECK(moll.density({1.5}) == 0.0);
    // unit mass
    const double mass =
        integrate([&](double x) { return moll.density({x}); }, -1.0, 1.0, 1e-12);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));

    // oracle: numerical convolution of a single cosine level against phi_m
    const auto b = synthesize_drift(0.2, 3, 1.0, 5, 1);
    const double m = 4.0;
    const auto bm = mollify_drift(b, moll, m);
    for (double x : {0.0, 0.3, 1.1}) {
        const double direct = integrate(
            [&](double y) {
                return b.evaluate({x - y})[0] * m * moll.density({m * y});
            },
            -1.0 / m, 1.0 / m, 1e-12);
        CHECK(bm.evaluate({x})[0] == doctest::Approx(direct).epsilon(1e-8));
    }

    // growth/decay bookkeeping
    CHECK(bm.sup_bound() < b.sup_bound());
    for (std::size_t i = 0; i < b.levels().size(); ++i)
        CHECK(std::abs(bm.levels()[i].amplitude) <= std::abs(b.levels()[i].amplitude) + 1e-15);
}

TEST_CASE("mollifier in two dimensions") {
    const Mollifier moll(2);
    CHECK(moll.multiplier(0.0) == doctest::Approx(1.0));
    // unit mass via tensor quadrature
    const double mass = integrate(
        [&](double x) {
            return integrate([&](double y) { return moll.density({x, y}); }, -1.0, 1.0, 1e-10);
        },
        -1.0, 1.0, 1e-10);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));

    // convolution oracle for a d = 2 plane wave: mu(|k|/m) scaling
    const auto b = synthesize_drift(0.2, 2, 1.0, 6, 2);
    const double m = 8.0;
    const auto bm = mollify_drift(b, moll, m);
    const std::vector<double> x = {0.4, -0.2};
    const double direct = integrate(
        [&](double u) {
            return integrate(
                [&](double v) {
                    return b.evaluate({x[0] - u, x[1] - v})[0] * m * m *
                           moll.density({m * u, m * v});
                },
                -1.0 / m, 1.0 / m, 1e-9);
        },
        -1.0 / m, 1.0 / m, 1e-9);
    CHECK(bm.evaluate(x)[0] == doctest::Approx(direct).epsilon(1e-5));
}
