#include "stablesde/stable_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stablesde/quadrature.hpp"

namespace stablesde {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

void normalize(std::vector<double>& v) {
    const double n = norm(v);
    for (auto& x : v) x /= n;
}

// Deterministic probe directions on S^{d-1}: uniform angles for d=2,
// Fibonacci lattice for d=3, golden-ratio lattice pushed through the
// Gaussian-free Box construction for higher d is unnecessary here.
std::vector<std::vector<double>> sphere_probes(int d, int count) {
    std::vector<std::vector<double>> out;
    if (d == 1) {
        out.push_back({1.0});
        out.push_back({-1.0});
        return out;
    }
    if (d == 2) {
        for (int i = 0; i < count; ++i) {
            const double phi = 2.0 * M_PI * i / count;
            out.push_back({std::cos(phi), std::sin(phi)});
        }
        return out;
    }
    if (d == 3) {
        const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
        for (int i = 0; i < count; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = 2.0 * M_PI * i / golden;
            out.push_back({r * std::cos(phi), r * std::sin(phi), z});
        }
        return out;
    }
    // d >= 4: low-discrepancy Weyl sequence mapped through atan-normalization.
    std::vector<double> alpha(d);
    double p = 2.0;
    for (int k = 0; k < d; ++k) {
        alpha[k] = std::sqrt(p);
        alpha[k] -= std::floor(alpha[k]);
        p += 1.0;
    }
    for (int i = 1; i <= count; ++i) {
        std::vector<double> v(d);
        for (int k = 0; k < d; ++k) {
            double u = i * alpha[k];
            u -= std::floor(u);
            v[k] = std::tan(M_PI * (u - 0.5));  // heavy-tailed spread over R
        }
        normalize(v);
        out.push_back(std::move(v));
    }
    return out;
}

// Jacobi eigenvalues of a symmetric matrix (row-major d x d).
std::vector<double> symmetric_eigenvalues(std::vector<double> a, int d) {
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) off += a[i * d + j] * a[i * d + j];
        if (off < 1e-28) break;
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
                if (std::abs(a[i * d + j]) < 1e-30) continue;
                const double theta = (a[j * d + j] - a[i * d + i]) / (2.0 * a[i * d + j]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < d; ++k) {
                    const double aik = a[i * d + k], ajk = a[j * d + k];
                    a[i * d + k] = c * aik - s * ajk;
                    a[j * d + k] = s * aik + c * ajk;
                }
                for (int k = 0; k < d; ++k) {
                    const double aki = a[k * d + i], akj = a[k * d + j];
                    a[k * d + i] = c * aki - s * akj;
                    a[k * d + j] = s * aki + c * akj;
                }
            }
        }
    }
    std::vector<double> ev(d);
    for (int i = 0; i < d; ++i) ev[i] = a[i * d + i];
    return ev;
}

// int_1^inf cos(u) u^{-s} du, s > 1: integration by parts until the decay
// exponent is >= 6, then half-period Gauss-Legendre summation.
double oscillatory_tail(double s, bool is_cos) {
    if (s < 6.0) {
        if (is_cos) {
            // I(s) = -sin 1 + s J(s+1)
            return -std::sin(1.0) + s * oscillatory_tail(s + 1.0, false);
        }
        // J(s) = cos 1 - s I(s+1)
        return std::cos(1.0) - s * oscillatory_tail(s + 1.0, true);
    }
    double total = 0.0;
    double a = 1.0;
    for (int k = 0; k < 4000; ++k) {
        const double b = a + M_PI;
        const double piece = gauss_legendre(
            [s, is_cos](double u) {
                return (is_cos ? std::cos(u) : std::sin(u)) * std::pow(u, -s);
            },
            a, b, 24);
        total += piece;
        if (std::abs(piece) < 1e-20) break;
        a = b;
    }
    return total;
}

}  // namespace

SpectralMeasure SpectralMeasure::uniform(int dimension, double total_mass) {
    if (dimension < 1) throw std::invalid_argument("SpectralMeasure: dimension >= 1 required");
    if (!(total_mass > 0.0)) throw std::invalid_argument("SpectralMeasure: mass must be > 0");
    SpectralMeasure m;
    m.dimension_ = dimension;
    m.variant_ = Variant::Uniform;
    m.mass_ = total_mass;
    return m;
}

SpectralMeasure SpectralMeasure::atoms(int dimension, std::vector<Atom> atoms) {
    if (dimension < 1) throw std::invalid_argument("SpectralMeasure: dimension >= 1 required");
    if (atoms.empty()) throw std::invalid_argument("SpectralMeasure: no atoms given");
    for (const auto& a : atoms) {
        if (int(a.dir.size()) != dimension)
            throw std::invalid_argument("SpectralMeasure: atom dimension mismatch");
        if (std::abs(norm(a.dir) - 1.0) > 1e-12)
            throw std::invalid_argument("SpectralMeasure: atom direction not unit norm");
        if (!(a.weight > 0.0))
            throw std::invalid_argument("SpectralMeasure: atom weight must be > 0");
    }
    // symmetry: each atom needs a mirrored partner with matching weight
    for (const auto& a : atoms) {
        bool found = false;
        for (const auto& b : atoms) {
            double diff = 0.0;
            for (int k = 0; k < dimension; ++k) diff += std::abs(a.dir[k] + b.dir[k]);
            if (diff < 1e-12 && std::abs(a.weight - b.weight) < 1e-12) {
                found = true;
                break;
            }
        }
        if (!found)
            throw std::invalid_argument("SpectralMeasure: atoms are not symmetric under x -> -x");
    }
    SpectralMeasure m;
    m.dimension_ = dimension;
    m.variant_ = Variant::Atoms;
    m.atoms_ = std::move(atoms);
    return m;
}

double SpectralMeasure::total_mass() const {
    if (variant_ == Variant::Uniform) return mass_;
    double s = 0.0;
    for (const auto& a : atoms_) s += a.weight;
    return s;
}

nlohmann::json SpectralMeasure::to_json() const {
    nlohmann::json j;
    if (variant_ == Variant::Uniform) {
        j["variant"] = "uniform";
        j["mass"] = mass_;
        j["dimension"] = dimension_;
    } else {
        j["variant"] = "atoms";
        j["dimension"] = dimension_;
        auto arr = nlohmann::json::array();
        for (const auto& a : atoms_) arr.push_back({{"dir", a.dir}, {"w", a.weight}});
        j["atoms"] = arr;
    }
    return j;
}

SpectralMeasure SpectralMeasure::from_json(const nlohmann::json& j) {
    const std::string variant = j.at("variant");
    if (variant == "uniform")
        return uniform(j.at("dimension").get<int>(), j.at("mass").get<double>());
    if (variant == "atoms") {
        std::vector<Atom> atoms;
        for (const auto& a : j.at("atoms"))
            atoms.push_back({a.at("dir").get<std::vector<double>>(), a.at("w").get<double>()});
        return SpectralMeasure::atoms(j.at("dimension").get<int>(), std::move(atoms));
    }
    throw std::invalid_argument("SpectralMeasure: unknown variant " + variant);
}

double uniform_angular_average(int dimension, double p) {
    if (dimension == 1) return 1.0;
    if (dimension == 3) return 1.0 / (p + 1.0);
    // (int_0^pi |cos|^p sin^{d-2}) / (int_0^pi sin^{d-2}), via quadrature
    const auto num = integrate(
        [p, dimension](double t) {
            return std::pow(std::abs(std::cos(t)), p) *
                   std::pow(std::sin(t), double(dimension - 2));
        },
        0.0, M_PI, 1e-13);
    const auto den = integrate(
        [dimension](double t) { return std::pow(std::sin(t), double(dimension - 2)); }, 0.0,
        M_PI, 1e-13);
    return num / den;
}

NondegeneracyResult check_nondegeneracy(const SpectralMeasure& measure, double tolerance,
                                        int probe_count) {
    if (probe_count < 64) throw std::invalid_argument("check_nondegeneracy: probe_count >= 64");
    const int d = measure.dimension();

    auto g = [&](std::span<const double> theta0) {
        if (measure.variant() == SpectralMeasure::Variant::Uniform)
            return measure.total_mass() * uniform_angular_average(d, 1.0);
        double s = 0.0;
        for (const auto& a : measure.atom_list()) s += a.weight * std::abs(dot(a.dir, theta0));
        return s;
    };

    if (measure.variant() == SpectralMeasure::Variant::Uniform) {
        std::vector<double> e1(d, 0.0);
        e1[0] = 1.0;
        const double v = g(e1);
        if (v > tolerance) return {true, v, e1};
        return {false, v, e1};
    }

    auto probes = sphere_probes(d, probe_count);
    std::vector<double> best = probes[0];
    double best_val = g(best);
    for (const auto& p : probes) {
        const double v = g(p);
        if (v < best_val) {
            best_val = v;
            best = p;
        }
    }

    if (d == 2) {
        // golden-section refinement of the angle around the best probe
        const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
        double phi0 = std::atan2(best[1], best[0]);
        double lo = phi0 - 2.0 * M_PI / probe_count, hi = phi0 + 2.0 * M_PI / probe_count;
        auto eval = [&](double phi) {
            const double v[2] = {std::cos(phi), std::sin(phi)};
            return g(std::span<const double>(v, 2));
        };
        double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
        double f1 = eval(x1), f2 = eval(x2);
        for (int it = 0; it < 20; ++it) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - invphi * (hi - lo);
                f1 = eval(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + invphi * (hi - lo);
                f2 = eval(x2);
            }
        }
        const double phi = 0.5 * (lo + hi);
        std::vector<double> cand = {std::cos(phi), std::sin(phi)};
        const double cv = g(cand);
        if (cv < best_val) {
            best_val = cv;
            best = cand;
        }
    } else if (d >= 3) {
        // shrinking spherical-cap search around the best probe
        double radius = 2.0 * M_PI / std::sqrt(double(probe_count));
        for (int it = 0; it < 20; ++it) {
            auto local = sphere_probes(d, 32);
            for (auto& q : local) {
                std::vector<double> cand(d);
                for (int k = 0; k < d; ++k) cand[k] = best[k] + radius * q[k];
                normalize(cand);
                const double cv = g(cand);
                if (cv < best_val) {
                    best_val = cv;
                    best = cand;
                }
            }
            radius *= 0.6;
        }
    }

    if (best_val > tolerance) return {true, best_val, best};
    return {false, best_val, best};
}

double radial_constant(double alpha, bool extended_range) {
    const bool ok = extended_range ? (alpha > 0.0 && alpha < 2.0)
                                   : (alpha > 1.0 && alpha < 2.0);
    if (!ok) throw std::invalid_argument("radial_constant: alpha out of range");

    // [0,1]: termwise integration of the cosine series, alternating and fast.
    double head = 0.0;
    double fact = 2.0;  // (2k)!
    double sign = 1.0;
    for (int k = 1; k <= 40; ++k) {
        const double term = sign / (fact * (2.0 * k - alpha));
        head += term;
        if (std::abs(term) < 1e-18 * std::abs(head)) break;
        sign = -sign;
        fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
    }
    // [1,inf): 1/alpha - int_1^inf cos(u) u^{-1-alpha} du
    const double tail = 1.0 / alpha - oscillatory_tail(1.0 + alpha, true);
    return head + tail;
}

StableSpec StableSpec::make(double alpha, SpectralMeasure measure) {
    if (!(alpha > 1.0 && alpha < 2.0))
        throw std::invalid_argument("StableSpec: alpha must lie in (1,2)");
    const double c = radial_constant(alpha);
    const double avg = measure.variant() == SpectralMeasure::Variant::Uniform
                           ? uniform_angular_average(measure.dimension(), alpha)
                           : 0.0;
    return StableSpec(alpha, std::move(measure), c, avg);
}

StableSpec StableSpec::make_extended(double alpha, SpectralMeasure measure) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::invalid_argument("StableSpec: extended alpha must lie in (0,2)");
    const double c = radial_constant(alpha, true);
    const double avg = measure.variant() == SpectralMeasure::Variant::Uniform
                           ? uniform_angular_average(measure.dimension(), alpha)
                           : 0.0;
    return StableSpec(alpha, std::move(measure), c, avg);
}

double StableSpec::characteristic_exponent(std::span<const double> xi) const {
    if (int(xi.size()) != dimension())
        throw std::invalid_argument("characteristic_exponent: dimension mismatch");
    if (measure_.variant() == SpectralMeasure::Variant::Uniform)
        return c_alpha_ * measure_.total_mass() * angular_avg_ *
               std::pow(norm(xi), alpha_);
    double s = 0.0;
    for (const auto& a : measure_.atom_list())
        s += a.weight * std::pow(std::abs(dot(a.dir, xi)), alpha_);
    return c_alpha_ * s;
}

nlohmann::json StableSpec::to_json() const {
    return {{"alpha", alpha_}, {"measure", measure_.to_json()}};
}

StableSpec StableSpec::from_json(const nlohmann::json& j) {
    return make(j.at("alpha").get<double>(), SpectralMeasure::from_json(j.at("measure")));
}

TimeScaling TimeScaling::identity(int dimension, double horizon) {
    Piece p;
    p.t0 = 0.0;
    p.t1 = horizon;
    p.matrix.assign(dimension * dimension, 0.0);
    for (int i = 0; i < dimension; ++i) p.matrix[i * dimension + i] = 1.0;
    return make(dimension, {p}, 1.0 + 1e-12);
}

TimeScaling TimeScaling::make(int dimension, std::vector<Piece> pieces, double kappa0) {
    if (!(kappa0 > 1.0)) throw std::invalid_argument("TimeScaling: kappa0 > 1 required");
    if (pieces.empty()) throw std::invalid_argument("TimeScaling: no pieces");
    if (std::abs(pieces.front().t0) > 1e-14)
        throw std::invalid_argument("TimeScaling: pieces must start at 0");
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
        if (std::abs(pieces[i].t1 - pieces[i + 1].t0) > 1e-12)
            throw std::invalid_argument("TimeScaling: pieces have a gap or overlap");
    }
    for (const auto& p : pieces) {
        if (!(p.t1 > p.t0)) throw std::invalid_argument("TimeScaling: empty piece");
        if (int(p.matrix.size()) != dimension * dimension)
            throw std::invalid_argument("TimeScaling: matrix size mismatch");
        // singular values via eigenvalues of M^T M
        std::vector<double> mtm(dimension * dimension, 0.0);
        for (int i = 0; i < dimension; ++i)
            for (int j = 0; j < dimension; ++j) {
                double s = 0.0;
                for (int k = 0; k < dimension; ++k)
                    s += p.matrix[k * dimension + i] * p.matrix[k * dimension + j];
                mtm[i * dimension + j] = s;
            }
        for (double ev : symmetric_eigenvalues(mtm, dimension)) {
            const double sv = std::sqrt(std::max(ev, 0.0));
            if (sv < 1.0 / kappa0 - 1e-12 || sv > kappa0 + 1e-12)
                throw std::invalid_argument(
                    "TimeScaling: singular value outside [1/kappa0, kappa0]");
        }
    }
    TimeScaling ts;
    ts.dimension_ = dimension;
    ts.kappa0_ = kappa0;
    ts.pieces_ = std::move(pieces);
    return ts;
}

std::vector<double> TimeScaling::transpose_apply(double t, std::span<const double> xi) const {
    const Piece* piece = &pieces_.back();
    for (const auto& p : pieces_)
        if (t >= p.t0 && t < p.t1) {
            piece = &p;
            break;
        }
    std::vector<double> out(dimension_, 0.0);
    for (int i = 0; i < dimension_; ++i)
        for (int j = 0; j < dimension_; ++j)
            out[i] += piece->matrix[j * dimension_ + i] * xi[j];
    return out;
}

std::vector<double> TimeScaling::apply(double t, std::span<const double> v) const {
    const Piece* piece = &pieces_.back();
    for (const auto& p : pieces_)
        if (t >= p.t0 && t < p.t1) {
            piece = &p;
            break;
        }
    std::vector<double> out(dimension_, 0.0);
    for (int i = 0; i < dimension_; ++i)
        for (int j = 0; j < dimension_; ++j)
            out[i] += piece->matrix[i * dimension_ + j] * v[j];
    return out;
}

std::pair<double, double> levy_moment_check(const StableSpec& spec, double gamma1,
                                            double gamma2) {
    const double alpha = spec.alpha();
    if (!(gamma1 >= 0.0 && gamma1 < alpha))
        throw std::invalid_argument("levy_moment_check: need 0 <= gamma1 < alpha");
    if (!(gamma2 > alpha))
        throw std::invalid_argument("levy_moment_check: need gamma2 > alpha");
    const double mass = spec.measure().total_mass();

    // inner: mass * int_0^1 r^{gamma2-1-alpha} dr, power substitution r = v^k
    const double c_in = gamma2 - alpha;
    const int k_in = std::max(1, int(std::ceil(2.0 / c_in)));
    const double inner =
        mass * integrate(
                   [c_in, k_in](double v) {
                       return double(k_in) * std::pow(v, double(k_in) * c_in - 1.0);
                   },
                   0.0, 1.0, 1e-12);
    // outer: mass * int_1^inf r^{gamma1-1-alpha} dr = mass * int_0^1 v^{alpha-gamma1-1} dv
    const double c_out = alpha - gamma1;
    const int k_out = std::max(1, int(std::ceil(2.0 / c_out)));
    const double outer =
        mass * integrate(
                   [c_out, k_out](double v) {
                       return double(k_out) * std::pow(v, double(k_out) * c_out - 1.0);
                   },
                   0.0, 1.0, 1e-12);
    return {inner, outer};
}

}  // namespace stablesde
