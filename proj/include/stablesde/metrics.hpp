#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace stablesde {

// A sample cloud representing the time-t law of a scheme or reference run.
struct EmpiricalLaw {
    std::vector<double> samples;  // row-major N x d
    int dimension = 1;
    double t = 0.0;
    std::string provenance;  // config hash or free-form tag

    std::size_t size() const { return samples.empty() ? 0 : samples.size() / dimension; }
    static EmpiricalLaw from_samples(std::vector<double> samples, int dimension, double t = 0.0,
                                     std::string provenance = {});
};

// Bounded test functions with sup-norm exactly 1 (by construction); the max
// dictionary gap is a lower bound on total variation up to sampling error.
class TestDictionary {
public:
    struct Member {
        std::string name;
        std::function<double(const double*)> phi;
    };

    explicit TestDictionary(std::vector<Member> members) : members_(std::move(members)) {}
    // frequencies |k| in {0.5,1,2,4} (8 directions in d=2), 12 smoothed
    // half-space indicators, 6 Gaussian bumps
    static TestDictionary standard(int dimension);

    std::size_t size() const { return members_.size(); }
    const std::vector<Member>& members() const { return members_; }

private:
    std::vector<Member> members_;
};

// Half L1 distance between histograms on the pooled 0.1%-99.9% quantile box
// with per-side overflow bins (so heavy tails cannot wash out resolution).
double tv_histogram(const EmpiricalLaw& a, const EmpiricalLaw& b, int bins);

struct WeakErrorResult {
    double max_gap = 0.0;
    std::string argmax_name;
    double ci = 0.0;  // 95% two-sample CI half-width of the argmax gap
};
WeakErrorResult weak_error(const EmpiricalLaw& a, const EmpiricalLaw& b,
                           const TestDictionary& dict);

struct RatePoint {
    double n;
    double error;
    double ci;  // 95% half-width; 0 for exact data
};

struct RateFit {
    std::vector<RatePoint> points;
    std::vector<std::size_t> excluded;  // indices below the noise floor
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double theoretical = 0.0;
    std::string verdict;  // consistent | inconsistent | inconclusive | fitted

    nlohmann::json to_json() const;
};

// Weighted least squares of log error vs log n; a point enters the fit only
// if error > 3x its CI half-width. Fewer than 4 usable points -> verdict
// "inconclusive" with no slope claim.
RateFit fit_rate(const std::vector<RatePoint>& points);

enum class Regime { Bounded, DistI, DistII };

// Dominant error exponent in n predicted by the convergence theorems.
// Throws std::invalid_argument naming the violated inequality when the
// parameters leave the admissible region.
double theoretical_exponent(double alpha, double beta, double gamma, double theta, double eps,
                            Regime regime);

}  // namespace stablesde
