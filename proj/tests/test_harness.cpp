#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "stablesde/harness.hpp"

using namespace stablesde;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("experiment kind names round trip") {
    for (ExperimentKind k :
         {ExperimentKind::BoundedRate, ExperimentKind::DistRateI, ExperimentKind::DistRateII,
          ExperimentKind::MomentCheck, ExperimentKind::KernelSuite, ExperimentKind::BesovSuite,
          ExperimentKind::SamplerSuite, ExperimentKind::StabilityProbe})
        CHECK(kind_from_name(kind_name(k)) == k);
    CHECK_THROWS(kind_from_name("no-such-kind"));
}

TEST_CASE("config json round trip") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::DistRateI;
    cfg.alpha = 1.6;
    cfg.dimension = 1;
    cfg.drift.type = "lacunary";
    cfg.drift.beta = 0.1;
    cfg.drift.levels = 6;
    cfg.drift.seed = 99;
    cfg.n_ladder = {16, 32, 64};
    cfg.gamma = 0.5;
    cfg.theta = 0.3;
    cfg.paths = 5000;
    cfg.seed = 12345;
    cfg.t_obs = {0.5, 1.0};
    const auto back = ExperimentConfig::from_json(cfg.to_json());
    CHECK(back.to_json() == cfg.to_json());
    CHECK(back.kind == cfg.kind);
    CHECK(back.drift.type == "lacunary");
    CHECK(back.n_ladder == cfg.n_ladder);
    CHECK(back.t_obs == cfg.t_obs);
    CHECK(back.n_ref() == 64 * cfg.ref_multiplier);
    back.validate();
}

TEST_CASE("config validation names the violated constraint") {
    const auto message_of = [](const ExperimentConfig& cfg) -> std::string {
        try {
            cfg.validate();
        } catch (const std::invalid_argument& e) {
            return e.what();
        }
        return "";
    };
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::BoundedRate;
    cfg.n_ladder = {8, 16, 32, 64};
    cfg.validate();

    ExperimentConfig bad = cfg;
    bad.alpha = 2.3;
    CHECK(message_of(bad).find("alpha") != std::string::npos);

    bad = cfg;
    bad.n_ladder.clear();
    CHECK(message_of(bad).find("n_ladder") != std::string::npos);

    // the distributional regime requires gamma strictly inside the admissible
    // interval: the closed endpoint is rejected at config level
    ExperimentConfig di;
    di.kind = ExperimentKind::DistRateI;
    di.alpha = 1.6;
    di.drift.type = "lacunary";
    di.drift.beta = 0.1;
    di.n_ladder = {16, 32, 64, 128};
    di.gamma = 0.625;
    di.theta = 0.3;
    di.validate();
    di.gamma = 1.875;  // = (alpha-1)/(2 alpha beta)
    CHECK(message_of(di).find("gamma") != std::string::npos);

    // divergence-free regime is two-dimensional by construction
    ExperimentConfig dii;
    dii.kind = ExperimentKind::DistRateII;
    dii.alpha = 1.5;
    dii.dimension = 1;
    dii.drift.type = "lacunary";
    dii.drift.beta = 0.3;
    dii.drift.divergence_free = true;
    dii.n_ladder = {16, 32, 64, 128};
    dii.gamma = 0.3;
    CHECK(!message_of(dii).empty());
    dii.dimension = 2;
    dii.validate();
    dii.drift.divergence_free = false;
    CHECK(!message_of(dii).empty());
}

TEST_CASE("nearest power of two in log scale") {
    CHECK(round_pow2(1.0) == 1);
    CHECK(round_pow2(0.3) == 1);
    CHECK(round_pow2(4.0) == 4);
    CHECK(round_pow2(5.0) == 4);   // log2 5 = 2.32
    CHECK(round_pow2(6.0) == 8);   // log2 6 = 2.58
    CHECK(round_pow2(1000.0) == 1024);
}

TEST_CASE("spearman correlation of ranked sequences") {
    CHECK(spearman_correlation({1, 2, 3, 4, 5}, {10, 20, 30, 40, 50}) == doctest::Approx(1.0));
    CHECK(spearman_correlation({1, 2, 3, 4, 5}, {5, 4, 3, 2, 1}) == doctest::Approx(-1.0));
    // one transposition among five: rho = 1 - 6*2/(5*24) = 0.9
    CHECK(spearman_correlation({1, 2, 3, 4, 5}, {1, 3, 2, 4, 5}) == doctest::Approx(0.9));
}

TEST_CASE("bounded-rate run: deterministic across threads, sane report") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::BoundedRate;
    cfg.alpha = 1.5;
    cfg.dimension = 1;
    cfg.drift.type = "sin";
    cfg.drift.amplitude = 1.0;
    cfg.n_ladder = {8, 16, 32, 64};
    cfg.n_ref_override = 512;
    cfg.paths = 30000;
    cfg.seed = 2024;
    cfg.threads = 1;
    const auto a = run_bounded_rate(cfg);
    CHECK(a.table.size() == 4);
    CHECK(a.total_paths == 30000 * 5);
    for (const auto& p : a.table) {
        CHECK(p.error >= 0.0);
        CHECK(p.ci > 0.0);
    }
    // coarse grids are worse than fine grids even at this path budget
    CHECK(a.table.front().error > a.table.back().error);

    cfg.threads = 4;
    const auto b = run_bounded_rate(cfg);
    CHECK(a.to_json().dump() == b.to_json().dump());

    // the written artifacts are byte-identical across thread counts
    const std::string d1 = "/tmp/stablesde_rep1", d2 = "/tmp/stablesde_rep2";
    write_report(a, d1);
    write_report(b, d2);
    CHECK(slurp(d1 + "/report.json") == slurp(d2 + "/report.json"));
    CHECK(slurp(d1 + "/errors.csv") == slurp(d2 + "/errors.csv"));
    CHECK(slurp(d1 + "/errors.csv").rfind("n,m,error,ci,estimator,slope_partial", 0) == 0);
    CHECK(nlohmann::json::parse(slurp(d1 + "/meta.json")).contains("wall_seconds"));
    for (const auto& d : {d1, d2})
        for (const auto* f : {"/report.json", "/errors.csv", "/meta.json"})
            std::remove((d + f).c_str());
}

TEST_CASE("sampler suite passes at a reduced path budget") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::SamplerSuite;
    cfg.paths = 150000;
    cfg.seed = 5;
    const auto rep = run_suite(cfg);
    INFO(rep.extra.dump(2));
    CHECK(rep.verdict == "consistent");
    CHECK(rep.extra["checks"].size() >= 18);
}

TEST_CASE("besov suite verdict") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::BesovSuite;
    cfg.drift.beta = 0.3;
    cfg.eps = 0.1;
    const auto rep = run_suite(cfg);
    INFO(rep.extra.dump(2));
    CHECK(rep.verdict == "consistent");
}
