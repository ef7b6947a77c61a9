#include <doctest.h>

#include <stdexcept>
#include <string>

#include "swqt/config.hpp"

using namespace swqt;

namespace {

const char* kHeterodyneConfig = R"({
  "model": {"variant": "I", "h": 1.0, "J": 0.5, "gamma": 0.5, "L": 4, "alpha": "inf"},
  "unraveling": {"scheme": "heterodyne", "dt": 1e-4, "t_final": 2.0},
  "ensemble": {"n_traj": 16, "seed": 7}
})";

const char* kJumpConfig = R"({
  "model": {"variant": "II", "h": 3.0, "J": 2.0, "gamma": 1.0, "L": 2, "alpha": 1.5,
            "sigma_convention": "half"},
  "unraveling": {"scheme": "qjump", "t_final": 5.0, "record_points": 101},
  "ensemble": {"n_traj": 8, "seed": 42, "workers": 4, "sample_start": 3.0},
  "output": {"dir": "/tmp/run"}
})";

}  // namespace

TEST_CASE("diffusive-scheme config parses with defaults applied") {
    const RunConfig cfg = parse_config(kHeterodyneConfig);
    CHECK(cfg.ensemble.scheme == Unraveling::heterodyne);
    CHECK(cfg.ensemble.spec.variant == ModelVariant::I_z_xx);
    CHECK(cfg.ensemble.spec.lattice.N == 16);
    CHECK(!cfg.ensemble.spec.alpha.has_value());
    CHECK(cfg.ensemble.spec.sigma_convention == SigmaConvention::paper);
    CHECK(cfg.ensemble.het.dt == doctest::Approx(1e-4));
    CHECK(cfg.ensemble.het.record_every == 100);
    CHECK(cfg.ensemble.workers == 1);
    CHECK(cfg.units == "gamma");
}

TEST_CASE("jump-scheme config parses including record grid") {
    const RunConfig cfg = parse_config(kJumpConfig);
    CHECK(cfg.ensemble.scheme == Unraveling::qjump);
    CHECK(cfg.ensemble.spec.variant == ModelVariant::II_x_zz);
    CHECK(cfg.ensemble.spec.alpha.has_value());
    CHECK(*cfg.ensemble.spec.alpha == doctest::Approx(1.5));
    CHECK(cfg.ensemble.spec.sigma_convention == SigmaConvention::half);
    REQUIRE(cfg.ensemble.qj.record_grid.size() == 101);
    CHECK(cfg.ensemble.qj.record_grid.front() == doctest::Approx(0.0));
    CHECK(cfg.ensemble.qj.record_grid.back() == doctest::Approx(5.0));
    CHECK(cfg.ensemble.workers == 4);
    CHECK(cfg.output_dir == "/tmp/run");
}

TEST_CASE("emit/parse round trip preserves the configuration") {
    for (const char* text : {kHeterodyneConfig, kJumpConfig}) {
        const RunConfig a = parse_config(text);
        const RunConfig b = parse_config(emit_config(a));
        CHECK(a.canonical() == b.canonical());
        CHECK(a.hash() == b.hash());
    }
}

TEST_CASE("config hash distinguishes different runs") {
    const RunConfig a = parse_config(kHeterodyneConfig);
    RunConfig b = a;
    b.ensemble.seed = 8;
    CHECK(a.hash() != b.hash());
}

TEST_CASE("invalid configs are rejected with path-qualified messages") {
    auto expect_reject = [](std::string text, const std::string& needle) {
        try {
            parse_config(text);
            FAIL_CHECK("expected rejection mentioning " << needle);
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };

    // unknown key
    expect_reject(R"({"model": {"variant": "I", "h": 1, "J": 1, "gamma": 1, "L": 2,
                      "alpha": "inf", "bogus": 3},
                      "unraveling": {"scheme": "qjump", "t_final": 1},
                      "ensemble": {"n_traj": 1, "seed": 0}})",
                  "$.model.bogus");
    // missing dt for the diffusive scheme
    expect_reject(R"({"model": {"variant": "I", "h": 1, "J": 1, "gamma": 1, "L": 2,
                      "alpha": "inf"},
                      "unraveling": {"scheme": "heterodyne", "t_final": 1},
                      "ensemble": {"n_traj": 1, "seed": 0}})",
                  "$.unraveling.dt");
    // negative alpha
    expect_reject(R"({"model": {"variant": "I", "h": 1, "J": 1, "gamma": 1, "L": 2,
                      "alpha": -1},
                      "unraveling": {"scheme": "qjump", "t_final": 1},
                      "ensemble": {"n_traj": 1, "seed": 0}})",
                  "$.model.alpha");
    // type mismatch
    expect_reject(R"({"model": {"variant": "I", "h": "big", "J": 1, "gamma": 1, "L": 2,
                      "alpha": "inf"},
                      "unraveling": {"scheme": "qjump", "t_final": 1},
                      "ensemble": {"n_traj": 1, "seed": 0}})",
                  "$.model.h");
    // dt is meaningless for the adaptive jump scheme
    expect_reject(R"({"model": {"variant": "I", "h": 1, "J": 1, "gamma": 1, "L": 2,
                      "alpha": "inf"},
                      "unraveling": {"scheme": "qjump", "t_final": 1, "dt": 1e-3},
                      "ensemble": {"n_traj": 1, "seed": 0}})",
                  "$.unraveling.dt");
    // invalid JSON
    expect_reject("{not json", "invalid JSON");
}
