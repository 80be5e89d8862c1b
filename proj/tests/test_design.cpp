#include <cmath>

#include "doctest.h"
#include "memprot/design.hpp"

using namespace memprot;

namespace {

design_spec spec_for(double target, redundancy_scheme s) {
    design_spec d;
    d.target_lb_due = logreal::from_value(target);
    d.scheme = s;
    return d;
}

}  // namespace

TEST_CASE("headline design points at the 1e-33 target") {
    design_result single = minimize_t(spec_for(1e-33, replication{1}));
    CHECK(single.t_star == 24);
    CHECK(single.storage_overhead == doctest::Approx(0.265625).epsilon(1e-15));
    CHECK(single.report.p_lb_due.value() ==
          doctest::Approx(2.28792959e-34).epsilon(1e-8));
    CHECK(single.report.p_lb_due.log10() ==
          doctest::Approx(-33.640557345134496).epsilon(1e-12));
    REQUIRE(single.witness_below.has_value());
    // one step weaker misses the target
    CHECK(single.witness_below->log10() ==
          doctest::Approx(-31.960352480433336).epsilon(1e-12));
    CHECK(*single.witness_below > logreal::from_value(1e-33));

    design_result rep3 = minimize_t(spec_for(1e-33, replication{3}));
    CHECK(rep3.t_star == 10);
    CHECK(rep3.storage_overhead == doctest::Approx(0.18359375).epsilon(1e-15));
    CHECK(rep3.report.p_lb_due.value() == doctest::Approx(7.19750841e-36).epsilon(1e-8));
    REQUIRE(rep3.witness_below.has_value());
    CHECK(rep3.witness_below->log10() ==
          doctest::Approx(-30.989369038220076).epsilon(1e-12));

    design_result ec = minimize_t(spec_for(1e-33, erasure_code{4, 6}));
    CHECK(ec.t_star == 10);
    CHECK(ec.storage_overhead == doctest::Approx(0.18359375).epsilon(1e-15));

    // the headline saving: 8.2 points of overhead at equal reliability
    CHECK(single.storage_overhead - rep3.storage_overhead ==
          doctest::Approx(0.08203125).epsilon(1e-15));
}

TEST_CASE("calibration across data-word sizes") {
    struct { uint32_t k; uint32_t t_star; double overhead; } rows[] = {
        {512, 18, 0.4765625},
        {1024, 21, 0.3505859375},
        {2048, 24, 0.265625},
        {4096, 29, 0.217041015625},
    };
    for (auto row : rows) {
        design_spec d = spec_for(1e-33, replication{1});
        d.k = row.k;
        design_result r = minimize_t(d);
        CHECK(r.t_star == row.t_star);
        CHECK(r.storage_overhead == doctest::Approx(row.overhead).epsilon(1e-15));
        CHECK(r.bch.k == row.k);
    }
}

TEST_CASE("storage_overhead arithmetic") {
    CHECK(storage_overhead(bch_config{2048, 24}, 0.125) ==
          doctest::Approx(0.125 + 24.0 * 12.0 / 2048.0).epsilon(1e-15));
    CHECK(storage_overhead(bch_config{2048, 0}, 0.125) == 0.125);
}

TEST_CASE("unachievable targets throw with the binding constraint named") {
    design_spec d = spec_for(1e-300, replication{1});
    d.t_max = 8;
    CHECK_THROWS_AS(minimize_t(d), unachievable_error);
    try {
        minimize_t(d);
    } catch (const unachievable_error& e) {
        CHECK(e.t_max == 8);
        CHECK(e.constraint == "due");
    }

    // DUE reachable but the silent-error floor is above the NDE target:
    // stronger codes never lower p_c_nde, so the scan reports "nde".
    design_spec n = spec_for(1e-33, replication{1});
    n.p_c_nde = logreal::from_value(1e-6);
    n.target_lb_nde = logreal::from_value(1e-30);
    try {
        minimize_t(n);
        CHECK(false);
    } catch (const unachievable_error& e) {
        CHECK(e.constraint == "nde");
    }
}

TEST_CASE("nde target is honored when achievable") {
    design_spec d = spec_for(1e-33, replication{3});
    d.target_lb_nde = logreal::from_value(0.5);  // trivially satisfied at zero
    design_result r = minimize_t(d);
    CHECK(r.t_star == 10);
    CHECK(r.report.p_lb_nde.is_zero());
}

TEST_CASE("invalid spec inputs are rejected") {
    design_spec d = spec_for(1e-33, replication{1});
    d.target_lb_due = logreal::zero();
    CHECK_THROWS(minimize_t(d));
    design_spec e = spec_for(1e-33, replication{1});
    e.target_lb_due = logreal::from_value(2.0);
    CHECK_THROWS(minimize_t(e));
}

TEST_CASE("due-vs-overhead sweep is monotone in t for each scheme") {
    design_spec d = spec_for(1e-33, replication{1});
    auto rows = sweep_due_vs_overhead(d, 0, 32);
    CHECK(rows.size() == 3 * 33);
    logreal prev[3];
    int idx = 0;
    for (size_t i = 0; i < rows.size(); ++i) {
        idx = static_cast<int>(i / 33);
        if (i % 33 != 0) CHECK(rows[i].p_lb_due <= prev[idx]);
        prev[idx] = rows[i].p_lb_due;
        CHECK(rows[i].overhead ==
              doctest::Approx(0.125 + rows[i].t * 12.0 / 2048.0).epsilon(1e-14));
    }
}

TEST_CASE("replica sweep reproduces the t* ladder at 1e-33") {
    design_spec d = spec_for(1e-33, replication{1});
    auto rows = sweep_overhead_vs_replicas(d, 1, 8);
    REQUIRE(rows.size() == 8);
    uint32_t want_t[] = {24, 14, 10, 8, 7, 6, 5, 5};
    double want_oh[] = {0.265625, 0.20703125, 0.18359375, 0.171875,
                        0.166015625, 0.16015625, 0.154296875, 0.154296875};
    for (int i = 0; i < 8; ++i) {
        CHECK(rows[i].n == i + 1);
        CHECK(rows[i].t_star == want_t[i]);
        CHECK(rows[i].overhead == doctest::Approx(want_oh[i]).epsilon(1e-15));
        CHECK(rows[i].p_lb_due <= logreal::from_value(1e-33));
    }
    // diminishing returns: each extra replica saves no more than the last
    for (int i = 2; i < 8; ++i) {
        double gain_prev = rows[i - 2].overhead - rows[i - 1].overhead;
        double gain_here = rows[i - 1].overhead - rows[i].overhead;
        CHECK(gain_here <= gain_prev + 1e-15);
    }
}

TEST_CASE("rber sweep: savings grow with error rate") {
    design_spec d = spec_for(1e-33, replication{3});
    auto rows = sweep_overhead_vs_rber(d, {1e-5, 1e-4, 2e-4, 1e-3});
    REQUIRE(rows.size() == 4);
    struct { uint32_t ts, tr; double savings; } want[] = {
        {13, 5, 0.046875},
        {20, 8, 0.0703125},
        {24, 10, 0.08203125},
        {39, 18, 0.123046875},
    };
    for (int i = 0; i < 4; ++i) {
        CHECK(rows[i].t_star_single == want[i].ts);
        CHECK(rows[i].t_star_redundant == want[i].tr);
        CHECK(rows[i].savings == doctest::Approx(want[i].savings).epsilon(1e-15));
        if (i > 0) CHECK(rows[i].savings >= rows[i - 1].savings);
    }

    // the 4-of-6 code needs the same strengths as 3-way replication here
    design_spec e = spec_for(1e-33, erasure_code{4, 6});
    auto ec_rows = sweep_overhead_vs_rber(e, {1e-5, 1e-4, 2e-4, 1e-3});
    REQUIRE(ec_rows.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(ec_rows[i].t_star_redundant == rows[i].t_star_redundant);
        CHECK(ec_rows[i].savings == doctest::Approx(rows[i].savings).epsilon(1e-15));
    }
}
