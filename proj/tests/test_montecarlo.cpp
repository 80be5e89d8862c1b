#include <cmath>

#include "doctest.h"
#include "memprot/enumerate.hpp"
#include "memprot/montecarlo.hpp"
#include "memprot/philox.hpp"

using namespace memprot;

TEST_CASE("philox 4x64-10 reference vectors") {
    // Pinned against numpy.random.Philox, which increments the counter before
    // generating: its first block for counter=0 is our output at counter 1.
    using blk = philox4x64::block;
    philox4x64 z(0, 0);
    CHECK(z(blk{1, 0, 0, 0}) ==
          blk{0x02f4ba6408e4d89bull, 0x3dd62b0b9ca8c5b2ull,
              0x1c8667a55d902e79ull, 0x907d7a052fd5b4dcull});
    CHECK(z(blk{2, 0, 0, 0}) ==
          blk{0x809bf322883987c3ull, 0x471128b9e807f7ddull,
              0xf250ba0dbec065b7ull, 0xfc6ed66767a457bcull});

    philox4x64 g42(42, 0);
    CHECK(g42(blk{1, 0, 0, 0}) ==
          blk{0xd1f8817d4d62880eull, 0x307266b65cc8797eull,
              0xde1f04e7f084ed03ull, 0x65034a8e78cd1e59ull});
    CHECK(g42(blk{2, 0, 0, 0}) ==
          blk{0x5e3daa8961c3e3d3ull, 0x6f37dea4a04bd05cull,
              0x31d3a1ae26e190b9ull, 0x0fef7fae0ab2a01aull});

    philox4x64 mixed(0xdeadbeefull, 0x12345678ull);
    CHECK(mixed(blk{2, 2, 3, 4}) ==
          blk{0xd2998438c39896c1ull, 0x8883d7010eb424a8ull,
              0x878adbdbec41b8b4ull, 0xc24945d81fe024fbull});
    CHECK(mixed(blk{3, 2, 3, 4}) ==
          blk{0x76a4459f198694b8ull, 0x24f182b5f3d9411full,
              0xfe6dc9cf778d81e3ull, 0x74abeda01be6746bull});

    philox4x64 ones(~0ull, ~0ull);
    CHECK(ones(blk{0, 0, 0, 0}) ==
          blk{0x44b7493d1acfc229ull, 0x6636af8e997921ddull,
              0x3f73e132b5b3780eull, 0x605644dde03b01b1ull});
    CHECK(ones(blk{1, 0, 0, 0}) ==
          blk{0x6d46cc0e71f0be7eull, 0x924ea1693f9a8bc0ull,
              0xfdc35f0198c91181ull, 0xb4a311f17aa6568dull});
}

TEST_CASE("u64_to_unit maps the top 53 bits into [0,1)") {
    CHECK(u64_to_unit(0) == 0.0);
    CHECK(u64_to_unit(~0ull) < 1.0);
    CHECK(u64_to_unit(~0ull) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(u64_to_unit(1ull << 63) == 0.5);
    CHECK(u64_to_unit((1ull << 11)) == std::ldexp(1.0, -53));
}

TEST_CASE("parse_rational accepts decimals, scientific, and fractions") {
    CHECK(parse_rational("0.1") == mpq_class(1, 10));
    CHECK(parse_rational("2e-4") == mpq_class(1, 5000));
    CHECK(parse_rational("1/8") == mpq_class(1, 8));
    CHECK(parse_rational("-1.5e2") == mpq_class(-150));
    CHECK(parse_rational("42") == mpq_class(42));
    CHECK_THROWS(parse_rational("zero"));
    CHECK_THROWS(parse_rational("1/0"));
}

TEST_CASE("exact enumeration at hand-checked points") {
    // two replicas, fair-coin DUE, no silent errors
    exact_report two = enumerate_exact(replication{2}, mpq_class(1, 2), 0);
    CHECK(two.p_due == mpq_class(1, 4));
    CHECK(two.extra_reads_unconditional == mpq_class(3, 4));
    CHECK(two.extra_reads_given_success == mpq_class(1, 3));

    exact_report three = enumerate_exact(replication{3}, mpq_class(1, 10), mpq_class(1, 100));
    CHECK(three.p_due == mpq_class(1, 1000));
    CHECK(three.p_nde_union == mpq_class(271, 10000));
    CHECK(three.p_nde_served == mpq_class(111, 10000));
    CHECK(three.extra_reads_unconditional == mpq_class(111, 1000));
    CHECK(three.extra_reads_given_success == mpq_class(4, 37));

    exact_report ec = enumerate_exact(erasure_code{4, 6}, mpq_class(1, 10), 0);
    CHECK(ec.p_due == mpq_class(317, 20000));
    CHECK(ec.p_nde_served == 0);
}

TEST_CASE("published closed forms match enumeration exactly over small N") {
    for (auto [pn, pd] : {std::pair{1, 2}, {1, 10}, {1, 100}}) {
        mpq_class p(pn, pd);
        mpq_class q(1, 64);
        logreal pl = logreal::from_value(p.get_d());
        logreal ql = logreal::from_value(q.get_d());
        for (int n = 1; n <= 8; ++n) {
            exact_report ex = enumerate_exact(replication{n}, p, q);
            CHECK(replication_due(pl, n).value() ==
                  doctest::Approx(ex.p_due.get_d()).epsilon(1e-12));
            CHECK(replication_nde(pl, ql, n).value() ==
                  doctest::Approx(ex.p_nde_union.get_d()).epsilon(1e-12));
        }
        for (auto [k, n] : {std::pair{1, 2}, {2, 3}, {4, 6}, {3, 8}}) {
            exact_report ex = enumerate_exact(erasure_code{k, n}, p, q);
            CHECK(ec_due(pl, k, n).value() ==
                  doctest::Approx(ex.p_due.get_d()).epsilon(1e-12));
        }
    }
}

TEST_CASE("protocol_values matches enumeration across schemes") {
    mpq_class p(1, 8), q(1, 16);
    std::vector<redundancy_scheme> schemes = {
        replication{1}, replication{2}, replication{3}, replication{4},
        erasure_code{2, 3}, erasure_code{4, 6},
    };
    for (const auto& s : schemes) {
        exact_report ex = enumerate_exact(s, p, q);
        protocol_expectations pv = protocol_values(s, p.get_d(), q.get_d());
        CHECK(pv.p_due == doctest::Approx(ex.p_due.get_d()).epsilon(1e-12));
        CHECK(pv.p_nde == doctest::Approx(ex.p_nde_served.get_d()).epsilon(1e-12));
        CHECK(pv.extra_reads_unconditional ==
              doctest::Approx(ex.extra_reads_unconditional.get_d()).epsilon(1e-12));
        CHECK(pv.extra_reads_given_success ==
              doctest::Approx(ex.extra_reads_given_success.get_d()).epsilon(1e-12));
    }
    // every read fails: conditional mean is undefined
    protocol_expectations dead = protocol_values(replication{1}, 1.0, 0.0);
    CHECK(dead.p_due == 1.0);
    CHECK(std::isnan(dead.extra_reads_given_success));
}

namespace {

trial_config mc_config(redundancy_scheme s, double p, double q, uint64_t trials,
                       uint64_t seed, unsigned workers) {
    trial_config cfg;
    cfg.scheme = s;
    cfg.rates.due = logreal::from_value(p);
    cfg.rates.nde = logreal::from_value(q);
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.workers = workers;
    return cfg;
}

// For 0/1-valued metrics the spread comes from the exact probability, which
// stays meaningful even when the event is so rare the sample CI degenerates
// to zero.
void check_within_3sigma_exact(const estimate& est, double exact, uint64_t trials) {
    double sigma = std::sqrt(exact * (1.0 - exact) / double(trials));
    CHECK(std::abs(est.mean - exact) <= 3.0 * sigma + 1e-15);
}

void check_within_3sigma(const estimate& est, double exact) {
    double sigma = est.ci95 / 1.96;
    CHECK(std::abs(est.mean - exact) <= 3.0 * sigma + 1e-15);
}

}  // namespace

TEST_CASE("sampler is deterministic and worker-count independent") {
    auto a = simulate(mc_config(replication{3}, 0.1, 0.01, 50000, 7, 1));
    auto b = simulate(mc_config(replication{3}, 0.1, 0.01, 50000, 7, 3));
    CHECK(a.p_lb_due.mean == b.p_lb_due.mean);
    CHECK(a.p_lb_nde.mean == b.p_lb_nde.mean);
    CHECK(a.extra_reads_unconditional.mean == b.extra_reads_unconditional.mean);
    CHECK(a.extra_reads_given_success.mean == b.extra_reads_given_success.mean);
    CHECK(a.p_lb_due.ci95 == b.p_lb_due.ci95);

    auto c = simulate(mc_config(erasure_code{4, 6}, 0.1, 0.01, 50000, 7, 1));
    auto d = simulate(mc_config(erasure_code{4, 6}, 0.1, 0.01, 50000, 7, 4));
    CHECK(c.p_lb_due.mean == d.p_lb_due.mean);
    CHECK(c.extra_reads_given_success.mean == d.extra_reads_given_success.mean);

    // a different seed moves the estimate
    auto e = simulate(mc_config(replication{3}, 0.1, 0.01, 50000, 8, 1));
    CHECK(a.p_lb_due.mean != e.p_lb_due.mean);
}

TEST_CASE("degenerate rates produce exact counts") {
    auto clean = simulate(mc_config(replication{3}, 0.0, 0.0, 1000, 0, 2));
    CHECK(clean.p_lb_due.mean == 0.0);
    CHECK(clean.p_lb_nde.mean == 0.0);
    CHECK(clean.extra_reads_unconditional.mean == 0.0);

    auto dead = simulate(mc_config(replication{2}, 1.0, 0.0, 1000, 0, 2));
    CHECK(dead.p_lb_due.mean == 1.0);
    CHECK(std::isnan(dead.extra_reads_given_success.mean));
}

TEST_CASE("sampler agrees with enumeration within 3 sigma") {
    const uint64_t trials = 200000;
    for (double p : {0.1, 0.01}) {
        mpq_class pq(p), qq(0.01);
        exact_report rex = enumerate_exact(replication{3}, pq, qq);
        auto r = simulate(mc_config(replication{3}, p, 0.01, trials, 5, 4));
        check_within_3sigma_exact(r.p_lb_due, rex.p_due.get_d(), trials);
        check_within_3sigma_exact(r.p_lb_nde, rex.p_nde_served.get_d(), trials);
        check_within_3sigma(r.extra_reads_unconditional,
                            rex.extra_reads_unconditional.get_d());

        exact_report eex = enumerate_exact(erasure_code{4, 6}, pq, qq);
        auto e = simulate(mc_config(erasure_code{4, 6}, p, 0.01, trials, 5, 4));
        check_within_3sigma_exact(e.p_lb_due, eex.p_due.get_d(), trials);
        check_within_3sigma_exact(e.p_lb_nde, eex.p_nde_served.get_d(), trials);
        check_within_3sigma(e.extra_reads_unconditional,
                            eex.extra_reads_unconditional.get_d());
    }

    // the fair-coin mirror pair: 3/4 unconditional, 1/3 given success
    auto two = simulate(mc_config(replication{2}, 0.5, 0.0, trials, 5, 4));
    check_within_3sigma(two.extra_reads_unconditional, 0.75);
    check_within_3sigma(two.extra_reads_given_success, 1.0 / 3.0);
}
