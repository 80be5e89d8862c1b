#include <cmath>

#include "doctest.h"
#include "memprot/model.hpp"
#include "support/rational_oracle.hpp"

using namespace memprot;
namespace oracle = memprot::oracle;

TEST_CASE("codeword length: k data bits plus t*(ceil(log2 k)+1) check bits") {
    CHECK(bch_codeword_length(2048, 0) == 2048);
    CHECK(bch_codeword_length(2048, 10) == 2048 + 10 * 12);
    CHECK(bch_codeword_length(2048, 24) == 2048 + 24 * 12);
    CHECK(bch_codeword_length(512, 18) == 512 + 18 * 10);
    CHECK(bch_codeword_length(1024, 21) == 1024 + 21 * 11);
    CHECK(bch_codeword_length(4096, 29) == 4096 + 29 * 13);
    CHECK(bch_codeword_length(2, 3) == 2 + 3 * 2);
}

TEST_CASE("cache_line_due closed form") {
    // t=0 over 8 bits: miss * (1 - (1-rber)^8)
    CHECK(cache_line_due(8, 0, 0.1).value() ==
          doctest::Approx(1.025159022e-2).epsilon(1e-12));
    // the working point at k=2048, t=10
    logreal p = cache_line_due(2048, 10, 2e-4);
    CHECK(p.value() == doctest::Approx(3.0168062537444e-14).epsilon(1e-11));
    CHECK(p.log10() == doctest::Approx(-13.5204525803227).epsilon(1e-12));
    CHECK(cache_line_due(2048, 10, 0.0).is_zero());
}

TEST_CASE("cache_line_due against the exact rational tail across strengths") {
    for (uint32_t t : {0u, 1u, 5u, 12u, 24u}) {
        logreal got = cache_line_due(2048, t, 2e-4);
        mpq_class exact =
            oracle::cache_line_due_q(2048, t, mpq_class(2e-4), mpq_class(0.018));
        CHECK(oracle::rel_err_log10(got.log10(), exact) < 1e-10);
    }
}

TEST_CASE("physical_block_rates") {
    block_failure_rates r =
        physical_block_rates(logreal::from_value(1e-3), logreal::zero(), 4096, 64);
    CHECK(r.due.value() == doctest::Approx(6.2025036174154449e-2).epsilon(1e-13));
    CHECK(r.nde.is_zero());
    // erasure-coded fragments are smaller blocks
    block_failure_rates f =
        physical_block_rates(logreal::from_value(1e-3), logreal::from_value(1e-5), 1024, 64);
    CHECK(f.due.value() == doctest::Approx(1.0 - std::pow(0.999, 16)).epsilon(1e-13));
    CHECK(f.nde.value() == doctest::Approx(1.0 - std::pow(1.0 - 1e-5, 16)).epsilon(1e-11));
}

TEST_CASE("scheme_block_bytes") {
    block_geometry geom;
    CHECK(scheme_block_bytes(replication{3}, geom) == 4096);
    CHECK(scheme_block_bytes(replication{1}, geom) == 4096);
    CHECK(scheme_block_bytes(erasure_code{4, 6}, geom) == 1024);
    CHECK_THROWS(scheme_block_bytes(erasure_code{3, 6}, geom));  // 4096 % 3 != 0
}

TEST_CASE("replication formulas at pinned points") {
    CHECK(replication_due(logreal::from_value(0.1), 3).value() ==
          doctest::Approx(1e-3).epsilon(1e-13));
    // union-style: q * sum (1-p)^i, can exceed served-probability semantics
    CHECK(replication_nde(logreal::from_value(0.1), logreal::from_value(0.01), 3).value() ==
          doctest::Approx(0.0271).epsilon(1e-13));
    CHECK(replication_nde(logreal::from_value(0.5), logreal::from_value(0.01), 2).value() ==
          doctest::Approx(1.5e-2).epsilon(1e-13));
    CHECK(replication_extra_reads(logreal::from_value(1e-3), 3) ==
          doctest::Approx(1.000997e-3).epsilon(1e-12));
    CHECK(replication_extra_reads(logreal::zero(), 3) == 0.0);
}

TEST_CASE("erasure code formulas at pinned points") {
    CHECK(ec_due(logreal::from_value(0.1), 4, 6).value() ==
          doctest::Approx(317.0 / 20000.0).epsilon(1e-13));
    CHECK(ec_nde(logreal::from_value(0.01), logreal::from_value(1e-4), 4, 6).value() ==
          doctest::Approx(4.436054482676557e-3).epsilon(1e-12));
    CHECK(ec_extra_reads(logreal::from_value(1e-3), 4, 6) ==
          doctest::Approx(55.93988012005994).epsilon(1e-12));
    CHECK(ec_extra_reads(logreal::zero(), 4, 6) == doctest::Approx(56.0).epsilon(1e-12));
}

TEST_CASE("published formulas match the exact oracle across a grid") {
    for (double p : {0.5, 0.1, 0.01, 1e-4}) {
        mpq_class pq(p);
        logreal pl = logreal::from_value(p);
        for (int n = 1; n <= 8; ++n) {
            CHECK(oracle::rel_err_log10(replication_due(pl, n).log10(),
                                        oracle::replication_due_q(pq, n)) < 1e-12);
            CHECK(oracle::rel_err_log10(
                      replication_nde(pl, logreal::from_value(1e-3), n).log10(),
                      oracle::replication_nde_q(pq, mpq_class(1e-3), n)) < 1e-12);
        }
        for (auto [k, n] : {std::pair{1, 2}, {2, 3}, {4, 6}, {2, 6}, {5, 8}}) {
            CHECK(oracle::rel_err_log10(ec_due(pl, k, n).log10(),
                                        oracle::ec_due_q(pq, k, n)) < 1e-11);
            CHECK(oracle::rel_err_log10(
                      ec_nde(pl, logreal::from_value(1e-3), k, n).log10(),
                      oracle::ec_nde_q(pq, mpq_class(1e-3), k, n)) < 1e-11);
            mpq_class ar = oracle::ec_extra_reads_q(pq, k, n);
            CHECK(ec_extra_reads(pl, k, n) == doctest::Approx(ar.get_d()).epsilon(1e-10));
        }
    }
}

TEST_CASE("evaluate dispatches and clamps") {
    block_failure_rates r;
    r.due = logreal::from_value(0.1);
    r.nde = logreal::from_value(0.01);
    reliability_report rep = evaluate(replication{3}, r);
    CHECK(rep.p_lb_due.value() == doctest::Approx(1e-3).epsilon(1e-13));
    CHECK(rep.p_lb_nde.value() == doctest::Approx(0.0271).epsilon(1e-13));
    CHECK(rep.extra_reads == doctest::Approx(0.107).epsilon(1e-13));

    reliability_report ec = evaluate(erasure_code{4, 6}, r);
    CHECK(ec.p_lb_due.value() == doctest::Approx(317.0 / 20000.0).epsilon(1e-13));

    // union sum above 1 clamps at the reporting layer
    block_failure_rates heavy;
    heavy.due = logreal::zero();
    heavy.nde = logreal::from_value(0.9);
    CHECK(evaluate(replication{3}, heavy).p_lb_nde.value() == 1.0);
}

TEST_CASE("degenerate and invalid inputs throw") {
    CHECK_THROWS(replication_due(logreal::from_value(0.1), 0));
    CHECK_THROWS(replication_extra_reads(logreal::one(), 3));
    CHECK_THROWS(ec_due(logreal::from_value(0.1), 0, 6));
    CHECK_THROWS(ec_due(logreal::from_value(0.1), 7, 6));
    CHECK_THROWS(bch_codeword_length(1, 4));
}
