#pragma once

#include <gmpxx.h>

#include <string>

#include "memprot/model.hpp"

namespace memprot {

// Exhaustive expectation over all 2^N per-block DUE patterns in exact
// rational arithmetic; NDE outcomes are folded in analytically per pattern
// (each non-DUE block is silently corrupt with conditional probability
// q/(1-p), independently). This is the ground-truth oracle the analytical
// formulas and the Monte Carlo sampler are judged against.
struct exact_report {
    mpq_class p_due;
    // The published replication NDE sum counts silent errors union-style
    // across reachable prefixes and is reproduced here term for term; for
    // erasure codes no such published decomposition exists and this field
    // equals p_nde_served.
    mpq_class p_nde_union;
    // Probability the block actually handed back carries a silent error.
    mpq_class p_nde_served;
    // E[reads - cleanpass * 1{success}] where a clean pass costs 1 read
    // (replication) or K fragment reads (erasure coding).
    mpq_class extra_reads_unconditional;
    mpq_class extra_reads_given_success;  // 0 when no pattern succeeds
};

// Decimal ("0.1", "2e-4", "-1.5e2"), integer, or "num/den" text to an exact
// rational. Throws std::invalid_argument on anything else.
mpq_class parse_rational(const std::string& text);

// Requires 0 <= p, q and p + q <= 1, and N <= 20.
exact_report enumerate_exact(const redundancy_scheme& scheme, const mpq_class& p_due,
                             const mpq_class& p_nde);

}  // namespace memprot
