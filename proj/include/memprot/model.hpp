#pragma once

#include <cstdint>
#include <variant>

#include "memprot/logprob.hpp"

namespace memprot {

// Fraction of errors that escape the fixed per-cache-line protection tier and
// must be caught by the configurable code.
inline constexpr double default_miss_factor = 0.018;

struct block_geometry {
    uint32_t cache_line_bytes = 64;
    uint32_t logical_block_bytes = 4096;
};

// Configurable per-cache-line code: k data bits, corrects up to t bit errors,
// t * (ceil(log2 k) + 1) check bits.
struct bch_config {
    uint32_t k = 2048;
    uint32_t t = 0;
};

struct block_failure_rates {
    logreal due;  // detected-uncorrectable per physical-block read
    logreal nde;  // non-detected per physical-block read
};

struct replication { int n = 3; };
struct erasure_code { int k = 4; int n = 6; };
using redundancy_scheme = std::variant<replication, erasure_code>;

struct reliability_report {
    logreal p_lb_due;
    logreal p_lb_nde;     // clamped to 1; the raw sum is union-style
    double extra_reads;   // expected reads beyond the first (or beyond K)
};

// Total codeword bits for a k-data-bit code correcting t errors.
uint64_t bch_codeword_length(uint32_t k, uint32_t t);

// Probability that a cache-line read raises a DUE: miss_factor times the
// probability of more than t raw bit errors across the codeword.
logreal cache_line_due(uint32_t k, uint32_t t, double rber,
                       double miss_factor = default_miss_factor);

// Lift per-cache-line rates to a physical block of the given size:
// p_pb = 1 - (1 - p_c)^(block_bytes / cache_line_bytes).
block_failure_rates physical_block_rates(logreal p_c_due, logreal p_c_nde,
                                         uint32_t physical_block_bytes,
                                         uint32_t cache_line_bytes);

// Physical block size for a scheme over the logical block: replication ships
// whole copies, erasure coding splits the block into K fragments. Rejects
// geometry that does not divide evenly.
uint32_t scheme_block_bytes(const redundancy_scheme& s, const block_geometry& g);

logreal binomial_pmf_real(unsigned long k, unsigned long n, logreal p);

// Replication over n copies, sequential reads until one is not DUE.
logreal replication_due(logreal p_pb_due, int n);
// Union-style sum over copies as published; can exceed 1 at extreme inputs.
logreal replication_nde(logreal p_pb_due, logreal p_pb_nde, int n);
// Expected reads over success-terminating prefixes minus one. Rejects p = 1.
double replication_extra_reads(logreal p_pb_due, int n);

// Erasure code: logical block readable from any K of N fragments.
logreal ec_due(logreal p_pb_due, int k, int n);
// Published closed form, implemented verbatim; the leading binomial factor
// makes this a weighted sum rather than a plain probability.
logreal ec_nde(logreal p_pb_due, logreal p_pb_nde, int k, int n);
double ec_extra_reads(logreal p_pb_due, int k, int n);

// Scheme dispatch over the per-physical-block rates.
reliability_report evaluate(const redundancy_scheme& s, const block_failure_rates& r);

}  // namespace memprot
