#include "memprot/model.hpp"

#include <bit>
#include <stdexcept>

namespace memprot {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

// i * log(x) with the 0 * -inf convention resolved to 0.
double scaled_log(double i, double lx) { return i == 0.0 ? 0.0 : i * lx; }

}  // namespace

uint64_t bch_codeword_length(uint32_t k, uint32_t t) {
    require(k >= 2, "bch_codeword_length: k must be >= 2");
    uint32_t ceil_log2 = std::bit_width(k - 1u);
    return uint64_t(k) + uint64_t(t) * (ceil_log2 + 1u);
}

logreal cache_line_due(uint32_t k, uint32_t t, double rber, double miss_factor) {
    require(rber >= 0.0 && rber <= 1.0, "cache_line_due: rber outside [0,1]");
    require(miss_factor >= 0.0 && miss_factor <= 1.0, "cache_line_due: miss_factor outside [0,1]");
    uint64_t n = bch_codeword_length(k, t);
    logreal tail = binomial_tail(n, uint64_t(t) + 1, logreal::from_value(rber));
    return logreal::from_value(miss_factor) * tail;
}

block_failure_rates physical_block_rates(logreal p_c_due, logreal p_c_nde,
                                         uint32_t physical_block_bytes,
                                         uint32_t cache_line_bytes) {
    require(cache_line_bytes > 0 && physical_block_bytes % cache_line_bytes == 0,
            "physical_block_rates: block size not a multiple of the cache line");
    double m = double(physical_block_bytes / cache_line_bytes);
    require(m >= 1.0, "physical_block_rates: block smaller than a cache line");
    return {one_minus_pow_complement(p_c_due, m), one_minus_pow_complement(p_c_nde, m)};
}

uint32_t scheme_block_bytes(const redundancy_scheme& s, const block_geometry& g) {
    if (const auto* ec = std::get_if<erasure_code>(&s)) {
        require(ec->k >= 1 && g.logical_block_bytes % uint32_t(ec->k) == 0,
                "scheme_block_bytes: logical block not divisible into K fragments");
        return g.logical_block_bytes / uint32_t(ec->k);
    }
    return g.logical_block_bytes;
}

logreal binomial_pmf_real(unsigned long k, unsigned long n, logreal p) {
    return binomial_pmf(k, n, p);
}

logreal replication_due(logreal p_pb_due, int n) {
    require(n >= 1, "replication_due: n must be >= 1");
    return p_pb_due.pow(double(n));
}

logreal replication_nde(logreal p_pb_due, logreal p_pb_nde, int n) {
    require(n >= 1, "replication_nde: n must be >= 1");
    if (p_pb_nde.is_zero()) return logreal::zero();
    logreal q = p_pb_due.complement();  // per-copy survival of the DUE check
    logreal sum = logreal::zero();
    for (int i = 0; i < n; ++i) sum = sum + q.pow(double(i)) * p_pb_nde;
    return sum;
}

double replication_extra_reads(logreal p_pb_due, int n) {
    require(n >= 1, "replication_extra_reads: n must be >= 1");
    require(p_pb_due < logreal::one(), "replication_extra_reads: p = 1 is degenerate");
    double p = p_pb_due.value();
    // Closed form of -1 + sum_{i<n} p^i (1-p) (i+1); the direct sum cancels
    // catastrophically against the -1 at small p.
    double pn = p_pb_due.pow(double(n)).value();
    return (p - (n + 1) * pn + n * pn * p) / (1.0 - p);
}

logreal ec_due(logreal p_pb_due, int k, int n) {
    require(k >= 1 && n >= k, "ec_due: need 1 <= K <= N");
    return binomial_tail(uint64_t(n), uint64_t(n - k) + 1, p_pb_due);
}

namespace {

// Sum over surviving-read layouts common to ec_nde and ec_extra_reads:
// sum_{i=0}^{N-K} C(N, K+i) * C(K+i-1, i) * p^i * (1-p)^(K-1) * w(i).
logreal ec_layout_sum(logreal p, int k, int n, double (*weight)(int, int)) {
    double lq = 0.0;
    if (k > 1) {
        if (p >= logreal::one()) return logreal::zero();  // (1-p)^(K-1) = 0
        lq = p.complement().log();
    }
    logreal sum = logreal::zero();
    for (int i = 0; i + k <= n; ++i) {
        if (i > 0 && p.is_zero()) break;
        double lt = log_choose(n, k + i) + log_choose(k + i - 1, i) +
                    scaled_log(double(i), p.log()) + scaled_log(double(k - 1), lq) +
                    std::log(weight(i, k));
        sum = sum + logreal::from_log(lt);
    }
    return sum;
}

double unit_weight(int, int) { return 1.0; }
double reads_weight(int i, int k) { return double(k + i); }

}  // namespace

logreal ec_nde(logreal p_pb_due, logreal p_pb_nde, int k, int n) {
    require(k >= 1 && n >= k, "ec_nde: need 1 <= K <= N");
    // Second factor is the published sum over j = 1..K-1 NDE fragments.
    logreal nde_part = binomial_tail(uint64_t(k) - 1, 1, p_pb_nde);
    if (nde_part.is_zero()) return logreal::zero();
    return ec_layout_sum(p_pb_due, k, n, unit_weight) * nde_part;
}

double ec_extra_reads(logreal p_pb_due, int k, int n) {
    require(k >= 1 && n >= k, "ec_extra_reads: need 1 <= K <= N");
    if (k > 1 && p_pb_due >= logreal::one()) return double(-k);
    return ec_layout_sum(p_pb_due, k, n, reads_weight).value() - double(k);
}

reliability_report evaluate(const redundancy_scheme& s, const block_failure_rates& r) {
    reliability_report rep;
    if (const auto* ec = std::get_if<erasure_code>(&s)) {
        rep.p_lb_due = ec_due(r.due, ec->k, ec->n);
        rep.p_lb_nde = ec_nde(r.due, r.nde, ec->k, ec->n);
        rep.extra_reads = ec_extra_reads(r.due, ec->k, ec->n);
    } else {
        int n = std::get<replication>(s).n;
        rep.p_lb_due = replication_due(r.due, n);
        rep.p_lb_nde = replication_nde(r.due, r.nde, n);
        rep.extra_reads = replication_extra_reads(r.due, n);
    }
    // The published NDE sums are union-style and may pass 1; the report caps
    // at probability range.
    if (rep.p_lb_nde > logreal::one()) rep.p_lb_nde = logreal::one();
    return rep;
}

}  // namespace memprot
