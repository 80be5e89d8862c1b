#include "support/rational_oracle.hpp"

#include <mpfr.h>

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace memprot::oracle {

mpq_class choose_q(unsigned long n, unsigned long k) {
    if (k > n) return 0;
    mpz_class c;
    mpz_bin_uiui(c.get_mpz_t(), n, k);
    return mpq_class(c);
}

mpq_class pow_q(const mpq_class& base, unsigned long e) {
    mpq_class r = 1;
    mpq_class b = base;
    while (e) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

mpq_class binomial_tail_q(unsigned long n, unsigned long lo, const mpq_class& p) {
    if (lo > n) return 0;
    mpq_class one_m = 1 - p;
    // running C(n,i), p^i, (1-p)^(n-i); all updates exact
    mpz_class c = 1;
    for (unsigned long j = 1; j <= lo; ++j) {
        c *= (n - j + 1);
        c /= j;
    }
    mpq_class p_pow = pow_q(p, lo);
    mpq_class q_pow = pow_q(one_m, n - lo);
    mpq_class sum = 0;
    for (unsigned long i = lo; i <= n; ++i) {
        sum += mpq_class(c) * p_pow * q_pow;
        if (i == n) break;
        c *= (n - i);
        c /= (i + 1);
        p_pow *= p;
        if (one_m == 0) {
            // (1-p)^(n-i-1) stays zero until the i == n term, which needs
            // exponent zero; restart the power explicitly
            q_pow = (i + 1 == n) ? mpq_class(1) : mpq_class(0);
        } else {
            q_pow /= one_m;
        }
    }
    sum.canonicalize();
    return sum;
}

mpq_class replication_due_q(const mpq_class& p, int n) {
    if (n < 1) throw std::invalid_argument("replication_due_q: n >= 1");
    return pow_q(p, static_cast<unsigned long>(n));
}

mpq_class replication_nde_q(const mpq_class& p, const mpq_class& q, int n) {
    if (n < 1) throw std::invalid_argument("replication_nde_q: n >= 1");
    mpq_class sum = 0;
    mpq_class pw = 1;
    for (int i = 0; i < n; ++i) {
        sum += pw * q;
        pw *= (1 - p);
    }
    sum.canonicalize();
    return sum;
}

mpq_class replication_extra_reads_q(const mpq_class& p, int n) {
    if (n < 1) throw std::invalid_argument("replication_extra_reads_q: n >= 1");
    if (p == 1) throw std::invalid_argument("replication_extra_reads_q: p = 1 is degenerate");
    unsigned long un = static_cast<unsigned long>(n);
    mpq_class pn = pow_q(p, un);
    mpq_class num = p - mpq_class(n + 1) * pn + mpq_class(n) * pn * p;
    mpq_class r = num / (1 - p);
    r.canonicalize();
    return r;
}

mpq_class ec_due_q(const mpq_class& p, int k, int n) {
    if (k < 1 || n < k) throw std::invalid_argument("ec_due_q: need 1 <= k <= n");
    return binomial_tail_q(static_cast<unsigned long>(n),
                           static_cast<unsigned long>(n - k + 1), p);
}

// layout sum shared by the nde and extra-read forms:
// sum_{i=0}^{n-k} C(n,k+i) C(k+i-1,i) p^i (1-p)^(k-1) * w(k+i)
static mpq_class ec_layout_sum_q(const mpq_class& p, int k, int n, bool weight_reads) {
    mpq_class base = pow_q(1 - p, static_cast<unsigned long>(k - 1));
    mpq_class sum = 0;
    for (int i = 0; i <= n - k; ++i) {
        mpq_class term = choose_q(n, k + i) * choose_q(k + i - 1, i) *
                         pow_q(p, static_cast<unsigned long>(i)) * base;
        if (weight_reads) term *= (k + i);
        sum += term;
    }
    sum.canonicalize();
    return sum;
}

mpq_class ec_nde_q(const mpq_class& p, const mpq_class& q, int k, int n) {
    if (k < 1 || n < k) throw std::invalid_argument("ec_nde_q: need 1 <= k <= n");
    mpq_class tail = binomial_tail_q(static_cast<unsigned long>(k - 1), 1, q);
    return ec_layout_sum_q(p, k, n, false) * tail;
}

mpq_class ec_extra_reads_q(const mpq_class& p, int k, int n) {
    if (k < 1 || n < k) throw std::invalid_argument("ec_extra_reads_q: need 1 <= k <= n");
    mpq_class r = ec_layout_sum_q(p, k, n, true) - k;
    r.canonicalize();
    return r;
}

mpq_class cache_line_due_q(uint32_t k, uint32_t t, const mpq_class& rber, const mpq_class& miss) {
    if (k < 2) throw std::invalid_argument("cache_line_due_q: k >= 2");
    unsigned long check_per_t = std::bit_width(k - 1) + 1u;
    unsigned long nbits = k + static_cast<unsigned long>(t) * check_per_t;
    return miss * binomial_tail_q(nbits, t + 1, rber);
}

mpq_class block_from_line_q(const mpq_class& p_c, unsigned long m) {
    mpq_class r = 1 - pow_q(1 - p_c, m);
    r.canonicalize();
    return r;
}

double log10_q(const mpq_class& v) {
    if (v == 0) return -std::numeric_limits<double>::infinity();
    if (v < 0) throw std::invalid_argument("log10_q: negative value");
    mpfr_t x;
    mpfr_init2(x, 256);
    mpfr_set_q(x, v.get_mpq_t(), MPFR_RNDN);
    mpfr_log10(x, x, MPFR_RNDN);
    double r = mpfr_get_d(x, MPFR_RNDN);
    mpfr_clear(x);
    return r;
}

double rel_err_log10(double pipeline_log10, const mpq_class& exact) {
    bool p_zero = pipeline_log10 == -std::numeric_limits<double>::infinity();
    bool e_zero = exact == 0;
    if (p_zero && e_zero) return 0.0;
    if (p_zero != e_zero) return std::numeric_limits<double>::infinity();
    double delta = pipeline_log10 - log10_q(exact);
    return std::fabs(std::pow(10.0, delta) - 1.0);
}

}  // namespace memprot::oracle
