#include "memprot/enumerate.hpp"

#include <bit>
#include <cctype>
#include <stdexcept>
#include <vector>

namespace memprot {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

mpz_class pow10_z(unsigned long e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
    return r;
}

}  // namespace

mpq_class parse_rational(const std::string& text) {
    require(!text.empty(), "parse_rational: empty input");
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        mpz_class num(text.substr(0, slash));
        mpz_class den(text.substr(slash + 1));
        require(den != 0, "parse_rational: zero denominator");
        mpq_class r(num, den);
        r.canonicalize();
        return r;
    }

    size_t i = 0, n = text.size();
    bool neg = false;
    if (text[i] == '+' || text[i] == '-') neg = text[i++] == '-';
    std::string digits;
    long frac_digits = 0;
    bool any = false;
    while (i < n && std::isdigit((unsigned char)text[i])) digits += text[i++], any = true;
    if (i < n && text[i] == '.') {
        ++i;
        while (i < n && std::isdigit((unsigned char)text[i]))
            digits += text[i++], ++frac_digits, any = true;
    }
    require(any, "parse_rational: no digits");
    long exp10 = 0;
    if (i < n && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        bool eneg = false;
        if (i < n && (text[i] == '+' || text[i] == '-')) eneg = text[i++] == '-';
        bool edigit = false;
        while (i < n && std::isdigit((unsigned char)text[i])) {
            exp10 = exp10 * 10 + (text[i++] - '0');
            require(exp10 <= 1000000, "parse_rational: exponent out of range");
            edigit = true;
        }
        require(edigit, "parse_rational: empty exponent");
        if (eneg) exp10 = -exp10;
    }
    require(i == n, "parse_rational: trailing characters");

    exp10 -= frac_digits;
    mpz_class num(digits.empty() ? std::string("0") : digits);
    if (neg) num = -num;
    mpq_class r(num);
    if (exp10 > 0)
        r *= mpq_class(pow10_z(exp10));
    else if (exp10 < 0)
        r /= mpq_class(pow10_z(-exp10));
    r.canonicalize();
    return r;
}

exact_report enumerate_exact(const redundancy_scheme& scheme, const mpq_class& p,
                             const mpq_class& q) {
    int n, k;
    bool is_rep;
    if (const auto* ec = std::get_if<erasure_code>(&scheme)) {
        require(ec->k >= 1 && ec->n >= ec->k, "enumerate_exact: need 1 <= K <= N");
        k = ec->k;
        n = ec->n;
        is_rep = false;
    } else {
        n = std::get<replication>(scheme).n;
        require(n >= 1, "enumerate_exact: need N >= 1");
        k = 1;
        is_rep = true;
    }
    require(n <= 20, "enumerate_exact: N must be <= 20 (2^N patterns)");
    require(p >= 0 && q >= 0 && p + q <= 1,
            "enumerate_exact: need p, q >= 0 with p + q <= 1");

    // Everything is integer arithmetic over the common denominator D: the DUE
    // weight of a pattern with a DUE blocks is A^a * (D-A)^(n-a) over D^n.
    mpz_class D;
    mpz_lcm(D.get_mpz_t(), p.get_den_mpz_t(), q.get_den_mpz_t());
    mpz_class A = p.get_num() * (D / p.get_den());
    mpz_class B = q.get_num() * (D / q.get_den());
    mpz_class C = D - A;

    std::vector<mpz_class> pow_a(n + 1), pow_c(n + 1);
    pow_a[0] = 1;
    pow_c[0] = 1;
    for (int i = 1; i <= n; ++i) {
        pow_a[i] = pow_a[i - 1] * A;
        pow_c[i] = pow_c[i - 1] * C;
    }
    // Served-NDE factor per success pattern is 1 - (1 - q/(1-p))^K, which over
    // the common denominator is (C^K - (C-B)^K) / C^K; the C^K cancels against
    // K clear-block factors of the pattern weight.
    mpz_class cb = C - B, cbk;
    mpz_pow_ui(cbk.get_mpz_t(), cb.get_mpz_t(), k);
    mpz_class served_factor = pow_c[k] - cbk;

    mpz_class due_acc = 0, succ_acc = 0, extra_unc_acc = 0, extra_succ_acc = 0,
              served_acc = 0, union_acc = 0;

    for (uint32_t mask = 0; mask < (uint32_t(1) << n); ++mask) {
        int a = std::popcount(mask);  // bit set = that block reads as DUE
        int c = n - a;
        mpz_class w = pow_a[a] * pow_c[c];

        int pos = -1, clear = 0;
        for (int i = 0; i < n; ++i) {
            if (!(mask >> i & 1) && ++clear == k) {
                pos = i;
                break;
            }
        }
        if (pos >= 0) {
            long extra = pos + 1 - k;  // reads beyond the clean-pass cost
            succ_acc += w;
            if (extra) {
                extra_succ_acc += w * extra;
                extra_unc_acc += w * extra;
            }
            served_acc += pow_a[a] * pow_c[c - k] * served_factor;
        } else {
            due_acc += w;
            extra_unc_acc += w * n;  // every block was tried, nothing served
        }
        if (is_rep) {
            // The published union-style sum revisits each prefix of clear
            // blocks; pattern multiplicity is the capped leading clear run.
            int run = mask == 0 ? n : std::countr_zero(mask);
            union_acc += w * (std::min(run, n - 1) + 1);
        }
    }

    mpz_class dn;
    mpz_pow_ui(dn.get_mpz_t(), D.get_mpz_t(), n);

    auto ratio = [](const mpz_class& num, const mpz_class& den) {
        mpq_class r(num, den);
        r.canonicalize();
        return r;
    };

    exact_report rep;
    rep.p_due = ratio(due_acc, dn);
    rep.p_nde_served = ratio(served_acc, dn);
    rep.p_nde_union = is_rep ? ratio(union_acc * B, dn * D) : rep.p_nde_served;
    rep.extra_reads_unconditional = ratio(extra_unc_acc, dn);
    rep.extra_reads_given_success = succ_acc > 0 ? ratio(extra_succ_acc, succ_acc) : mpq_class(0);
    return rep;
}

}  // namespace memprot
