#include "memprot/logprob.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace memprot {

logreal logreal::from_value(double v) {
    if (v < 0.0 || std::isnan(v)) throw std::domain_error("logreal: negative or NaN value");
    return logreal{std::log(v)};
}

double logreal::log10() const { return ln_ / M_LN10; }

double log1mexp(double x) {
    if (x > 0.0) throw std::domain_error("log1mexp: argument must be <= 0");
    if (x == 0.0) return -std::numeric_limits<double>::infinity();
    if (x > -M_LN2) return std::log(-std::expm1(x));
    return std::log1p(-std::exp(x));
}

logreal logreal::complement() const {
    if (ln_ > 0.0) throw std::domain_error("logreal::complement: value exceeds 1");
    return logreal{log1mexp(ln_)};
}

logreal logreal::pow(double e) const {
    if (is_zero()) return e == 0.0 ? one() : zero();
    return logreal{ln_ * e};
}

logreal operator+(logreal a, logreal b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    double hi = std::max(a.ln_, b.ln_), lo = std::min(a.ln_, b.ln_);
    return logreal{hi + std::log1p(std::exp(lo - hi))};
}

double log_choose(unsigned long n, unsigned long k) {
    if (k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
           std::lgamma(double(n - k) + 1.0);
}

logreal binomial_pmf(unsigned long k, unsigned long n, logreal p) {
    if (k > n) return logreal::zero();
    logreal q = p.complement();
    if (p.is_zero()) return k == 0 ? logreal::one() : logreal::zero();
    if (q.is_zero()) return k == n ? logreal::one() : logreal::zero();
    return logreal::from_log(log_choose(n, k) + double(k) * p.log() +
                             double(n - k) * q.log());
}

logreal binomial_tail(unsigned long n, unsigned long lo, logreal p) {
    if (lo > n) return logreal::zero();
    if (lo == 0) return logreal::one();
    if (p.is_zero()) return logreal::zero();
    if (p >= logreal::one()) return logreal::one();

    double lp = p.log(), lq = p.complement().log();
    double lcnk = log_choose(n, lo);
    // Terms are generated by the ratio recurrence from i = lo upward; the log
    // of the running maximum anchors the sum.
    double lt = lcnk + double(lo) * lp + double(n - lo) * lq;
    double lmax = lt;
    std::vector<double> lterms;
    lterms.reserve(n - lo + 1);
    lterms.push_back(lt);
    for (unsigned long i = lo + 1; i <= n; ++i) {
        lt += std::log(double(n - i + 1)) - std::log(double(i)) + lp - lq;
        lterms.push_back(lt);
        lmax = std::max(lmax, lt);
        // Terms decay geometrically once past the mode; stop when they can no
        // longer move the sum.
        if (lt < lmax - 60.0 && lt < lterms[lterms.size() - 2]) break;
    }
    double acc = 0.0;
    for (double t : lterms) acc += std::exp(t - lmax);
    return logreal::from_log(lmax + std::log(acc));
}

logreal one_minus_pow_complement(logreal p, double m) {
    if (p.is_zero() || m == 0.0) return logreal::zero();
    if (p.log() < -600.0) {
        // (1-p)^m is 1 to well past double precision; 1-(1-p)^m = m*p*(1+O(mp)).
        return logreal::from_log(std::log(m) + p.log());
    }
    double lq = p.complement().log();  // log(1-p)
    return logreal::from_log(log1mexp(m * lq));
}

}  // namespace memprot
