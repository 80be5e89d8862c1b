#pragma once

#include <cmath>
#include <limits>

namespace memprot {

// Non-negative real carried as its natural log. Failure probabilities in this
// code base span ~1e-1 down to ~1e-400, far past double underflow, so every
// derived probability is kept in log space end to end; value() is only for
// display and for quantities known to be representable.
//
// Zero is encoded as -inf. Values above 1 are allowed: a couple of the
// published formulas are union-style sums that can exceed probability range
// at extreme inputs, and clamping happens at the reporting layer, not here.
class logreal {
  public:
    constexpr logreal() = default;

    static logreal zero() { return logreal{-std::numeric_limits<double>::infinity()}; }
    static logreal one() { return logreal{0.0}; }

    static logreal from_value(double v);
    static logreal from_log(double l) { return logreal{l}; }

    double log() const { return ln_; }
    double log10() const;
    // Underflows to 0.0 below ~1e-308; callers that care use log()/log10().
    double value() const { return std::exp(ln_); }

    bool is_zero() const { return std::isinf(ln_) && ln_ < 0; }

    // 1 - x; requires x <= 1.
    logreal complement() const;
    logreal pow(double e) const;

    friend logreal operator*(logreal a, logreal b) { return logreal{a.ln_ + b.ln_}; }
    friend logreal operator/(logreal a, logreal b) { return logreal{a.ln_ - b.ln_}; }
    // Sum of two non-negative reals (log-sum-exp).
    friend logreal operator+(logreal a, logreal b);
    friend bool operator<(logreal a, logreal b) { return a.ln_ < b.ln_; }
    friend bool operator<=(logreal a, logreal b) { return a.ln_ <= b.ln_; }
    friend bool operator>(logreal a, logreal b) { return a.ln_ > b.ln_; }
    friend bool operator>=(logreal a, logreal b) { return a.ln_ >= b.ln_; }

  private:
    explicit constexpr logreal(double ln) : ln_(ln) {}
    double ln_ = -std::numeric_limits<double>::infinity();
};

// log(1 - e^x) for x <= 0. Splits at -ln2 so both expm1 and log1p run in
// their well-conditioned half.
double log1mexp(double x);

// log of C(n, k); exact-ish via lgamma, relative log error a few ulp even at
// n ~ 1e6.
double log_choose(unsigned long n, unsigned long k);

// Upper binomial tail P[X >= lo] for X ~ Bin(n, p), summed with a stable
// log-sum-exp. Exact 0/1 edges (lo > n, lo == 0, p in {0,1}) short-circuit.
logreal binomial_tail(unsigned long n, unsigned long lo, logreal p);

// C(n,k) p^k (1-p)^(n-k).
logreal binomial_pmf(unsigned long k, unsigned long n, logreal p);

// 1 - (1 - p)^m. For p below double range the first-order series takes over;
// the dropped second-order term is < m*p/2 relative, vanishing there.
logreal one_minus_pow_complement(logreal p, double m);

}  // namespace memprot
