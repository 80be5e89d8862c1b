#include "memprot/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "memprot/philox.hpp"

namespace memprot {

namespace {

// All aggregation is integer so that worker partitioning cannot perturb the
// result: sums of integers are exact and order-insensitive.
struct tally {
    uint64_t due = 0;
    uint64_t nde = 0;
    uint64_t reads = 0;
    uint64_t reads_sq = 0;
    uint64_t reads_succ = 0;
    uint64_t reads_succ_sq = 0;

    tally& operator+=(const tally& o) {
        due += o.due;
        nde += o.nde;
        reads += o.reads;
        reads_sq += o.reads_sq;
        reads_succ += o.reads_succ;
        reads_succ_sq += o.reads_succ_sq;
        return *this;
    }
};

struct sampled_rates {
    double p_due;
    double p_nde;
};

sampled_rates check(const trial_config& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("trial_config: trials must be >= 1");
    double p = cfg.rates.due.value();
    double q = cfg.rates.nde.value();
    if (!(p >= 0.0) || !(q >= 0.0) || p > 1.0 || q > 1.0 || p + q > 1.0)
        throw std::invalid_argument("trial_config: need p_due, p_nde >= 0 with p_due + p_nde <= 1");
    return {p, q};
}

// Draw i of a trial: lane i%4 of the philox block at counter {trial, i/4}.
class trial_draws {
  public:
    trial_draws(const philox4x64& gen, uint64_t trial) : gen_(gen), trial_(trial) {}

    double operator()(uint32_t i) {
        uint64_t chunk = i >> 2;
        if (chunk != chunk_ || !have_) {
            block_ = gen_({trial_, chunk, 0, 0});
            chunk_ = chunk;
            have_ = true;
        }
        return u64_to_unit(block_[i & 3]);
    }

  private:
    const philox4x64& gen_;
    uint64_t trial_;
    philox4x64::block block_{};
    uint64_t chunk_ = 0;
    bool have_ = false;
};

template <typename TrialFn>
tally run_trials(const trial_config& cfg, TrialFn&& trial_fn) {
    unsigned workers = std::max(1u, cfg.workers);
    workers = unsigned(std::min<uint64_t>(workers, cfg.trials));
    philox4x64 gen(cfg.seed, 0);

    std::vector<tally> parts(workers);
    auto span = [&](unsigned w) {
        uint64_t per = cfg.trials / workers, rem = cfg.trials % workers;
        uint64_t lo = w * per + std::min<uint64_t>(w, rem);
        return std::pair<uint64_t, uint64_t>{lo, lo + per + (w < rem ? 1 : 0)};
    };
    auto body = [&](unsigned w) {
        tally t;
        auto [lo, hi] = span(w);
        for (uint64_t i = lo; i < hi; ++i) {
            trial_draws draws(gen, i);
            trial_fn(draws, t);
        }
        parts[w] = t;
    };
    if (workers == 1) {
        body(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
        for (auto& th : pool) th.join();
    }
    tally total;
    for (const auto& p : parts) total += p;
    return total;
}

estimate proportion_estimate(uint64_t hits, uint64_t n) {
    double p = double(hits) / double(n);
    return {p, 1.96 * std::sqrt(p * (1.0 - p) / double(n))};
}

// Mean and CI95 of per-trial values known only through their sum and sum of
// squares (exact integers).
estimate mean_estimate(double sum, double sum_sq, uint64_t n) {
    if (n == 0) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
    double mean = sum / double(n);
    if (n == 1) return {mean, 0.0};
    double var = std::max(0.0, (sum_sq - double(n) * mean * mean) / double(n - 1));
    return {mean, 1.96 * std::sqrt(var / double(n))};
}

// base_reads: what a clean pass costs (1 read, or K fragments).
trial_report summarize(const trial_config& cfg, const tally& t, uint64_t base_reads) {
    uint64_t n = cfg.trials;
    uint64_t succ = n - t.due;
    trial_report rep;
    rep.p_lb_due = proportion_estimate(t.due, n);
    rep.p_lb_nde = proportion_estimate(t.nde, n);

    // extra_x = reads_x - base * success_x, so the moments follow from the
    // integer sums: sum x = reads - base*succ, sum x^2 over successes shifts
    // by 2*base*reads_succ - base^2*succ. Failed trials contribute their full
    // read count to the unconditional tally.
    double b = double(base_reads);
    double sum_uncond = double(t.reads) - b * double(succ);
    double sq_uncond = double(t.reads_sq) - 2.0 * b * double(t.reads_succ) +
                       b * b * double(succ);
    rep.extra_reads_unconditional = mean_estimate(sum_uncond, sq_uncond, n);

    double sum_succ = double(t.reads_succ) - b * double(succ);
    double sq_succ = double(t.reads_succ_sq) - 2.0 * b * double(t.reads_succ) +
                     b * b * double(succ);
    rep.extra_reads_given_success = mean_estimate(sum_succ, sq_succ, succ);

    rep.trials = n;
    rep.seed = cfg.seed;
    return rep;
}

}  // namespace

trial_report simulate_replication(const trial_config& cfg) {
    const auto* rep = std::get_if<replication>(&cfg.scheme);
    if (!rep || rep->n < 1)
        throw std::invalid_argument("simulate_replication: scheme must be replication with n >= 1");
    auto [p, q] = check(cfg);
    int n = rep->n;

    tally t = run_trials(cfg, [&](trial_draws& draws, tally& acc) {
        uint64_t r = 0;
        bool success = false, silent = false;
        for (int i = 0; i < n; ++i) {
            double u = draws(uint32_t(i));
            r = uint64_t(i) + 1;
            if (u < p) continue;  // DUE, try the next copy
            success = true;
            silent = u < p + q;
            break;
        }
        acc.reads += r;
        acc.reads_sq += r * r;
        if (success) {
            acc.reads_succ += r;
            acc.reads_succ_sq += r * r;
            if (silent) acc.nde += 1;
        } else {
            acc.due += 1;
        }
    });
    return summarize(cfg, t, 1);
}

trial_report simulate_ec(const trial_config& cfg) {
    const auto* ec = std::get_if<erasure_code>(&cfg.scheme);
    if (!ec || ec->k < 1 || ec->n < ec->k)
        throw std::invalid_argument("simulate_ec: scheme must be erasure_code with 1 <= k <= n");
    auto [p, q] = check(cfg);
    int k = ec->k, n = ec->n;

    // Fixed strategy: issue K fragment reads, replace each DUE with an untried
    // fragment until K are in hand or fragments run out. Walking fragments in
    // index order and stopping at the K-th readable one is equivalent.
    tally t = run_trials(cfg, [&](trial_draws& draws, tally& acc) {
        int readable = 0;
        uint64_t r = 0;
        bool silent = false;
        for (int i = 0; i < n; ++i) {
            double u = draws(uint32_t(i));
            r = uint64_t(i) + 1;
            if (u < p) continue;  // fragment DUE
            if (u < p + q) silent = true;
            if (++readable == k) break;
        }
        bool success = readable >= k;
        if (success) r = std::max<uint64_t>(r, uint64_t(k));
        acc.reads += r;
        acc.reads_sq += r * r;
        if (success) {
            acc.reads_succ += r;
            acc.reads_succ_sq += r * r;
            if (silent) acc.nde += 1;
        } else {
            acc.due += 1;
        }
    });
    return summarize(cfg, t, uint64_t(k));
}

trial_report simulate(const trial_config& cfg) {
    if (std::holds_alternative<erasure_code>(cfg.scheme)) return simulate_ec(cfg);
    return simulate_replication(cfg);
}

namespace {

double choose_d(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (int i = 0; i < k; ++i) c = c * double(n - i) / double(i + 1);
    return c;
}

// P(Bin(n, s) <= hi)
double binom_cdf(int n, int hi, double s) {
    double acc = 0.0;
    for (int j = 0; j <= hi && j <= n; ++j)
        acc += choose_d(n, j) * std::pow(s, j) * std::pow(1.0 - s, n - j);
    return acc;
}

}  // namespace

protocol_expectations protocol_values(const redundancy_scheme& scheme, double p, double q) {
    if (!(p >= 0.0) || !(q >= 0.0) || p + q > 1.0)
        throw std::invalid_argument("protocol_values: need p, q >= 0 and p + q <= 1");
    protocol_expectations out;
    if (const auto* rep = std::get_if<replication>(&scheme)) {
        int n = rep->n;
        if (n < 1) throw std::invalid_argument("protocol_values: replication n >= 1");
        double reads = 0.0, nde = 0.0, succ_weighted = 0.0, pi = 1.0;
        for (int i = 0; i < n; ++i) {
            reads += pi;                            // P(reads > i) = p^i
            nde += pi * q;                          // silent block served at replica i
            succ_weighted += double(i) * pi * (1.0 - p);
            pi *= p;
        }
        out.p_due = pi;
        out.p_nde = nde;
        double p_succ = 1.0 - pi;
        out.extra_reads_unconditional = reads - p_succ;
        out.extra_reads_given_success =
            p_succ > 0.0 ? succ_weighted / p_succ : std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    const auto& ec = std::get<erasure_code>(scheme);
    int k = ec.k, n = ec.n;
    if (k < 1 || n < k) throw std::invalid_argument("protocol_values: need 1 <= k <= n");
    out.p_due = binom_cdf(n, k - 1, 1.0 - p);  // fewer than k readable fragments
    double p_succ = 1.0 - out.p_due;
    double qc = p < 1.0 ? q / (1.0 - p) : 0.0;  // silent given readable
    out.p_nde = p_succ > 0.0 ? p_succ * (1.0 - std::pow(1.0 - qc, k)) : 0.0;
    double reads = 0.0;
    for (int j = 0; j < n; ++j) reads += binom_cdf(j, k - 1, 1.0 - p);
    double reads_succ = 0.0;  // k-th readable fragment lands on draw r
    for (int r = k; r <= n; ++r)
        reads_succ += double(r) * choose_d(r - 1, k - 1) * std::pow(1.0 - p, k) * std::pow(p, r - k);
    out.extra_reads_unconditional = reads - double(k) * p_succ;
    out.extra_reads_given_success =
        p_succ > 0.0 ? (reads_succ - double(k) * p_succ) / p_succ
                     : std::numeric_limits<double>::quiet_NaN();
    return out;
}

}  // namespace memprot
