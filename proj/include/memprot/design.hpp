#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "memprot/model.hpp"

namespace memprot {

struct design_spec {
    logreal target_lb_due;
    std::optional<logreal> target_lb_nde;
    redundancy_scheme scheme = replication{1};
    double rber = 2e-4;
    uint32_t k = 2048;
    block_geometry geom;
    double fixed_tier_overhead = 0.125;  // 8B opportunistic parity per 64B line
    double fixed_tier_miss = default_miss_factor;
    logreal p_c_nde = logreal::zero();  // synthetic per-cache-line silent rate
    uint32_t t_max = 128;
};

struct design_result {
    uint32_t t_star = 0;
    bch_config bch;
    double storage_overhead = 0.0;
    reliability_report report;
    // p_lb_due one step weaker (t_star - 1); absent when t_star == 0. Kept as
    // the minimality witness: it must exceed the target.
    std::optional<logreal> witness_below;
};

// No t <= t_max meets the target. `constraint` names which bound: "due", or
// "nde" when the DUE target was reachable but the silent-error floor was not
// (stronger codes do not lower it).
struct unachievable_error : std::runtime_error {
    unachievable_error(uint32_t cap, std::string which);
    uint32_t t_max;
    std::string constraint;
};

// Protection bits relative to data bits: fixed tier plus (n - k)/k for the
// configurable code. Replication-factor cost is deliberately not counted; the
// baseline convention compares against the same replication scheme without
// per-replica protection.
double storage_overhead(const bch_config& bch, double fixed_tier_overhead);

// Reliability of one candidate correction strength under the requested scheme.
reliability_report evaluate_design(const design_spec& spec, uint32_t t);

// Smallest t whose logical-block DUE meets the target (and NDE target when
// set). Linear scan; p_lb_due is monotone non-increasing in t.
design_result minimize_t(const design_spec& spec);

struct due_sweep_row {
    std::string scheme;
    uint32_t t;
    double overhead;
    logreal p_lb_due;
    logreal p_lb_nde;
};

// One row per t per scheme, schemes fixed to the three reference points:
// single replica, 3-way replication, 4-of-6 erasure coding.
std::vector<due_sweep_row> sweep_due_vs_overhead(const design_spec& spec,
                                                 uint32_t t_lo, uint32_t t_hi);

struct replica_sweep_row {
    int n;
    uint32_t t_star;
    double overhead;
    logreal p_lb_due;
};

// minimize_t at the same target for replication factors n_lo..n_hi.
std::vector<replica_sweep_row> sweep_overhead_vs_replicas(const design_spec& spec,
                                                          int n_lo, int n_hi);

struct rber_sweep_row {
    double rber;
    uint32_t t_star_single;
    double overhead_single;
    uint32_t t_star_redundant;
    double overhead_redundant;
    double savings;  // overhead_single - overhead_redundant
};

// Per RBER: single replica vs the requested redundant scheme at the same target.
std::vector<rber_sweep_row> sweep_overhead_vs_rber(const design_spec& spec,
                                                   const std::vector<double>& rber_list);

}  // namespace memprot
