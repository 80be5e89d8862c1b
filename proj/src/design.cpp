#include "memprot/design.hpp"

#include <utility>

namespace memprot {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

void validate(const design_spec& spec) {
    require(spec.target_lb_due > logreal::zero() && spec.target_lb_due < logreal::one(),
            "design_spec: target_lb_due must be in (0,1)");
    if (spec.target_lb_nde)
        require(*spec.target_lb_nde > logreal::zero() && *spec.target_lb_nde < logreal::one(),
                "design_spec: target_lb_nde must be in (0,1)");
    require(spec.k >= 2, "design_spec: k must be >= 2");
    require(spec.fixed_tier_overhead >= 0.0, "design_spec: fixed_tier_overhead must be >= 0");
}

}  // namespace

unachievable_error::unachievable_error(uint32_t cap, std::string which)
    : std::runtime_error("no t <= " + std::to_string(cap) +
                         " meets the reliability target (binding constraint: " + which + ")"),
      t_max(cap),
      constraint(std::move(which)) {}

double storage_overhead(const bch_config& bch, double fixed_tier_overhead) {
    uint64_t n = bch_codeword_length(bch.k, bch.t);
    return fixed_tier_overhead + double(n - bch.k) / double(bch.k);
}

reliability_report evaluate_design(const design_spec& spec, uint32_t t) {
    logreal p_c = cache_line_due(spec.k, t, spec.rber, spec.fixed_tier_miss);
    uint32_t pb_bytes = scheme_block_bytes(spec.scheme, spec.geom);
    block_failure_rates pb =
        physical_block_rates(p_c, spec.p_c_nde, pb_bytes, spec.geom.cache_line_bytes);
    return evaluate(spec.scheme, pb);
}

design_result minimize_t(const design_spec& spec) {
    validate(spec);
    bool due_reachable = false;
    std::optional<logreal> prev_due;
    for (uint32_t t = 0; t <= spec.t_max; ++t) {
        reliability_report rep = evaluate_design(spec, t);
        bool due_ok = rep.p_lb_due <= spec.target_lb_due;
        due_reachable = due_reachable || due_ok;
        bool nde_ok = !spec.target_lb_nde || rep.p_lb_nde <= *spec.target_lb_nde;
        if (due_ok && nde_ok) {
            design_result res;
            res.t_star = t;
            res.bch = {spec.k, t};
            res.storage_overhead = storage_overhead(res.bch, spec.fixed_tier_overhead);
            res.report = rep;
            res.witness_below = prev_due;
            return res;
        }
        prev_due = rep.p_lb_due;
    }
    // Correction strength only moves the DUE side; if some t met the DUE
    // target the silent-error floor is what bound.
    throw unachievable_error(spec.t_max, due_reachable ? "nde" : "due");
}

std::vector<due_sweep_row> sweep_due_vs_overhead(const design_spec& spec,
                                                 uint32_t t_lo, uint32_t t_hi) {
    require(t_lo <= t_hi, "sweep_due_vs_overhead: empty t range");
    const std::pair<const char*, redundancy_scheme> schemes[] = {
        {"chipkill", replication{1}},
        {"chipkill-rep", replication{3}},
        {"chipkill-ec", erasure_code{4, 6}},
    };
    std::vector<due_sweep_row> rows;
    for (const auto& [name, scheme] : schemes) {
        design_spec s = spec;
        s.scheme = scheme;
        for (uint32_t t = t_lo; t <= t_hi; ++t) {
            reliability_report rep = evaluate_design(s, t);
            rows.push_back({name, t, storage_overhead({spec.k, t}, spec.fixed_tier_overhead),
                            rep.p_lb_due, rep.p_lb_nde});
        }
    }
    return rows;
}

std::vector<replica_sweep_row> sweep_overhead_vs_replicas(const design_spec& spec,
                                                          int n_lo, int n_hi) {
    require(n_lo >= 1 && n_lo <= n_hi && n_hi <= 16,
            "sweep_overhead_vs_replicas: range must sit inside [1,16]");
    std::vector<replica_sweep_row> rows;
    for (int n = n_lo; n <= n_hi; ++n) {
        design_spec s = spec;
        s.scheme = replication{n};
        design_result res = minimize_t(s);
        rows.push_back({n, res.t_star, res.storage_overhead, res.report.p_lb_due});
    }
    return rows;
}

std::vector<rber_sweep_row> sweep_overhead_vs_rber(const design_spec& spec,
                                                   const std::vector<double>& rber_list) {
    for (double r : rber_list)
        require(r > 0.0 && r <= 0.1, "sweep_overhead_vs_rber: rber must be in (0, 0.1]");
    std::vector<rber_sweep_row> rows;
    for (double r : rber_list) {
        design_spec single = spec;
        single.rber = r;
        single.scheme = replication{1};
        design_spec redundant = spec;
        redundant.rber = r;
        design_result a = minimize_t(single);
        design_result b = minimize_t(redundant);
        rows.push_back({r, a.t_star, a.storage_overhead, b.t_star, b.storage_overhead,
                        a.storage_overhead - b.storage_overhead});
    }
    return rows;
}

}  // namespace memprot
