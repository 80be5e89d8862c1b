// Thin python surface over the C++ core: plain floats, strings for exact
// rationals, dicts for reports. All math lives in the library.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <stdexcept>
#include <string>

#include "memprot/design.hpp"
#include "memprot/enumerate.hpp"
#include "memprot/model.hpp"
#include "memprot/montecarlo.hpp"
#include "memprot/racksim.hpp"

namespace py = pybind11;
using namespace memprot;

namespace {

redundancy_scheme scheme_of(const std::string& name, int n, int ec_k) {
    if (name == "rep") return replication{n};
    if (name == "ec") return erasure_code{ec_k, n};
    throw std::invalid_argument("scheme must be 'rep' or 'ec'");
}

block_failure_rates rates_of(double p, double q) {
    if (!(p >= 0.0) || !(q >= 0.0) || p + q > 1.0)
        throw std::invalid_argument("need p >= 0, q >= 0, p + q <= 1");
    block_failure_rates r;
    r.due = logreal::from_value(p);
    r.nde = logreal::from_value(q);
    return r;
}

py::dict report_dict(const reliability_report& r) {
    py::dict d;
    d["p_lb_due"] = r.p_lb_due.value();
    d["log10_p_lb_due"] = r.p_lb_due.log10();
    d["p_lb_nde"] = r.p_lb_nde.value();
    d["log10_p_lb_nde"] = r.p_lb_nde.log10();
    d["extra_reads"] = r.extra_reads;
    return d;
}

py::dict sim_report_dict(const sim_report& r) {
    py::dict d;
    d["qps"] = r.qps;
    d["latency_avg"] = r.latency_avg;
    d["latency_p99"] = r.latency_p99;
    d["mce_count"] = r.mce_count;
    d["extra_replica_reads"] = r.extra_replica_reads;
    d["issued"] = r.issued;
    d["completed"] = r.completed;
    d["completed_in_window"] = r.completed_in_window;
    d["failed"] = r.failed;
    d["failed_in_window"] = r.failed_in_window;
    d["inflight_at_end"] = r.inflight_at_end;
    d["due_draws"] = r.due_draws;
    d["due_hits"] = r.due_hits;
    d["cpu_utilization"] = r.cpu_utilization;
    d["cn_in_utilization"] = r.cn_in_utilization;
    d["cn_out_utilization"] = r.cn_out_utilization;
    d["node_up_utilization"] = r.node_up_utilization;
    d["node_down_utilization"] = r.node_down_utilization;
    return d;
}

sim_config sim_config_of(const std::string& scheme, int n, int ec_k, double due_rate, int nodes,
                         double bandwidth, double base_op, double cpu_page, double hit_ratio,
                         double hit_latency, double dirty_ratio, uint32_t page_bytes,
                         uint64_t footprint, const std::string& mode, double rate,
                         uint32_t clients, double think, double duration, double mce_typical,
                         double mce_spike, double mce_spike_prob, uint64_t seed,
                         const std::string& trace) {
    sim_config cfg;
    cfg.scheme = scheme_of(scheme, n, ec_k);
    cfg.due_rate = due_rate;
    cfg.nodes = nodes;
    cfg.link_bandwidth = bandwidth;
    cfg.base_op_latency = base_op;
    cfg.cpu_page_cost = cpu_page;
    cfg.local_hit_ratio = hit_ratio;
    cfg.local_hit_latency = hit_latency;
    cfg.dirty_ratio = dirty_ratio;
    cfg.page_bytes = page_bytes;
    cfg.footprint_bytes = footprint;
    if (mode == "open")
        cfg.mode = workload_mode::open_loop;
    else if (mode == "closed")
        cfg.mode = workload_mode::closed_loop;
    else
        throw std::invalid_argument("mode must be 'open' or 'closed'");
    cfg.request_rate = rate;
    cfg.clients = clients;
    cfg.think_time = think;
    cfg.duration = duration;
    cfg.mce = mce_params{mce_typical, mce_spike, mce_spike_prob};
    cfg.seed = seed;
    cfg.trace_path = trace;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "two-tier memory protection model: per-replica chipkill strength versus "
              "replication and erasure coding";
    m.attr("__version__") = MEMPROT_VERSION;

    m.def(
        "bch_codeword_length", [](uint32_t k, uint32_t t) { return bch_codeword_length(k, t); },
        py::arg("k"), py::arg("t"), "codeword bits: k data bits plus t*(ceil(log2 k)+1) check bits");

    m.def(
        "cache_line_due",
        [](uint32_t k, uint32_t t, double rber, double miss) {
            return cache_line_due(k, t, rber, miss).value();
        },
        py::arg("k"), py::arg("t"), py::arg("rber"), py::arg("miss") = default_miss_factor,
        "per-cache-line DUE probability of a t-corrector over k data bits");

    m.def(
        "cache_line_due_log10",
        [](uint32_t k, uint32_t t, double rber, double miss) {
            return cache_line_due(k, t, rber, miss).log10();
        },
        py::arg("k"), py::arg("t"), py::arg("rber"), py::arg("miss") = default_miss_factor,
        "log10 of cache_line_due; stays finite far below double range");

    m.def(
        "physical_block_due",
        [](double p_c_due, uint32_t block_bytes, uint32_t line_bytes) {
            return physical_block_rates(logreal::from_value(p_c_due), logreal::zero(), block_bytes,
                                        line_bytes)
                .due.value();
        },
        py::arg("p_c_due"), py::arg("block_bytes") = 4096, py::arg("line_bytes") = 64,
        "1 - (1 - p_c)^(block_bytes/line_bytes)");

    m.def(
        "evaluate",
        [](const std::string& scheme, int n, int ec_k, double p, double q) {
            return report_dict(evaluate(scheme_of(scheme, n, ec_k), rates_of(p, q)));
        },
        py::arg("scheme") = "rep", py::arg("n") = 3, py::arg("ec_k") = 4, py::arg("p") = 0.0,
        py::arg("q") = 0.0, "logical-block reliability from per-block rates");

    m.def(
        "minimize_t",
        [](double target_due, const std::string& scheme, int n, int ec_k, uint32_t k, double rber,
           double fixed_overhead, double miss, uint32_t t_max) {
            design_spec spec;
            spec.target_lb_due = logreal::from_value(target_due);
            spec.scheme = scheme_of(scheme, n, ec_k);
            spec.k = k;
            spec.rber = rber;
            spec.fixed_tier_overhead = fixed_overhead;
            spec.fixed_tier_miss = miss;
            spec.t_max = t_max;
            design_result res = minimize_t(spec);
            py::dict d;
            d["t_star"] = res.t_star;
            d["codeword_bits"] = bch_codeword_length(res.bch.k, res.bch.t);
            d["storage_overhead"] = res.storage_overhead;
            d["p_lb_due"] = res.report.p_lb_due.value();
            d["log10_p_lb_due"] = res.report.p_lb_due.log10();
            if (res.witness_below) {
                d["witness_t"] = res.t_star - 1;
                d["log10_witness_p_lb_due"] = res.witness_below->log10();
            }
            return d;
        },
        py::arg("target_due"), py::arg("scheme") = "rep", py::arg("n") = 1, py::arg("ec_k") = 4,
        py::arg("k") = 2048, py::arg("rber") = 2e-4, py::arg("fixed_overhead") = 0.125,
        py::arg("miss") = default_miss_factor, py::arg("t_max") = 128,
        "smallest correction strength whose logical-block DUE meets the target");

    m.def(
        "enumerate_exact",
        [](const std::string& scheme, int n, int ec_k, const std::string& p,
           const std::string& q) {
            exact_report r =
                enumerate_exact(scheme_of(scheme, n, ec_k), parse_rational(p), parse_rational(q));
            py::dict d;
            auto put = [&](const char* name, const mpq_class& v) {
                d[name] = v.get_str();
                d[py::str(std::string(name) + "_float")] = v.get_d();
            };
            put("p_due", r.p_due);
            put("p_nde_union", r.p_nde_union);
            put("p_nde_served", r.p_nde_served);
            put("extra_reads_unconditional", r.extra_reads_unconditional);
            put("extra_reads_given_success", r.extra_reads_given_success);
            return d;
        },
        py::arg("scheme") = "rep", py::arg("n") = 3, py::arg("ec_k") = 4, py::arg("p") = "0",
        py::arg("q") = "0",
        "exact rational enumeration over all DUE patterns (n <= 20); p and q accept decimals "
        "or 'num/den'");

    m.def(
        "simulate",
        [](const std::string& scheme, int n, int ec_k, double p, double q, uint64_t trials,
           uint64_t seed, unsigned workers) {
            trial_config cfg;
            cfg.scheme = scheme_of(scheme, n, ec_k);
            cfg.rates = rates_of(p, q);
            cfg.trials = trials;
            cfg.seed = seed;
            cfg.workers = workers;
            trial_report r = simulate(cfg);
            py::dict d;
            auto put = [&](const char* name, const estimate& e) {
                d[py::str(std::string(name) + "_est")] = e.mean;
                d[py::str(std::string(name) + "_ci95")] = e.ci95;
            };
            put("p_lb_due", r.p_lb_due);
            put("p_lb_nde", r.p_lb_nde);
            put("extra_reads_unconditional", r.extra_reads_unconditional);
            put("extra_reads_given_success", r.extra_reads_given_success);
            d["trials"] = r.trials;
            d["seed"] = r.seed;
            return d;
        },
        py::arg("scheme") = "rep", py::arg("n") = 3, py::arg("ec_k") = 4, py::arg("p") = 0.0,
        py::arg("q") = 0.0, py::arg("trials") = 1000000, py::arg("seed") = 0,
        py::arg("workers") = 1,
        "Monte Carlo block-read trials; deterministic for a given seed, any worker count");

    m.def(
        "protocol_values",
        [](const std::string& scheme, int n, int ec_k, double p, double q) {
            protocol_expectations v = protocol_values(scheme_of(scheme, n, ec_k), p, q);
            py::dict d;
            d["p_due"] = v.p_due;
            d["p_nde"] = v.p_nde;
            d["extra_reads_unconditional"] = v.extra_reads_unconditional;
            d["extra_reads_given_success"] = v.extra_reads_given_success;
            return d;
        },
        py::arg("scheme") = "rep", py::arg("n") = 3, py::arg("ec_k") = 4, py::arg("p") = 0.0,
        py::arg("q") = 0.0, "closed-form expectations under the sampler's read protocol");

#define MEMPROT_SIM_ARGS                                                                          \
    py::arg("scheme") = "rep", py::arg("n") = 3, py::arg("ec_k") = 4, py::arg("due_rate") = 0.0,  \
    py::arg("nodes") = 6, py::arg("bandwidth") = 7e9, py::arg("base_op") = 3e-6,                  \
    py::arg("cpu_page") = 10e-6, py::arg("hit_ratio") = 0.25, py::arg("hit_latency") = 1e-6,      \
    py::arg("dirty_ratio") = 0.5, py::arg("page_bytes") = 4096,                                   \
    py::arg("footprint") = uint64_t(1) << 30, py::arg("mode") = "open", py::arg("rate") = 1e5,    \
    py::arg("clients") = 64, py::arg("think") = 0.0, py::arg("duration") = 60.0,                  \
    py::arg("mce_typical") = 200e-6, py::arg("mce_spike") = 1.0,                                  \
    py::arg("mce_spike_prob") = 1e-3, py::arg("seed") = 0, py::arg("trace") = ""

    m.def(
        "run_racksim",
        [](const std::string& scheme, int n, int ec_k, double due_rate, int nodes,
           double bandwidth, double base_op, double cpu_page, double hit_ratio, double hit_latency,
           double dirty_ratio, uint32_t page_bytes, uint64_t footprint, const std::string& mode,
           double rate, uint32_t clients, double think, double duration, double mce_typical,
           double mce_spike, double mce_spike_prob, uint64_t seed, const std::string& trace) {
            return sim_report_dict(run_racksim(sim_config_of(
                scheme, n, ec_k, due_rate, nodes, bandwidth, base_op, cpu_page, hit_ratio,
                hit_latency, dirty_ratio, page_bytes, footprint, mode, rate, clients, think,
                duration, mce_typical, mce_spike, mce_spike_prob, seed, trace)));
        },
        MEMPROT_SIM_ARGS, "deterministic rack-scale request simulation");

    m.def(
        "compare_schemes",
        [](bool comparison_profile, const std::string& scheme, int n, int ec_k, double due_rate,
           int nodes, double bandwidth, double base_op, double cpu_page, double hit_ratio,
           double hit_latency, double dirty_ratio, uint32_t page_bytes, uint64_t footprint,
           const std::string& mode, double rate, uint32_t clients, double think, double duration,
           double mce_typical, double mce_spike, double mce_spike_prob, uint64_t seed,
           const std::string& trace) {
            sim_config base = sim_config_of(scheme, n, ec_k, due_rate, nodes, bandwidth, base_op,
                                            cpu_page, hit_ratio, hit_latency, dirty_ratio,
                                            page_bytes, footprint, mode, rate, clients, think,
                                            duration, mce_typical, mce_spike, mce_spike_prob, seed,
                                            trace);
            if (comparison_profile) base = scheme_comparison_profile(base);
            auto [rep, ec] = compare_schemes(base);
            return py::make_tuple(sim_report_dict(rep), sim_report_dict(ec));
        },
        py::arg("comparison_profile") = true, MEMPROT_SIM_ARGS,
        "paired 3-way replication vs 4-of-6 erasure coding runs on the same seed; by default "
        "under the bandwidth-bound comparison profile");

#undef MEMPROT_SIM_ARGS

    m.def(
        "mce_cost_model",
        [](uint64_t seed, double typical, double spike, double spike_prob, uint64_t count) {
            return mce_cost_model(seed, mce_params{typical, spike, spike_prob}, count);
        },
        py::arg("seed"), py::arg("typical") = 200e-6, py::arg("spike") = 1.0,
        py::arg("spike_prob") = 1e-3, py::arg("count") = 1,
        "deterministic machine-check stall costs from the two-point mixture");
}
