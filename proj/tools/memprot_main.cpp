// memprot CLI: analytical model, code-strength optimizer, Monte Carlo checker,
// and rack simulator behind one binary. Every file-writing run drops a
// <output>.manifest next to its outputs; `memprot replay <manifest>` re-runs
// the recorded invocation and verifies the output checksums bit for bit.
//
// Exit codes: 0 success, 1 domain error (values outside the model's domain,
// unachievable targets, replay mismatch), 2 usage (unknown flags, malformed
// values).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "memprot/design.hpp"
#include "memprot/enumerate.hpp"
#include "memprot/io.hpp"
#include "memprot/model.hpp"
#include "memprot/montecarlo.hpp"
#include "memprot/racksim.hpp"

#ifndef MEMPROT_VERSION
#define MEMPROT_VERSION "0.0.0"
#endif

namespace {

using namespace memprot;

int dispatch(const std::vector<std::string>& tokens);

// Missing-required conditions CLI11 cannot express (an option required by the
// parent command but not by its subcommands); reported as usage, exit 2.
struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// small helpers

double parse_double(const std::string& s) {
    size_t idx = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &idx);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a number: '" + s + "'");
    }
    if (idx != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

long parse_long(const std::string& s) {
    size_t idx = 0;
    long v = 0;
    try {
        v = std::stol(s, &idx);
    } catch (const std::exception&) {
        throw std::invalid_argument("not an integer: '" + s + "'");
    }
    if (idx != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
    return v;
}

std::pair<std::string, std::string> split_range(const std::string& s) {
    auto pos = s.find("..");
    if (pos == std::string::npos)
        throw std::invalid_argument("range must look like LO..HI, got '" + s + "'");
    return {s.substr(0, pos), s.substr(pos + 2)};
}

std::vector<double> decade_points(const std::string& range) {
    auto [lo_s, hi_s] = split_range(range);
    double lo = parse_double(lo_s), hi = parse_double(hi_s);
    if (!(lo > 0.0) || !(hi >= lo))
        throw std::invalid_argument("sweep range needs 0 < LO <= HI, got '" + range + "'");
    std::vector<double> v;
    for (double r = lo; r <= hi * (1.0 + 1e-9); r *= 10.0) v.push_back(r);
    return v;
}

double rational_to_double(const std::string& text) { return parse_rational(text).get_d(); }

std::string log10_str(const logreal& v) { return format_full(v.log10()); }

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += format_full(v[i]);
    }
    return s;
}

// ---------------------------------------------------------------------------
// manifest plumbing

// Resolved parameters of one invocation, in a fixed order. Valued options go
// out as arg.<name>=<value>, boolean flags as flag.<name>=1; replay turns them
// back into --<name>=<value> / --<name> tokens.
struct arg_list {
    std::vector<std::pair<std::string, std::string>> vals;
    std::vector<std::string> flags;

    void s(const std::string& name, const std::string& v) { vals.emplace_back(name, v); }
    void d(const std::string& name, double v) { vals.emplace_back(name, format_full(v)); }
    void i(const std::string& name, long long v) { vals.emplace_back(name, std::to_string(v)); }
    void u(const std::string& name, uint64_t v) { vals.emplace_back(name, std::to_string(v)); }
    void flag(const std::string& name, bool set) {
        if (set) flags.push_back(name);
    }
};

struct sink {
    std::string out_path;  // empty: body goes to stdout
    std::string body;
    // extra files the run itself produced (e.g. a trace); path -> content
    std::vector<std::pair<std::string, std::string>> extra_outputs;

    void line(const std::string& s) {
        body += s;
        body += '\n';
    }
};

void finish(const std::string& command, const arg_list& args, sink& s) {
    bool have_files = !s.out_path.empty() || !s.extra_outputs.empty();
    if (!have_files) {
        std::fputs(s.body.c_str(), stdout);
        return;
    }
    run_manifest man;
    man.set("command", command);
    man.set("version", MEMPROT_VERSION);
    for (const auto& [k, v] : args.vals) man.set("arg." + k, v);
    for (const auto& f : args.flags) man.set("flag." + f, "1");

    std::string manifest_path;
    if (!s.out_path.empty()) {
        write_text_file(s.out_path, s.body);
        man.set("output." + s.out_path, hex64(fnv1a64(s.body)));
        manifest_path = s.out_path + ".manifest";
        std::printf("wrote %s (fnv1a64 %s)\n", s.out_path.c_str(), hex64(fnv1a64(s.body)).c_str());
    } else {
        std::fputs(s.body.c_str(), stdout);
    }
    for (const auto& [path, content] : s.extra_outputs) {
        man.set("output." + path, hex64(fnv1a64(content)));
        if (manifest_path.empty()) manifest_path = path + ".manifest";
        std::printf("wrote %s (fnv1a64 %s)\n", path.c_str(), hex64(fnv1a64(content)).c_str());
    }
    man.write_file(manifest_path);
    std::printf("manifest %s\n", manifest_path.c_str());
}

// ---------------------------------------------------------------------------
// model

struct model_opts {
    std::string scheme = "rep";
    int n = 3;
    int k = 4;  // erasure-code data fragments
    std::string p_pb_due;
    std::string p_pb_nde = "0";
    double rber = 2e-4;
    int t = 0;
    int bch_k = 2048;
    double miss = default_miss_factor;
    int line_bytes = 64;
    int block_bytes = 4096;
    bool exact = false;
    std::string out;
};

redundancy_scheme make_scheme(const std::string& name, int n, bool n_given, int ec_k) {
    if (name == "rep") return replication{n_given ? n : 3};
    return erasure_code{ec_k, n_given ? n : 6};
}

int run_model(const model_opts& o, bool n_given, bool due_given, bool rber_given, bool t_given) {
    redundancy_scheme scheme = make_scheme(o.scheme, o.n, n_given, o.k);
    int n_resolved = o.scheme == "rep" ? std::get<replication>(scheme).n
                                       : std::get<erasure_code>(scheme).n;
    arg_list args;
    sink s;
    args.s("scheme", o.scheme);
    args.i("n", n_resolved);
    if (o.scheme == "ec") args.i("k", o.k);

    s.line("scheme=" + o.scheme);
    s.line("n=" + std::to_string(n_resolved));
    if (o.scheme == "ec") s.line("k=" + std::to_string(o.k));

    if (o.exact) {
        if (!due_given)
            throw std::invalid_argument("--exact needs --p-pb-due (decimal or num/den rational)");
        if (rber_given || t_given)
            throw std::invalid_argument("--exact takes block-level inputs, not --rber/--t");
        mpq_class p = parse_rational(o.p_pb_due);
        mpq_class q = parse_rational(o.p_pb_nde);
        args.s("p-pb-due", o.p_pb_due);
        args.s("p-pb-nde", o.p_pb_nde);
        args.flag("exact", true);
        exact_report rep = enumerate_exact(scheme, p, q);
        s.line("p_pb_due=" + p.get_str());
        s.line("p_pb_nde=" + q.get_str());
        auto both = [&](const std::string& name, const mpq_class& v) {
            s.line(name + "=" + v.get_str());
            s.line(name + "_dec=" + format_sci(v.get_d()));
        };
        both("exact_p_due", rep.p_due);
        both("exact_p_nde_union", rep.p_nde_union);
        both("exact_p_nde_served", rep.p_nde_served);
        both("exact_extra_reads_unconditional", rep.extra_reads_unconditional);
        both("exact_extra_reads_given_success", rep.extra_reads_given_success);
        args.s("out", o.out);
        s.out_path = o.out;
        finish("model", args, s);
        return 0;
    }

    block_failure_rates rates;
    if (due_given) {
        if (rber_given || t_given)
            throw std::invalid_argument("give either --p-pb-due or --rber/--t, not both");
        double pd = rational_to_double(o.p_pb_due);
        double pn = rational_to_double(o.p_pb_nde);
        if (!(pd >= 0.0) || !(pn >= 0.0) || pd + pn > 1.0)
            throw std::invalid_argument("need p-pb-due >= 0, p-pb-nde >= 0, and their sum <= 1");
        rates.due = logreal::from_value(pd);
        rates.nde = logreal::from_value(pn);
        args.s("p-pb-due", o.p_pb_due);
        args.s("p-pb-nde", o.p_pb_nde);
        s.line("p_pb_due=" + format_sci(rates.due.value()));
        s.line("p_pb_nde=" + format_sci(rates.nde.value()));
    } else {
        if (!rber_given || !t_given)
            throw std::invalid_argument("need --p-pb-due, or --rber together with --t");
        args.d("rber", o.rber);
        args.i("t", o.t);
        args.i("bch-k", o.bch_k);
        args.d("miss", o.miss);
        args.i("line-bytes", o.line_bytes);
        args.i("block-bytes", o.block_bytes);
        if (o.t < 0 || o.bch_k < 2 || o.line_bytes <= 0 || o.block_bytes <= 0)
            throw std::invalid_argument("tier-1 inputs must be positive (and bch-k >= 2)");
        block_geometry geom{uint32_t(o.line_bytes), uint32_t(o.block_bytes)};
        logreal p_c = cache_line_due(uint32_t(o.bch_k), uint32_t(o.t), o.rber, o.miss);
        uint32_t pb_bytes = scheme_block_bytes(scheme, geom);
        rates = physical_block_rates(p_c, logreal::zero(), pb_bytes, geom.cache_line_bytes);
        s.line("bch_k=" + std::to_string(o.bch_k));
        s.line("bch_t=" + std::to_string(o.t));
        s.line("codeword_bits=" + std::to_string(bch_codeword_length(uint32_t(o.bch_k), uint32_t(o.t))));
        s.line("rber=" + format_sci(o.rber));
        s.line("miss_factor=" + format_full(o.miss));
        s.line("p_c_due=" + format_sci(p_c.value()));
        s.line("log10_p_c_due=" + log10_str(p_c));
        s.line("physical_block_bytes=" + std::to_string(pb_bytes));
        s.line("p_pb_due=" + format_sci(rates.due.value()));
        s.line("log10_p_pb_due=" + log10_str(rates.due));
    }

    reliability_report rep = evaluate(scheme, rates);
    s.line("p_lb_due=" + format_sci(rep.p_lb_due.value()));
    s.line("log10_p_lb_due=" + log10_str(rep.p_lb_due));
    s.line("p_lb_nde=" + format_sci(rep.p_lb_nde.value()));
    s.line("log10_p_lb_nde=" + log10_str(rep.p_lb_nde));
    s.line("extra_reads=" + format_full(rep.extra_reads));
    args.s("out", o.out);
    s.out_path = o.out;
    finish("model", args, s);
    return 0;
}

// ---------------------------------------------------------------------------
// design

struct design_opts {
    double target_due = 1e-33;
    std::optional<double> target_nde;
    std::string scheme = "rep";
    int n = 3;
    int ec_k = 4;
    int k = 2048;
    double rber = 2e-4;
    double fixed_overhead = 0.125;
    double miss = default_miss_factor;
    std::optional<double> p_c_nde;
    int t_max = 128;
    int line_bytes = 64;
    int block_bytes = 4096;
    std::string out;
    // sweeps
    std::string t_range = "0..32";
    std::string n_range = "1..8";
    std::string rber_list = "1e-5,1e-4,2e-4,1e-3";
};

design_spec to_spec(const design_opts& o, bool n_given) {
    design_spec spec;
    spec.target_lb_due = logreal::from_value(o.target_due);
    if (o.target_nde) spec.target_lb_nde = logreal::from_value(*o.target_nde);
    spec.scheme = make_scheme(o.scheme, o.n, n_given, o.ec_k);
    spec.rber = o.rber;
    if (o.k < 2) throw std::invalid_argument("--k must be >= 2");
    spec.k = uint32_t(o.k);
    if (o.line_bytes <= 0 || o.block_bytes <= 0)
        throw std::invalid_argument("geometry bytes must be positive");
    spec.geom = block_geometry{uint32_t(o.line_bytes), uint32_t(o.block_bytes)};
    spec.fixed_tier_overhead = o.fixed_overhead;
    spec.fixed_tier_miss = o.miss;
    if (o.p_c_nde) spec.p_c_nde = logreal::from_value(*o.p_c_nde);
    if (o.t_max < 0) throw std::invalid_argument("--t-max must be >= 0");
    spec.t_max = uint32_t(o.t_max);
    return spec;
}

void design_common_args(const design_opts& o, const design_spec& spec, arg_list& args,
                        bool with_scheme) {
    if (with_scheme) {
        args.s("scheme", o.scheme);
        if (const auto* rep = std::get_if<replication>(&spec.scheme)) args.i("n", rep->n);
        if (const auto* ec = std::get_if<erasure_code>(&spec.scheme)) {
            args.i("n", ec->n);
            args.i("ec-k", ec->k);
        }
    }
    args.i("k", o.k);
    args.d("rber", o.rber);
    args.d("fixed-overhead", o.fixed_overhead);
    args.d("miss", o.miss);
    if (o.p_c_nde) args.d("p-c-nde", *o.p_c_nde);
    args.i("line-bytes", o.line_bytes);
    args.i("block-bytes", o.block_bytes);
}

int run_design(const design_opts& o, bool n_given, bool target_given) {
    if (!target_given) throw usage_error("design: --target-due is required");
    design_spec spec = to_spec(o, n_given);
    design_result res = minimize_t(spec);

    arg_list args;
    args.d("target-due", o.target_due);
    if (o.target_nde) args.d("target-nde", *o.target_nde);
    design_common_args(o, spec, args, true);
    args.i("t-max", o.t_max);
    args.s("out", o.out);

    sink s;
    s.line("scheme=" + o.scheme);
    if (const auto* rep = std::get_if<replication>(&spec.scheme))
        s.line("n=" + std::to_string(rep->n));
    if (const auto* ec = std::get_if<erasure_code>(&spec.scheme)) {
        s.line("k=" + std::to_string(ec->k));
        s.line("n=" + std::to_string(ec->n));
    }
    s.line("bch_k=" + std::to_string(o.k));
    s.line("rber=" + format_sci(o.rber));
    s.line("target_due=" + format_sci(o.target_due));
    if (o.target_nde) s.line("target_nde=" + format_sci(*o.target_nde));
    s.line("t_star=" + std::to_string(res.t_star));
    s.line("codeword_bits=" + std::to_string(bch_codeword_length(res.bch.k, res.bch.t)));
    s.line("storage_overhead=" + format_full(res.storage_overhead));
    s.line("p_lb_due=" + format_sci(res.report.p_lb_due.value()));
    s.line("log10_p_lb_due=" + log10_str(res.report.p_lb_due));
    s.line("p_lb_nde=" + format_sci(res.report.p_lb_nde.value()));
    s.line("log10_p_lb_nde=" + log10_str(res.report.p_lb_nde));
    s.line("extra_reads=" + format_full(res.report.extra_reads));
    if (res.witness_below) {
        s.line("witness_t=" + std::to_string(res.t_star - 1));
        s.line("witness_p_lb_due=" + format_sci(res.witness_below->value()));
        s.line("log10_witness_p_lb_due=" + log10_str(*res.witness_below));
    }
    s.out_path = o.out;
    finish("design", args, s);
    return 0;
}

int run_sweep_due(const design_opts& o) {
    design_spec spec = to_spec(o, false);
    spec.target_lb_due = logreal::from_value(0.5);  // sweep is target-free
    auto [lo_s, hi_s] = split_range(o.t_range);
    long lo = parse_long(lo_s), hi = parse_long(hi_s);
    if (lo < 0 || hi < lo) throw std::invalid_argument("--t-range needs 0 <= LO <= HI");
    auto rows = sweep_due_vs_overhead(spec, uint32_t(lo), uint32_t(hi));

    csv_table csv({"scheme", "t", "storage_overhead", "p_lb_due", "log10_p_lb_due", "p_lb_nde",
                   "log10_p_lb_nde"});
    for (const auto& r : rows)
        csv.add_row({r.scheme, std::to_string(r.t), format_full(r.overhead),
                     format_sci(r.p_lb_due.value()), log10_str(r.p_lb_due),
                     format_sci(r.p_lb_nde.value()), log10_str(r.p_lb_nde)});

    arg_list args;
    design_common_args(o, spec, args, false);
    args.s("t-range", o.t_range);
    args.s("out", o.out);
    sink s;
    s.body = csv.to_string();
    s.out_path = o.out;
    finish("design sweep-due", args, s);
    return 0;
}

int run_sweep_replicas(const design_opts& o) {
    design_spec spec = to_spec(o, false);
    auto [lo_s, hi_s] = split_range(o.n_range);
    long lo = parse_long(lo_s), hi = parse_long(hi_s);
    auto rows = sweep_overhead_vs_replicas(spec, int(lo), int(hi));

    csv_table csv({"n", "t_star", "storage_overhead", "p_lb_due", "log10_p_lb_due"});
    for (const auto& r : rows)
        csv.add_row({std::to_string(r.n), std::to_string(r.t_star), format_full(r.overhead),
                     format_sci(r.p_lb_due.value()), log10_str(r.p_lb_due)});

    arg_list args;
    args.d("target-due", o.target_due);
    if (o.target_nde) args.d("target-nde", *o.target_nde);
    design_common_args(o, spec, args, false);
    args.i("t-max", o.t_max);
    args.s("n-range", o.n_range);
    args.s("out", o.out);
    sink s;
    s.body = csv.to_string();
    s.out_path = o.out;
    finish("design sweep-replicas", args, s);
    return 0;
}

int run_sweep_rber(const design_opts& o, bool n_given) {
    design_spec spec = to_spec(o, n_given);
    std::vector<double> rbers;
    std::string cur;
    for (char c : o.rber_list + ",") {
        if (c == ',') {
            if (!cur.empty()) rbers.push_back(parse_double(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    auto rows = sweep_overhead_vs_rber(spec, rbers);

    csv_table csv({"rber", "t_star_single", "overhead_single", "t_star_redundant",
                   "overhead_redundant", "savings"});
    for (const auto& r : rows)
        csv.add_row({format_sci(r.rber), std::to_string(r.t_star_single),
                     format_full(r.overhead_single), std::to_string(r.t_star_redundant),
                     format_full(r.overhead_redundant), format_full(r.savings)});

    arg_list args;
    args.d("target-due", o.target_due);
    if (o.target_nde) args.d("target-nde", *o.target_nde);
    design_common_args(o, spec, args, true);
    args.i("t-max", o.t_max);
    args.s("rber-list", o.rber_list);
    args.s("out", o.out);
    sink s;
    s.body = csv.to_string();
    s.out_path = o.out;
    finish("design sweep-rber", args, s);
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct simulate_opts {
    std::string scheme = "rep";
    int n = 3;
    int k = 4;
    std::string p;
    std::string q = "0";
    uint64_t trials = 1000000;
    uint64_t seed = 0;
    unsigned workers = 1;
    std::string out;
};

void estimate_lines(sink& s, const std::string& name, const estimate& e, double analytic) {
    s.line(name + "_est=" + format_sci(e.mean));
    s.line(name + "_ci95=" + format_sci(e.ci95));
    s.line(name + "_analytic=" + format_sci(analytic));
    bool both_nan = std::isnan(e.mean) && std::isnan(analytic);
    double z = 0.0;
    if (!both_nan) {
        if (e.ci95 > 0.0)
            z = (e.mean - analytic) / (e.ci95 / 1.96);
        else
            z = e.mean == analytic ? 0.0 : std::numeric_limits<double>::infinity();
    }
    s.line(name + "_z=" + format_full(z));
    s.line(name + "_check=" + std::string(both_nan      ? "n/a"
                                          : std::fabs(z) <= 3.0 ? "ok"
                                                                : "VIOLATION(3sigma)"));
}

int run_simulate(const simulate_opts& o, bool n_given) {
    if (o.p.empty()) throw std::invalid_argument("--p is required");
    redundancy_scheme scheme = make_scheme(o.scheme, o.n, n_given, o.k);
    double p = rational_to_double(o.p);
    double q = rational_to_double(o.q);

    trial_config cfg;
    cfg.scheme = scheme;
    cfg.rates.due = logreal::from_value(p);
    cfg.rates.nde = logreal::from_value(q);
    cfg.trials = o.trials;
    cfg.seed = o.seed;
    cfg.workers = o.workers;
    trial_report mc = simulate(cfg);
    protocol_expectations ref = protocol_values(scheme, p, q);
    reliability_report published = evaluate(scheme, cfg.rates);

    int n_resolved = o.scheme == "rep" ? std::get<replication>(scheme).n
                                       : std::get<erasure_code>(scheme).n;
    arg_list args;
    args.s("scheme", o.scheme);
    args.i("n", n_resolved);
    if (o.scheme == "ec") args.i("k", o.k);
    args.s("p", o.p);
    args.s("q", o.q);
    args.u("trials", o.trials);
    args.u("seed", o.seed);
    args.i("workers", o.workers);
    args.s("out", o.out);

    sink s;
    s.line("scheme=" + o.scheme);
    s.line("n=" + std::to_string(n_resolved));
    if (o.scheme == "ec") s.line("k=" + std::to_string(o.k));
    s.line("p=" + format_sci(p));
    s.line("q=" + format_sci(q));
    s.line("trials=" + std::to_string(o.trials));
    s.line("seed=" + std::to_string(o.seed));
    s.line("workers=" + std::to_string(o.workers));
    estimate_lines(s, "p_lb_due", mc.p_lb_due, ref.p_due);
    estimate_lines(s, "p_lb_nde", mc.p_lb_nde, ref.p_nde);
    estimate_lines(s, "extra_reads_unconditional", mc.extra_reads_unconditional,
                   ref.extra_reads_unconditional);
    estimate_lines(s, "extra_reads_given_success", mc.extra_reads_given_success,
                   ref.extra_reads_given_success);
    // union-style published quantities; the sampler's nde estimate tracks the
    // served-block protocol value above, not these
    s.line("published_p_lb_nde=" + format_sci(published.p_lb_nde.value()));
    s.line("published_extra_reads=" + format_full(published.extra_reads));
    s.out_path = o.out;
    finish("simulate", args, s);
    return 0;
}

// ---------------------------------------------------------------------------
// racksim

struct racksim_opts {
    std::string scheme = "rep";
    int n = 3;
    int ec_k = 4;
    double due_rate = 0.0;
    int nodes = 6;
    double bandwidth = 7e9;
    double base_op = 3e-6;
    double cpu_page = 10e-6;
    double hit_ratio = 0.25;
    double hit_latency = 1e-6;
    double dirty_ratio = 0.5;
    uint32_t page_bytes = 4096;
    uint64_t footprint = uint64_t(1) << 30;
    std::string mode = "open";
    double rate = 1e5;
    uint32_t clients = 64;
    double think = 0.0;
    double duration = 60.0;
    double mce_typical = 200e-6;
    double mce_spike = 1.0;
    double mce_spike_prob = 1e-3;
    uint64_t seed = 0;
    unsigned workers = 1;
    std::string trace;
    std::string sweep;
    bool compare = false;
    std::string out;
};

sim_config rack_config(const racksim_opts& o, bool n_given) {
    sim_config cfg;
    cfg.scheme = make_scheme(o.scheme, o.n, n_given, o.ec_k);
    cfg.due_rate = o.due_rate;
    cfg.nodes = o.nodes;
    cfg.link_bandwidth = o.bandwidth;
    cfg.base_op_latency = o.base_op;
    cfg.cpu_page_cost = o.cpu_page;
    cfg.local_hit_ratio = o.hit_ratio;
    cfg.local_hit_latency = o.hit_latency;
    cfg.dirty_ratio = o.dirty_ratio;
    cfg.page_bytes = o.page_bytes;
    cfg.footprint_bytes = o.footprint;
    cfg.mode = o.mode == "closed" ? workload_mode::closed_loop : workload_mode::open_loop;
    cfg.request_rate = o.rate;
    cfg.clients = o.clients;
    cfg.think_time = o.think;
    cfg.duration = o.duration;
    cfg.mce = mce_params{o.mce_typical, o.mce_spike, o.mce_spike_prob};
    cfg.seed = o.seed;
    cfg.trace_path = o.trace;
    return cfg;
}

void rack_args(const racksim_opts& o, const sim_config& cfg, arg_list& args) {
    args.s("scheme", o.scheme);
    if (const auto* rep = std::get_if<replication>(&cfg.scheme)) args.i("n", rep->n);
    if (const auto* ec = std::get_if<erasure_code>(&cfg.scheme)) {
        args.i("n", ec->n);
        args.i("ec-k", ec->k);
    }
    args.d("due-rate", o.due_rate);
    args.i("nodes", o.nodes);
    args.d("bandwidth", o.bandwidth);
    args.d("base-op", o.base_op);
    args.d("cpu-page", o.cpu_page);
    args.d("hit-ratio", o.hit_ratio);
    args.d("hit-latency", o.hit_latency);
    args.d("dirty-ratio", o.dirty_ratio);
    args.u("page-bytes", o.page_bytes);
    args.u("footprint", o.footprint);
    args.s("mode", o.mode);
    args.d("rate", o.rate);
    args.u("clients", o.clients);
    args.d("think", o.think);
    args.d("duration", o.duration);
    args.d("mce-typical", o.mce_typical);
    args.d("mce-spike", o.mce_spike);
    args.d("mce-spike-prob", o.mce_spike_prob);
    args.u("seed", o.seed);
    args.i("workers", o.workers);
    if (!o.trace.empty()) args.s("trace", o.trace);
}

void report_lines(sink& s, const std::string& prefix, const sim_report& r) {
    auto put = [&](const std::string& k, const std::string& v) { s.line(prefix + k + "=" + v); };
    put("qps", format_full(r.qps));
    put("latency_avg", format_full(r.latency_avg));
    put("latency_p99", format_full(r.latency_p99));
    put("mce_count", std::to_string(r.mce_count));
    put("extra_replica_reads", std::to_string(r.extra_replica_reads));
    put("issued", std::to_string(r.issued));
    put("completed", std::to_string(r.completed));
    put("completed_in_window", std::to_string(r.completed_in_window));
    put("failed", std::to_string(r.failed));
    put("failed_in_window", std::to_string(r.failed_in_window));
    put("inflight_at_end", std::to_string(r.inflight_at_end));
    put("due_draws", std::to_string(r.due_draws));
    put("due_hits", std::to_string(r.due_hits));
    put("cpu_utilization", format_full(r.cpu_utilization));
    put("cn_in_utilization", format_full(r.cn_in_utilization));
    put("cn_out_utilization", format_full(r.cn_out_utilization));
    put("node_up_utilization", join_doubles(r.node_up_utilization));
    put("node_down_utilization", join_doubles(r.node_down_utilization));
}

int run_racksim(const racksim_opts& o, bool n_given) {
    if (o.compare && !o.sweep.empty())
        throw std::invalid_argument("--compare and --sweep-due are mutually exclusive");
    sim_config base = rack_config(o, n_given);

    arg_list args;
    rack_args(o, base, args);
    sink s;

    if (o.compare) {
        sim_config profile = scheme_comparison_profile(base);
        profile.trace_path.clear();  // paired runs would clobber one file
        auto [rep, ec] = compare_schemes(profile);
        args.flag("compare", true);
        args.s("out", o.out);
        if (!o.out.empty()) {
            csv_table csv({"scheme", "due_rate", "qps", "lat_avg", "lat_p99", "mce_count"});
            csv.add_row({"rep3", format_sci(profile.due_rate), format_full(rep.qps),
                         format_full(rep.latency_avg), format_full(rep.latency_p99),
                         std::to_string(rep.mce_count)});
            csv.add_row({"ec4_6", format_sci(profile.due_rate), format_full(ec.qps),
                         format_full(ec.latency_avg), format_full(ec.latency_p99),
                         std::to_string(ec.mce_count)});
            s.body = csv.to_string();
        } else {
            s.line("profile_bandwidth=" + format_full(profile.link_bandwidth));
            s.line("profile_dirty_ratio=" + format_full(profile.dirty_ratio));
            s.line("profile_request_rate=" + format_full(profile.request_rate));
            s.line("profile_cpu_page_cost=" + format_full(profile.cpu_page_cost));
            s.line("profile_due_rate=" + format_full(profile.due_rate));
            s.line("profile_seed=" + std::to_string(profile.seed));
            report_lines(s, "rep3_", rep);
            report_lines(s, "ec4_6_", ec);
            s.line("qps_ratio_ec_over_rep=" + format_full(ec.qps / rep.qps));
        }
        s.out_path = o.out;
        finish("racksim", args, s);
        return 0;
    }

    if (!o.sweep.empty()) {
        std::vector<double> rates = decade_points(o.sweep);
        rates.insert(rates.begin(), 0.0);  // fault-free baseline row

        struct point {
            std::string label;
            sim_config cfg;
        };
        std::vector<point> points;
        for (double r : rates) {
            sim_config c = base;
            c.trace_path.clear();
            c.due_rate = r;
            c.scheme = replication{3};
            points.push_back({"rep3", c});
            c.scheme = erasure_code{4, 6};
            points.push_back({"ec4_6", c});
        }
        std::vector<sim_report> results(points.size());
        parallel_for(points.size(), o.workers,
                     [&](uint64_t i) { results[i] = memprot::run_racksim(points[i].cfg); });

        csv_table csv({"scheme", "due_rate", "qps", "lat_avg", "lat_p99", "mce_count"});
        for (size_t i = 0; i < points.size(); ++i)
            csv.add_row({points[i].label, format_sci(points[i].cfg.due_rate),
                         format_full(results[i].qps), format_full(results[i].latency_avg),
                         format_full(results[i].latency_p99), std::to_string(results[i].mce_count)});
        args.s("sweep-due", o.sweep);
        args.s("out", o.out);
        s.body = csv.to_string();
        s.out_path = o.out;
        finish("racksim", args, s);
        return 0;
    }

    sim_report rep = memprot::run_racksim(base);
    args.s("out", o.out);
    s.line("scheme=" + o.scheme);
    s.line("due_rate=" + format_sci(o.due_rate));
    s.line("mode=" + o.mode);
    s.line("duration=" + format_full(o.duration));
    s.line("seed=" + std::to_string(o.seed));
    report_lines(s, "", rep);
    if (!o.trace.empty()) s.extra_outputs.emplace_back(o.trace, read_text_file(o.trace));
    s.out_path = o.out;
    finish("racksim", args, s);
    return 0;
}

// ---------------------------------------------------------------------------
// replay

int run_replay(const std::string& manifest_path) {
    run_manifest orig = run_manifest::read_file(manifest_path);
    std::string command = orig.get("command");
    if (orig.has("version") && orig.get("version") != MEMPROT_VERSION)
        std::fprintf(stderr, "warning: manifest written by version %s, this is %s\n",
                     orig.get("version").c_str(), MEMPROT_VERSION);

    std::vector<std::string> tokens;
    std::string word;
    for (char c : command + " ") {
        if (c == ' ') {
            if (!word.empty()) tokens.push_back(word);
            word.clear();
        } else {
            word += c;
        }
    }
    for (const auto& [k, v] : orig.entries()) {
        if (k.rfind("arg.", 0) == 0) {
            if (!v.empty()) tokens.push_back("--" + k.substr(4) + "=" + v);
        } else if (k.rfind("flag.", 0) == 0 && v == "1") {
            tokens.push_back("--" + k.substr(5));
        }
    }

    std::printf("replaying: %s\n", command.c_str());
    int rc = dispatch(tokens);
    if (rc != 0) throw std::runtime_error("replay: re-run exited with code " + std::to_string(rc));

    bool ok = true;
    for (const auto& [k, v] : orig.entries()) {
        if (k.rfind("output.", 0) != 0) continue;
        std::string path = k.substr(7);
        std::string content;
        try {
            content = read_text_file(path);
        } catch (const std::exception&) {
            std::printf("MISSING %s\n", path.c_str());
            ok = false;
            continue;
        }
        std::string got = hex64(fnv1a64(content));
        if (got == v) {
            std::printf("ok %s (fnv1a64 %s)\n", path.c_str(), got.c_str());
        } else {
            std::printf("MISMATCH %s expected=%s got=%s\n", path.c_str(), v.c_str(), got.c_str());
            ok = false;
        }
    }
    if (!ok) throw std::runtime_error("replay: outputs differ from recorded checksums");
    return 0;
}

// ---------------------------------------------------------------------------
// app wiring

int dispatch(const std::vector<std::string>& tokens) {
    CLI::App app{"two-tier memory protection toolkit: per-replica chipkill strength vs "
                 "replication and erasure coding"};
    app.set_version_flag("--version", MEMPROT_VERSION);
    app.set_config("--config", "",
                   "key=value config file; subcommand options as e.g. 'design.k=2048'");
    app.require_subcommand(1);

    uint64_t seed_default = env_seed(0);
    unsigned workers_default = env_workers(4);

    // model
    model_opts mo;
    auto* model = app.add_subcommand("model", "logical-block reliability of one configuration");
    model->configurable(true);
    model->add_option("--scheme", mo.scheme, "rep or ec")->check(CLI::IsMember({"rep", "ec"}));
    auto* mo_n = model->add_option("--n", mo.n, "replicas, or total fragments for ec");
    model->add_option("--k", mo.k, "ec data fragments");
    auto* mo_due = model->add_option("--p-pb-due", mo.p_pb_due,
                                     "physical-block DUE probability (decimal or num/den)");
    model->add_option("--p-pb-nde", mo.p_pb_nde, "physical-block silent-error probability");
    auto* mo_rber = model->add_option("--rber", mo.rber, "derive block rates from this raw bit error rate");
    auto* mo_t = model->add_option("--t", mo.t, "correction strength for the derived path");
    model->add_option("--bch-k", mo.bch_k, "code data bits for the derived path");
    model->add_option("--miss", mo.miss, "fixed-tier miss factor");
    model->add_option("--line-bytes", mo.line_bytes, "cache line bytes");
    model->add_option("--block-bytes", mo.block_bytes, "logical block bytes");
    model->add_flag("--exact", mo.exact, "exact rational enumeration (n <= 20)");
    model->add_option("-o,--out", mo.out, "write the report to this file (plus a manifest)");

    // design + sweeps
    design_opts dso;
    auto* design = app.add_subcommand("design", "cheapest correction strength meeting a target");
    design->configurable(true);
    auto add_design_inputs = [&](CLI::App* a) {
        a->add_option("--k", dso.k, "code data bits");
        a->add_option("--rber", dso.rber, "raw bit error rate");
        a->add_option("--fixed-overhead", dso.fixed_overhead, "fixed-tier overhead fraction");
        a->add_option("--miss", dso.miss, "fixed-tier miss factor");
        a->add_option("--p-c-nde", dso.p_c_nde, "per-cache-line silent-error rate");
        a->add_option("--line-bytes", dso.line_bytes, "cache line bytes");
        a->add_option("--block-bytes", dso.block_bytes, "logical block bytes");
        a->add_option("-o,--out", dso.out, "write results here (plus a manifest)");
    };
    design->add_option("--scheme", dso.scheme, "rep or ec")->check(CLI::IsMember({"rep", "ec"}));
    design->add_option("--ec-k", dso.ec_k, "ec data fragments");
    auto* ds_n = design->add_option("--n", dso.n, "replicas, or total fragments for ec");
    auto* ds_target = design->add_option("--target-due", dso.target_due, "logical-block DUE target");
    design->add_option("--target-nde", dso.target_nde, "logical-block silent-error target");
    design->add_option("--t-max", dso.t_max, "largest correction strength to consider");
    add_design_inputs(design);

    auto* sw_due = design->add_subcommand("sweep-due", "reliability vs t for the reference schemes");
    sw_due->configurable(true);
    sw_due->add_option("--t-range", dso.t_range, "LO..HI correction strengths");
    add_design_inputs(sw_due);

    auto* sw_rep = design->add_subcommand("sweep-replicas", "optimized overhead vs replica count");
    sw_rep->configurable(true);
    sw_rep->add_option("--target-due", dso.target_due, "logical-block DUE target")->required();
    sw_rep->add_option("--target-nde", dso.target_nde, "logical-block silent-error target");
    sw_rep->add_option("--n-range", dso.n_range, "LO..HI replica counts");
    sw_rep->add_option("--t-max", dso.t_max, "largest correction strength to consider");
    add_design_inputs(sw_rep);

    auto* sw_rber = design->add_subcommand("sweep-rber",
                                           "single vs redundant optimized overhead across error rates");
    sw_rber->configurable(true);
    sw_rber->add_option("--target-due", dso.target_due, "logical-block DUE target")->required();
    sw_rber->add_option("--target-nde", dso.target_nde, "logical-block silent-error target");
    sw_rber->add_option("--scheme", dso.scheme, "rep or ec")->check(CLI::IsMember({"rep", "ec"}));
    sw_rber->add_option("--ec-k", dso.ec_k, "ec data fragments");
    auto* ds_n2 = sw_rber->add_option("--n", dso.n, "replicas, or total fragments for ec");
    sw_rber->add_option("--rber-list", dso.rber_list, "comma-separated raw bit error rates");
    sw_rber->add_option("--t-max", dso.t_max, "largest correction strength to consider");
    add_design_inputs(sw_rber);

    // simulate
    simulate_opts so;
    so.seed = seed_default;
    so.workers = workers_default;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo block-read trials vs the formulas");
    simulate->configurable(true);
    simulate->add_option("--scheme", so.scheme, "rep or ec")->check(CLI::IsMember({"rep", "ec"}));
    auto* so_n = simulate->add_option("--n", so.n, "replicas, or total fragments for ec");
    simulate->add_option("--k", so.k, "ec data fragments");
    simulate->add_option("--p", so.p, "per-block DUE probability")->required();
    simulate->add_option("--q", so.q, "per-block silent-error probability");
    simulate->add_option("--trials", so.trials, "trial count");
    simulate->add_option("--seed", so.seed, "PRNG seed (default: MEMPROT_SEED or 0)");
    simulate->add_option("--workers", so.workers, "threads (default: MEMPROT_WORKERS or 4)");
    simulate->add_option("-o,--out", so.out, "write the report here (plus a manifest)");

    // racksim
    racksim_opts ro;
    ro.seed = seed_default;
    ro.workers = workers_default;
    auto* racksim = app.add_subcommand("racksim", "deterministic rack-scale request simulator");
    racksim->configurable(true);
    racksim->add_option("--scheme", ro.scheme, "rep or ec")->check(CLI::IsMember({"rep", "ec"}));
    auto* ro_n = racksim->add_option("--n", ro.n, "replicas, or total fragments for ec");
    racksim->add_option("--ec-k", ro.ec_k, "ec data fragments");
    racksim->add_option("--due-rate", ro.due_rate, "DUE probability per physical-block access");
    racksim->add_option("--nodes", ro.nodes, "memory nodes");
    racksim->add_option("--bandwidth", ro.bandwidth, "link bandwidth, bytes/s per direction");
    racksim->add_option("--base-op", ro.base_op, "one-sided op latency, seconds");
    racksim->add_option("--cpu-page", ro.cpu_page, "serialized page-fault CPU cost, seconds");
    racksim->add_option("--hit-ratio", ro.hit_ratio, "local hit fraction");
    racksim->add_option("--hit-latency", ro.hit_latency, "local hit latency, seconds");
    racksim->add_option("--dirty-ratio", ro.dirty_ratio, "evictions needing writeback");
    racksim->add_option("--page-bytes", ro.page_bytes, "page size");
    racksim->add_option("--footprint", ro.footprint, "remote footprint, bytes");
    racksim->add_option("--mode", ro.mode, "open or closed")->check(CLI::IsMember({"open", "closed"}));
    racksim->add_option("--rate", ro.rate, "open-loop arrival rate, 1/s");
    racksim->add_option("--clients", ro.clients, "closed-loop client count");
    racksim->add_option("--think", ro.think, "closed-loop think time, seconds");
    racksim->add_option("--duration", ro.duration, "measurement window, seconds");
    racksim->add_option("--mce-typical", ro.mce_typical, "machine-check stall, typical seconds");
    racksim->add_option("--mce-spike", ro.mce_spike, "machine-check stall, spike seconds");
    racksim->add_option("--mce-spike-prob", ro.mce_spike_prob, "spike probability");
    racksim->add_option("--seed", ro.seed, "PRNG seed (default: MEMPROT_SEED or 0)");
    racksim->add_option("--workers", ro.workers, "threads for sweeps (default: MEMPROT_WORKERS or 4)");
    racksim->add_option("--trace", ro.trace, "write a per-request trace to this file");
    racksim->add_option("--sweep-due", ro.sweep, "LO..HI DUE-rate decades, plus a zero baseline row");
    racksim->add_flag("--compare", ro.compare,
                      "paired rep3 vs ec4_6 run under the bandwidth-bound comparison profile");
    racksim->add_option("-o,--out", ro.out, "write CSV or report here (plus a manifest)");

    // replay
    std::string manifest_path;
    auto* replay = app.add_subcommand("replay", "re-run a manifest and verify output checksums");
    replay->add_option("manifest", manifest_path, "path to a .manifest file")->required();

    std::vector<std::string> argv_storage;
    argv_storage.reserve(tokens.size() + 1);
    argv_storage.push_back("memprot");
    for (const auto& t : tokens) argv_storage.push_back(t);
    std::vector<const char*> argv;
    for (const auto& t : argv_storage) argv.push_back(t.c_str());

    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (app.got_subcommand(model))
        return run_model(mo, mo_n->count() > 0, mo_due->count() > 0, mo_rber->count() > 0,
                         mo_t->count() > 0);
    if (app.got_subcommand(design)) {
        if (design->got_subcommand(sw_due)) return run_sweep_due(dso);
        if (design->got_subcommand(sw_rep)) return run_sweep_replicas(dso);
        if (design->got_subcommand(sw_rber)) return run_sweep_rber(dso, ds_n2->count() > 0);
        return run_design(dso, ds_n->count() > 0, ds_target->count() > 0);
    }
    if (app.got_subcommand(simulate)) return run_simulate(so, so_n->count() > 0);
    if (app.got_subcommand(racksim)) return run_racksim(ro, ro_n->count() > 0);
    if (app.got_subcommand(replay)) return run_replay(manifest_path);
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> tokens;
    for (int i = 1; i < argc; ++i) tokens.emplace_back(argv[i]);
    try {
        return dispatch(tokens);
    } catch (const usage_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
