#include "memprot/racksim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <queue>
#include <stdexcept>
#include <unordered_set>

#include "memprot/philox.hpp"

namespace memprot {

namespace {

// Philox stream ids; draws are addressed (stream, request, code) so replays
// and scheme comparisons under one seed read identical randomness.
enum stream_id : uint64_t {
    s_arrival = 0,
    s_due = 1,
    s_mce = 2,
    s_page = 3,
    s_hit = 4,
    s_dirty = 5,
};

// Write-path DUE draws live above the read slots in code space.
constexpr uint64_t write_code_base = 256;

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

void validate(const sim_config& cfg) {
    require(cfg.due_rate >= 0.0 && cfg.due_rate <= 1.0, "sim_config: due_rate outside [0,1]");
    require(cfg.local_hit_ratio >= 0.0 && cfg.local_hit_ratio <= 1.0,
            "sim_config: local_hit_ratio outside [0,1]");
    require(cfg.dirty_ratio >= 0.0 && cfg.dirty_ratio <= 1.0,
            "sim_config: dirty_ratio outside [0,1]");
    require(cfg.mce.spike_prob >= 0.0 && cfg.mce.spike_prob <= 1.0,
            "sim_config: mce spike_prob outside [0,1]");
    require(cfg.mce.typical >= 0.0 && cfg.mce.spike >= 0.0, "sim_config: negative mce cost");
    require(cfg.link_bandwidth > 0.0, "sim_config: link_bandwidth must be > 0");
    require(cfg.duration > 0.0, "sim_config: duration must be > 0");
    require(cfg.base_op_latency >= 0.0 && cfg.cpu_page_cost >= 0.0 &&
                cfg.local_hit_latency >= 0.0 && cfg.think_time >= 0.0,
            "sim_config: negative latency parameter");
    require(cfg.page_bytes > 0 && cfg.footprint_bytes >= cfg.page_bytes,
            "sim_config: footprint smaller than a page");
    if (cfg.mode == workload_mode::open_loop)
        require(cfg.request_rate > 0.0, "sim_config: open loop needs request_rate > 0");
    else
        require(cfg.clients >= 1, "sim_config: closed loop needs clients >= 1");
}

// Serialized resource (a link direction, or the compute node's CPU): a
// booking starts no earlier than both its ready time and the clock, and the
// clock only moves forward, which keeps the whole simulation causal without
// an event heap.
struct resource {
    double free = 0.0;
    double busy = 0.0;     // overlap with the measurement window
    double horizon = 0.0;  // window length, for the busy clamp

    double next(double ready) const { return std::max(ready, free); }

    void occupy(double start, double dur) {
        free = start + dur;
        busy += std::max(0.0, std::min(free, horizon) - std::min(start, horizon));
    }

    double book(double ready, double dur) {
        double start = next(ready);
        occupy(start, dur);
        return start;
    }
};

// A transfer holds both the sender and the receiver side for its duration.
double book_pair(resource& a, resource& b, double ready, double dur) {
    double start = std::max(a.next(ready), b.next(ready));
    a.occupy(start, dur);
    b.occupy(start, dur);
    return start;
}

struct outcome {
    bool ok;
    double end;  // completion, or the time the failure was established
    uint32_t stalls;
    uint32_t retries;
    bool hit = false;
};

class engine {
  public:
    explicit engine(const sim_config& cfg)
        : cfg_(cfg),
          arrival_gen_(cfg.seed, s_arrival),
          due_gen_(cfg.seed, s_due),
          mce_gen_(cfg.seed, s_mce),
          page_gen_(cfg.seed, s_page),
          hit_gen_(cfg.seed, s_hit),
          dirty_gen_(cfg.seed, s_dirty) {
        if (const auto* ec = std::get_if<erasure_code>(&cfg.scheme)) {
            require(ec->k >= 1 && ec->n >= ec->k, "sim_config: need 1 <= K <= N");
            slots_ = ec->n;
            need_ = ec->k;
            require(cfg.page_bytes % uint32_t(ec->k) == 0,
                    "sim_config: page not divisible into K fragments");
            block_bytes_ = cfg.page_bytes / uint32_t(ec->k);
        } else {
            slots_ = std::get<replication>(cfg.scheme).n;
            require(slots_ >= 1, "sim_config: need N >= 1");
            need_ = 1;
            block_bytes_ = cfg.page_bytes;
        }
        require(cfg.nodes >= slots_, "sim_config: fewer nodes than replicas/fragments");
        num_pages_ = cfg.footprint_bytes / cfg.page_bytes;
        transfer_ = double(block_bytes_) / cfg.link_bandwidth;
        cpu_.horizon = cn_in_.horizon = cn_out_.horizon = cfg.duration;
        node_up_.assign(cfg.nodes, resource{0, 0, cfg.duration});
        node_down_.assign(cfg.nodes, resource{0, 0, cfg.duration});
        if (!cfg.trace_path.empty()) {
            trace_.open(cfg.trace_path);
            require(trace_.is_open(), "sim_config: cannot open trace_path");
        }
    }

    sim_report run() {
        if (cfg_.mode == workload_mode::open_loop)
            run_open();
        else
            run_closed();
        return summarize();
    }

  private:
    double draw(const philox4x64& gen, uint64_t a, uint64_t b) {
        return u64_to_unit(gen({a, b, 0, 0})[0]);
    }

    bool draw_due(uint64_t req, uint64_t code) {
        ++report_.due_draws;
        bool hit = draw(due_gen_, req, code) < cfg_.due_rate;
        report_.due_hits += hit;
        return hit;
    }

    double stall(uint64_t req, uint32_t& seq, double detected) {
        double dur = draw(mce_gen_, req, seq++) < cfg_.mce.spike_prob ? cfg_.mce.spike
                                                                      : cfg_.mce.typical;
        ++report_.mce_count;
        // A machine check freezes the compute node: everything queued behind
        // the CPU waits it out.
        return cpu_.book(detected, dur) + dur;
    }

    uint64_t page_of(double u) const {
        auto p = uint64_t(u * double(num_pages_));
        return std::min(p, num_pages_ - 1);
    }

    int node_of(uint64_t page, int slot) const { return int((page + uint64_t(slot)) % uint64_t(cfg_.nodes)); }

    bool listed(uint64_t page, int slot) const {
        return blacklist_.count(page * 64 + uint64_t(slot)) != 0;
    }

    void list(uint64_t page, int slot) { blacklist_.insert(page * 64 + uint64_t(slot)); }

    // Evicted dirty page goes out to every live replica/fragment slot before
    // the incoming read is issued: the page frame must drain through the
    // egress NIC first, which is what backpressures the miss path when the
    // uplink saturates. Write faults cost a machine check and blacklist the
    // copy, but there is no write retry.
    double writeback(uint64_t req, double ready, uint32_t& stalls, uint32_t& mce_seq) {
        if (draw(dirty_gen_, req, 0) >= cfg_.dirty_ratio) return ready;
        uint64_t victim = page_of(draw(page_gen_, req, 1));
        double gate = ready;
        for (int slot = 0; slot < slots_; ++slot) {
            if (listed(victim, slot)) continue;
            resource& down = node_down_[node_of(victim, slot)];
            double start = book_pair(cn_out_, down, ready, transfer_);
            double end = start + transfer_;
            gate = std::max(gate, end);
            if (draw_due(req, write_code_base + uint64_t(slot))) {
                list(victim, slot);
                stall(req, mce_seq, end + cfg_.base_op_latency);
                ++stalls;
            }
        }
        return gate;
    }

    outcome process(uint64_t req, double arrival) {
        if (draw(hit_gen_, req, 0) < cfg_.local_hit_ratio)
            return {true, arrival + cfg_.local_hit_latency, 0, 0, true};

        uint64_t page = page_of(draw(page_gen_, req, 0));
        double ready = cpu_.book(arrival, cfg_.cpu_page_cost) + cfg_.cpu_page_cost;
        uint32_t stalls = 0, retries = 0, mce_seq = 0;
        ready = writeback(req, ready, stalls, mce_seq);

        // Read path: dispatch tokens start at `ready`; a faulted block hands
        // its token back at the end of the machine-check stall, and the next
        // untried slot picks it up (the replacement read).
        std::deque<double> tokens;
        for (int i = 0; i < need_; ++i) tokens.push_back(ready);
        int got = 0, tried = 0;
        double done = ready, last_event = ready;
        for (int slot = 0; slot < slots_ && got < need_; ++slot) {
            if (listed(page, slot)) continue;
            double dispatch = tokens.front();
            tokens.pop_front();
            if (++tried > need_) ++retries;
            if (draw_due(req, uint64_t(slot))) {
                list(page, slot);
                // The error response arrives without moving page data.
                double end = stall(req, mce_seq, dispatch + cfg_.base_op_latency);
                tokens.push_back(end);
                last_event = std::max(last_event, end);
                ++stalls;
                continue;
            }
            resource& up = node_up_[node_of(page, slot)];
            double start = book_pair(up, cn_in_, dispatch + cfg_.base_op_latency, transfer_);
            done = std::max(done, start + transfer_);
            last_event = std::max(last_event, done);
            ++got;
        }
        if (got < need_) return {false, last_event, stalls, retries};
        return {true, done, stalls, retries};
    }

    double issue(uint64_t req, double arrival) {
        outcome o = process(req, arrival);
        ++report_.issued;
        report_.extra_replica_reads += o.retries;
        if (o.ok) {
            ++report_.completed;
            if (o.end <= cfg_.duration) ++report_.completed_in_window;
            latencies_.push_back(o.end - arrival);
        } else {
            ++report_.failed;
            if (o.end <= cfg_.duration) ++report_.failed_in_window;
        }
        if (trace_.is_open()) {
            trace_ << "req=" << req << " arrival=" << arrival
                   << " kind=" << (o.ok ? (o.hit ? "hit" : "miss") : "fail")
                   << " end=" << o.end << " latency=" << o.end - arrival
                   << " stalls=" << o.stalls << " retries=" << o.retries << "\n";
        }
        return o.end;
    }

    void run_open() {
        double t = 0.0;
        for (uint64_t req = 0;; ++req) {
            t += -std::log1p(-draw(arrival_gen_, req, 0)) / cfg_.request_rate;
            if (t > cfg_.duration) break;
            issue(req, t);
        }
    }

    void run_closed() {
        using slot = std::pair<double, uint32_t>;  // next issue time, client
        std::priority_queue<slot, std::vector<slot>, std::greater<slot>> idle;
        for (uint32_t c = 0; c < cfg_.clients; ++c) idle.push({0.0, c});
        uint64_t req = 0;
        while (!idle.empty()) {
            auto [t, c] = idle.top();
            idle.pop();
            if (t > cfg_.duration) break;
            double end = issue(req++, t);
            idle.push({end + cfg_.think_time, c});
        }
    }

    sim_report summarize() {
        sim_report& r = report_;
        r.inflight_at_end = r.issued - r.completed_in_window - r.failed_in_window;
        r.qps = double(r.completed_in_window) / cfg_.duration;
        if (!latencies_.empty()) {
            double sum = 0.0;
            for (double l : latencies_) sum += l;
            r.latency_avg = sum / double(latencies_.size());
            std::sort(latencies_.begin(), latencies_.end());
            size_t idx = size_t(std::ceil(0.99 * double(latencies_.size())));
            r.latency_p99 = latencies_[std::min(latencies_.size() - 1, idx == 0 ? 0 : idx - 1)];
        }
        r.cpu_utilization = cpu_.busy / cfg_.duration;
        r.cn_in_utilization = cn_in_.busy / cfg_.duration;
        r.cn_out_utilization = cn_out_.busy / cfg_.duration;
        for (const auto& n : node_up_) r.node_up_utilization.push_back(n.busy / cfg_.duration);
        for (const auto& n : node_down_) r.node_down_utilization.push_back(n.busy / cfg_.duration);
        return r;
    }

    const sim_config& cfg_;
    philox4x64 arrival_gen_, due_gen_, mce_gen_, page_gen_, hit_gen_, dirty_gen_;
    int slots_ = 0, need_ = 0;
    uint32_t block_bytes_ = 0;
    uint64_t num_pages_ = 0;
    double transfer_ = 0.0;
    resource cpu_, cn_in_, cn_out_;
    std::vector<resource> node_up_, node_down_;
    std::unordered_set<uint64_t> blacklist_;
    std::vector<double> latencies_;
    std::ofstream trace_;
    sim_report report_;
};

}  // namespace

sim_report run_racksim(const sim_config& cfg) {
    validate(cfg);
    return engine(cfg).run();
}

std::pair<sim_report, sim_report> compare_schemes(const sim_config& base) {
    sim_config rep = base;
    rep.scheme = replication{3};
    sim_config ec = base;
    ec.scheme = erasure_code{4, 6};
    return {run_racksim(rep), run_racksim(ec)};
}

sim_config scheme_comparison_profile(sim_config base) {
    base.link_bandwidth = 4e8;
    base.dirty_ratio = 1.0;
    base.request_rate = 6e4;
    base.cpu_page_cost = 0.0;
    return base;
}

std::vector<double> mce_cost_model(uint64_t seed, const mce_params& params, uint64_t count) {
    require(params.spike_prob >= 0.0 && params.spike_prob <= 1.0,
            "mce_cost_model: spike_prob outside [0,1]");
    philox4x64 gen(seed, s_mce);
    std::vector<double> samples;
    samples.reserve(count);
    for (uint64_t i = 0; i < count; ++i)
        samples.push_back(u64_to_unit(gen({i, 0, 0, 0})[0]) < params.spike_prob ? params.spike
                                                                                : params.typical);
    return samples;
}

}  // namespace memprot
