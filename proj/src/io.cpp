#include "memprot/io.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace memprot {

std::string format_sci(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

std::string format_full(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

uint64_t fnv1a64(const void* data, size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = 14695981039346656037ull;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)v);
    return buf;
}

csv_table::csv_table(std::vector<std::string> header) : header_(std::move(header)) {}

void csv_table::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
        throw std::invalid_argument("csv_table: row arity does not match header");
    rows_.push_back(std::move(cells));
}

std::string csv_table::to_string() const {
    std::ostringstream out;
    for (size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << header_[i];
    out << "\n";
    for (const auto& row : rows_) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    return out.str();
}

void run_manifest::set(const std::string& key, const std::string& value) {
    if (key.empty() || key.find('=') != std::string::npos || key.find('\n') != std::string::npos)
        throw std::invalid_argument("run_manifest: bad key");
    if (value.find('\n') != std::string::npos)
        throw std::invalid_argument("run_manifest: value must be single-line");
    for (auto& kv : kv_) {
        if (kv.first == key) {
            kv.second = value;
            return;
        }
    }
    kv_.emplace_back(key, value);
}

bool run_manifest::has(const std::string& key) const {
    for (const auto& kv : kv_)
        if (kv.first == key) return true;
    return false;
}

const std::string& run_manifest::get(const std::string& key) const {
    for (const auto& kv : kv_)
        if (kv.first == key) return kv.second;
    throw std::out_of_range("run_manifest: missing key " + key);
}

std::string run_manifest::to_string() const {
    std::string out;
    for (const auto& [k, v] : kv_) out += k + "=" + v + "\n";
    return out;
}

run_manifest run_manifest::parse(const std::string& text) {
    run_manifest m;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::invalid_argument("run_manifest: bad line: " + line);
        m.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return m;
}

void run_manifest::write_file(const std::string& path) const {
    write_text_file(path, to_string());
}

run_manifest run_manifest::read_file(const std::string& path) {
    return parse(read_text_file(path));
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(text.data(), std::streamsize(text.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void parallel_for(uint64_t count, unsigned workers, const std::function<void(uint64_t)>& fn) {
    workers = std::max(1u, workers);
    if (count == 0) return;
    if (workers == 1 || count == 1) {
        for (uint64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    workers = unsigned(std::min<uint64_t>(workers, count));
    std::atomic<uint64_t> next{0};
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                uint64_t i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failed.load()) throw std::runtime_error("parallel_for: a task failed");
}

namespace {

bool env_u64(const char* name, uint64_t& out) {
    const char* v = std::getenv(name);
    if (!v || !*v) return false;
    char* end = nullptr;
    unsigned long long parsed = std::strtoull(v, &end, 10);
    if (end == v || *end != '\0') return false;
    out = parsed;
    return true;
}

}  // namespace

uint64_t env_seed(uint64_t fallback) {
    uint64_t v;
    return env_u64("MEMPROT_SEED", v) ? v : fallback;
}

unsigned env_workers(unsigned fallback) {
    uint64_t v;
    if (!env_u64("MEMPROT_WORKERS", v) || v == 0 || v > 1024) return fallback;
    return unsigned(v);
}

}  // namespace memprot
