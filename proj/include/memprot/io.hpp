#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace memprot {

// 9 significant digits, scientific; enough to spot 1e-33-scale values without
// pretending doubles carry more. Full round-trip form for manifests.
std::string format_sci(double v);
std::string format_full(double v);

uint64_t fnv1a64(const void* data, size_t len);
uint64_t fnv1a64(const std::string& s);
std::string hex64(uint64_t v);

// CSV with a fixed header; cells arrive already formatted.
class csv_table {
  public:
    explicit csv_table(std::vector<std::string> header);
    void add_row(std::vector<std::string> cells);
    std::string to_string() const;

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Flat key=value run record: the command, every resolved parameter, and the
// checksum of every output file. Reapplying the recorded parameters must
// reproduce the checksums bit for bit.
class run_manifest {
  public:
    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;  // throws if missing
    const std::vector<std::pair<std::string, std::string>>& entries() const { return kv_; }

    std::string to_string() const;
    static run_manifest parse(const std::string& text);

    void write_file(const std::string& path) const;
    static run_manifest read_file(const std::string& path);

  private:
    std::vector<std::pair<std::string, std::string>> kv_;  // insertion order
};

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// fn(i) for i in [0, count), spread over up to `workers` threads. Callers get
// determinism by writing result slot i, never by relying on order.
void parallel_for(uint64_t count, unsigned workers, const std::function<void(uint64_t)>& fn);

// MEMPROT_SEED / MEMPROT_WORKERS environment defaults; flags beat these.
uint64_t env_seed(uint64_t fallback);
unsigned env_workers(unsigned fallback);

}  // namespace memprot
