#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace sparsekit {

/// Deterministic RNG. mt19937_64 output is standardized, and we scale bits
/// explicitly instead of going through std::uniform_real_distribution, whose
/// draw sequence is implementation-defined.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // value in [0, 1)
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }

  private:
    std::mt19937_64 gen_;
};

/// Shortest round-trip decimal form of a double (std::to_chars).
std::string format_double(double v);

std::vector<std::string> read_lines(const std::string& path);
std::string read_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Thread count used by parallel_for: SPARSEKIT_THREADS if set, else
/// hardware_concurrency, else 1.
unsigned thread_count();

/// Runs fn(0..n-1), possibly on several threads. Callers keep determinism by
/// writing into pre-sized slots indexed by i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace sparsekit
