#pragma once

#include <charconv>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace metrifract {

// Rejected input or precondition failure; the CLI maps this to exit 1.
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Missing/unreadable files and malformed file contents; CLI exit 2.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ==== deterministic randomness ====

// All randomized operations draw from this; never from
// std::uniform_real_distribution (implementation-defined sequences).
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t bits() { return eng_(); }

  // uniform in [0,1), 53-bit
  double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // uniform in {0, ..., n-1}, unbiased
  uint64_t index(uint64_t n) {
    if (n == 0) throw validation_error("Rng::index: n must be positive");
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t r;
    do {
      r = eng_();
    } while (r >= limit);
    return r % n;
  }

  bool coin() { return (eng_() >> 63) != 0; }

 private:
  std::mt19937_64 eng_;
};

// ==== parallel loops ====

// Splits [0,n) into at most `threads` contiguous chunks; chunk order is the
// merge order, so reductions stay deterministic.
inline std::vector<std::pair<size_t, size_t>> chunk_ranges(size_t n, int threads) {
  std::vector<std::pair<size_t, size_t>> out;
  if (n == 0) return out;
  size_t parts = threads < 1 ? 1 : static_cast<size_t>(threads);
  if (parts > n) parts = n;
  size_t base = n / parts, extra = n % parts, begin = 0;
  for (size_t p = 0; p < parts; ++p) {
    size_t len = base + (p < extra ? 1 : 0);
    out.emplace_back(begin, begin + len);
    begin += len;
  }
  return out;
}

template <class Body>
void parallel_for(size_t n, int threads, Body&& body) {
  auto chunks = chunk_ranges(n, threads);
  if (chunks.size() <= 1) {
    if (!chunks.empty()) body(0, chunks[0].first, chunks[0].second);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(chunks.size());
  for (size_t c = 0; c < chunks.size(); ++c)
    workers.emplace_back([&, c] { body(c, chunks[c].first, chunks[c].second); });
  for (auto& w : workers) w.join();
}

// ==== strict string parsing ====

inline std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(delim, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& raw) {
  std::string s = trim(raw);
  if (s.empty()) throw io_error("empty number");
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw io_error("bad number: '" + raw + "'");
  return v;
}

inline long long parse_int(const std::string& raw) {
  std::string s = trim(raw);
  if (s.empty()) throw io_error("empty integer");
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw io_error("bad integer: '" + raw + "'");
  return v;
}

}  // namespace metrifract
