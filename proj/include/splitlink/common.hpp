#pragma once
// Shared plumbing: error taxonomy, deterministic RNG and seed derivation,
// string normalization, big-endian byte packing, chunked parallel-for.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace splitlink {

// Bad flags, unknown attribute names, invalid hyperparameters.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent data: files, shapes, degenerate inputs.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AbortKind { AgreementMismatch, ProtocolViolation, TransportError };

inline const char* abort_kind_name(AbortKind k) {
  switch (k) {
    case AbortKind::AgreementMismatch: return "agreement mismatch";
    case AbortKind::ProtocolViolation: return "protocol violation";
    case AbortKind::TransportError: return "transport error";
  }
  return "unknown";
}

// A two-party session abort; kind() selects the failure class.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(AbortKind kind, const std::string& msg)
      : std::runtime_error(std::string(abort_kind_name(kind)) + ": " + msg), kind_(kind) {}
  AbortKind kind() const { return kind_; }

 private:
  AbortKind kind_;
};

// ---------------------------------------------------------------------------
// String normalization. Attribute values are compared case-folded: surrounding
// ASCII whitespace is trimmed and a-z is upcased. Non-ASCII bytes pass through.

inline std::string normalize_value(std::string_view raw) {
  size_t begin = 0, end = raw.size();
  auto is_space = [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
  };
  while (begin < end && is_space(static_cast<unsigned char>(raw[begin]))) ++begin;
  while (end > begin && is_space(static_cast<unsigned char>(raw[end - 1]))) --end;
  std::string out;
  out.reserve(end - begin);
  for (size_t i = begin; i < end; ++i) {
    char c = raw[i];
    out.push_back(c >= 'a' && c <= 'z' ? static_cast<char>(c - 'a' + 'A') : c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Seeding. All randomness in the toolkit flows from one base seed through
// these mixers, so runs are reproducible and sub-tasks (per record, per
// repetition, per purpose) draw from independent streams.

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  return splitmix64(splitmix64(seed) ^ salt);
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline uint64_t derive_seed(uint64_t seed, std::string_view tag) {
  return mix_seed(seed, fnv1a64(tag));
}

// Deterministic generator: mt19937_64 output is pinned by the standard; the
// distributions below are hand-rolled because the std ones are not.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  // Unbiased draw from [0, n).
  uint64_t below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      uint64_t r = engine_();
      if (r >= threshold) return r % n;
    }
  }

  size_t index(size_t n) { return static_cast<size_t>(below(n)); }

  // Uniform index in [0, n) excluding one value; requires n >= 2.
  size_t index_excluding(size_t n, size_t excluded) {
    if (n < 2) throw std::invalid_argument("Rng::index_excluding: n must be >= 2");
    size_t r = static_cast<size_t>(below(n - 1));
    return r < excluded ? r : r + 1;
  }

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Big-endian byte packing for the wire and model formats.

inline void append_u8(std::vector<uint8_t>& out, uint8_t v) { out.push_back(v); }

inline void append_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v & 0xFF));
}

inline void append_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8)
    out.push_back(static_cast<uint8_t>((v >> shift) & 0xFF));
}

inline void append_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8)
    out.push_back(static_cast<uint8_t>((v >> shift) & 0xFF));
}

inline void append_f64(std::vector<uint8_t>& out, double v) {
  append_u64(out, std::bit_cast<uint64_t>(v));
}

// Thrown by ByteReader on short reads; codecs translate it into their own
// truncation variants.
class ByteUnderflow : public std::runtime_error {
 public:
  explicit ByteUnderflow(const std::string& what) : std::runtime_error(what) {}
};

class ByteReader {
 public:
  ByteReader(const uint8_t* data, size_t size) : data_(data), size_(size) {}

  size_t remaining() const { return size_ - pos_; }
  bool done() const { return pos_ == size_; }

  uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  uint16_t u16() {
    need(2);
    uint16_t v = static_cast<uint16_t>((uint16_t{data_[pos_]} << 8) | data_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_ + i];
    pos_ += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_ + i];
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }

  const uint8_t* bytes(size_t n) {
    need(n);
    const uint8_t* p = data_ + pos_;
    pos_ += n;
    return p;
  }

 private:
  void need(size_t n) const {
    if (size_ - pos_ < n) throw ByteUnderflow("byte stream ends early");
  }
  const uint8_t* data_;
  size_t size_;
  size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Chunked parallel-for over [0, n): fn(i) runs once per index, partitioned
// into contiguous ranges across workers. Callers must write disjoint output
// slots so results are independent of the worker count. Degrades to a plain
// loop on single-core hosts.

template <typename Fn>
void parallel_for(size_t n, Fn&& fn, unsigned max_threads = 0) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  unsigned threads = max_threads == 0 ? hw : std::min(hw, max_threads);
  if (threads > n) threads = static_cast<unsigned>(n);
  if (threads <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    size_t begin = t * chunk;
    size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace splitlink
