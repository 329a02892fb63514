#pragma once

#include <cstdint>

namespace hivp::instrument {

// Per-thread operation and storage counters. Kernels in this library report
// the floating point operations they perform; structured containers report
// the bytes of block storage they own for as long as they are alive.
struct Counters {
  std::uint64_t flops = 0;
  std::int64_t live_bytes = 0;
  std::int64_t peak_bytes = 0;
};

Counters& counters();

inline void add_flops(std::uint64_t n) { counters().flops += n; }

// Flops performed on this thread since construction.
class FlopScope {
 public:
  FlopScope() : start_(counters().flops) {}
  std::uint64_t count() const { return counters().flops - start_; }

 private:
  std::uint64_t start_;
};

// Peak live block storage on this thread since construction, measured above
// the live level at construction.
class PeakScope {
 public:
  PeakScope();
  ~PeakScope();
  PeakScope(const PeakScope&) = delete;
  PeakScope& operator=(const PeakScope&) = delete;

  std::int64_t peak() const;

 private:
  std::int64_t baseline_;
  std::int64_t saved_peak_;
};

// Registers a byte count with the thread's live-storage counter for its
// lifetime. Copies register again; moves transfer.
class TrackedBytes {
 public:
  TrackedBytes() = default;
  explicit TrackedBytes(std::int64_t bytes);
  TrackedBytes(const TrackedBytes& other);
  TrackedBytes(TrackedBytes&& other) noexcept;
  TrackedBytes& operator=(const TrackedBytes& other);
  TrackedBytes& operator=(TrackedBytes&& other) noexcept;
  ~TrackedBytes();

  std::int64_t bytes() const { return bytes_; }
  void reset(std::int64_t bytes);

 private:
  std::int64_t bytes_ = 0;
};

}  // namespace hivp::instrument
