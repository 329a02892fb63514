#include "hivp/instrument.hpp"

#include <algorithm>
#include <utility>

namespace hivp::instrument {

Counters& counters() {
  thread_local Counters c;
  return c;
}

PeakScope::PeakScope()
    : baseline_(counters().live_bytes), saved_peak_(counters().peak_bytes) {
  counters().peak_bytes = baseline_;
}

PeakScope::~PeakScope() {
  counters().peak_bytes = std::max(saved_peak_, counters().peak_bytes);
}

std::int64_t PeakScope::peak() const { return counters().peak_bytes - baseline_; }

namespace {
void charge(std::int64_t bytes) {
  auto& c = counters();
  c.live_bytes += bytes;
  c.peak_bytes = std::max(c.peak_bytes, c.live_bytes);
}
}  // namespace

TrackedBytes::TrackedBytes(std::int64_t bytes) : bytes_(bytes) { charge(bytes_); }

TrackedBytes::TrackedBytes(const TrackedBytes& other) : bytes_(other.bytes_) {
  charge(bytes_);
}

TrackedBytes::TrackedBytes(TrackedBytes&& other) noexcept
    : bytes_(std::exchange(other.bytes_, 0)) {}

TrackedBytes& TrackedBytes::operator=(const TrackedBytes& other) {
  if (this != &other) reset(other.bytes_);
  return *this;
}

TrackedBytes& TrackedBytes::operator=(TrackedBytes&& other) noexcept {
  if (this != &other) {
    counters().live_bytes -= bytes_;
    bytes_ = std::exchange(other.bytes_, 0);
  }
  return *this;
}

TrackedBytes::~TrackedBytes() { counters().live_bytes -= bytes_; }

void TrackedBytes::reset(std::int64_t bytes) {
  counters().live_bytes -= bytes_;
  bytes_ = bytes;
  charge(bytes_);
}

}  // namespace hivp::instrument
