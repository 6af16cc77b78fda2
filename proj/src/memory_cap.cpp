#include "rdmd/memory_cap.hpp"

#include <atomic>
#include <cstdint>

namespace rdmd::memory {

namespace {

std::atomic<std::size_t> g_cap{0};
std::atomic<bool> g_exceeded{false};
std::atomic<std::size_t> g_largest_refused{0};
std::atomic<bool> g_tracking{false};
std::atomic<std::size_t> g_largest_tracked{0};
std::atomic<std::size_t> g_peak_tracked{0};
// Signed: blocks obtained before the interposer saw them may be freed through it.
std::atomic<std::int64_t> g_live{0};
std::atomic<bool> g_hook{false};

void raise_to(std::atomic<std::size_t>& slot, std::size_t value) noexcept {
  std::size_t current = slot.load(std::memory_order_relaxed);
  while (value > current && !slot.compare_exchange_weak(current, value, std::memory_order_relaxed)) {
  }
}

std::size_t live_now() noexcept {
  const std::int64_t live = g_live.load(std::memory_order_relaxed);
  return live > 0 ? static_cast<std::size_t>(live) : 0;
}

}  // namespace

void set_allocation_cap(std::size_t bytes) { g_cap.store(bytes); }
std::size_t allocation_cap() { return g_cap.load(); }
bool cap_exceeded() { return g_exceeded.load(); }
std::size_t largest_refused() { return g_largest_refused.load(); }
void clear_refusals() {
  g_exceeded.store(false);
  g_largest_refused.store(0);
}
std::size_t live_bytes() { return live_now(); }

void start_tracking() {
  g_largest_tracked.store(0);
  g_peak_tracked.store(live_now());
  g_tracking.store(true);
}
void stop_tracking() { g_tracking.store(false); }
std::size_t largest_tracked() { return g_largest_tracked.load(); }
std::size_t peak_tracked() { return g_peak_tracked.load(); }

void reset() {
  g_cap.store(0);
  g_exceeded.store(false);
  g_largest_refused.store(0);
  g_tracking.store(false);
  g_largest_tracked.store(0);
  g_peak_tracked.store(0);
}

bool hook_installed() { return g_hook.load(); }

namespace detail {

bool permit(std::size_t bytes) noexcept {
  const std::size_t cap = g_cap.load(std::memory_order_relaxed);
  if (cap != 0 && bytes > cap) {
    g_exceeded.store(true, std::memory_order_relaxed);
    raise_to(g_largest_refused, bytes);
    return false;
  }
  if (g_tracking.load(std::memory_order_relaxed)) raise_to(g_largest_tracked, bytes);
  return true;
}

void granted(std::size_t usable) noexcept {
  const std::int64_t live = g_live.fetch_add(static_cast<std::int64_t>(usable), std::memory_order_relaxed) +
                            static_cast<std::int64_t>(usable);
  if (g_tracking.load(std::memory_order_relaxed) && live > 0) raise_to(g_peak_tracked, static_cast<std::size_t>(live));
}

void released(std::size_t usable) noexcept {
  g_live.fetch_sub(static_cast<std::int64_t>(usable), std::memory_order_relaxed);
}

void mark_hook_installed() noexcept { g_hook.store(true); }

}  // namespace detail

}  // namespace rdmd::memory
