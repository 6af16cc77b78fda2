#pragma once

#include <cstddef>

// Process-wide heap accounting backing --memory-cap. The counters live in the
// library; enforcement needs the malloc interposer (rdmd_malloc_hook), which
// only executables link.
namespace rdmd::memory {

/// Largest single allocation, in bytes, that will be granted. 0 disables.
void set_allocation_cap(std::size_t bytes);
std::size_t allocation_cap();

/// True once any allocation was refused because of the cap.
bool cap_exceeded();
/// Size of the largest refused allocation.
std::size_t largest_refused();
/// Clears cap_exceeded() and largest_refused().
void clear_refusals();

/// Live heap bytes as seen by the interposer.
std::size_t live_bytes();

/// Starts recording the largest single allocation and the live-heap peak.
void start_tracking();
void stop_tracking();
std::size_t largest_tracked();
/// Highest live-heap total observed while tracking.
std::size_t peak_tracked();

void reset();

/// True when the interposer is linked into this process.
bool hook_installed();

namespace detail {
// Called from the interposed allocator; none of these allocate.
bool permit(std::size_t bytes) noexcept;
void granted(std::size_t usable) noexcept;
void released(std::size_t usable) noexcept;
void mark_hook_installed() noexcept;
}  // namespace detail

/// Sets a cap for the lifetime of the guard and restores the previous one.
class ScopedCap {
 public:
  explicit ScopedCap(std::size_t bytes) : previous_(allocation_cap()) { set_allocation_cap(bytes); }
  ~ScopedCap() { set_allocation_cap(previous_); }
  ScopedCap(const ScopedCap&) = delete;
  ScopedCap& operator=(const ScopedCap&) = delete;

 private:
  std::size_t previous_;
};

}  // namespace rdmd::memory
