// glibc malloc interposition: every allocation in the process is checked
// against rdmd::memory's cap and counted in its live-heap total.

#include "rdmd/memory_cap.hpp"

#include <cerrno>
#include <cstddef>
#include <malloc.h>

namespace {

using namespace rdmd::memory::detail;

void* track(void* p) noexcept {
  if (p != nullptr) granted(malloc_usable_size(p));
  return p;
}

}  // namespace

extern "C" {
void* __libc_malloc(std::size_t);
void* __libc_calloc(std::size_t, std::size_t);
void* __libc_realloc(void*, std::size_t);
void* __libc_memalign(std::size_t, std::size_t);
void __libc_free(void*);

void* malloc(std::size_t size) {
  if (!permit(size)) {
    errno = ENOMEM;
    return nullptr;
  }
  return track(__libc_malloc(size));
}

void free(void* ptr) {
  if (ptr == nullptr) return;
  released(malloc_usable_size(ptr));
  __libc_free(ptr);
}

void* calloc(std::size_t count, std::size_t size) {
  if (size != 0 && count > static_cast<std::size_t>(-1) / size) {
    errno = ENOMEM;
    return nullptr;
  }
  if (!permit(count * size)) {
    errno = ENOMEM;
    return nullptr;
  }
  return track(__libc_calloc(count, size));
}

void* realloc(void* ptr, std::size_t size) {
  if (ptr == nullptr) return malloc(size);
  if (size == 0) {
    free(ptr);
    return nullptr;
  }
  const std::size_t old = malloc_usable_size(ptr);
  if (size > old && !permit(size)) {
    errno = ENOMEM;
    return nullptr;
  }
  void* p = __libc_realloc(ptr, size);
  if (p == nullptr) return nullptr;
  released(old);
  return track(p);
}

void* memalign(std::size_t alignment, std::size_t size) {
  if (!permit(size)) {
    errno = ENOMEM;
    return nullptr;
  }
  return track(__libc_memalign(alignment, size));
}

void* aligned_alloc(std::size_t alignment, std::size_t size) { return memalign(alignment, size); }

int posix_memalign(void** out, std::size_t alignment, std::size_t size) {
  void* p = memalign(alignment, size);
  if (p == nullptr && size != 0) return ENOMEM;
  *out = p;
  return 0;
}

void* valloc(std::size_t size) { return memalign(4096, size); }
}

namespace {

struct HookRegistration {
  HookRegistration() { mark_hook_installed(); }
};

const HookRegistration registration;

}  // namespace
