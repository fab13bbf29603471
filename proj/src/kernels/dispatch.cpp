#include <atomic>
#include <cstdlib>
#include <string>

#include "lipreg/error.hpp"
#include "lipreg/kernels.hpp"

namespace lipreg::kernels {

std::string_view name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool available(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(LIPREG_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const Table& table(Isa isa) {
  if (!available(isa)) {
    throw ParameterError("kernel variant '" + std::string(name(isa)) +
                         "' is not available on this CPU/build");
  }
#if defined(LIPREG_HAVE_AVX2)
  if (isa == Isa::avx2) return detail::avx2_table;
#endif
  return detail::scalar_table;
}

namespace {

const Table* pick() {
  if (const char* env = std::getenv("LIPREG_KERNELS")) {
    const std::string_view v(env);
    if (v == "scalar") return &detail::scalar_table;
    if (v == "avx2") return &table(Isa::avx2);
  }
  if (available(Isa::avx2)) return &table(Isa::avx2);
  return &detail::scalar_table;
}

std::atomic<const Table*>& slot() {
  static std::atomic<const Table*> current{pick()};
  return current;
}

}  // namespace

const Table& active() { return *slot().load(std::memory_order_acquire); }

void force(Isa isa) { slot().store(&table(isa), std::memory_order_release); }

}  // namespace lipreg::kernels
