#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels/tables.hpp"

namespace sopm::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(SOPM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* initial_table() {
    const char* forced = std::getenv("SOPM_KERNELS");
    if (forced != nullptr && std::string(forced) == "scalar") return &detail::kScalarTable;
#if defined(SOPM_HAVE_AVX2)
    if (cpu_has_avx2()) return &detail::kAvx2Table;
#endif
    return &detail::kScalarTable;
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

const KernelTable& scalar_table() { return detail::kScalarTable; }

std::optional<std::reference_wrapper<const KernelTable>> avx2_table() {
#if defined(SOPM_HAVE_AVX2)
    if (cpu_has_avx2()) return std::cref(detail::kAvx2Table);
#endif
    return std::nullopt;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

Backend active_backend() { return active().backend; }

bool set_backend(Backend backend) {
    if (backend == Backend::Scalar) {
        current().store(&detail::kScalarTable, std::memory_order_release);
        return true;
    }
    if (auto table = avx2_table()) {
        current().store(&table->get(), std::memory_order_release);
        return true;
    }
    return false;
}

std::string_view backend_name(Backend backend) {
    return backend == Backend::Scalar ? "scalar" : "avx2";
}

}  // namespace sopm::kernels
