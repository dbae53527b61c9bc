#include "kernels_internal.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace mixplan::kernels {
namespace {

bool cpu_has_avx2()
{
#if defined(MIXPLAN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* initial_table()
{
    if (const char* env = std::getenv("MIXPLAN_ISA"); env && std::string(env) == "scalar")
        return &scalar_table();
    if (const KernelTable* t = avx2_table()) return t;
    return &scalar_table();
}

std::atomic<const KernelTable*>& current()
{
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

std::string_view to_string(Isa isa)
{
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    }
    return "unknown";
}

const KernelTable* avx2_table()
{
#if defined(MIXPLAN_HAVE_AVX2)
    static const bool supported = cpu_has_avx2();
    return supported ? &detail::avx2_table_unchecked() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

void select(Isa isa)
{
    const KernelTable* t = &scalar_table();
    if (isa == Isa::avx2) {
        t = avx2_table();
        if (!t) t = &scalar_table();
    }
    current().store(t, std::memory_order_relaxed);
}

}  // namespace mixplan::kernels
