#include <atomic>
#include <cstdlib>
#include <cstring>

#include "poolseq/kernels.hpp"

namespace poolseq::kernels {

namespace {

Backend detect()
{
    if (const char* env = std::getenv("POOLSEQ_SIMD"); env && std::strcmp(env, "scalar") == 0) return Backend::scalar;
    return avx2_available() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current()
{
    static std::atomic<Backend> b{detect()};
    return b;
}

}  // namespace

bool avx2_available()
{
#if defined(POOLSEQ_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    static const bool ok = __builtin_cpu_supports("avx2");
    return ok;
#else
    return false;
#endif
}

Backend active_backend()
{
    return current().load(std::memory_order_relaxed);
}

void set_backend(Backend b)
{
    if (b == Backend::avx2 && !avx2_available()) b = Backend::scalar;
    current().store(b, std::memory_order_relaxed);
}

const char* backend_name(Backend b)
{
    return b == Backend::avx2 ? "avx2" : "scalar";
}

#if defined(POOLSEQ_HAVE_AVX2)
#define POOLSEQ_DISPATCH(fn, ...) \
    return active_backend() == Backend::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)
#else
#define POOLSEQ_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

void hamming_many(const std::uint64_t* row, const std::uint64_t* rows, std::size_t n_rows, std::size_t words,
                  std::uint32_t* out)
{
    POOLSEQ_DISPATCH(hamming_many, row, rows, n_rows, words, out);
}

void column_sums_i8(const std::int8_t* base, std::size_t stride, const std::uint32_t* row_idx, std::size_t n_idx,
                    std::size_t cols, std::int32_t* out)
{
    POOLSEQ_DISPATCH(column_sums_i8, base, stride, row_idx, n_idx, cols, out);
}

double bhattacharyya_sum(const double* p, const double* q, std::size_t n)
{
    POOLSEQ_DISPATCH(bhattacharyya_sum, p, q, n);
}

#if !defined(POOLSEQ_HAVE_AVX2)
namespace avx2 {
void hamming_many(const std::uint64_t* row, const std::uint64_t* rows, std::size_t n_rows, std::size_t words,
                  std::uint32_t* out)
{
    scalar::hamming_many(row, rows, n_rows, words, out);
}
void column_sums_i8(const std::int8_t* base, std::size_t stride, const std::uint32_t* row_idx, std::size_t n_idx,
                    std::size_t cols, std::int32_t* out)
{
    scalar::column_sums_i8(base, stride, row_idx, n_idx, cols, out);
}
double bhattacharyya_sum(const double* p, const double* q, std::size_t n)
{
    return scalar::bhattacharyya_sum(p, q, n);
}
}  // namespace avx2
#endif

}  // namespace poolseq::kernels
