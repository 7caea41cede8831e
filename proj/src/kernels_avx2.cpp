#include <immintrin.h>

#include <bit>
#include <cmath>
#include <cstring>

#include "poolseq/kernels.hpp"

namespace poolseq::kernels::avx2 {

namespace {

__attribute__((target("avx2"))) inline __m256i popcount_bytes(__m256i v)
{
    const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4, 0, 1, 1, 2, 1, 2, 2, 3, 1, 2,
                                         2, 3, 2, 3, 3, 4);
    const __m256i low = _mm256_set1_epi8(0x0f);
    __m256i lo = _mm256_and_si256(v, low);
    __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low);
    return _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
}

// Per 64-bit lane popcount.
__attribute__((target("avx2"))) inline __m256i popcount_epi64(__m256i v)
{
    return _mm256_sad_epu8(popcount_bytes(v), _mm256_setzero_si256());
}

}  // namespace

__attribute__((target("avx2"))) void hamming_many(const std::uint64_t* row, const std::uint64_t* rows,
                                                   std::size_t n_rows, std::size_t words, std::uint32_t* out)
{
    if (words == 1) {
        const __m256i x = _mm256_set1_epi64x(static_cast<long long>(row[0]));
        std::size_t i = 0;
        for (; i + 4 <= n_rows; i += 4) {
            __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(rows + i));
            __m256i c = popcount_epi64(_mm256_xor_si256(v, x));
            alignas(32) std::uint64_t lanes[4];
            _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), c);
            for (int k = 0; k < 4; ++k) out[i + k] = static_cast<std::uint32_t>(lanes[k]);
        }
        for (; i < n_rows; ++i) out[i] = static_cast<std::uint32_t>(std::popcount(row[0] ^ rows[i]));
        return;
    }
    for (std::size_t i = 0; i < n_rows; ++i) {
        const std::uint64_t* r = rows + i * words;
        __m256i acc = _mm256_setzero_si256();
        std::size_t w = 0;
        for (; w + 4 <= words; w += 4) {
            __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(row + w));
            __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(r + w));
            acc = _mm256_add_epi64(acc, popcount_epi64(_mm256_xor_si256(a, b)));
        }
        alignas(32) std::uint64_t lanes[4];
        _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
        std::uint64_t c = lanes[0] + lanes[1] + lanes[2] + lanes[3];
        for (; w < words; ++w) c += static_cast<std::uint64_t>(std::popcount(row[w] ^ r[w]));
        out[i] = static_cast<std::uint32_t>(c);
    }
}

__attribute__((target("avx2"))) void column_sums_i8(const std::int8_t* base, std::size_t stride,
                                                    const std::uint32_t* row_idx, std::size_t n_idx, std::size_t cols,
                                                    std::int32_t* out)
{
    std::memset(out, 0, cols * sizeof(std::int32_t));
    std::size_t c = 0;
    for (; c + 8 <= cols; c += 8) {
        __m256i acc = _mm256_setzero_si256();
        for (std::size_t k = 0; k < n_idx; ++k) {
            const std::int8_t* r = base + static_cast<std::size_t>(row_idx[k]) * stride + c;
            __m128i b = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(r));
            acc = _mm256_add_epi32(acc, _mm256_cvtepi8_epi32(b));
        }
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + c), acc);
    }
    for (; c < cols; ++c) {
        std::int32_t s = 0;
        for (std::size_t k = 0; k < n_idx; ++k) s += base[static_cast<std::size_t>(row_idx[k]) * stride + c];
        out[c] = s;
    }
}

__attribute__((target("avx2"))) double bhattacharyya_sum(const double* p, const double* q, std::size_t n)
{
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_sqrt_pd(_mm256_mul_pd(_mm256_loadu_pd(p + i), _mm256_loadu_pd(q + i))));
        acc1 = _mm256_add_pd(acc1,
                             _mm256_sqrt_pd(_mm256_mul_pd(_mm256_loadu_pd(p + i + 4), _mm256_loadu_pd(q + i + 4))));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) s += std::sqrt(p[i] * q[i]);
    return s;
}

}  // namespace poolseq::kernels::avx2
