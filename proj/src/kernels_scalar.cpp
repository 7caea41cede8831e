#include <bit>
#include <cmath>
#include <cstring>

#include "poolseq/kernels.hpp"

namespace poolseq::kernels::scalar {

void hamming_many(const std::uint64_t* row, const std::uint64_t* rows, std::size_t n_rows, std::size_t words,
                  std::uint32_t* out)
{
    for (std::size_t i = 0; i < n_rows; ++i) {
        const std::uint64_t* r = rows + i * words;
        std::uint32_t c = 0;
        for (std::size_t w = 0; w < words; ++w) c += static_cast<std::uint32_t>(std::popcount(row[w] ^ r[w]));
        out[i] = c;
    }
}

void column_sums_i8(const std::int8_t* base, std::size_t stride, const std::uint32_t* row_idx, std::size_t n_idx,
                    std::size_t cols, std::int32_t* out)
{
    std::memset(out, 0, cols * sizeof(std::int32_t));
    for (std::size_t k = 0; k < n_idx; ++k) {
        const std::int8_t* r = base + static_cast<std::size_t>(row_idx[k]) * stride;
        for (std::size_t c = 0; c < cols; ++c) out[c] += r[c];
    }
}

double bhattacharyya_sum(const double* p, const double* q, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::sqrt(p[i] * q[i]);
    return s;
}

}  // namespace poolseq::kernels::scalar
