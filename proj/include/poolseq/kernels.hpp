#pragma once

#include <cstddef>
#include <cstdint>

namespace poolseq::kernels {

enum class Backend { scalar, avx2 };

bool avx2_available();
Backend active_backend();
// Forcing avx2 on a machine without it falls back to scalar.
void set_backend(Backend b);
const char* backend_name(Backend b);

// out[i] = popcount(row XOR rows[i]) over `words` 64-bit words; rows are contiguous.
void hamming_many(const std::uint64_t* row, const std::uint64_t* rows, std::size_t n_rows, std::size_t words,
                  std::uint32_t* out);

// out[c] = sum over the selected rows of base[row * stride + c].
void column_sums_i8(const std::int8_t* base, std::size_t stride, const std::uint32_t* row_idx, std::size_t n_idx,
                    std::size_t cols, std::int32_t* out);

// Sum of sqrt(p[i] * q[i]).
double bhattacharyya_sum(const double* p, const double* q, std::size_t n);

namespace scalar {
void hamming_many(const std::uint64_t* row, const std::uint64_t* rows, std::size_t n_rows, std::size_t words,
                  std::uint32_t* out);
void column_sums_i8(const std::int8_t* base, std::size_t stride, const std::uint32_t* row_idx, std::size_t n_idx,
                    std::size_t cols, std::int32_t* out);
double bhattacharyya_sum(const double* p, const double* q, std::size_t n);
}  // namespace scalar

namespace avx2 {
void hamming_many(const std::uint64_t* row, const std::uint64_t* rows, std::size_t n_rows, std::size_t words,
                  std::uint32_t* out);
void column_sums_i8(const std::int8_t* base, std::size_t stride, const std::uint32_t* row_idx, std::size_t n_idx,
                    std::size_t cols, std::int32_t* out);
double bhattacharyya_sum(const double* p, const double* q, std::size_t n);
}  // namespace avx2

}  // namespace poolseq::kernels
