#pragma once

#include <cstddef>

namespace seqlab::detail {

/// True when the running CPU supports the AVX2/FMA kernel.
bool fast_gemm_available();

/// C = A * B for column-major operands (M x K times K x N), AVX2/FMA kernel.
/// Call only when fast_gemm_available().
void fast_gemm(std::size_t M, std::size_t N, std::size_t K, const double* A, std::size_t lda,
               const double* B, std::size_t ldb, double* C, std::size_t ldc);

}  // namespace seqlab::detail
