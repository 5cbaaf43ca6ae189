// Kept free of Eigen and other inline-heavy headers: only the functions below
// are compiled for AVX2/FMA, so no shared inline symbol gets the wider ISA.
#include "gemm.hpp"

#include <immintrin.h>

#include <algorithm>
#include <vector>

namespace seqlab::detail {

namespace {

constexpr std::size_t kMr = 12;
constexpr std::size_t kNr = 4;
constexpr std::size_t kKc = 256;
constexpr std::size_t kMc = 96;
constexpr std::size_t kNc = 2048;

// Rows of A in panels of kMr, interleaved by k; short panels are zero padded.
void pack_a(std::size_t mc, std::size_t kc, const double* A, std::size_t lda, double* out) {
  for (std::size_t i0 = 0; i0 < mc; i0 += kMr) {
    const std::size_t mr = std::min(kMr, mc - i0);
    for (std::size_t p = 0; p < kc; ++p) {
      const double* col = A + p * lda + i0;
      std::size_t i = 0;
      for (; i < mr; ++i) out[i] = col[i];
      for (; i < kMr; ++i) out[i] = 0.0;
      out += kMr;
    }
  }
}

// Columns of B in panels of kNr, interleaved by k.
void pack_b(std::size_t kc, std::size_t nc, const double* B, std::size_t ldb, double* out) {
  for (std::size_t j0 = 0; j0 < nc; j0 += kNr) {
    const std::size_t nr = std::min(kNr, nc - j0);
    for (std::size_t p = 0; p < kc; ++p) {
      std::size_t j = 0;
      for (; j < nr; ++j) out[j] = B[(j0 + j) * ldb + p];
      for (; j < kNr; ++j) out[j] = 0.0;
      out += kNr;
    }
  }
}

__attribute__((target("avx2,fma"))) void micro_kernel(std::size_t kc, const double* a, const double* b,
                                                      double* C, std::size_t ldc, std::size_t mr,
                                                      std::size_t nr, bool accumulate) {
  // Twelve named accumulators so they stay in registers.
  __m256d c00 = _mm256_setzero_pd(), c01 = c00, c02 = c00, c10 = c00, c11 = c00, c12 = c00;
  __m256d c20 = c00, c21 = c00, c22 = c00, c30 = c00, c31 = c00, c32 = c00;
  for (std::size_t p = 0; p < kc; ++p) {
    const __m256d a0 = _mm256_loadu_pd(a);
    const __m256d a1 = _mm256_loadu_pd(a + 4);
    const __m256d a2 = _mm256_loadu_pd(a + 8);
    __m256d bj = _mm256_broadcast_sd(b);
    c00 = _mm256_fmadd_pd(a0, bj, c00);
    c01 = _mm256_fmadd_pd(a1, bj, c01);
    c02 = _mm256_fmadd_pd(a2, bj, c02);
    bj = _mm256_broadcast_sd(b + 1);
    c10 = _mm256_fmadd_pd(a0, bj, c10);
    c11 = _mm256_fmadd_pd(a1, bj, c11);
    c12 = _mm256_fmadd_pd(a2, bj, c12);
    bj = _mm256_broadcast_sd(b + 2);
    c20 = _mm256_fmadd_pd(a0, bj, c20);
    c21 = _mm256_fmadd_pd(a1, bj, c21);
    c22 = _mm256_fmadd_pd(a2, bj, c22);
    bj = _mm256_broadcast_sd(b + 3);
    c30 = _mm256_fmadd_pd(a0, bj, c30);
    c31 = _mm256_fmadd_pd(a1, bj, c31);
    c32 = _mm256_fmadd_pd(a2, bj, c32);
    a += kMr;
    b += kNr;
  }
  alignas(32) double tile[kNr][kMr];
  const __m256d acc[kNr][3] = {{c00, c01, c02}, {c10, c11, c12}, {c20, c21, c22}, {c30, c31, c32}};
  for (std::size_t j = 0; j < kNr; ++j) {
    for (std::size_t v = 0; v < 3; ++v) _mm256_store_pd(&tile[j][4 * v], acc[j][v]);
  }
  for (std::size_t j = 0; j < nr; ++j) {
    double* cj = C + j * ldc;
    for (std::size_t i = 0; i < mr; ++i) cj[i] = accumulate ? cj[i] + tile[j][i] : tile[j][i];
  }
}

}  // namespace

bool fast_gemm_available() {
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
}

void fast_gemm(std::size_t M, std::size_t N, std::size_t K, const double* A, std::size_t lda,
               const double* B, std::size_t ldb, double* C, std::size_t ldc) {
  if (M == 0 || N == 0) return;
  if (K == 0) {
    for (std::size_t j = 0; j < N; ++j) std::fill_n(C + j * ldc, M, 0.0);
    return;
  }
  std::vector<double> a_pack(((kMc + kMr - 1) / kMr) * kMr * kKc);
  std::vector<double> b_pack(((kNc + kNr - 1) / kNr) * kNr * kKc);
  for (std::size_t jc = 0; jc < N; jc += kNc) {
    const std::size_t nc = std::min(kNc, N - jc);
    for (std::size_t pc = 0; pc < K; pc += kKc) {
      const std::size_t kc = std::min(kKc, K - pc);
      pack_b(kc, nc, B + jc * ldb + pc, ldb, b_pack.data());
      for (std::size_t ic = 0; ic < M; ic += kMc) {
        const std::size_t mc = std::min(kMc, M - ic);
        pack_a(mc, kc, A + pc * lda + ic, lda, a_pack.data());
        for (std::size_t jr = 0; jr < nc; jr += kNr) {
          const double* bp = b_pack.data() + (jr / kNr) * kNr * kc;
          for (std::size_t ir = 0; ir < mc; ir += kMr) {
            micro_kernel(kc, a_pack.data() + (ir / kMr) * kMr * kc, bp, C + (jc + jr) * ldc + ic + ir, ldc,
                         std::min(kMr, mc - ir), std::min(kNr, nc - jr), pc > 0);
          }
        }
      }
    }
  }
}

}  // namespace seqlab::detail
