#include "seqlab/numerics.hpp"

#include "gemm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seqlab {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kIndexSalt = 0x632BE59BD9B4E019ULL;
constexpr std::size_t kStreamBlockRows = 128;

}  // namespace

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

RngStream::RngStream(std::uint64_t root_seed) : RngStream(root_seed, mix64(root_seed), "") {}

RngStream::RngStream(std::uint64_t root_seed, std::uint64_t key, std::string tag)
    : root_seed_(root_seed), key_(key), tag_(std::move(tag)) {}

RngStream RngStream::split(std::string_view tag) const {
  if (tag.empty()) throw std::invalid_argument("RngStream::split: empty tag");
  std::string child = tag_.empty() ? std::string(tag) : tag_ + "/" + std::string(tag);
  return RngStream(root_seed_, mix64(key_ ^ mix64(fnv1a64(tag))), std::move(child));
}

RngStream RngStream::split(std::uint64_t index) const {
  std::string child = tag_ + "#" + std::to_string(index);
  return RngStream(root_seed_, mix64(key_ ^ mix64(index + kIndexSalt)), std::move(child));
}

std::uint64_t RngStream::next_u64() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) noexcept {
  // Lemire's multiply-shift with rejection keeps the draw exactly uniform.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = next_u64();
    const __uint128_t product = static_cast<__uint128_t>(x) * n;
    if (static_cast<std::uint64_t>(product) >= threshold) {
      return static_cast<std::uint64_t>(product >> 64);
    }
  }
}

double RngStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

Mat gaussian_matrix(RngStream& rng, std::size_t rows, std::size_t cols, double std) {
  if (!(std >= 0.0)) throw std::invalid_argument("gaussian_matrix: std must be >= 0");
  Mat out(rows, cols);
  double* data = out.data();
  const std::size_t n = rows * cols;
  for (std::size_t i = 0; i < n; ++i) data[i] = std * rng.normal();
  return out;
}

Vec gaussian_vector(RngStream& rng, std::size_t n, double std) {
  if (!(std >= 0.0)) throw std::invalid_argument("gaussian_vector: std must be >= 0");
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std * rng.normal();
  return out;
}

void fill_gaussian_rows(const RngStream& base, std::size_t first_row, std::size_t cols,
                        double std, Eigen::Ref<Mat> out) {
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    RngStream row = base.split(static_cast<std::uint64_t>(first_row + r));
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = std * row.normal();
  }
}

Mat gaussian_matrix_by_rows(const RngStream& base, std::size_t rows, std::size_t cols,
                            double std) {
  if (!(std >= 0.0)) throw std::invalid_argument("gaussian_matrix_by_rows: std must be >= 0");
  Mat out(rows, cols);
  fill_gaussian_rows(base, 0, cols, std, out);
  return out;
}

WeightMatrix::WeightMatrix(Mat dense) : storage_(std::move(dense)) {}
WeightMatrix::WeightMatrix(Streamed streamed) : storage_(std::move(streamed)) {}

std::size_t WeightMatrix::rows() const noexcept {
  if (const auto* m = std::get_if<Mat>(&storage_)) return static_cast<std::size_t>(m->rows());
  return std::get<Streamed>(storage_).rows;
}

std::size_t WeightMatrix::cols() const noexcept {
  if (const auto* m = std::get_if<Mat>(&storage_)) return static_cast<std::size_t>(m->cols());
  return std::get<Streamed>(storage_).cols;
}

const Mat& WeightMatrix::dense() const {
  if (const auto* m = std::get_if<Mat>(&storage_)) return *m;
  throw std::logic_error("WeightMatrix::dense: matrix is streamed");
}

Mat WeightMatrix::to_dense() const {
  if (const auto* m = std::get_if<Mat>(&storage_)) return *m;
  const auto& s = std::get<Streamed>(storage_);
  return gaussian_matrix_by_rows(s.base, s.rows, s.cols, s.std);
}

namespace {

// out.middleRows(row0, lhs.rows()) = lhs * rhs, using the AVX2 kernel for
// large products when the CPU has it. Row-major C = A B is column-major
// C^T = B^T A^T over the same memory.
template <class Lhs>
void product_into(const Lhs& lhs, const Mat& rhs, Mat& out, Eigen::Index row0) {
  static_assert(Mat::IsRowMajor && Lhs::IsRowMajor);
  const double work = static_cast<double>(lhs.rows()) * static_cast<double>(lhs.cols()) *
                      static_cast<double>(rhs.cols());
  if (rhs.cols() >= 4 && work >= 1e6 && detail::fast_gemm_available()) {
    detail::fast_gemm(static_cast<std::size_t>(rhs.cols()), static_cast<std::size_t>(lhs.rows()),
                      static_cast<std::size_t>(lhs.cols()), rhs.data(), static_cast<std::size_t>(rhs.outerStride()),
                      lhs.data(), static_cast<std::size_t>(lhs.outerStride()),
                      out.data() + row0 * out.outerStride(), static_cast<std::size_t>(out.outerStride()));
    return;
  }
  out.middleRows(row0, lhs.rows()).noalias() = lhs * rhs;
}

}  // namespace

Mat WeightMatrix::multiply(const Mat& x) const {
  if (static_cast<std::size_t>(x.rows()) != cols()) {
    throw std::invalid_argument("WeightMatrix::multiply: shape mismatch");
  }
  if (const auto* m = std::get_if<Mat>(&storage_)) {
    Mat out(m->rows(), x.cols());
    product_into(*m, x, out, 0);
    return out;
  }
  const auto& s = std::get<Streamed>(storage_);
  Mat out(s.rows, x.cols());
  Mat block(std::min(kStreamBlockRows, s.rows), s.cols);
  for (std::size_t r0 = 0; r0 < s.rows; r0 += kStreamBlockRows) {
    const std::size_t n = std::min(kStreamBlockRows, s.rows - r0);
    auto view = block.topRows(static_cast<Eigen::Index>(n));
    fill_gaussian_rows(s.base, r0, s.cols, s.std, view);
    product_into(view, x, out, static_cast<Eigen::Index>(r0));
  }
  return out;
}

Vec WeightMatrix::multiply(const Vec& x) const {
  Mat col = x;
  return multiply(col).col(0);
}

Mat WeightMatrix::multiply_transpose(const Mat& y) const {
  if (static_cast<std::size_t>(y.rows()) != rows()) {
    throw std::invalid_argument("WeightMatrix::multiply_transpose: shape mismatch");
  }
  if (const auto* m = std::get_if<Mat>(&storage_)) return m->transpose() * y;
  const auto& s = std::get<Streamed>(storage_);
  Mat out = Mat::Zero(s.cols, y.cols());
  Mat block(std::min(kStreamBlockRows, s.rows), s.cols);
  for (std::size_t r0 = 0; r0 < s.rows; r0 += kStreamBlockRows) {
    const std::size_t n = std::min(kStreamBlockRows, s.rows - r0);
    auto view = block.topRows(static_cast<Eigen::Index>(n));
    fill_gaussian_rows(s.base, r0, s.cols, s.std, view);
    out.noalias() +=
        view.transpose() * y.middleRows(static_cast<Eigen::Index>(r0), static_cast<Eigen::Index>(n));
  }
  return out;
}

Vec WeightMatrix::multiply_transpose(const Vec& y) const {
  Mat col = y;
  return multiply_transpose(col).col(0);
}

double grad_check(const std::function<double(const Vec&)>& f, const Vec& x,
                  const Vec& analytic_grad, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("grad_check: h must be positive");
  if (analytic_grad.size() != x.size()) {
    throw std::invalid_argument("grad_check: gradient length mismatch");
  }
  double worst = 0.0;
  Vec probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw std::domain_error("grad_check: non-finite function value");
    }
    const double numeric = (up - down) / (2.0 * h);
    const double err = std::abs(numeric - analytic_grad[i]) / (std::abs(analytic_grad[i]) + 1e-8);
    worst = std::max(worst, err);
  }
  return worst;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double operator_norm(const Mat& m, int iterations) {
  if (m.size() == 0) return 0.0;
  Vec v = Vec::Ones(m.cols()) / std::sqrt(static_cast<double>(m.cols()));
  double sigma = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vec w = m.transpose() * (m * v);
    const double n = w.norm();
    if (n == 0.0) return 0.0;
    v = w / n;
    sigma = std::sqrt(n);
  }
  return sigma;
}

}  // namespace seqlab
