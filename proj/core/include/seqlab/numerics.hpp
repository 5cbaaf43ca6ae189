#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace seqlab {

/// Dense real matrix, row-major, 64-bit entries.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// 64-bit FNV-1a hash of a byte string; used to turn role tags into keys.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Counter-based random stream.
///
/// The i-th 64-bit word of a stream is mix64(key + i * 0x9E3779B97F4A7C15), so
/// a stream is fully determined by its key and position. Keys of child
/// streams are derived as
///
///     key(split(s, tag))   = mix64(key(s) ^ mix64(fnv1a64(tag)))
///     key(split(s, index)) = mix64(key(s) ^ mix64(index + 0x632BE59BD9B4E019))
///
/// and the root key is mix64(seed). Normals use the Marsaglia polar method on
/// 53-bit uniforms. tests/data/rng_vectors.txt pins the resulting streams.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t root_seed);

  /// Child stream for a named role. `tag` must be nonempty.
  [[nodiscard]] RngStream split(std::string_view tag) const;
  /// Child stream for a numbered role (rows, seeds, workers).
  [[nodiscard]] RngStream split(std::uint64_t index) const;

  std::uint64_t next_u64() noexcept;
  result_type operator()() noexcept { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) noexcept;
  double normal() noexcept;

  /// In-place Fisher-Yates shuffle (portable, unlike std::shuffle).
  template <typename T>
  void shuffle(std::vector<T>& items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  [[nodiscard]] std::uint64_t root_seed() const noexcept { return root_seed_; }
  [[nodiscard]] const std::string& role_tag() const noexcept { return tag_; }
  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }
  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

 private:
  RngStream(std::uint64_t root_seed, std::uint64_t key, std::string tag);

  std::uint64_t root_seed_;
  std::uint64_t key_;
  std::string tag_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// rows x cols matrix with i.i.d. N(0, std^2) entries drawn row-major from rng.
Mat gaussian_matrix(RngStream& rng, std::size_t rows, std::size_t cols, double std);
Vec gaussian_vector(RngStream& rng, std::size_t n, double std);

/// Row r is drawn from base.split(r); lets a matrix be regenerated one row at
/// a time without storing it.
Mat gaussian_matrix_by_rows(const RngStream& base, std::size_t rows, std::size_t cols,
                            double std);
void fill_gaussian_rows(const RngStream& base, std::size_t first_row, std::size_t cols,
                        double std, Eigen::Ref<Mat> out);

/// Square-or-rectangular weight operator that is either stored densely or
/// regenerated from its row streams on every product. Streamed storage keeps
/// memory at O(rows) for m where m*m doubles do not fit.
class WeightMatrix {
 public:
  struct Streamed {
    RngStream base;
    std::size_t rows;
    std::size_t cols;
    double std;
  };

  WeightMatrix() = default;
  explicit WeightMatrix(Mat dense);
  explicit WeightMatrix(Streamed streamed);

  [[nodiscard]] std::size_t rows() const noexcept;
  [[nodiscard]] std::size_t cols() const noexcept;
  [[nodiscard]] bool is_dense() const noexcept { return std::holds_alternative<Mat>(storage_); }

  /// Dense view. Throws std::logic_error for streamed storage.
  [[nodiscard]] const Mat& dense() const;
  [[nodiscard]] Mat to_dense() const;

  /// this * x (x has cols() rows).
  [[nodiscard]] Mat multiply(const Mat& x) const;
  [[nodiscard]] Vec multiply(const Vec& x) const;
  /// this^T * y (y has rows() rows).
  [[nodiscard]] Mat multiply_transpose(const Mat& y) const;
  [[nodiscard]] Vec multiply_transpose(const Vec& y) const;

 private:
  std::variant<Mat, Streamed> storage_;
};

/// Max over coordinates of |central difference - analytic| / (|analytic| + 1e-8).
/// Throws std::domain_error when f returns a non-finite value.
double grad_check(const std::function<double(const Vec&)>& f, const Vec& x,
                  const Vec& analytic_grad, double h);

double median(std::vector<double> values);

/// Spectral norm via power iteration on M^T M.
double operator_norm(const Mat& m, int iterations = 200);

}  // namespace seqlab
