#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace prism {

/// Dense real matrix, row-major, 64-bit entries.
///
/// A default-constructed Mat is empty (0x0) and only valid as a placeholder;
/// every other constructor requires rows >= 1 and cols >= 1.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
  Mat(std::size_t rows, std::size_t cols, std::vector<double> data);
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  static Mat identity(std::size_t n);
  static Mat diagonal(std::span<const double> values);
  static Mat diagonal(std::initializer_list<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  bool all_finite() const noexcept;

  Mat& operator+=(const Mat& other);
  Mat& operator-=(const Mat& other);
  Mat& operator*=(double s) noexcept;

  friend bool operator==(const Mat&, const Mat&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator*(double s, Mat a);

Mat transpose(const Mat& a);
// (a + a^T) / 2
Mat symmetrize(const Mat& a);
// s * I - a, a square
Mat shifted_negative(const Mat& a, double s = 1.0);
// y += s * x
void axpy(double s, const Mat& x, Mat& y);
void add_to_diagonal(Mat& a, double s);

double trace(const Mat& a);
double frob_norm(const Mat& a);
// Frobenius inner product <a, b> = sum_ij a_ij b_ij
double frob_dot(const Mat& a, const Mat& b);
double max_abs_diff(const Mat& a, const Mat& b);
// ||a - a^T||_F / ||a||_F (0 for the zero matrix)
double asymmetry(const Mat& a);
// Relative symmetry test used before every symmetric factorization.
inline constexpr double kSymmetryTolerance = 1e-8;
bool is_symmetric(const Mat& a, double rel_tol = kSymmetryTolerance);

}  // namespace prism
