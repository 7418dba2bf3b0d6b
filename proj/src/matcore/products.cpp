#include <string>

#include "prism/error.hpp"
#include "prism/gemm.hpp"

namespace prism {

namespace {

thread_local ProductLog* t_log = nullptr;

void check_inner(const Mat& a, const Mat& b, const char* op) {
  if (a.empty() || b.empty() || a.cols() != b.rows()) {
    throw ShapeError(std::string(op) + ": cannot multiply " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " by " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

}  // namespace

ProductLog::ProductLog() : previous_(t_log) { t_log = this; }
ProductLog::~ProductLog() { t_log = previous_; }

std::size_t ProductLog::count_square(std::size_t dim) const noexcept {
  std::size_t count = 0;
  for (const auto& e : entries_)
    if (e.m == dim && e.k == dim && e.n == dim) ++count;
  return count;
}

Mat mat_mul(const Mat& a, const Mat& b) {
  check_inner(a, b, "mat_mul");
  if (t_log != nullptr) t_log->record(a.rows(), a.cols(), b.cols());
  Mat c(a.rows(), b.cols());
  gemm_blocked(a.rows(), a.cols(), b.cols(), a.data(), b.data(), c.data());
  return c;
}

Mat mat_mul_tn(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("mat_mul_tn: row counts differ (" + std::to_string(a.rows()) + " vs " +
                     std::to_string(b.rows()) + ")");
  }
  return mat_mul(transpose(a), b);
}

Mat gram(const Mat& a) { return symmetrize(mat_mul_tn(a, a)); }

Mat mat_mul_reference(const Mat& a, const Mat& b) {
  check_inner(a, b, "mat_mul_reference");
  Mat c(a.rows(), b.cols());
  gemm_serial_reference(a.rows(), a.cols(), b.cols(), a.data(), b.data(), c.data());
  return c;
}

}  // namespace prism
