#include "ckg/num/kernels.hpp"

#include <atomic>
#include <cstdint>
#include <stdexcept>

namespace ckg::num {

namespace {

std::atomic<bool> g_parallel{true};

void check_mm(const Matrix& a, const Matrix& b, std::size_t b_rows_needed) {
  if (b.rows() != b_rows_needed)
    throw std::invalid_argument("matmul: shape mismatch " + a.shape_str() + " x " + b.shape_str());
}

}  // namespace

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel_enabled(bool on) { g_parallel.store(on, std::memory_order_relaxed); }

void matmul_serial(const Matrix& a, const Matrix& b, Matrix& c) {
  check_mm(a, b, a.cols());
  c = Matrix(a.rows(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* ar = a.row_ptr(i);
    double* cr = c.row_ptr(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ar[p];
      const double* br = b.row_ptr(p);
      for (std::size_t j = 0; j < m; ++j) cr[j] += av * br[j];
    }
  }
}

void matmul_parallel(const Matrix& a, const Matrix& b, Matrix& c) {
  check_mm(a, b, a.cols());
  c = Matrix(a.rows(), b.cols());
  const std::int64_t n = static_cast<std::int64_t>(a.rows());
  const std::size_t k = a.cols(), m = b.cols();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* ar = a.row_ptr(static_cast<std::size_t>(i));
    double* cr = c.row_ptr(static_cast<std::size_t>(i));
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ar[p];
      const double* br = b.row_ptr(p);
      for (std::size_t j = 0; j < m; ++j) cr[j] += av * br[j];
    }
  }
}

void matmul_nt_serial(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("matmul_nt: shape mismatch " + a.shape_str() + " x " +
                                b.shape_str() + "^T");
  c = Matrix(a.rows(), b.rows());
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const double* ar = a.row_ptr(i);
    double* cr = c.row_ptr(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double* br = b.row_ptr(j);
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ar[p] * br[p];
      cr[j] = s;
    }
  }
}

void matmul_nt_parallel(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("matmul_nt: shape mismatch " + a.shape_str() + " x " +
                                b.shape_str() + "^T");
  c = Matrix(a.rows(), b.rows());
  const std::int64_t n = static_cast<std::int64_t>(a.rows());
  const std::size_t k = a.cols(), m = b.rows();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* ar = a.row_ptr(static_cast<std::size_t>(i));
    double* cr = c.row_ptr(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < m; ++j) {
      const double* br = b.row_ptr(j);
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ar[p] * br[p];
      cr[j] = s;
    }
  }
}

void matmul_tn_acc_serial(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols())
    throw std::invalid_argument("matmul_tn_acc: shape mismatch");
  const std::size_t n = a.cols(), k = a.rows(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* cr = c.row_ptr(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a(p, i);
      const double* br = b.row_ptr(p);
      for (std::size_t j = 0; j < m; ++j) cr[j] += av * br[j];
    }
  }
}

void matmul_tn_acc_parallel(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols())
    throw std::invalid_argument("matmul_tn_acc: shape mismatch");
  const std::int64_t n = static_cast<std::int64_t>(a.cols());
  const std::size_t k = a.rows(), m = b.cols();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    double* cr = c.row_ptr(static_cast<std::size_t>(i));
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a(p, static_cast<std::size_t>(i));
      const double* br = b.row_ptr(p);
      for (std::size_t j = 0; j < m; ++j) cr[j] += av * br[j];
    }
  }
}

void matmul_acc_serial(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols())
    throw std::invalid_argument("matmul_acc: shape mismatch");
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* ar = a.row_ptr(i);
    double* cr = c.row_ptr(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ar[p];
      const double* br = b.row_ptr(p);
      for (std::size_t j = 0; j < m; ++j) cr[j] += av * br[j];
    }
  }
}

void matmul_acc_parallel(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols())
    throw std::invalid_argument("matmul_acc: shape mismatch");
  const std::int64_t n = static_cast<std::int64_t>(a.rows());
  const std::size_t k = a.cols(), m = b.cols();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* ar = a.row_ptr(static_cast<std::size_t>(i));
    double* cr = c.row_ptr(static_cast<std::size_t>(i));
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ar[p];
      const double* br = b.row_ptr(p);
      for (std::size_t j = 0; j < m; ++j) cr[j] += av * br[j];
    }
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix c;
  if (parallel_enabled())
    matmul_parallel(a, b, c);
  else
    matmul_serial(a, b, c);
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  Matrix c;
  if (parallel_enabled())
    matmul_nt_parallel(a, b, c);
  else
    matmul_nt_serial(a, b, c);
  return c;
}

void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& c) {
  if (parallel_enabled())
    matmul_tn_acc_parallel(a, b, c);
  else
    matmul_tn_acc_serial(a, b, c);
}

void matmul_acc(const Matrix& a, const Matrix& b, Matrix& c) {
  if (parallel_enabled())
    matmul_acc_parallel(a, b, c);
  else
    matmul_acc_serial(a, b, c);
}

}  // namespace ckg::num
