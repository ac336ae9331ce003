#pragma once

#include "ckg/num/matrix.hpp"

namespace ckg::num {

// Global switch between the OpenMP kernels and the serial reference ones.
// The parallel kernels split work by output row only, so results are
// bit-identical to the serial versions for any thread count.
bool parallel_enabled();
void set_parallel_enabled(bool on);

// c = a * b
void matmul_serial(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_parallel(const Matrix& a, const Matrix& b, Matrix& c);

// c = a * b^T
void matmul_nt_serial(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_nt_parallel(const Matrix& a, const Matrix& b, Matrix& c);

// c += a^T * b (accumulating; used by backward passes)
void matmul_tn_acc_serial(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_tn_acc_parallel(const Matrix& a, const Matrix& b, Matrix& c);

// c += a * b
void matmul_acc_serial(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_acc_parallel(const Matrix& a, const Matrix& b, Matrix& c);

// Dispatchers honouring parallel_enabled().
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_acc(const Matrix& a, const Matrix& b, Matrix& c);

}  // namespace ckg::num
