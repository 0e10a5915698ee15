#pragma once

// Dense double-precision kernels used by the LSTM stack.
//
// Every kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2/FMA variant. The variant is chosen once at startup from CPUID and
// can be overridden (tests pin the scalar path to check equivalence).

#include <cstddef>
#include <span>
#include <string_view>

namespace entrylab::kernels {

/// Row-major read-only matrix view.
struct ConstMatrixView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  const double* row(std::size_t i) const { return data + i * cols; }
};

/// Row-major mutable matrix view.
struct MatrixView {
  double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double* row(std::size_t i) const { return data + i * cols; }
  operator ConstMatrixView() const { return {data, rows, cols}; }
};

enum class Backend { scalar, avx2 };

/// Function table for one backend. All kernels accumulate into their output.
struct KernelTable {
  Backend backend;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += A x
  void (*gemv)(ConstMatrixView a, const double* x, double* y);
  // y += A^T x
  void (*gemv_t)(ConstMatrixView a, const double* x, double* y);
  // A += alpha * x y^T
  void (*ger)(MatrixView a, double alpha, const double* x, const double* y);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void gemv(ConstMatrixView a, const double* x, double* y);
void gemv_t(ConstMatrixView a, const double* x, double* y);
void ger(MatrixView a, double alpha, const double* x, const double* y);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void gemv(ConstMatrixView a, const double* x, double* y);
void gemv_t(ConstMatrixView a, const double* x, double* y);
void ger(MatrixView a, double alpha, const double* x, const double* y);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2

/// True when the AVX2 translation unit was built and the CPU supports AVX2+FMA.
bool avx2_available();

/// Currently selected kernel table.
const KernelTable& active();

/// Force a backend. Requesting avx2 on a machine without it falls back to scalar
/// and returns false.
bool select(Backend backend);

std::string_view backend_name(Backend backend);

// Convenience wrappers over the active table.
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void gemv(ConstMatrixView a, std::span<const double> x, std::span<double> y) {
  active().gemv(a, x.data(), y.data());
}
inline void gemv_t(ConstMatrixView a, std::span<const double> x, std::span<double> y) {
  active().gemv_t(a, x.data(), y.data());
}
inline void ger(MatrixView a, double alpha, std::span<const double> x, std::span<const double> y) {
  active().ger(a, alpha, x.data(), y.data());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace entrylab::kernels
