#include "entrylab/kernels.hpp"

namespace entrylab::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void gemv(ConstMatrixView a, const double* x, double* y) {
  for (std::size_t i = 0; i < a.rows; ++i) y[i] += dot(a.row(i), x, a.cols);
}

void gemv_t(ConstMatrixView a, const double* x, double* y) {
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* r = a.row(i);
    for (std::size_t j = 0; j < a.cols; ++j) y[j] += xi * r[j];
  }
}

void ger(MatrixView a, double alpha, const double* x, const double* y) {
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double s = alpha * x[i];
    if (s == 0.0) continue;
    double* r = a.row(i);
    for (std::size_t j = 0; j < a.cols; ++j) r[j] += s * y[j];
  }
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace entrylab::kernels::scalar
