#pragma once

// Data-parallel inner loops of the network, in two builds: a serial
// reference and an OpenMP variant. Each output element is produced by
// exactly one thread using the same inner-loop order as the reference,
// so the two variants are bit-identical; tests assert exact equality.
//
// Gradient kernels ACCUMULATE (+=) into their outputs so a batch loop can
// sum example contributions; callers zero buffers first.

#include <cstddef>

namespace bmi::kernels {

// Runtime switch consulted by the dispatching wrappers. Off by default;
// training stays single-threaded unless configuration enables it.
void set_parallel(bool on);
bool parallel_enabled();

// z[j][t] = b[j] + sum_i sum_u x[i][t+u] * k[i][j][u]
// Valid-mode cross-correlation, stride 1: zlen = xlen - klen + 1.
// Layouts: x is n_in maps of xlen; k is indexed [i][j][u]; z is n_out maps.
void conv1d_forward_serial(const double* x, int n_in, int xlen, const double* k,
                           const double* b, int n_out, int klen, double* z);
void conv1d_forward_omp(const double* x, int n_in, int xlen, const double* k,
                        const double* b, int n_out, int klen, double* z);

// dk[i][j][u] += sum_t dz[j][t] * x[i][t+u];  db[j] += sum_t dz[j][t]
void conv1d_grad_params_serial(const double* x, int n_in, int xlen, const double* dz,
                               int n_out, int klen, double* dk, double* db);
void conv1d_grad_params_omp(const double* x, int n_in, int xlen, const double* dz,
                            int n_out, int klen, double* dk, double* db);

// y = W x + b with W row-major (rows x cols).
void affine_forward_serial(const double* W, const double* b, int rows, int cols,
                           const double* x, double* y);
void affine_forward_omp(const double* W, const double* b, int rows, int cols,
                        const double* x, double* y);

// dW[r][c] += dy[r] * x[c];  db[r] += dy[r]
void affine_grad_params_serial(const double* x, const double* dy, int rows, int cols,
                               double* dW, double* db);
void affine_grad_params_omp(const double* x, const double* dy, int rows, int cols,
                            double* dW, double* db);

// dx[c] = sum_r W[r][c] * dy[r]   (overwrites dx)
void affine_backward_input_serial(const double* W, const double* dy, int rows, int cols,
                                  double* dx);
void affine_backward_input_omp(const double* W, const double* dy, int rows, int cols,
                               double* dx);

// Non-overlapping max pooling with an as-is trailing remainder window.
// ylen = (len + pool - 1) / pool. argmax records the source index of each
// pooled value (first position on ties) for gradient routing.
void maxpool_forward(const double* x, int len, int pool, double* y, int* argmax);
void maxpool_backward(const int* argmax, const double* dy, int ylen, double* dx);

void relu_forward(const double* z, int n, double* x);
// dz[t] = dx[t] if z[t] > 0 else 0  (accumulating: dz += ...)
void relu_backward_add(const double* z, const double* dx, int n, double* dz);

// Dispatchers: pick the OpenMP variant when enabled, else serial.
void conv1d_forward(const double* x, int n_in, int xlen, const double* k,
                    const double* b, int n_out, int klen, double* z);
void conv1d_grad_params(const double* x, int n_in, int xlen, const double* dz,
                        int n_out, int klen, double* dk, double* db);
void affine_forward(const double* W, const double* b, int rows, int cols,
                    const double* x, double* y);
void affine_grad_params(const double* x, const double* dy, int rows, int cols,
                        double* dW, double* db);
void affine_backward_input(const double* W, const double* dy, int rows, int cols,
                           double* dx);

}  // namespace bmi::kernels
