#include "bmi/kernels.hpp"

#include <cstddef>

// OpenMP variants. Parallelism is always across independent output elements
// (output map, kernel pair, row, or column); the reduction inside each
// element runs serially in the same order as the reference kernels, so
// results are bit-identical to *_serial for any thread count.

namespace bmi::kernels {

void conv1d_forward_omp(const double* x, int n_in, int xlen, const double* k,
                        const double* b, int n_out, int klen, double* z) {
    const int zlen = xlen - klen + 1;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n_out; ++j) {
        double* zj = z + static_cast<std::size_t>(j) * zlen;
        for (int t = 0; t < zlen; ++t) zj[t] = b[j];
        for (int i = 0; i < n_in; ++i) {
            const double* xi = x + static_cast<std::size_t>(i) * xlen;
            const double* kij = k + (static_cast<std::size_t>(i) * n_out + j) * klen;
            for (int t = 0; t < zlen; ++t) {
                double acc = 0.0;
                for (int u = 0; u < klen; ++u) acc += xi[t + u] * kij[u];
                zj[t] += acc;
            }
        }
    }
}

void conv1d_grad_params_omp(const double* x, int n_in, int xlen, const double* dz,
                            int n_out, int klen, double* dk, double* db) {
    const int zlen = xlen - klen + 1;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n_out; ++j) {
        const double* dzj = dz + static_cast<std::size_t>(j) * zlen;
        double acc = 0.0;
        for (int t = 0; t < zlen; ++t) acc += dzj[t];
        db[j] += acc;
        for (int i = 0; i < n_in; ++i) {
            const double* xi = x + static_cast<std::size_t>(i) * xlen;
            double* dkij = dk + (static_cast<std::size_t>(i) * n_out + j) * klen;
            for (int u = 0; u < klen; ++u) {
                double g = 0.0;
                for (int t = 0; t < zlen; ++t) g += dzj[t] * xi[t + u];
                dkij[u] += g;
            }
        }
    }
}

void affine_forward_omp(const double* W, const double* b, int rows, int cols,
                        const double* x, double* y) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) {
        const double* wr = W + static_cast<std::size_t>(r) * cols;
        double acc = b[r];
        for (int c = 0; c < cols; ++c) acc += wr[c] * x[c];
        y[r] = acc;
    }
}

void affine_grad_params_omp(const double* x, const double* dy, int rows, int cols,
                            double* dW, double* db) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) {
        double* dwr = dW + static_cast<std::size_t>(r) * cols;
        const double g = dy[r];
        for (int c = 0; c < cols; ++c) dwr[c] += g * x[c];
        db[r] += g;
    }
}

void affine_backward_input_omp(const double* W, const double* dy, int rows, int cols,
                               double* dx) {
#pragma omp parallel for schedule(static)
    for (int c = 0; c < cols; ++c) {
        double acc = 0.0;
        for (int r = 0; r < rows; ++r) acc += W[static_cast<std::size_t>(r) * cols + c] * dy[r];
        dx[c] = acc;
    }
}

}  // namespace bmi::kernels
