#include "bmi/kernels.hpp"

#include <algorithm>
#include <atomic>

namespace bmi::kernels {

namespace {
std::atomic<bool> g_parallel{false};
}

void set_parallel(bool on) { g_parallel.store(on, std::memory_order_relaxed); }
bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }

void conv1d_forward_serial(const double* x, int n_in, int xlen, const double* k,
                           const double* b, int n_out, int klen, double* z) {
    const int zlen = xlen - klen + 1;
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

void conv1d_grad_params_serial(const double* x, int n_in, int xlen, const double* dz,
                               int n_out, int klen, double* dk, double* db) {
    const int zlen = xlen - klen + 1;
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

void affine_forward_serial(const double* W, const double* b, int rows, int cols,
                           const double* x, double* y) {
    for (int r = 0; r < rows; ++r) {
        const double* wr = W + static_cast<std::size_t>(r) * cols;
        double acc = b[r];
        for (int c = 0; c < cols; ++c) acc += wr[c] * x[c];
        y[r] = acc;
    }
}

void affine_grad_params_serial(const double* x, const double* dy, int rows, int cols,
                               double* dW, double* db) {
    for (int r = 0; r < rows; ++r) {
        double* dwr = dW + static_cast<std::size_t>(r) * cols;
        const double g = dy[r];
        for (int c = 0; c < cols; ++c) dwr[c] += g * x[c];
        db[r] += g;
    }
}

void affine_backward_input_serial(const double* W, const double* dy, int rows, int cols,
                                  double* dx) {
    for (int c = 0; c < cols; ++c) {
        double acc = 0.0;
        for (int r = 0; r < rows; ++r) acc += W[static_cast<std::size_t>(r) * cols + c] * dy[r];
        dx[c] = acc;
    }
}

void maxpool_forward(const double* x, int len, int pool, double* y, int* argmax) {
    const int ylen = (len + pool - 1) / pool;
    for (int w = 0; w < ylen; ++w) {
        const int begin = w * pool;
        const int end = std::min(begin + pool, len);
        int best = begin;
        for (int t = begin + 1; t < end; ++t) {
            if (x[t] > x[best]) best = t;  // first index wins ties
        }
        y[w] = x[best];
        argmax[w] = best;
    }
}

void maxpool_backward(const int* argmax, const double* dy, int ylen, double* dx) {
    for (int w = 0; w < ylen; ++w) dx[argmax[w]] += dy[w];
}

void relu_forward(const double* z, int n, double* x) {
    for (int t = 0; t < n; ++t) x[t] = z[t] > 0.0 ? z[t] : 0.0;
}

void relu_backward_add(const double* z, const double* dx, int n, double* dz) {
    for (int t = 0; t < n; ++t) {
        if (z[t] > 0.0) dz[t] += dx[t];
    }
}

void conv1d_forward(const double* x, int n_in, int xlen, const double* k,
                    const double* b, int n_out, int klen, double* z) {
    if (parallel_enabled()) {
        conv1d_forward_omp(x, n_in, xlen, k, b, n_out, klen, z);
    } else {
        conv1d_forward_serial(x, n_in, xlen, k, b, n_out, klen, z);
    }
}

void conv1d_grad_params(const double* x, int n_in, int xlen, const double* dz,
                        int n_out, int klen, double* dk, double* db) {
    if (parallel_enabled()) {
        conv1d_grad_params_omp(x, n_in, xlen, dz, n_out, klen, dk, db);
    } else {
        conv1d_grad_params_serial(x, n_in, xlen, dz, n_out, klen, dk, db);
    }
}

void affine_forward(const double* W, const double* b, int rows, int cols,
                    const double* x, double* y) {
    if (parallel_enabled()) {
        affine_forward_omp(W, b, rows, cols, x, y);
    } else {
        affine_forward_serial(W, b, rows, cols, x, y);
    }
}

void affine_grad_params(const double* x, const double* dy, int rows, int cols,
                        double* dW, double* db) {
    if (parallel_enabled()) {
        affine_grad_params_omp(x, dy, rows, cols, dW, db);
    } else {
        affine_grad_params_serial(x, dy, rows, cols, dW, db);
    }
}

void affine_backward_input(const double* W, const double* dy, int rows, int cols,
                           double* dx) {
    if (parallel_enabled()) {
        affine_backward_input_omp(W, dy, rows, cols, dx);
    } else {
        affine_backward_input_serial(W, dy, rows, cols, dx);
    }
}

}  // namespace bmi::kernels
