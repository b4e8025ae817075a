// Times the serial kernels against their OpenMP variants on network-shaped
// workloads and checks that both produce identical bits.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <vector>

#include "bmi/kernels.hpp"
#include "bmi/rng.hpp"

using bmi::Rng;
using clock_type = std::chrono::steady_clock;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform() * 2.0 - 1.0;
    return v;
}

template <typename Fn>
double time_ms(int reps, Fn&& fn) {
    auto t0 = clock_type::now();
    for (int r = 0; r < reps; ++r) fn();
    auto t1 = clock_type::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void report(const char* name, double serial_ms, double omp_ms, bool identical) {
    std::printf("%-24s serial %8.3f ms   omp %8.3f ms   speedup %5.2fx   %s\n", name,
                serial_ms, omp_ms, serial_ms / omp_ms, identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
    Rng rng(1234);

    // Inflated copies of the production shapes so timings rise above noise.
    const int n_in = 8, n_out = 64, xlen = 512, klen = 9;
    const int zlen = xlen - klen + 1;
    const int rows = 512, cols = 2048;
    const int reps = 50;

    auto x = random_vec(rng, static_cast<std::size_t>(n_in) * xlen);
    auto k = random_vec(rng, static_cast<std::size_t>(n_in) * n_out * klen);
    auto kb = random_vec(rng, n_out);
    auto dz = random_vec(rng, static_cast<std::size_t>(n_out) * zlen);
    auto W = random_vec(rng, static_cast<std::size_t>(rows) * cols);
    auto Wb = random_vec(rng, rows);
    auto ax = random_vec(rng, cols);
    auto dy = random_vec(rng, rows);

    std::vector<double> z_s(static_cast<std::size_t>(n_out) * zlen), z_p(z_s.size());
    double conv_s = time_ms(reps, [&] {
        bmi::kernels::conv1d_forward_serial(x.data(), n_in, xlen, k.data(), kb.data(), n_out,
                                            klen, z_s.data());
    });
    double conv_p = time_ms(reps, [&] {
        bmi::kernels::conv1d_forward_omp(x.data(), n_in, xlen, k.data(), kb.data(), n_out,
                                         klen, z_p.data());
    });
    report("conv1d_forward", conv_s, conv_p, same_bits(z_s, z_p));

    std::vector<double> dk_s(k.size()), dkb_s(n_out), dk_p(k.size()), dkb_p(n_out);
    double cg_s = time_ms(reps, [&] {
        std::fill(dk_s.begin(), dk_s.end(), 0.0);
        std::fill(dkb_s.begin(), dkb_s.end(), 0.0);
        bmi::kernels::conv1d_grad_params_serial(x.data(), n_in, xlen, dz.data(), n_out, klen,
                                                dk_s.data(), dkb_s.data());
    });
    double cg_p = time_ms(reps, [&] {
        std::fill(dk_p.begin(), dk_p.end(), 0.0);
        std::fill(dkb_p.begin(), dkb_p.end(), 0.0);
        bmi::kernels::conv1d_grad_params_omp(x.data(), n_in, xlen, dz.data(), n_out, klen,
                                             dk_p.data(), dkb_p.data());
    });
    report("conv1d_grad_params", cg_s, cg_p, same_bits(dk_s, dk_p) && same_bits(dkb_s, dkb_p));

    std::vector<double> y_s(rows), y_p(rows);
    double af_s = time_ms(reps, [&] {
        bmi::kernels::affine_forward_serial(W.data(), Wb.data(), rows, cols, ax.data(),
                                            y_s.data());
    });
    double af_p = time_ms(reps, [&] {
        bmi::kernels::affine_forward_omp(W.data(), Wb.data(), rows, cols, ax.data(), y_p.data());
    });
    report("affine_forward", af_s, af_p, same_bits(y_s, y_p));

    std::vector<double> dW_s(W.size()), db_s(rows), dW_p(W.size()), db_p(rows);
    double ag_s = time_ms(reps, [&] {
        std::fill(dW_s.begin(), dW_s.end(), 0.0);
        std::fill(db_s.begin(), db_s.end(), 0.0);
        bmi::kernels::affine_grad_params_serial(ax.data(), dy.data(), rows, cols, dW_s.data(),
                                                db_s.data());
    });
    double ag_p = time_ms(reps, [&] {
        std::fill(dW_p.begin(), dW_p.end(), 0.0);
        std::fill(db_p.begin(), db_p.end(), 0.0);
        bmi::kernels::affine_grad_params_omp(ax.data(), dy.data(), rows, cols, dW_p.data(),
                                             db_p.data());
    });
    report("affine_grad_params", ag_s, ag_p, same_bits(dW_s, dW_p) && same_bits(db_s, db_p));

    std::vector<double> dx_s(cols), dx_p(cols);
    double ab_s = time_ms(reps, [&] {
        bmi::kernels::affine_backward_input_serial(W.data(), dy.data(), rows, cols, dx_s.data());
    });
    double ab_p = time_ms(reps, [&] {
        bmi::kernels::affine_backward_input_omp(W.data(), dy.data(), rows, cols, dx_p.data());
    });
    report("affine_backward_input", ab_s, ab_p, same_bits(dx_s, dx_p));

#ifndef BMI_HAVE_OPENMP
    std::printf("note: built without OpenMP, omp variants fall back to serial\n");
#endif
    return 0;
}
