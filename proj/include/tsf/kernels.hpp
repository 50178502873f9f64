#pragma once

#include <cstddef>
#include <string_view>

// Arithmetic inner loops used by the tensor engine. Every routine exists as a
// scalar reference implementation and, on x86-64, an AVX2 variant. The two are
// bit-identical by construction: same per-element operation order, no FMA
// contraction (the build pins -ffp-contract=off). Reductions stay scalar so
// their accumulation order is fixed.

namespace tsf::kernels {

struct Ops {
    // dst[i] = a[i] op b[i]
    void (*add)(double* dst, const double* a, const double* b, std::size_t n);
    void (*sub)(double* dst, const double* a, const double* b, std::size_t n);
    void (*mul)(double* dst, const double* a, const double* b, std::size_t n);
    // dst[i] = max(src[i], 0)
    void (*relu)(double* dst, const double* src, std::size_t n);
    // grad_in[i] += (src[i] > 0) * grad_out[i]
    void (*relu_bwd)(double* grad_in, const double* src, const double* grad_out,
                     std::size_t n);
    // C[r x c] += A[r x k] * B[k x c], row-major
    void (*gemm_nn)(double* c, const double* a, const double* b, std::size_t rows,
                    std::size_t inner, std::size_t cols);
    // Left-padded causal 1-D convolution over one sample.
    //   out[co][t] = sum_{ci,j} kern[co][ci][j] * in[ci][t - (k-1-j)*dilation]
    // with out-of-range taps contributing zero. `out` must be zeroed by the
    // caller. Tap j = k-1 is the current time step.
    void (*conv1d_causal)(double* out, const double* in, const double* kern,
                          std::size_t c_in, std::size_t c_out, std::size_t t_len,
                          std::size_t k, std::size_t dilation);
    // One Adam update over a flat parameter buffer. bc1/bc2 are the bias
    // corrections 1-beta^t for the current step.
    void (*adam_update)(double* param, const double* grad, double* m, double* v,
                        std::size_t n, double lr, double beta1, double beta2,
                        double eps, double bc1, double bc2);
    const char* name;
};

const Ops& scalar();

#if defined(__x86_64__) || defined(_M_X64)
bool avx2_available();
const Ops& avx2();  // only valid to call when avx2_available()
#endif

// Backend picked at first use: AVX2 when the CPU supports it, overridable via
// TSF_SIMD=scalar|avx2|auto.
const Ops& active();
std::string_view active_name();

// Reductions with a pinned left-to-right order (scalar only).
double sum(const double* a, std::size_t n);
double sq_diff_sum(const double* a, const double* b, std::size_t n);

}  // namespace tsf::kernels
