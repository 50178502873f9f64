// AVX2 kernel variants. Compiled with -mavx2 in this TU only; callers must
// check avx2_available() first. Element order and operation order match the
// scalar reference exactly (mul+add, never FMA), so results are bit-identical.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

#include "tsf/kernels.hpp"

namespace tsf::kernels {

namespace {

void add_avx2(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(a + i),
                                                _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_avx2(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(dst + i, _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                                _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) dst[i] = a[i] - b[i];
}

void mul_avx2(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                                _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) dst[i] = a[i] * b[i];
}

void relu_avx2(double* dst, const double* src, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // max(x, +0) returns +0 for both -0 and NaN, matching the scalar branch.
        _mm256_storeu_pd(dst + i, _mm256_max_pd(_mm256_loadu_pd(src + i), zero));
    }
    for (; i < n; ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
}

void relu_bwd_avx2(double* grad_in, const double* src, const double* grad_out,
                   std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(src + i);
        const __m256d gi = _mm256_loadu_pd(grad_in + i);
        const __m256d go = _mm256_loadu_pd(grad_out + i);
        const __m256d mask = _mm256_cmp_pd(x, zero, _CMP_GT_OQ);
        // Blend keeps inactive lanes bit-identical (no +0.0 added to them).
        _mm256_storeu_pd(grad_in + i,
                         _mm256_blendv_pd(gi, _mm256_add_pd(gi, go), mask));
    }
    for (; i < n; ++i) {
        if (src[i] > 0.0) grad_in[i] += grad_out[i];
    }
}

void gemm_nn_avx2(double* c, const double* a, const double* b, std::size_t rows,
                  std::size_t inner, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        double* crow = c + i * cols;
        for (std::size_t k = 0; k < inner; ++k) {
            const double aik = a[i * inner + k];
            const double* brow = b + k * cols;
            const __m256d av = _mm256_set1_pd(aik);
            std::size_t j = 0;
            for (; j + 4 <= cols; j += 4) {
                const __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(brow + j));
                _mm256_storeu_pd(crow + j,
                                 _mm256_add_pd(_mm256_loadu_pd(crow + j), prod));
            }
            for (; j < cols; ++j) crow[j] += aik * brow[j];
        }
    }
}

void conv1d_avx2(double* out, const double* in, const double* kern,
                 std::size_t c_in, std::size_t c_out, std::size_t t_len,
                 std::size_t k, std::size_t dilation) {
    for (std::size_t co = 0; co < c_out; ++co) {
        double* orow = out + co * t_len;
        for (std::size_t ci = 0; ci < c_in; ++ci) {
            const double* irow = in + ci * t_len;
            const double* krow = kern + (co * c_in + ci) * k;
            for (std::size_t j = 0; j < k; ++j) {
                const double w = krow[j];
                const std::size_t lag = (k - 1 - j) * dilation;
                if (lag >= t_len) continue;
                const __m256d wv = _mm256_set1_pd(w);
                std::size_t t = lag;
                for (; t + 4 <= t_len; t += 4) {
                    const __m256d prod =
                        _mm256_mul_pd(wv, _mm256_loadu_pd(irow + (t - lag)));
                    _mm256_storeu_pd(orow + t,
                                     _mm256_add_pd(_mm256_loadu_pd(orow + t), prod));
                }
                for (; t < t_len; ++t) orow[t] += w * irow[t - lag];
            }
        }
    }
}

void adam_avx2(double* param, const double* grad, double* m, double* v,
               std::size_t n, double lr, double beta1, double beta2, double eps,
               double bc1, double bc2) {
    const __m256d b1 = _mm256_set1_pd(beta1);
    const __m256d b2 = _mm256_set1_pd(beta2);
    const __m256d omb1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d omb2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d vbc1 = _mm256_set1_pd(bc1);
    const __m256d vbc2 = _mm256_set1_pd(bc2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d g = _mm256_loadu_pd(grad + i);
        __m256d mi = _mm256_loadu_pd(m + i);
        __m256d vi = _mm256_loadu_pd(v + i);
        mi = _mm256_add_pd(_mm256_mul_pd(b1, mi), _mm256_mul_pd(omb1, g));
        vi = _mm256_add_pd(_mm256_mul_pd(b2, vi),
                           _mm256_mul_pd(omb2, _mm256_mul_pd(g, g)));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        const __m256d mhat = _mm256_div_pd(mi, vbc1);
        const __m256d vhat = _mm256_div_pd(vi, vbc2);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
        const __m256d step = _mm256_mul_pd(vlr, _mm256_div_pd(mhat, denom));
        _mm256_storeu_pd(param + i,
                         _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
    }
    for (; i < n; ++i) {
        const double g = grad[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g * g);
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        param[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

constexpr Ops kAvx2 = {
    add_avx2,     sub_avx2,    mul_avx2,  relu_avx2, relu_bwd_avx2,
    gemm_nn_avx2, conv1d_avx2, adam_avx2, "avx2",
};

}  // namespace

bool avx2_available() { return __builtin_cpu_supports("avx2") != 0; }

const Ops& avx2() { return kAvx2; }

}  // namespace tsf::kernels

#endif  // x86-64
