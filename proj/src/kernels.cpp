#include "tsf/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "tsf/errors.hpp"

namespace tsf::kernels {

namespace {

void add_scalar(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_scalar(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] - b[i];
}

void mul_scalar(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * b[i];
}

void relu_scalar(double* dst, const double* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
}

void relu_bwd_scalar(double* grad_in, const double* src, const double* grad_out,
                     std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (src[i] > 0.0) grad_in[i] += grad_out[i];
    }
}

void gemm_nn_scalar(double* c, const double* a, const double* b, std::size_t rows,
                    std::size_t inner, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        double* crow = c + i * cols;
        for (std::size_t k = 0; k < inner; ++k) {
            const double aik = a[i * inner + k];
            const double* brow = b + k * cols;
            for (std::size_t j = 0; j < cols; ++j) crow[j] += aik * brow[j];
        }
    }
}

void conv1d_scalar(double* out, const double* in, const double* kern,
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
                for (std::size_t t = lag; t < t_len; ++t) orow[t] += w * irow[t - lag];
            }
        }
    }
}

void adam_scalar(double* param, const double* grad, double* m, double* v,
                 std::size_t n, double lr, double beta1, double beta2, double eps,
                 double bc1, double bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g * g);
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        param[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

constexpr Ops kScalar = {
    add_scalar,     sub_scalar,  mul_scalar, relu_scalar, relu_bwd_scalar,
    gemm_nn_scalar, conv1d_scalar, adam_scalar, "scalar",
};

const Ops* select_backend() {
    const char* env = std::getenv("TSF_SIMD");
    const std::string mode = env ? env : "auto";
    if (mode == "scalar") return &kScalar;
#if defined(__x86_64__) || defined(_M_X64)
    if (mode == "avx2") {
        if (!avx2_available()) throw ParamError("TSF_SIMD=avx2 but CPU lacks AVX2");
        return &avx2();
    }
    if (mode == "auto" || mode.empty()) {
        return avx2_available() ? &avx2() : &kScalar;
    }
#else
    if (mode == "auto" || mode.empty()) return &kScalar;
#endif
    throw ParamError("unknown TSF_SIMD value: " + mode);
}

}  // namespace

const Ops& scalar() { return kScalar; }

const Ops& active() {
    static const Ops* picked = select_backend();
    return *picked;
}

std::string_view active_name() { return active().name; }

double sum(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

double sq_diff_sum(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace tsf::kernels
