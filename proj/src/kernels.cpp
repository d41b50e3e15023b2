#include "hyp2nav/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace hyp2nav::kern {

namespace {

double s_dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double s_sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double s_sum_sq(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

void s_axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void s_scale(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

void s_add(const double* a, const double* b, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

void s_sub(const double* a, const double* b, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a[i] - b[i];
}

void s_mul(const double* a, const double* b, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

void s_div(const double* a, const double* b, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a[i] / b[i];
}

void s_relu(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void s_relu_grad(const double* x, const double* g, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? g[i] : 0.0;
}

void s_leaky_relu(double slope, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : slope * x[i];
}

void s_leaky_relu_grad(double slope, const double* x, const double* g, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? g[i] : slope * g[i];
}

// C (m x n) = A (m x k) * B (k x n); saxpy order keeps B and C rows streaming.
void s_gemm_nn(const double* A, const double* B, double* C, std::size_t m, std::size_t k,
               std::size_t n, bool accumulate) {
    if (!accumulate) std::memset(C, 0, m * n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = C + i * n;
        const double* arow = A + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double a = arow[p];
            if (a == 0.0) continue;
            const double* brow = B + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += a * brow[j];
        }
    }
}

void s_gemm_nt(const double* A, const double* B, double* C, std::size_t m, std::size_t k,
               std::size_t n, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = A + i * k;
        double* crow = C + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = s_dot(arow, B + j * k, k);
            crow[j] = accumulate ? crow[j] + v : v;
        }
    }
}

void s_gemm_tn(const double* A, const double* B, double* C, std::size_t m, std::size_t k,
               std::size_t n, bool accumulate) {
    // C (m x n) = A(k x m)^T * B(k x n)
    if (!accumulate) std::memset(C, 0, m * n * sizeof(double));
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = A + p * m;
        const double* brow = B + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double a = arow[i];
            if (a == 0.0) continue;
            double* crow = C + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += a * brow[j];
        }
    }
}

const Ops kScalarOps = {
    s_dot,  s_sum,  s_sum_sq, s_axpy, s_scale,      s_add,
    s_sub,  s_mul,  s_div,    s_relu, s_relu_grad,  s_leaky_relu,
    s_leaky_relu_grad, s_gemm_nn, s_gemm_nt, s_gemm_tn,
};

Lane pick_initial_lane() {
#if defined(__x86_64__) || defined(_M_X64)
    const char* force = std::getenv("HYP2NAV_FORCE_SCALAR");
    if (force && force[0] != '\0' && force[0] != '0') return Lane::scalar;
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Lane::avx2;
#endif
    return Lane::scalar;
}

Lane g_lane = pick_initial_lane();

}  // namespace

#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();  // defined in kernels_avx2.cpp
#endif

const Ops& scalar_ops() { return kScalarOps; }

Lane active_lane() { return g_lane; }

const char* lane_name() { return g_lane == Lane::avx2 ? "avx2" : "scalar"; }

Lane set_lane(Lane lane) {
#if !defined(__x86_64__) && !defined(_M_X64)
    lane = Lane::scalar;
#endif
    Lane prev = g_lane;
    g_lane = lane;
    return prev;
}

const Ops& ops() {
#if defined(__x86_64__) || defined(_M_X64)
    if (g_lane == Lane::avx2) return avx2_ops();
#endif
    return kScalarOps;
}

}  // namespace hyp2nav::kern
