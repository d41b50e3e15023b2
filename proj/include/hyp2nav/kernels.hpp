#pragma once

#include <cstddef>
#include <string>

// Dense double-precision kernels used by the tensor and geometry layers.
// Every kernel has a scalar reference implementation and, on x86-64 with
// AVX2+FMA, a vectorized variant. The active lane is picked once at startup;
// set HYP2NAV_FORCE_SCALAR=1 in the environment to pin the scalar lane.
// SIMD variants are equivalence-tested against the scalar lane (results may
// differ in the last bits because of FMA and summation order).

namespace hyp2nav::kern {

enum class Lane { scalar, avx2 };

Lane active_lane();
const char* lane_name();
// Test hook: force a lane at runtime. Returns previous lane.
Lane set_lane(Lane lane);

struct Ops {
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    double (*sum_sq)(const double* x, std::size_t n);
    // y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // y = a * x
    void (*scale)(double a, const double* x, double* y, std::size_t n);
    void (*add)(const double* a, const double* b, double* y, std::size_t n);
    void (*sub)(const double* a, const double* b, double* y, std::size_t n);
    void (*mul)(const double* a, const double* b, double* y, std::size_t n);
    void (*div)(const double* a, const double* b, double* y, std::size_t n);
    void (*relu)(const double* x, double* y, std::size_t n);
    // y = g where x > 0 else 0   (backward of relu)
    void (*relu_grad)(const double* x, const double* g, double* y, std::size_t n);
    void (*leaky_relu)(double slope, const double* x, double* y, std::size_t n);
    void (*leaky_relu_grad)(double slope, const double* x, const double* g, double* y,
                            std::size_t n);
    // Row-major GEMM, C (m x n). accumulate=false overwrites C.
    // nn: C = A(m x k) * B(k x n)
    // nt: C = A(m x k) * B(n x k)^T
    // tn: C = A(k x m)^T * B(k x n)
    void (*gemm_nn)(const double* A, const double* B, double* C, std::size_t m, std::size_t k,
                    std::size_t n, bool accumulate);
    void (*gemm_nt)(const double* A, const double* B, double* C, std::size_t m, std::size_t k,
                    std::size_t n, bool accumulate);
    void (*gemm_tn)(const double* A, const double* B, double* C, std::size_t m, std::size_t k,
                    std::size_t n, bool accumulate);
};

// Active dispatch table.
const Ops& ops();

// Reference (scalar) table, for equivalence tests.
const Ops& scalar_ops();

}  // namespace hyp2nav::kern
