#include "doctest.h"
#include "hyp2nav/kernels.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace hyp2nav::kern;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo = -2.0,
                               double hi = 2.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

bool close_all(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) > tol * (1.0 + std::abs(a[i]))) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("scalar kernels match hand values") {
    const Ops& k = scalar_ops();
    std::vector<double> a{1.0, 2.0, 3.0};
    std::vector<double> b{4.0, -5.0, 6.0};
    CHECK(k.dot(a.data(), b.data(), 3) == doctest::Approx(12.0).epsilon(1e-14));
    CHECK(k.sum(a.data(), 3) == doctest::Approx(6.0));
    CHECK(k.sum_sq(a.data(), 3) == doctest::Approx(14.0));

    std::vector<double> y{1.0, 1.0, 1.0};
    k.axpy(2.0, a.data(), y.data(), 3);
    CHECK(y[0] == doctest::Approx(3.0));
    CHECK(y[2] == doctest::Approx(7.0));

    std::vector<double> r(3);
    k.relu(b.data(), r.data(), 3);
    CHECK(r[0] == 4.0);
    CHECK(r[1] == 0.0);
    k.leaky_relu(0.2, b.data(), r.data(), 3);
    CHECK(r[1] == doctest::Approx(-1.0));
}

TEST_CASE("gemm_nn small case") {
    const Ops& k = scalar_ops();
    // [1 2; 3 4] * [5 6; 7 8] = [19 22; 43 50]
    std::vector<double> A{1, 2, 3, 4}, B{5, 6, 7, 8}, C(4, 0.0);
    k.gemm_nn(A.data(), B.data(), C.data(), 2, 2, 2, false);
    CHECK(C[0] == doctest::Approx(19.0));
    CHECK(C[1] == doctest::Approx(22.0));
    CHECK(C[2] == doctest::Approx(43.0));
    CHECK(C[3] == doctest::Approx(50.0));
    // accumulate doubles the result
    k.gemm_nn(A.data(), B.data(), C.data(), 2, 2, 2, true);
    CHECK(C[3] == doctest::Approx(100.0));
}

TEST_CASE("gemm transpose variants agree with explicit transposition") {
    std::mt19937_64 rng(7);
    const Ops& k = scalar_ops();
    const std::size_t m = 5, kk = 4, n = 3;
    auto A = random_vec(rng, m * kk);
    auto B = random_vec(rng, kk * n);
    std::vector<double> C0(m * n, 0.0);
    k.gemm_nn(A.data(), B.data(), C0.data(), m, kk, n, false);

    // nt: feed B transposed (n x kk) and expect the same product
    std::vector<double> Bt(n * kk);
    for (std::size_t i = 0; i < kk; ++i)
        for (std::size_t j = 0; j < n; ++j) Bt[j * kk + i] = B[i * n + j];
    std::vector<double> C1(m * n, 0.0);
    k.gemm_nt(A.data(), Bt.data(), C1.data(), m, kk, n, false);
    CHECK(close_all(C0, C1, 1e-13));

    // tn: feed A transposed (kk x m)
    std::vector<double> At(kk * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < kk; ++j) At[j * m + i] = A[i * kk + j];
    std::vector<double> C2(m * n, 0.0);
    k.gemm_tn(At.data(), B.data(), C2.data(), m, kk, n, false);
    CHECK(close_all(C0, C2, 1e-13));
}

TEST_CASE("simd lane agrees with scalar lane on random inputs") {
    const Ops& s = scalar_ops();
    const Ops& v = ops();
    INFO("active lane: ", lane_name());

    std::mt19937_64 rng(42);
    for (std::size_t n : {1u, 2u, 3u, 4u, 7u, 8u, 16u, 33u, 128u, 1001u}) {
        auto a = random_vec(rng, n);
        auto b = random_vec(rng, n, 0.1, 2.0);
        CHECK(s.dot(a.data(), b.data(), n) ==
              doctest::Approx(v.dot(a.data(), b.data(), n)).epsilon(1e-12));
        CHECK(s.sum(a.data(), n) == doctest::Approx(v.sum(a.data(), n)).epsilon(1e-12));
        CHECK(s.sum_sq(a.data(), n) == doctest::Approx(v.sum_sq(a.data(), n)).epsilon(1e-12));

        std::vector<double> y0 = b, y1 = b;
        s.axpy(1.7, a.data(), y0.data(), n);
        v.axpy(1.7, a.data(), y1.data(), n);
        CHECK(close_all(y0, y1, 1e-13));

        std::vector<double> r0(n), r1(n);
        s.leaky_relu(0.2, a.data(), r0.data(), n);
        v.leaky_relu(0.2, a.data(), r1.data(), n);
        CHECK(close_all(r0, r1, 0.0));

        s.relu_grad(a.data(), b.data(), r0.data(), n);
        v.relu_grad(a.data(), b.data(), r1.data(), n);
        CHECK(close_all(r0, r1, 0.0));

        s.div(a.data(), b.data(), r0.data(), n);
        v.div(a.data(), b.data(), r1.data(), n);
        CHECK(close_all(r0, r1, 1e-13));
    }

    const std::size_t shapes[][3] = {{1, 1, 1}, {3, 5, 2}, {8, 8, 8}, {13, 17, 9}, {32, 64, 81}};
    for (const auto& sh : shapes) {
        const std::size_t m = sh[0], kk = sh[1], n = sh[2];
        auto A = random_vec(rng, m * kk);
        auto B = random_vec(rng, kk * n);
        std::vector<double> C0(m * n, 0.5), C1(m * n, 0.5);
        s.gemm_nn(A.data(), B.data(), C0.data(), m, kk, n, true);
        v.gemm_nn(A.data(), B.data(), C1.data(), m, kk, n, true);
        CHECK(close_all(C0, C1, 1e-12));

        auto Bt = random_vec(rng, n * kk);
        std::fill(C0.begin(), C0.end(), 0.0);
        std::fill(C1.begin(), C1.end(), 0.0);
        s.gemm_nt(A.data(), Bt.data(), C0.data(), m, kk, n, false);
        v.gemm_nt(A.data(), Bt.data(), C1.data(), m, kk, n, false);
        CHECK(close_all(C0, C1, 1e-12));

        auto At = random_vec(rng, kk * m);
        std::fill(C0.begin(), C0.end(), 0.0);
        std::fill(C1.begin(), C1.end(), 0.0);
        s.gemm_tn(At.data(), B.data(), C0.data(), m, kk, n, false);
        v.gemm_tn(At.data(), B.data(), C1.data(), m, kk, n, false);
        CHECK(close_all(C0, C1, 1e-12));
    }
}

TEST_CASE("lane can be forced to scalar") {
    Lane prev = set_lane(Lane::scalar);
    CHECK(active_lane() == Lane::scalar);
    CHECK(std::string(lane_name()) == "scalar");
    set_lane(prev);
}
