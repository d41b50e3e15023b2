#include "doctest.h"
#include "hyp2nav/geom.hpp"
#include "hyp2nav/optim.hpp"

#include <cmath>
#include <random>

using hyp2nav::ad::Param;
using hyp2nav::optim::AdamConfig;
using hyp2nav::optim::RiemannianAdam;
namespace geom = hyp2nav::geom;

TEST_CASE("zero gradient leaves parameters untouched") {
    Param e("e", 2, 2);
    e.value = {1.0, -2.0, 3.0, 4.0};
    Param m("m", 1, 2, /*manifold=*/true);
    m.value = {0.3, -0.1};
    RiemannianAdam opt({&e, &m});
    opt.zero_grad();
    opt.step();
    CHECK(opt.step_count() == 1);
    CHECK(e.value[0] == 1.0);
    CHECK(e.value[3] == 4.0);
    CHECK(m.value[0] == 0.3);
    CHECK(m.value[1] == -0.1);
}

TEST_CASE("euclidean update magnitude approaches lr under constant gradient") {
    Param p("p", 1, 1);
    p.value = {0.0};
    RiemannianAdam opt({&p});
    double prev = p.value[0];
    for (int i = 0; i < 200; ++i) {
        p.grad = {1.0};
        opt.step();
        if (i >= 100) {
            CHECK(std::abs(prev - p.value[0]) == doctest::Approx(1e-3).epsilon(1e-3));
        }
        prev = p.value[0];
    }

    // one step from fresh state also moves by ~lr (bias correction exact)
    Param q("q", 1, 1);
    q.value = {1.0};
    RiemannianAdam o2({&q});
    q.grad = {2.0};
    o2.step();
    CHECK(q.value[0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-8));
}

TEST_CASE("manifold step from origin follows the negative gradient direction") {
    Param b("b", 1, 3, /*manifold=*/true);
    b.value = {0.0, 0.0, 0.0};
    RiemannianAdam opt({&b});
    std::vector<double> u{0.6, -0.3, 0.9};
    b.grad = u;
    opt.step();

    const double un = std::sqrt(0.36 + 0.09 + 0.81);
    geom::TangentVector step{{-1e-3 * u[0] / un, -1e-3 * u[1] / un, -1e-3 * u[2] / un}};
    auto expect = geom::exp_map_origin(step);
    for (int i = 0; i < 3; ++i) {
        CHECK(b.value[std::size_t(i)] == doctest::Approx(expect.coords[std::size_t(i)]).epsilon(1e-6));
    }
    // direction is exactly along -u
    const double cross01 = b.value[0] * u[1] - b.value[1] * u[0];
    CHECK(std::abs(cross01) < 1e-12);
    CHECK(b.value[0] * u[0] < 0.0);
}

TEST_CASE("manifold parameter stays a valid ball point under abusive gradients") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> dist(-50.0, 50.0);
    Param b("b", 1, 4, /*manifold=*/true);
    b.value = {0.1, 0.2, -0.3, 0.05};
    AdamConfig cfg;
    cfg.lr = 0.5;  // deliberately huge
    RiemannianAdam opt({&b}, cfg);
    for (int i = 0; i < 500; ++i) {
        for (auto& g : b.grad) g = dist(rng);
        opt.step();
        double n2 = 0.0;
        for (double c : b.value) n2 += c * c;
        CHECK(std::sqrt(n2) <= 1.0 - 1e-5 + 1e-15);
        for (double c : b.value) CHECK(std::isfinite(c));
        b.zero_grad();
    }
}

TEST_CASE("non-finite gradient aborts with the parameter name") {
    Param p("layers.v1.b", 1, 2, true);
    RiemannianAdam opt({&p});
    p.grad = {1.0, std::nan("")};
    try {
        opt.step();
        FAIL("expected runtime_error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("layers.v1.b") != std::string::npos);
    }
}

TEST_CASE("adam actually minimizes a quadratic") {
    Param p("p", 1, 2);
    p.value = {2.0, -3.0};
    AdamConfig cfg;
    cfg.lr = 0.05;
    RiemannianAdam opt({&p}, cfg);
    for (int i = 0; i < 2000; ++i) {
        p.grad = {2.0 * p.value[0], 2.0 * p.value[1]};
        opt.step();
    }
    CHECK(std::abs(p.value[0]) < 1e-3);
    CHECK(std::abs(p.value[1]) < 1e-3);
}
