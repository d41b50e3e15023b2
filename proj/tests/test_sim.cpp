#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "hyp2nav/sim.hpp"

using namespace hyp2nav::sim;

namespace {

ScenarioConfig simple_cfg(std::size_t n = 5) {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::kSimpleCircle;
    cfg.n_humans = n;
    return cfg;
}

PolicyDecision stay(const Observation&) { return {{0.0, 0.0}, 0}; }

PolicyDecision straight(const Observation& o) {
    const double h = std::atan2(o.robot.gy - o.robot.py, o.robot.gx - o.robot.px);
    return {{o.robot.v_max, h}, -1};
}

}  // namespace

TEST_CASE("action space layout and speed levels") {
    const auto actions = action_space(1.0);
    REQUIRE(actions.size() == 81);
    CHECK(actions[0].speed == 0.0);

    const double speeds[5] = {0.12885124808584156, 0.2862305178902687, 0.47845399210662953,
                              0.7132362736976232, 1.0};
    for (int k = 1; k <= 5; ++k) {
        for (int j = 0; j < 16; ++j) {
            const Action& a = actions[1 + (k - 1) * 16 + j];
            CHECK(a.speed == doctest::Approx(speeds[k - 1]).epsilon(1e-15));
            CHECK(a.heading == doctest::Approx(2.0 * M_PI * j / 16.0).epsilon(1e-15));
        }
    }
    // Top speed level is exactly v_max.
    CHECK(actions[1 + 4 * 16].speed == 1.0);

    const auto scaled = action_space(2.0);
    CHECK(scaled[80].speed == 2.0);
    CHECK_THROWS_AS(action_space(0.0), std::invalid_argument);
}

TEST_CASE("reward hand values") {
    Observation o;
    o.robot.px = 0.0;
    o.robot.py = 0.0;
    o.robot.gx = 2.0;
    o.robot.gy = 0.0;
    o.robot.r = 0.3;

    SUBCASE("goal distance only") {
        CHECK(extrinsic_reward(o, std::nullopt) == doctest::Approx(-0.4).epsilon(1e-15));
    }
    SUBCASE("discomfort shell") {
        o.robot.gx = 1.0;
        HumanState h;
        h.px = 0.7;
        h.py = 0.0;
        h.r = 0.3;
        o.humans.push_back(h);
        // d_g = 1, surface distance 0.1: -0.2 + (0.1 - 0.2) = -0.3.
        CHECK(extrinsic_reward(o, std::nullopt) == doctest::Approx(-0.3).epsilon(1e-12));
    }
    SUBCASE("humans outside the shell are free") {
        HumanState h;
        h.px = 0.0;
        h.py = 1.0;
        h.r = 0.3;
        o.humans.push_back(h);
        CHECK(extrinsic_reward(o, std::nullopt) == doctest::Approx(-0.4).epsilon(1e-15));
    }
    SUBCASE("terminal outcomes") {
        CHECK(extrinsic_reward(o, Outcome::kSuccess) == 0.25);
        CHECK(extrinsic_reward(o, Outcome::kCollision) == -0.25);
        // Timeout falls through to the dense formula.
        CHECK(extrinsic_reward(o, Outcome::kTimeout) == doctest::Approx(-0.4).epsilon(1e-15));
    }
}

TEST_CASE("reset places the simple scenario on the circle") {
    Env env(simple_cfg());
    const Observation o = env.reset(7);

    CHECK(o.robot.px == 0.0);
    CHECK(o.robot.py == -4.0);
    CHECK(o.robot.gx == 0.0);
    CHECK(o.robot.gy == 4.0);
    CHECK(o.robot.theta == doctest::Approx(1.5707963267948966));
    CHECK(o.robot.vx == 0.0);
    CHECK(o.t == 0.0);
    REQUIRE(o.humans.size() == 5);
    REQUIRE(env.human_goals().size() == 5);

    for (std::size_t i = 0; i < 5; ++i) {
        const HumanState& h = o.humans[i];
        // Noise is at most 0.5 per coordinate.
        CHECK(std::abs(std::hypot(h.px, h.py) - 4.0) <= 0.5 * std::sqrt(2.0) + 1e-12);
        CHECK(env.human_goals()[i].x == -h.px);
        CHECK(env.human_goals()[i].y == -h.py);
        // Spawn clearance against the robot.
        CHECK(std::hypot(h.px - o.robot.px, h.py - o.robot.py) >= 0.8 - 1e-12);
        for (std::size_t j = 0; j < i; ++j) {
            CHECK(std::hypot(h.px - o.humans[j].px, h.py - o.humans[j].py) >= 0.8 - 1e-12);
        }
    }
}

TEST_CASE("reset is deterministic per seed") {
    Env a(simple_cfg());
    Env b(simple_cfg());
    const auto fa = a.reset(123).flatten();
    const auto fb = b.reset(123).flatten();
    REQUIRE(fa.size() == observation_dim(5));
    CHECK(fa == fb);

    const auto fc = a.reset(124).flatten();
    CHECK(fa != fc);
}

TEST_CASE("complex scenarios spawn structured plus random humans") {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::kComplexCircle;
    cfg.n_humans = 10;
    Env env(cfg);
    const Observation o = env.reset(3);
    REQUIRE(o.humans.size() == 10);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(std::abs(std::hypot(o.humans[i].px, o.humans[i].py) - 4.0) <=
              0.5 * std::sqrt(2.0) + 1e-12);
    }
    for (std::size_t i = 5; i < 10; ++i) {
        CHECK(std::abs(o.humans[i].px) <= 4.0);
        CHECK(std::abs(o.humans[i].py) <= 4.0);
    }

    cfg.kind = ScenarioKind::kComplexSquare;
    Env sq(cfg);
    const Observation os = sq.reset(3);
    for (std::size_t i = 0; i < 5; ++i) {
        // Perimeter points sit at max(|x|,|y|) = 4 before noise.
        const double m = std::max(std::abs(os.humans[i].px), std::abs(os.humans[i].py));
        CHECK(std::abs(m - 4.0) <= 0.5 + 1e-12);
    }
}

TEST_CASE("straight run in an empty arena succeeds on the step grid") {
    Env env(simple_cfg(0));
    Rollout r = rollout(env, straight, 1);

    CHECK(r.outcome.kind == Outcome::kSuccess);
    // 8 m at 1 m/s, success inside 0.3 m: crosses at step 31.
    CHECK(r.outcome.nav_time == doctest::Approx(7.75).epsilon(1e-12));
    CHECK(r.steps.size() == 31);
    CHECK(r.steps.back().reward == 0.25);
    CHECK(r.steps.back().done);
}

TEST_CASE("always-stay times out at the limit") {
    Env env(simple_cfg());
    Rollout r = rollout(env, stay, 5);
    CHECK(r.outcome.kind == Outcome::kTimeout);
    CHECK(r.outcome.nav_time == doctest::Approx(30.0));
    CHECK(r.steps.size() == 120);
    for (std::size_t i = 0; i + 1 < r.steps.size(); ++i) CHECK(!r.steps[i].done);
    CHECK(r.steps.back().done);
    // Stay keeps position and heading.
    CHECK(r.steps.back().robot.px == 0.0);
    CHECK(r.steps.back().robot.py == -4.0);
    CHECK(r.steps.back().robot.theta == doctest::Approx(1.5707963267948966));
}

TEST_CASE("step after termination throws") {
    Env env(simple_cfg(0));
    env.reset(1);
    for (;;) {
        const auto s = env.step({1.0, 1.5707963267948966});
        if (s.done) break;
    }
    CHECK_THROWS_AS(env.step({0.0, 0.0}), std::logic_error);

    Env fresh(simple_cfg(0));
    fresh.reset(1);
    CHECK_THROWS_AS(fresh.step({2.0, 0.0}), std::invalid_argument);
}

TEST_CASE("episodes are deterministic and outcomes exclusive") {
    const auto actions = action_space(1.0);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Env env(simple_cfg());
        std::mt19937_64 pol(seed * 7 + 1);
        std::uniform_int_distribution<std::size_t> pick(0, 80);
        Policy p = [&](const Observation&) -> PolicyDecision {
            const std::size_t i = pick(pol);
            return {actions[i], static_cast<int>(i)};
        };
        Rollout a = rollout(env, p, seed);

        std::mt19937_64 pol2(seed * 7 + 1);
        Policy p2 = [&](const Observation&) -> PolicyDecision {
            const std::size_t i = pick(pol2);
            return {actions[i], static_cast<int>(i)};
        };
        Env env2(simple_cfg());
        Rollout b = rollout(env2, p2, seed);

        REQUIRE(a.steps.size() == b.steps.size());
        for (std::size_t k = 0; k < a.steps.size(); ++k) {
            CHECK(a.steps[k].reward == b.steps[k].reward);
            CHECK(a.steps[k].robot.px == b.steps[k].robot.px);
        }
        // Exactly one terminal row, and it is the last.
        std::size_t done_rows = 0;
        for (const TraceStep& s : a.steps) done_rows += s.done ? 1 : 0;
        CHECK(done_rows == 1);
        CHECK(a.steps.back().done);
        const double last_r = a.steps.back().reward;
        if (a.outcome.kind == Outcome::kSuccess) CHECK(last_r == 0.25);
        if (a.outcome.kind == Outcome::kCollision) CHECK(last_r == -0.25);
    }
}

TEST_CASE("humans ignore the robot") {
    // Same seed, two different robot policies: human rows must match bitwise
    // on the shared prefix.
    Env ea(simple_cfg());
    Rollout ra = rollout(ea, stay, 42);
    Env eb(simple_cfg());
    Rollout rb = rollout(eb, straight, 42);

    CHECK(ea.reset(42).flatten() == eb.reset(42).flatten());
    const std::size_t common = std::min(ra.steps.size(), rb.steps.size());
    REQUIRE(common > 0);
    for (std::size_t k = 0; k < common; ++k) {
        REQUIRE(ra.steps[k].humans.size() == rb.steps[k].humans.size());
        for (std::size_t i = 0; i < ra.steps[k].humans.size(); ++i) {
            CHECK(ra.steps[k].humans[i].px == rb.steps[k].humans[i].px);
            CHECK(ra.steps[k].humans[i].py == rb.steps[k].humans[i].py);
            CHECK(ra.steps[k].humans[i].vx == rb.steps[k].humans[i].vx);
            CHECK(ra.steps[k].humans[i].vy == rb.steps[k].humans[i].vy);
        }
    }
}

TEST_CASE("rewards recompute exactly from the trace") {
    Env env(simple_cfg());
    Rollout r = rollout(env, stay, 9);
    for (std::size_t k = 0; k < r.steps.size(); ++k) {
        Observation o;
        o.robot = r.steps[k].robot;
        o.humans = r.steps[k].humans;
        o.t = r.steps[k].t;
        std::optional<Outcome> kind;
        if (r.steps[k].done) kind = r.outcome.kind;
        CHECK(extrinsic_reward(o, kind) == r.steps[k].reward);
    }
    double total = 0.0;
    for (const TraceStep& s : r.steps) total += s.reward;
    CHECK(r.outcome.cumulative_return == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("humans never collide with each other") {
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        Env env(simple_cfg());
        Observation prev = env.reset(seed);
        for (;;) {
            const auto s = env.step({0.0, 0.0});
            for (std::size_t i = 0; i < s.obs.humans.size(); ++i) {
                for (std::size_t j = i + 1; j < s.obs.humans.size(); ++j) {
                    const HumanState& a = prev.humans[i];
                    const HumanState& b = prev.humans[j];
                    const hyp2nav::orca::Vec2 rel_pos{b.px - a.px, b.py - a.py};
                    const hyp2nav::orca::Vec2 rel_vel{s.obs.humans[j].vx - s.obs.humans[i].vx,
                                                      s.obs.humans[j].vy - s.obs.humans[i].vy};
                    const double sep = hyp2nav::orca::closest_approach(rel_pos, rel_vel, 0.25);
                    CHECK(sep >= a.r + b.r);
                }
            }
            if (s.done) break;
            prev = s.obs;
        }
    }
}

TEST_CASE("orca robot action heads for the goal when clear") {
    ScenarioConfig cfg = simple_cfg(0);
    Env env(cfg);
    const Observation o = env.reset(1);
    const Action a = orca_robot_action(o, cfg);
    CHECK(a.speed == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(a.heading == doctest::Approx(1.5707963267948966).epsilon(1e-9));
}

TEST_CASE("trace csv is rectangular and complete") {
    Env env(simple_cfg());
    Rollout r = rollout(env, stay, 11);
    std::ostringstream os;
    write_trace_csv(r, 5, os);

    std::istringstream is(os.str());
    std::string line;
    std::size_t rows = 0;
    std::size_t cols = 0;
    while (std::getline(is, line)) {
        const std::size_t c = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
        if (rows == 0) {
            cols = c;
        } else {
            CHECK(c == cols);
        }
        ++rows;
    }
    CHECK(cols == 1 + 9 + 5 * 5 + 3);
    CHECK(rows == r.steps.size() + 1);
}
