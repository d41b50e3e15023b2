#include "hyp2nav/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace hyp2nav::svg {

namespace {

constexpr double kScale = 60.0;   // px per meter
constexpr double kMargin = 1.0;   // meters of padding around the bbox

struct Mapper {
    double min_x = 0, max_y = 0;
    double px(double wx) const { return (wx - min_x + kMargin) * kScale; }
    double py(double wy) const { return (max_y - wy + kMargin) * kScale; }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

int blend(int a, int b, double t) {
    return static_cast<int>(std::lround(a + (b - a) * t));
}

}  // namespace

std::string attention_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", blend(0x2c, 0xd7, t), blend(0x7b, 0x19, t),
                  blend(0xb6, 0x1c, t));
    return buf;
}

void write_trajectory_svg(const sim::Rollout& rollout, std::size_t n_humans,
                          const std::vector<std::vector<double>>& attn_per_step,
                          std::ostream& out) {
    double min_x = rollout.initial.robot.px, max_x = min_x;
    double min_y = rollout.initial.robot.py, max_y = min_y;
    auto grow = [&](double x, double y) {
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
    };
    grow(rollout.initial.robot.gx, rollout.initial.robot.gy);
    for (const sim::HumanState& h : rollout.initial.humans) grow(h.px, h.py);
    for (const sim::TraceStep& s : rollout.steps) {
        grow(s.robot.px, s.robot.py);
        for (const sim::HumanState& h : s.humans) grow(h.px, h.py);
    }

    Mapper m{min_x, max_y};
    double w = (max_x - min_x + 2 * kMargin) * kScale;
    double h = (max_y - min_y + 2 * kMargin) * kScale;

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w) << "\" height=\""
        << fmt(h) << "\" viewBox=\"0 0 " << fmt(w) << " " << fmt(h) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

    // Goal cross.
    double gx = m.px(rollout.initial.robot.gx), gy = m.py(rollout.initial.robot.gy);
    out << "<line x1=\"" << fmt(gx - 8) << "\" y1=\"" << fmt(gy) << "\" x2=\"" << fmt(gx + 8)
        << "\" y2=\"" << fmt(gy) << "\" stroke=\"" << kRobotColor << "\" stroke-width=\"2\"/>\n";
    out << "<line x1=\"" << fmt(gx) << "\" y1=\"" << fmt(gy - 8) << "\" x2=\"" << fmt(gx)
        << "\" y2=\"" << fmt(gy + 8) << "\" stroke=\"" << kRobotColor << "\" stroke-width=\"2\"/>\n";

    // Mean attention per human, normalized so the most-attended human is hot.
    std::vector<double> mean_attn(n_humans, 0.0);
    if (!attn_per_step.empty()) {
        for (const std::vector<double>& row : attn_per_step)
            for (std::size_t i = 0; i < n_humans && i < row.size(); ++i) mean_attn[i] += row[i];
        double top = 0.0;
        for (double a : mean_attn) top = std::max(top, a);
        if (top > 0.0)
            for (double& a : mean_attn) a /= top;
    }

    auto path_for = [&](auto&& point_at, const std::string& color, double width) {
        out << "<path fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << fmt(width)
            << "\" d=\"";
        for (std::size_t t = 0; t <= rollout.steps.size(); ++t) {
            auto [x, y] = point_at(t);
            out << (t == 0 ? "M" : " L") << fmt(m.px(x)) << "," << fmt(m.py(y));
        }
        out << "\"/>\n";
    };

    for (std::size_t i = 0; i < n_humans; ++i) {
        std::string color = attention_color(mean_attn[i]);
        path_for(
            [&](std::size_t t) {
                const sim::HumanState& h =
                    t == 0 ? rollout.initial.humans[i] : rollout.steps[t - 1].humans[i];
                return std::pair<double, double>(h.px, h.py);
            },
            color, 1.5);
        const sim::HumanState& last =
            rollout.steps.empty() ? rollout.initial.humans[i] : rollout.steps.back().humans[i];
        out << "<circle cx=\"" << fmt(m.px(last.px)) << "\" cy=\"" << fmt(m.py(last.py))
            << "\" r=\"" << fmt(last.r * kScale) << "\" fill=\"" << color
            << "\" fill-opacity=\"0.35\" stroke=\"" << color << "\"/>\n";
    }

    path_for(
        [&](std::size_t t) {
            const sim::RobotState& r = t == 0 ? rollout.initial.robot : rollout.steps[t - 1].robot;
            return std::pair<double, double>(r.px, r.py);
        },
        kRobotColor, 2.5);
    const sim::RobotState& last =
        rollout.steps.empty() ? rollout.initial.robot : rollout.steps.back().robot;
    out << "<circle cx=\"" << fmt(m.px(last.px)) << "\" cy=\"" << fmt(m.py(last.py)) << "\" r=\""
        << fmt(last.r * kScale) << "\" fill=\"" << kRobotColor
        << "\" fill-opacity=\"0.35\" stroke=\"" << kRobotColor << "\"/>\n";

    out << "</svg>\n";
}

}  // namespace hyp2nav::svg
