#include "qasched/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "qasched/errors.hpp"
#include "qasched/rng.hpp"

namespace qasched {

bool ScheduleBounds::contains(const DesignVector& dv) const {
    if (dv.order() != order) return false;
    if (dv.T < t_min || dv.T > t_max) return false;
    for (int m = 1; m <= order; ++m)
        if (std::abs(dv.thetas[m - 1]) > theta_bound(m)) return false;
    return true;
}

ScheduleBounds default_bounds(int order, double alpha, double t_min, double t_max) {
    if (order < 0) throw InvalidArgument("default_bounds: order must be >= 0");
    if (!(t_min > 0.0) || t_max < t_min) throw InvalidArgument("default_bounds: need 0 < t_min <= t_max");
    if (!(alpha > 0.0)) throw InvalidArgument("default_bounds: alpha must be positive");
    return {t_min, t_max, alpha, order};
}

double eval_schedule(const DesignVector& dv, double t) {
    if (!(t >= 0.0 && t <= dv.T)) throw InvalidArgument("eval_schedule: t outside [0, T]");
    const double phase = std::numbers::pi * t / dv.T;
    double s = t / dv.T;
    for (int m = 1; m <= dv.order(); ++m) s += dv.thetas[m - 1] * std::sin(m * phase);
    return s;
}

double ScheduleGrid::interpolate(double t) const {
    if (points.empty()) return 0.0;
    if (t <= points.front().t) return points.front().s;
    if (t >= points.back().t) return points.back().s;
    auto hi = std::upper_bound(points.begin(), points.end(), t,
                               [](double value, const GridPoint& p) { return value < p.t; });
    auto lo = hi - 1;
    const double w = (t - lo->t) / (hi->t - lo->t);
    return lo->s + w * (hi->s - lo->s);
}

bool ScheduleGrid::valid() const {
    if (points.size() < 2) return false;
    if (points.front().t != 0.0 || points.front().s != 0.0) return false;
    if (points.back().s != 1.0) return false;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].s < 0.0 || points[i].s > 1.0) return false;
        if (i > 0 && !(points[i].t > points[i - 1].t)) return false;
    }
    return true;
}

double quantize(double s, double resolution) {
    if (!(resolution > 0.0)) return s;
    // Dividing by an exact integer step count keeps values such as 0.25 exact.
    const double steps = std::round(1.0 / resolution);
    if (steps >= 1.0 && std::abs(steps * resolution - 1.0) < 1e-12) return std::round(s * steps) / steps;
    return std::round(s / resolution) * resolution;
}

ScheduleGrid render_grid(const DesignVector& dv, const GridOptions& options) {
    if (options.points < 2) throw InvalidArgument("render_grid: need at least 2 points");
    ScheduleGrid grid;
    const int p = options.points;
    grid.points.reserve(p);
    double running_max = 0.0;
    for (int i = 0; i < p; ++i) {
        const double t = (i == p - 1) ? dv.T : dv.T * i / (p - 1);
        double s = std::clamp(eval_schedule(dv, t), 0.0, 1.0);
        s = std::clamp(quantize(s, options.resolution), 0.0, 1.0);
        if (options.monotone) {
            running_max = std::max(running_max, s);
            s = running_max;
        }
        grid.points.push_back({t, s});
    }
    grid.points.front() = {0.0, 0.0};
    grid.points.back() = {dv.T, 1.0};
    return grid;
}

DesignVector sample_random(const ScheduleBounds& b, Rng& rng) {
    DesignVector dv;
    const double log_t = rng.uniform(std::log(b.t_min), std::log(b.t_max));
    dv.T = std::clamp(std::exp(log_t), b.t_min, b.t_max);
    dv.thetas.resize(b.order);
    for (int m = 1; m <= b.order; ++m) {
        const double w = b.theta_bound(m);
        dv.thetas[m - 1] = std::clamp(rng.uniform(-w, w), -w, w);
    }
    return dv;
}

std::vector<double> to_unit(const DesignVector& dv, const ScheduleBounds& b) {
    std::vector<double> u(b.dims(), 0.5);
    const double span = std::log(b.t_max) - std::log(b.t_min);
    if (span > 0.0) u[0] = std::clamp((std::log(dv.T) - std::log(b.t_min)) / span, 0.0, 1.0);
    for (int m = 1; m <= b.order; ++m) {
        const double w = b.theta_bound(m);
        u[m] = std::clamp((dv.thetas[m - 1] + w) / (2.0 * w), 0.0, 1.0);
    }
    return u;
}

DesignVector from_unit(std::span<const double> u, const ScheduleBounds& b) {
    if (static_cast<int>(u.size()) != b.dims()) throw InvalidArgument("from_unit: dimension mismatch");
    DesignVector dv;
    const double u0 = std::clamp(u[0], 0.0, 1.0);
    dv.T = std::clamp(std::exp(std::log(b.t_min) + u0 * (std::log(b.t_max) - std::log(b.t_min))), b.t_min,
                      b.t_max);
    dv.thetas.resize(b.order);
    for (int m = 1; m <= b.order; ++m) {
        const double w = b.theta_bound(m);
        dv.thetas[m - 1] = std::clamp(-w + 2.0 * w * std::clamp(u[m], 0.0, 1.0), -w, w);
    }
    return dv;
}

std::string grid_to_json(const ScheduleGrid& grid) {
    auto arr = nlohmann::json::array();
    for (const auto& p : grid.points) arr.push_back({p.t, p.s});
    return arr.dump();
}

}  // namespace qasched
