#pragma once

#include <span>
#include <string>
#include <vector>

namespace qasched {

class Rng;

/// Optimization variables: annealing time in microseconds and the Fourier
/// coefficients of the schedule deviation from the linear ramp.
struct DesignVector {
    double T = 20.0;
    std::vector<double> thetas;

    int order() const { return static_cast<int>(thetas.size()); }
    friend bool operator==(const DesignVector&, const DesignVector&) = default;
};

/// Closed box on (T, theta_1..theta_M): T in [t_min, t_max] and
/// |theta_m| <= alpha / m.
struct ScheduleBounds {
    double t_min = 1.0;
    double t_max = 2000.0;
    double alpha = 1.0;
    int order = 8;

    double theta_bound(int m) const { return alpha / m; }  // m is 1-based
    int dims() const { return order + 1; }
    bool contains(const DesignVector& dv) const;
};

ScheduleBounds default_bounds(int order = 8, double alpha = 1.0, double t_min = 1.0, double t_max = 2000.0);

/// Un-clipped s(t) = t/T + sum_m theta_m sin(m pi t / T).
double eval_schedule(const DesignVector& dv, double t);

struct GridPoint {
    double t = 0.0;
    double s = 0.0;
    friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

struct ScheduleGrid {
    std::vector<GridPoint> points;

    double anneal_time() const { return points.empty() ? 0.0 : points.back().t; }
    /// Piecewise-linear s(t), clamped outside [0, T].
    double interpolate(double t) const;
    /// Strictly increasing times, pinned endpoints and s in [0, 1].
    bool valid() const;
};

struct GridOptions {
    int points = 12;
    double resolution = 1e-4;
    /// Replace s by its running maximum before the endpoints are pinned.
    bool monotone = false;
};

ScheduleGrid render_grid(const DesignVector& dv, const GridOptions& options = {});

/// Rounds `s` to the nearest multiple of `resolution`.
double quantize(double s, double resolution);

/// T log-uniform on [t_min, t_max], theta_m uniform on its box.
DesignVector sample_random(const ScheduleBounds& b, Rng& rng);

/// Maps into the unit cube used by the surrogate: log T affinely, thetas
/// affinely from [-alpha/m, alpha/m].
std::vector<double> to_unit(const DesignVector& dv, const ScheduleBounds& b);
/// Inverse of to_unit; the input is clamped to [0,1] first so the result is
/// always inside the bounds.
DesignVector from_unit(std::span<const double> u, const ScheduleBounds& b);

std::string grid_to_json(const ScheduleGrid& grid);

}  // namespace qasched
