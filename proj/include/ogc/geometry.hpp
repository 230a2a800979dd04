#pragma once

#include <functional>
#include <optional>

#include "ogc/core.hpp"

namespace ogc {

// A single coordinate chart. All built-in geometries fit in one chart, so
// there is no atlas machinery.
struct ChartDomain {
    enum class Kind { Box, Ball };
    Kind kind = Kind::Box;
    Vec lo, hi;      // Box
    Vec center;      // Ball
    double radius = 0.0;

    static ChartDomain box(const Vec& lo, const Vec& hi);
    static ChartDomain ball(const Vec& center, double radius);
    bool contains(const Vec& q, double margin = 0.0) const;
    int dim() const;
};

struct MetricField {
    int dim = 2;
    ChartDomain chart_domain;
    std::function<Mat(const Vec&)> g_eval;
    double derivative_step = 1e-5;
    // Optional exact formula; when absent Christoffel symbols come from
    // central differences of g with a Richardson fallback.
    std::function<Tensor3(const Vec&)> analytic_christoffel;
};

struct GeodesicTrajectory {
    std::vector<double> times;
    std::vector<Vec> points;
    std::vector<Vec> velocities;

    const Vec& start() const { return points.front(); }
    const Vec& end() const { return points.back(); }
    // g-length, assuming the g-speed is (numerically) constant along the
    // trajectory; computed as speed(0) * (t_final - t_0).
    double length(const MetricField& field) const;
};

Mat metric_at(const MetricField& field, const Vec& q);
Tensor3 christoffel_at(const MetricField& field, const Vec& q);

// g(u, v) at q.
double metric_inner(const MetricField& field, const Vec& q, const Vec& u, const Vec& v);
double metric_norm(const MetricField& field, const Vec& q, const Vec& u);

GeodesicTrajectory integrate_geodesic(const MetricField& field, const Vec& q0, const Vec& v0,
                                      double T, double step);

// Two-point minimal geodesic by single shooting (damped Newton on the
// initial velocity), parameterized on [0, 1].
GeodesicTrajectory minimal_geodesic(const MetricField& field, const Vec& p, const Vec& q,
                                    double dist_bound);

struct InjectivityOptions {
    double cap = 10.0;          // returned bound for conjugate-point-free charts
    double floor = 1e-3;        // DegenerateRegion below this
    int directions = 4;         // shooting directions per sample point
    double step = 2e-3;         // integration step
};

double injectivity_radius_lower_bound(const MetricField& field, const std::vector<Vec>& region,
                                      const InjectivityOptions& opts = {});

}  // namespace ogc
