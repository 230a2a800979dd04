#pragma once

#include <map>

#include "ogc/domain.hpp"

namespace ogc {

// Polyline curve on the uniform grid s_i = i/n over [0,1]; derivatives are
// piecewise constant: xdot on [s_i, s_{i+1}] is n * (x_{i+1} - x_i).
struct DiscreteCurve {
    int n = 0;
    std::vector<Vec> nodes;  // n + 1 entries

    double h() const { return 1.0 / n; }
    double grid(int i) const { return static_cast<double>(i) / n; }
    Vec at(double s) const;  // piecewise-linear interpolation
    bool is_constant(double tol = 1e-12) const;
};

struct IntervalRecord {
    double a = 0.0;
    double b = 0.0;
    enum class Kind { Maximal, Sub };
    Kind kind = Kind::Maximal;
    bool boundary_flag_a = false;
    bool boundary_flag_b = false;
    bool minimal = false;
    int ia = 0, ib = 0;  // grid indices of a, b
};

// ||x||_{a,b} = (1/sqrt 2) ( max(||x(a)||_E^2, ||x(b)||_E^2)
//                            + int_a^b ||xdot||_E^2 )^{1/2}
double h1_norm(const DiscreteCurve& x, double a, double b);
// H1 distance between two curves on the same grid, same norm applied to x-y.
double h1_dist(const DiscreteCurve& x, const DiscreteCurve& y, double a, double b);

// f_{a,b}(x) = 1/2 int_a^b g(xdot, xdot), midpoint metric evaluation.
double curve_energy(const MetricField& field, const DiscreteCurve& x, double a, double b);
// int_a^b g(xdot, xdot).
double curve_integral_g(const MetricField& field, const DiscreteCurve& x, double a, double b);

// Maximal parameter intervals on which the curve stays in the closed domain
// with endpoints at boundary crossings (grid-snapped).
std::vector<IntervalRecord> maximal_intervals(const DiscreteCurve& x, const DomainSpec& spec);

DiscreteCurve reverse_curve(const DiscreteCurve& x);

// The boundary-pair chord generator G(A, B): radially-normalized chart
// segment -> broken geodesic -> clamp into the closed domain -> interior
// push. Exactly R-equivariant at node level.
DiscreteCurve chord_generator(const DomainSpec& spec, const Vec& A, const Vec& B, int n,
                              double inj_bound);

struct PathFamily {
    std::vector<Vec> boundary_grid;  // shared grid for both endpoints
    // curve index: (i, j) -> G(grid[i], grid[j])
    std::map<std::pair<int, int>, DiscreteCurve> curves;
    double M0 = 0.0;
};

PathFamily build_family(const DomainSpec& spec, int boundary_resolution, int n,
                        double inj_bound);

double compute_M0(PathFamily& family, const MetricField& field);

bool in_M(const DiscreteCurve& x, const PathFamily& family, const DomainSpec& spec);

struct Lemma21Result {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

// b - a >= delta^2 / K0^2 * (int_a^b g(xdot,xdot))^{-1}. K0_override < 0
// uses spec.K0.
Lemma21Result lemma2_1_check(const DiscreteCurve& x, const DomainSpec& spec, double a, double b,
                             double delta, double K0_override = -1.0);

// Boundary points equally spaced in the radial-normalization angle.
std::vector<Vec> boundary_grid_points(const DomainSpec& spec, int resolution);

}  // namespace ogc
