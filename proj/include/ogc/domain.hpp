#pragma once

#include <functional>
#include <memory>

#include "ogc/geometry.hpp"

namespace ogc {

// Boundary description of the working domain Omega = {phi < 0}. phi vanishes
// on the boundary and is positive outside; delta0 is the depth of the shell
// around the boundary on which strong concavity and a nonvanishing gradient
// have been verified by sampling, and K0 bounds the g-norm of the gradient
// over {phi <= delta0}.
struct DomainSpec {
    std::shared_ptr<const MetricField> field;
    std::function<double(const Vec&)> phi;
    // Chart partial derivatives of phi; finite differences when absent.
    std::function<Vec(const Vec&)> dphi;
    // Distance from chart_center to the boundary along a unit chart
    // direction; defines the radial normalization used by the chord
    // generator. All built-in domains are star-shaped in their chart.
    std::function<double(const Vec&)> star_radius;
    Vec chart_center;

    double delta0 = 0.0;
    double K0 = 0.0;
    double boundary_tol = 1e-7;
    double grad_floor = 1e-6;
    double concavity_floor = 1e-9;
    std::string name;

    Vec dphi_at(const Vec& q) const;          // chart partials
    Vec grad_phi(const Vec& q) const;         // g-gradient g^{-1} dphi
    double grad_phi_norm(const Vec& q) const; // g-norm of the gradient
    // Hessian bilinear form H^phi(q)(v, w) (chart second derivatives
    // corrected by Christoffel symbols).
    double hess_phi(const Vec& q, const Vec& v, const Vec& w) const;
};

double second_fundamental_form(const DomainSpec& spec, const Vec& x, const Vec& v);

struct ConcavityWitness {
    Vec q;
    Vec v;
    double value = 0.0;
    std::string reason;
};

struct ConcavityReport {
    bool is_strongly_concave = false;
    double delta0 = 0.0;
    std::vector<ConcavityWitness> witnesses;
};

// Bisection over the shell depth; on success stores 0.9 x the largest
// verified depth into spec.delta0.
ConcavityReport check_strong_concavity(DomainSpec& spec, int samples, Rng& rng);

// Sampled max of ||grad phi|| over {phi <= delta0}, inflated by 5%.
double compute_K0(DomainSpec& spec, int samples, Rng& rng);

// Normalized gradient flow eta^{+/-}; phi changes linearly in tau.
Vec flow_eta(const DomainSpec& spec, const Vec& x, double tau, int direction);

// pi(x): follow eta^+ until phi = 0 (with a Newton polish along the same
// direction to push |phi| below 1e-10).
Vec project_to_boundary(const DomainSpec& spec, const Vec& x);

// Uniformly sample chart points with phi in [lo, hi] (rejection sampling).
std::vector<Vec> sample_phi_band(const DomainSpec& spec, double lo, double hi, int count,
                                 Rng& rng, double chart_margin = 0.0);

// Orthonormal (w.r.t. g) basis of the g-orthogonal complement of grad phi.
std::vector<Vec> boundary_tangent_basis(const DomainSpec& spec, const Vec& q);

}  // namespace ogc
