#pragma once

#include "ogc/minimax.hpp"

namespace ogc {

// H(q, p) = 1/2 a^{ij}(q) p_i p_j + V(q) at fixed energy E.
struct NaturalHamiltonian {
    int dim = 2;
    std::function<Mat(const Vec&)> a_upper;  // a^{ij}
    std::function<double(const Vec&)> V;
    std::function<Vec(const Vec&)> dV;  // finite differences when absent
    double E = 1.0;
    bool constant_kinetic = true;  // a^{ij} independent of q (enables leapfrog)

    double hamiltonian(const Vec& q, const Vec& p) const;
    Vec dV_at(const Vec& q) const;
};

struct HamTrajectory {
    std::vector<double> times;
    std::vector<Vec> q;
    std::vector<Vec> p;
};

struct BrakeOrbit {
    std::vector<double> times;
    std::vector<Vec> q_traj;
    std::vector<Vec> p_traj;
    double T = 0.0;  // half-period
    double residual_p0 = 0.0;
    double residual_pT = 0.0;
    double amplitude = 0.0;  // max Euclidean distance of q from the origin
};

HamTrajectory hamilton_flow(const NaturalHamiltonian& ham, const Vec& q0, const Vec& p0,
                            double T, double step);

// Jacobi metric g_J = (E - V) a_{ij} with domain phi = V - (E - rho).
struct JacobiDomain {
    std::shared_ptr<MetricField> field;
    DomainSpec spec;
};

JacobiDomain jacobi_metric(const NaturalHamiltonian& ham, double rho);

BrakeOrbit brake_orbit_from_chord(const NaturalHamiltonian& ham, const ChordResult& chord,
                                  double rho, double step = 5e-4);

struct AnalyticBrakeOrbit {
    int axis = 0;
    double amplitude = 0.0;
    double half_period = 0.0;
};

struct EllipsoidReference {
    std::vector<AnalyticBrakeOrbit> orbits;
    bool rational_ratio_flag = false;
};

EllipsoidReference ellipsoid_reference(const std::vector<double>& lambdas, double E);

// Builds the ellipsoid-well Hamiltonian V = sum lambda_i^2 q_i^2, a = I.
NaturalHamiltonian ellipsoid_hamiltonian(const std::vector<double>& lambdas, double E);

}  // namespace ogc
