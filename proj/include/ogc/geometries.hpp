#pragma once

#include "ogc/hamiltonian.hpp"

namespace ogc {

// Built-in chart geometries.
//
// half_plane:     Euclidean metric, phi(q) = q_2 (flat boundary; fails the
//                 concavity gate -- kept as a negative test and for exact
//                 flow/projection oracles).
// euclidean_disk: Euclidean metric, phi(q) = ||q|| - 1 (convex boundary;
//                 negative test).
// sphere_cap:     unit sphere in the stereographic chart, metric
//                 4/(1+||u||^2)^2 I; cap of colatitude radius r centered at
//                 the chart origin, phi = colatitude - r (geodesic signed
//                 distance to the boundary circle).
// jacobi_well:    Jacobi metric (E - V) a of a natural Hamiltonian on the
//                 shrunk sublevel {V <= E - rho}, phi = V - (E - rho).

DomainSpec make_half_plane(double half_width = 3.0, double depth = 3.0);
DomainSpec make_euclidean_disk();
DomainSpec make_sphere_cap(double cap_radius);
DomainSpec make_jacobi_well(const NaturalHamiltonian& ham, double rho);

}  // namespace ogc
