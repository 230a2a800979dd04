#pragma once

#include "ogc/criticality.hpp"

namespace ogc {

// Measured geometric constants driving the deformation flows. Bounds are
// sampled (and inflated) rather than certified; everything lands in
// constants.json for inspection.
struct ConstantsLedger {
    double delta0 = 0.0, K0 = 0.0, M0 = 0.0;
    double ell0 = 0.0, L0 = 0.0;   // metric eigenvalue range over the working region
    double G0 = 0.0;               // metric-derivative bound
    double L1 = 0.0;               // covariant-derivative bound factor
    double N0_hess = 0.0;          // sup ||H^phi|| over the shell
    double lambda1 = 0.0;          // gradient-push cap
    double lambda = 0.0;           // gradient-push weight, <= lambda1
    double E_r = 0.0;              // energy-discrepancy budget mu_r^2/(32 L1^2 L0)
    double theta_r = 0.0, mu_r = 0.0, kappa_r = 0.0, rho_r = 0.0;  // measured rates
    double delta_bar = 0.0, gamma_bar = 0.1;
    double sigma0 = 0.0, sigma1 = 0.0;
    double theta0 = 0.0, mu0 = 0.0, rho0 = 0.0, eps0 = 0.0;
    double d0 = 0.05;
    double T_eps = 0.05;           // type-A duration scale (initial step)
    double c1_lower_bound = 0.0;   // (1/2)(3 delta0 / (4 K0))^2

    CriticalityOptions criticality_options() const;
};

ConstantsLedger assemble_ledger(const DomainSpec& spec, double M0, Rng& rng, int samples = 400);

enum class StepKind { A, B, C };

struct FlowStepResult {
    DiscreteCurve curve;
    double F_before = 0.0;
    double F_after = 0.0;
    StepKind step_kind = StepKind::A;
    double displacement_h1 = 0.0;
    bool accepted = false;
    // before/after association of maximal intervals (index into before list,
    // index into after list); -1 for vanished intervals.
    std::vector<std::pair<int, int>> interval_map;
};

// sup over maximal intervals of (b - a)/2 * int_a^b g(xdot, xdot); the
// per-curve contribution to the minimax functional.
double curve_F(const DiscreteCurve& x, const DomainSpec& spec);

struct DescentDirection {
    std::vector<Vec> field;  // node-indexed over the whole grid, zero outside [a,b]
    double theta_r = 0.0;    // measured contact-push rate
    double mu_r = 0.0;       // measured descent rate
    double h1_norm = 0.0;
};

DescentDirection descent_direction_vplus(const DiscreteCurve& x, const DomainSpec& spec,
                                         const ConstantsLedger& ledger, double a, double b,
                                         double r_band = 1e-5);

FlowStepResult type_A_step(const DiscreteCurve& x, const DomainSpec& spec,
                           const ConstantsLedger& ledger, double tau);

// Piecewise-affine reparameterization moving the split point c by
// sign * tau; the curve image is unchanged up to grid resampling.
DiscreteCurve reparam_phi(const DiscreteCurve& x, double a, double c, double b, double tau,
                          int sign);

// Closed-form energy of the reparameterized curve as a function of tau for
// the '+' direction (split moving toward b), and its derivative at tau = 0.
double reparam_energy_closed_form(double int_ac, double int_cb, double a, double c, double b,
                                  double tau);
double reparam_energy_derivative0(double int_ac, double int_cb, double a, double c, double b);

FlowStepResult type_B_step(const DiscreteCurve& x, const DomainSpec& spec,
                           const ConstantsLedger& ledger);

FlowStepResult type_C_step(const DiscreteCurve& x, const DomainSpec& spec,
                           const ConstantsLedger& ledger);

struct TraceRow {
    int iter = 0;
    char step_kind = 'A';
    double F = 0.0;
    double residual = 0.0;
    double displacement = 0.0;
    int cusps = 0;
};

}  // namespace ogc
