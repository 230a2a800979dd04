#pragma once

#include "ogc/pathspace.hpp"

namespace ogc {

enum class Classification {
    NearRegularOgc,
    IrregularFirstType,
    IrregularSecondType,
    NotCritical,
};

struct CuspRecord {
    double t1 = 0.0, t2 = 0.0;
    double theta = 0.0;            // jump angle in (0, pi]
    double tangential_defect = 0.0;  // residual of the tangential-component identity
};

struct BendingRecord {
    double alpha = 0.0, beta = 0.0;
    double b = 0.0;  // bending constant (+inf encoded as infinity())
    double p = 0.0;  // maximal proximity, max phi on [alpha, beta]
};

struct CriticalityReport {
    IntervalRecord interval;
    double residual_vplus = 0.0;
    Classification classification = Classification::NotCritical;
    std::vector<CuspRecord> cusps;
    double ell_minus = 0.0, ell_plus = 0.0;
    std::vector<BendingRecord> bending;
};

struct CriticalityOptions {
    double residual_threshold = 1e-5;
    double angle_tol = 1e-3;       // velocity-continuity tolerance at contacts
    double contact_tol = 1e-6;     // |phi| band counting as boundary contact
    double delta_bar = 0.0;        // 0 -> delta0 / 4
    double gamma_bar = 0.1;
    double sigma1 = 0.0;           // filled from the constants ledger
    double d0 = 0.05;              // cusp-angle floor used in diagnostics
};

// First variation of the interval energy, reconstructed from local geodesic
// interpolation so that exactly sampled geodesics have a vanishing gradient.
struct EnergyGradient {
    int ia = 0, ib = 0;
    std::vector<Vec> grad;     // Euclidean-coordinate gradient per node ia..ib
    std::vector<Vec> accel;    // covariant acceleration estimate per interior node
    Vec v_start, v_end;        // endpoint velocities (shooting direction estimate)
    std::vector<int> contacts; // node offsets (relative to ia) with |phi| <= contact tol
};

EnergyGradient energy_first_variation(const DiscreteCurve& x, const DomainSpec& spec,
                                      double a, double b, double contact_tol = 1e-6);

// H1-dual norm of the negative energy gradient projected onto the cone
// V+ = { V : g(V, grad phi) >= 0 at boundary contacts }.
double residual_vplus(const DiscreteCurve& x, const DomainSpec& spec, double a, double b,
                      const CriticalityOptions& opts = {});

CriticalityReport classify_portion(const DiscreteCurve& x, const DomainSpec& spec,
                                   double a, double b, const CriticalityOptions& opts = {});

double cusp_angle(const DiscreteCurve& x, const DomainSpec& spec, double t1, double t2,
                  double* tangential_defect = nullptr);

std::vector<IntervalRecord> delta_intervals(const DiscreteCurve& x, const DomainSpec& spec,
                                            double delta, double d_small,
                                            double depth_tol = -1.0);

// (bending constant, maximal proximity) on a delta-bar-close interval.
std::pair<double, double> bending_and_proximity(const DiscreteCurve& x, const DomainSpec& spec,
                                                double alpha, double beta,
                                                double delta_bar = -1.0);

// Intervals that are delta-bar-close to the boundary with p >= -sigma1 and
// b >= 1 + (3/2) gamma_bar.
std::vector<IntervalRecord> find_nonessential_intervals(const DiscreteCurve& x,
                                                        const DomainSpec& spec,
                                                        const CriticalityOptions& opts);

// Minimal intervals on which x is delta-bar-close to the boundary.
std::vector<IntervalRecord> delta_bar_close_intervals(const DiscreteCurve& x,
                                                      const DomainSpec& spec,
                                                      double delta_bar);

struct OgcCheck {
    bool ok = false;
    double geodesic_residual = 0.0;
    double orthogonality_defect = 0.0;
    bool is_wogc = false;
};

OgcCheck is_ogc(const DiscreteCurve& x, const DomainSpec& spec, double a, double b,
                double geo_tol = 1e-6, double orth_tol = 1e-4);

}  // namespace ogc
