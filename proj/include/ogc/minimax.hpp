#pragma once

#include <optional>

#include "ogc/flows.hpp"

namespace ogc {

struct HomotopyState {
    const PathFamily* seeds = nullptr;
    // Evolving curve per seed key; keys are the family's (i, j) pairs.
    std::map<std::pair<int, int>, DiscreteCurve> current;
    std::vector<char> tag_log;  // partition of the applied deformations into A/B/C segments
    bool constant_seeds_fixed = true;
    std::map<std::pair<int, int>, bool> frozen;  // converged-OGC seeds, no longer moved

    static HomotopyState identity(const PathFamily& family);
};

struct ChordResult {
    DiscreteCurve curve;  // the OGC interval affinely reparameterized to [0,1]
    double energy = 0.0;
    double length = 0.0;
    double geodesic_residual = 0.0;
    double orthogonality_defect = 0.0;
    bool is_wogc = false;
    Vec boundary_a, boundary_b;
};

double functional_F(const HomotopyState& state, const DomainSpec& spec);

struct SolveOptions {
    int boundary_resolution = 32;
    int n = 128;
    int max_outer = 40;
    int max_inner = 4000;       // per-curve flow iterations across the whole run
    double eps0_factor = 0.05;  // first ladder rung as a fraction of M0
    double eps_floor_factor = 1e-6;
    double dedup_energy_tol = 0.05;
    double dedup_shape_tol = 1e-2;
    double wall_clock_cap = 300.0;  // seconds
    unsigned long long seed = 0;
    bool collect_all_converged = true;
};

struct SolveDiagnostics {
    ConstantsLedger ledger;
    std::vector<TraceRow> trace;
    bool c1_bound_ok = true;
    double min_level = 0.0;
    bool stalled = false;
    bool wogc_detected = false;
    std::string notes;
};

// First Deformation step: clear non-essential intervals (type C), fix
// second-type portions (type B), then descend (type A), until F(state)
// drops below c - eps or a top-interval iterate converges to an OGC.
struct DeformationOutcome {
    bool reached_below = false;
    std::vector<ChordResult> found;  // OGCs harvested during the sweep
    bool stalled = false;
};

DeformationOutcome first_deformation(HomotopyState& state, const DomainSpec& spec,
                                     const ConstantsLedger& ledger, double c, double eps,
                                     const SolveOptions& opts, SolveDiagnostics* diag,
                                     int* iter_budget);

std::vector<ChordResult> solve_existence(const DomainSpec& spec, const SolveOptions& opts,
                                         SolveDiagnostics* diag = nullptr);

std::vector<ChordResult> dedup_chords(std::vector<ChordResult> results, double energy_tol,
                                      double shape_tol);

// Polish a near-critical candidate into a true OGC by orthogonal shooting
// from the boundary (Newton on the boundary parameters). Returns empty when
// the candidate does not converge.
std::optional<ChordResult> refine_ogc(const DiscreteCurve& x, const DomainSpec& spec,
                                      double a, double b, int n);

}  // namespace ogc
