#pragma once

#include <Eigen/Dense>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ogc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Third-order array of Christoffel symbols: gamma[k](i,j) = Gamma^k_{ij}.
using Tensor3 = std::vector<Mat>;

using Rng = std::mt19937_64;

struct OgcError : std::runtime_error {
    explicit OgcError(const std::string& what) : std::runtime_error(what) {}
};

#define OGC_DEFINE_ERROR(Name)                                            \
    struct Name : OgcError {                                              \
        explicit Name(const std::string& what = #Name) : OgcError(what) {} \
    }

OGC_DEFINE_ERROR(OutOfChart);
OGC_DEFINE_ERROR(NotPositiveDefinite);
OGC_DEFINE_ERROR(LeftChart);
OGC_DEFINE_ERROR(StepTooLarge);
OGC_DEFINE_ERROR(NoConvergence);
OGC_DEFINE_ERROR(TooFarApart);
OGC_DEFINE_ERROR(DegenerateRegion);
OGC_DEFINE_ERROR(NotOnBoundary);
OGC_DEFINE_ERROR(NotTangent);
OGC_DEFINE_ERROR(LeftShell);
OGC_DEFINE_ERROR(OutOfShell);
OGC_DEFINE_ERROR(EmptyInterval);
OGC_DEFINE_ERROR(NotInM0);
OGC_DEFINE_ERROR(EmptyFamily);
OGC_DEFINE_ERROR(PreconditionUnmet);
OGC_DEFINE_ERROR(BadInterval);
OGC_DEFINE_ERROR(NotCritical);
OGC_DEFINE_ERROR(NotACusp);
OGC_DEFINE_ERROR(BadDepths);
OGC_DEFINE_ERROR(NotDeltaBarClose);
OGC_DEFINE_ERROR(TooCloseToCritical);
OGC_DEFINE_ERROR(ShortInterval);
OGC_DEFINE_ERROR(LeftM);
OGC_DEFINE_ERROR(DegenerateSplit);
OGC_DEFINE_ERROR(NotSecondType);
OGC_DEFINE_ERROR(NoNonessential);
OGC_DEFINE_ERROR(Stalled);
OGC_DEFINE_ERROR(Mismatch);
OGC_DEFINE_ERROR(CurveLeftM);
OGC_DEFINE_ERROR(NotConcave);
OGC_DEFINE_ERROR(BadRho);
OGC_DEFINE_ERROR(ShootingDiverged);
OGC_DEFINE_ERROR(ZeroLambda);
OGC_DEFINE_ERROR(EnergyDrift);
OGC_DEFINE_ERROR(BadConfig);

#undef OGC_DEFINE_ERROR

inline Vec vec2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

}  // namespace ogc
