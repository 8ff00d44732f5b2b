#pragma once

#include "curvatur/numkit/jet.hpp"
#include "curvatur/numkit/linalg.hpp"

#include <functional>
#include <optional>

namespace curvatur {

using CurveJet = Jet<1, 3>;
using CurveEval = std::function<JVec3<CurveJet>(const CurveJet&)>;
// A real function of one variable evaluated on jets (curvature programs).
using ScalarFn = std::function<CurveJet(const CurveJet&)>;

// Parametrized curve [a, b] -> R^2 or R^3. Planar curves keep z = 0.
struct ParamCurve {
    int dim = 3;
    double a = 0.0;
    double b = 1.0;
    CurveEval eval;
    double eps_reg = 1e-9;
    double eps_bireg = 1e-9;

    // position and the first three derivatives at t
    struct Sample {
        Vec3 p, d1, d2, d3;
    };
    Sample sample(double t) const;
    Vec3 point(double t) const { return sample(t).p; }
};

// Wrap a generic callable f(t) -> std::array<T, 3> (templated on the scalar).
template <class F>
ParamCurve make_curve(int dim, double a, double b, F f)
{
    ParamCurve c;
    c.dim = dim;
    c.a = a;
    c.b = b;
    c.eval = [f](const CurveJet& t) -> JVec3<CurveJet> {
        auto r = f(t);
        return {CurveJet(r[0]), CurveJet(r[1]), CurveJet(r[2])};
    };
    return c;
}

ScalarFn constant_fn(double c);

struct FrenetFrame {
    Vec3 point;
    Vec3 v; // unit velocity
    Vec3 n; // unit principal normal
    Vec3 b; // binormal v x n
    double k = 0.0;
    std::optional<double> torsion;
};

struct SpaceCurvature {
    double k = 0.0;
    // absent where the curve is not biregular
    std::optional<double> torsion;
};

double arc_length(const ParamCurve& curve, double a, double b, double tol = 1e-10);

// Unit-speed reparametrization on [0, length]; throws RegularityError naming
// the first sampled t where |curve'| falls below eps_reg.
ParamCurve natural_reparametrize(const ParamCurve& curve);

// Signed curvature (x'y'' - y'x'') / |curve'|^3; counterclockwise circles are
// positive.
double plane_curvature(const ParamCurve& curve, double t);

SpaceCurvature space_curvature_torsion(const ParamCurve& curve, double t);

FrenetFrame frenet_frame(const ParamCurve& curve, double t);

// Unit-speed plane curve with signed curvature kbar(s), starting at `origin`
// with direction angle `heading`.
ParamCurve reconstruct_plane_curve(const ScalarFn& kbar, double s_max, Vec2 origin = Vec2::Zero(),
                                   double heading = 0.0, int nodes = 2048);

// Integrates v' = k n, n' = -k v + torsion (v x n), x' = v from the given
// orthonormal frame (identity columns by default). kbar must stay positive.
ParamCurve reconstruct_space_curve(const ScalarFn& kbar, const ScalarFn& torsion, double s_max,
                                   const Vec3& origin = Vec3::Zero(), const Mat3& frame = Mat3::Identity(),
                                   int nodes = 2048);

} // namespace curvatur
