#pragma once

#include "curvatur/curves.hpp"
#include "curvatur/error.hpp"
#include "curvatur/numkit/jet.hpp"
#include "curvatur/numkit/linalg.hpp"
#include "curvatur/numkit/parallel.hpp"
#include "curvatur/numkit/quadrature.hpp"

#include <functional>
#include <memory>
#include <string>
#include <tuple>
#include <type_traits>

namespace curvatur {

template <int K>
using PatchJet = Jet<2, K>;

// Highest Taylor order a patch can be asked for.
inline constexpr int kMaxPatchOrder = 4;

// Immersion of a parameter rectangle into R^3 with a coorientation. The
// immersion is known through its Taylor polynomials at any point, which is
// all the differential quantities below consume.
class SurfacePatch {
public:
    template <int K>
    using Taylor = std::function<JVec3<PatchJet<K>>(double, double)>;

    Box2 domain{0, 1, 0, 1};
    // Period of each coordinate, 0 when not periodic. Periodic coordinates
    // never count as leaving the domain.
    std::array<double, 2> period{0.0, 0.0};
    // +1: n = r_u x r_v / |r_u x r_v|; -1: the opposite normal.
    double orientation = 1.0;
    double eps_reg = 1e-9;
    std::string name;

    // Taylor polynomial of order K of the immersion, expanded at (u, v).
    template <int K>
    JVec3<PatchJet<K>> taylor(double u, double v) const
    {
        static_assert(K >= 1 && K <= kMaxPatchOrder);
        const auto& fn = std::get<K - 1>(taylors_);
        if (!fn) throw PreconditionError("surface '" + name + "' has no Taylor data of order " + std::to_string(K));
        return fn(u, v);
    }

    // Composition r(u(s), v(s)) for jet-valued parameters.
    template <int NV, int K>
    JVec3<Jet<NV, K>> compose(const Jet<NV, K>& u, const Jet<NV, K>& v) const
    {
        auto r = taylor<K>(u.value(), v.value());
        std::array<Jet<NV, K>, 2> args{u, v};
        return {substitute(r[0], args), substitute(r[1], args), substitute(r[2], args)};
    }

    SurfacePatch flipped() const
    {
        SurfacePatch s = *this;
        s.orientation = -orientation;
        return s;
    }

    bool contains(double u, double v) const;

    std::tuple<Taylor<1>, Taylor<2>, Taylor<3>, Taylor<4>> taylors_;
};

// Builds a patch from a generic callable f(u, v) -> std::array<T, 3>.
template <class F>
SurfacePatch make_surface(std::string name, Box2 domain, F f, std::array<double, 2> period = {0.0, 0.0})
{
    SurfacePatch s;
    s.name = std::move(name);
    s.domain = domain;
    s.period = period;
    auto one = [f]<int K>(std::integral_constant<int, K>) {
        return [f](double u, double v) -> JVec3<PatchJet<K>> {
            auto r = f(PatchJet<K>::variable(0, u), PatchJet<K>::variable(1, v));
            return {PatchJet<K>(r[0]), PatchJet<K>(r[1]), PatchJet<K>(r[2])};
        };
    };
    std::get<0>(s.taylors_) = one(std::integral_constant<int, 1>{});
    std::get<1>(s.taylors_) = one(std::integral_constant<int, 2>{});
    std::get<2>(s.taylors_) = one(std::integral_constant<int, 3>{});
    std::get<3>(s.taylors_) = one(std::integral_constant<int, 4>{});
    return s;
}

// Position, frame and normal derivatives at a parameter point.
struct PatchGeometry {
    Vec3 r, ru, rv, ruu, ruv, rvv;
    Vec3 n, nu, nv;
};

PatchGeometry geometry_at(const SurfacePatch& s, double u, double v);

struct FormsAtPoint {
    Vec3 point;
    Vec3 ru, rv;
    Vec3 n;
    Mat2 g;
    Mat2 q;
};

FormsAtPoint forms_at(const SurfacePatch& s, double u, double v);

// Weingarten operator in the basis (r_u, r_v), computed as g^-1 q.
Mat2 shape_operator_at(const SurfacePatch& s, double u, double v);
// Same operator from the normal's derivatives: columns are the coordinates of
// -n_u and -n_v in the basis (r_u, r_v).
Mat2 shape_operator_from_normal(const SurfacePatch& s, double u, double v);

struct ExtrinsicReport {
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    // Principal directions: coordinates in (r_u, r_v) and unit vectors in R^3.
    Vec2 dir_plus_coords, dir_minus_coords;
    Vec3 dir_plus, dir_minus;
    double mean = 0.0;       // (lambda_+ + lambda_-) / 2
    double H_density = 0.0;  // -2 * mean
    double K = 0.0;          // lambda_+ lambda_-
    double tau = 0.0;        // 2K
    bool umbilic = false;
    double orientation = 1.0;
};

ExtrinsicReport principal_at(const SurfacePatch& s, double u, double v);

// Curvature of the section through the point by the plane that contains the
// tangent direction at angle phi from the lambda_+ direction and is tilted by
// theta from the normal: k(phi) / cos(theta).
double section_curvature(const SurfacePatch& s, double u, double v, double phi, double theta);

// Independent route: intersects the patch with that plane (implicit
// projection with jet-valued Newton), measures the space curvature of the
// intersection curve and signs it by the normal.
double section_curvature_by_slicing(const SurfacePatch& s, double u, double v, double phi, double theta);

// The intersection curve itself, as a Taylor curve around t = 0.
ParamCurve slice_curve(const SurfacePatch& s, double u, double v, const Vec3& along, const Vec3& tilt);

struct AreaOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-14;
    Exec exec = Exec::parallel;
};

double area(const SurfacePatch& s, const AreaOptions& opt = {});
double area(const SurfacePatch& s, const Box2& region, const AreaOptions& opt = {});

// r + eps n. Throws PreconditionError naming a sample point where
// |eps * lambda| >= 1.
SurfacePatch offset_surface(const SurfacePatch& s, double eps, int focal_samples = 16);

struct TotalCurvatures {
    double area = 0.0;
    double H_total = 0.0;
    double K_total = 0.0;
    // quadratic least-squares fit of eps -> area(offset(eps))
    double fit_area = 0.0;
    double fit_H = 0.0;
    double fit_K = 0.0;
    std::array<double, 6> eps{};
    std::array<double, 6> offset_areas{};
    bool fit_ok = false;
    std::string report;
};

TotalCurvatures total_curvatures(const SurfacePatch& s, const AreaOptions& opt = {1e-12, 1e-14, Exec::parallel});

// Signed area of the spherical (Gauss) image over the patch or a subregion.
double gauss_map_signed_area(const SurfacePatch& s, const AreaOptions& opt = {1e-10, 1e-14, Exec::parallel});
double gauss_map_signed_area(const SurfacePatch& s, const Box2& region,
                             const AreaOptions& opt = {1e-10, 1e-14, Exec::parallel});

} // namespace curvatur
