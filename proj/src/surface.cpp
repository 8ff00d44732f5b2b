#include "curvatur/surface.hpp"

#include "curvatur/error.hpp"

#include <cmath>
#include <sstream>

namespace curvatur {

namespace {

template <int K>
Vec3 value_of(const JVec3<PatchJet<K>>& r)
{
    return Vec3(r[0].value(), r[1].value(), r[2].value());
}

template <int K>
Vec3 partial_of(const JVec3<PatchJet<K>>& r, int i)
{
    return Vec3(r[0].d(i), r[1].d(i), r[2].d(i));
}

template <int K>
Vec3 partial_of(const JVec3<PatchJet<K>>& r, int i, int j)
{
    return Vec3(r[0].d(i, j), r[1].d(i, j), r[2].d(i, j));
}

template <int K>
JVec3<PatchJet<K - 1>> diff(const JVec3<PatchJet<K>>& r, int i)
{
    return {differentiate(r[0], i), differentiate(r[1], i), differentiate(r[2], i)};
}

[[noreturn]] void irregular(const SurfacePatch& s, double u, double v, double c)
{
    std::ostringstream os;
    os << "surface '" << s.name << "' is not regular at (u, v) = (" << u << ", " << v << "), |r_u x r_v| = " << c;
    throw RegularityError(os.str());
}

// Unit normal as a jet of order K - 1 from the order-K Taylor data.
template <int K>
JVec3<PatchJet<K - 1>> normal_jet(const SurfacePatch& s, const JVec3<PatchJet<K>>& r, double u, double v)
{
    auto c = cross(diff(r, 0), diff(r, 1));
    auto len = sqrt(dot(c, c));
    if (!(len.value() > s.eps_reg)) irregular(s, u, v, len.value());
    auto scale = s.orientation / len;
    return {c[0] * scale, c[1] * scale, c[2] * scale};
}

double triple(const Vec3& a, const Vec3& b, const Vec3& c) { return a.cross(b).dot(c); }

} // namespace

bool SurfacePatch::contains(double u, double v) const
{
    const double tol = 1e-12;
    bool in_u = period[0] > 0 || (u >= domain.u0 - tol && u <= domain.u1 + tol);
    bool in_v = period[1] > 0 || (v >= domain.v0 - tol && v <= domain.v1 + tol);
    return in_u && in_v;
}

PatchGeometry geometry_at(const SurfacePatch& s, double u, double v)
{
    auto r = s.taylor<3>(u, v);
    auto n = normal_jet<3>(s, r, u, v);
    PatchGeometry g;
    g.r = value_of<3>(r);
    g.ru = partial_of<3>(r, 0);
    g.rv = partial_of<3>(r, 1);
    g.ruu = partial_of<3>(r, 0, 0);
    g.ruv = partial_of<3>(r, 0, 1);
    g.rvv = partial_of<3>(r, 1, 1);
    g.n = value_of<2>(n);
    g.nu = partial_of<2>(n, 0);
    g.nv = partial_of<2>(n, 1);
    return g;
}

FormsAtPoint forms_at(const SurfacePatch& s, double u, double v)
{
    auto r = s.taylor<2>(u, v);
    auto n = normal_jet<2>(s, r, u, v);
    FormsAtPoint f;
    f.point = value_of<2>(r);
    f.ru = partial_of<2>(r, 0);
    f.rv = partial_of<2>(r, 1);
    f.n = value_of<1>(n);
    f.g << f.ru.dot(f.ru), f.ru.dot(f.rv), f.rv.dot(f.ru), f.rv.dot(f.rv);
    const double q11 = partial_of<2>(r, 0, 0).dot(f.n);
    const double q12 = partial_of<2>(r, 0, 1).dot(f.n);
    const double q22 = partial_of<2>(r, 1, 1).dot(f.n);
    f.q << q11, q12, q12, q22;
    return f;
}

Mat2 shape_operator_at(const SurfacePatch& s, double u, double v)
{
    auto f = forms_at(s, u, v);
    return f.g.inverse() * f.q;
}

Mat2 shape_operator_from_normal(const SurfacePatch& s, double u, double v)
{
    auto r = s.taylor<2>(u, v);
    auto n = normal_jet<2>(s, r, u, v);
    Vec3 ru = partial_of<2>(r, 0), rv = partial_of<2>(r, 1);
    Vec3 nu = partial_of<1>(n, 0), nv = partial_of<1>(n, 1);
    Eigen::Matrix<double, 3, 2> basis;
    basis << ru, rv;
    Eigen::Matrix<double, 3, 2> minus_dn;
    minus_dn << -nu, -nv;
    // n_u, n_v are tangent; solve basis * W = -dn in the least-squares sense
    return basis.colPivHouseholderQr().solve(minus_dn);
}

ExtrinsicReport principal_at(const SurfacePatch& s, double u, double v)
{
    auto f = forms_at(s, u, v);
    auto e = generalized_symmetric_eigen(f.q, f.g);
    ExtrinsicReport rep;
    rep.lambda_plus = e.lambda_plus;
    rep.lambda_minus = e.lambda_minus;
    rep.dir_plus_coords = e.vectors.col(0);
    rep.dir_minus_coords = e.vectors.col(1);
    rep.dir_plus = (f.ru * e.vectors(0, 0) + f.rv * e.vectors(1, 0)).normalized();
    rep.dir_minus = (f.ru * e.vectors(0, 1) + f.rv * e.vectors(1, 1)).normalized();
    rep.mean = 0.5 * (rep.lambda_plus + rep.lambda_minus);
    rep.H_density = -2.0 * rep.mean;
    rep.K = rep.lambda_plus * rep.lambda_minus;
    rep.tau = 2.0 * rep.K;
    rep.umbilic = e.degenerate;
    rep.orientation = s.orientation;
    return rep;
}

double section_curvature(const SurfacePatch& s, double u, double v, double phi, double theta)
{
    if (!(theta >= 0.0 && theta < 0.5 * M_PI - 1e-9))
        throw PreconditionError("section_curvature: tilt must lie in [0, pi/2)");
    auto rep = principal_at(s, u, v);
    double c = std::cos(phi), sn = std::sin(phi);
    return (rep.lambda_plus * c * c + rep.lambda_minus * sn * sn) / std::cos(theta);
}

ParamCurve slice_curve(const SurfacePatch& s, double u, double v, const Vec3& along, const Vec3& tilt)
{
    using J = Jet<1, 3>;
    auto f = forms_at(s, u, v);
    Mat3 jac;
    jac << f.ru, f.rv, -tilt;
    if (std::abs(jac.determinant()) < 1e-12 * f.ru.norm() * f.rv.norm())
        throw PreconditionError("slice_curve: cutting plane is tangent to the surface");
    Mat3 jinv = jac.inverse();

    const J alpha = J::variable(0, 0.0);
    J U(u), V(v), B(0.0);
    for (int iter = 0; iter < 40; ++iter) {
        auto r = s.compose<1, 3>(U, V);
        JVec3<J> res;
        for (int d = 0; d < 3; ++d) res[d] = r[d] - f.point[d] - alpha * along[d] - B * tilt[d];
        J dU(0.0), dV(0.0), dB(0.0);
        for (int d = 0; d < 3; ++d) {
            dU += jinv(0, d) * res[d];
            dV += jinv(1, d) * res[d];
            dB += jinv(2, d) * res[d];
        }
        U -= dU;
        V -= dV;
        B -= dB;
        double change = 0.0;
        for (int k = 0; k < J::size; ++k)
            change = std::max({change, std::abs(dU.coeff(k)), std::abs(dV.coeff(k)), std::abs(dB.coeff(k))});
        if (change < 1e-15) break;
    }
    auto poly = s.compose<1, 3>(U, V);
    ParamCurve c;
    c.dim = 3;
    c.a = -1e-3;
    c.b = 1e-3;
    c.eval = [poly](const CurveJet& t) -> JVec3<CurveJet> {
        std::array<CurveJet, 1> arg{t};
        return {substitute(poly[0], arg), substitute(poly[1], arg), substitute(poly[2], arg)};
    };
    return c;
}

double section_curvature_by_slicing(const SurfacePatch& s, double u, double v, double phi, double theta)
{
    if (!(theta >= 0.0 && theta < 0.5 * M_PI - 1e-9))
        throw PreconditionError("section_curvature: tilt must lie in [0, pi/2)");
    auto rep = principal_at(s, u, v);
    auto f = forms_at(s, u, v);
    Vec3 t = std::cos(phi) * rep.dir_plus + std::sin(phi) * rep.dir_minus;
    Vec3 t_perp = f.n.cross(t);
    Vec3 m = std::cos(theta) * f.n + std::sin(theta) * t_perp;
    auto curve = slice_curve(s, u, v, t, m);
    auto ct = space_curvature_torsion(curve, 0.0);
    auto smp = curve.sample(0.0);
    double side = smp.d2.dot(m) >= 0.0 ? 1.0 : -1.0;
    return side * ct.k;
}

double area(const SurfacePatch& s, const Box2& region, const AreaOptions& opt)
{
    GridIntegrand f = [&s](double u, double v, double* out) {
        auto r = s.taylor<1>(u, v);
        out[0] = partial_of<1>(r, 0).cross(partial_of<1>(r, 1)).norm();
    };
    return integrate_2d(f, 1, region, opt.rel_tol, opt.abs_tol, opt.exec).values[0];
}

double area(const SurfacePatch& s, const AreaOptions& opt) { return area(s, s.domain, opt); }

SurfacePatch offset_surface(const SurfacePatch& s, double eps, int focal_samples)
{
    const Box2& d = s.domain;
    for (int i = 0; i < focal_samples; ++i)
        for (int j = 0; j < focal_samples; ++j) {
            double u = d.u0 + (i + 0.5) * (d.u1 - d.u0) / focal_samples;
            double v = d.v0 + (j + 0.5) * (d.v1 - d.v0) / focal_samples;
            auto rep = principal_at(s, u, v);
            if (std::abs(eps * rep.lambda_plus) >= 1.0 || std::abs(eps * rep.lambda_minus) >= 1.0) {
                std::ostringstream os;
                os << "offset_surface: eps = " << eps << " reaches the focal set near (u, v) = (" << u << ", " << v
                   << ")";
                throw PreconditionError(os.str());
            }
        }

    SurfacePatch out = s;
    out.name = s.name + "+offset(" + std::to_string(eps) + ")";
    auto one = [s, eps]<int K>(std::integral_constant<int, K>) {
        return [s, eps](double u, double v) -> JVec3<PatchJet<K>> {
            auto r = s.taylor<K + 1>(u, v);
            auto n = normal_jet<K + 1>(s, r, u, v);
            JVec3<PatchJet<K>> o;
            for (int k = 0; k < 3; ++k) o[k] = truncate<K>(r[k]) + eps * n[k];
            return o;
        };
    };
    std::get<0>(out.taylors_) = one(std::integral_constant<int, 1>{});
    std::get<1>(out.taylors_) = one(std::integral_constant<int, 2>{});
    std::get<2>(out.taylors_) = one(std::integral_constant<int, 3>{});
    std::get<3>(out.taylors_) = nullptr;
    return out;
}

namespace {

// area element, mean-curvature integrand and Gauss-map integrand
void curvature_integrands(const SurfacePatch& s, double u, double v, double* out)
{
    auto r = s.taylor<2>(u, v);
    auto n = normal_jet<2>(s, r, u, v);
    Vec3 ru = partial_of<2>(r, 0), rv = partial_of<2>(r, 1);
    Vec3 nu = partial_of<1>(n, 0), nv = partial_of<1>(n, 1);
    // area elements are measured against the parameter orientation r_u x r_v
    const Vec3 c = ru.cross(rv);
    const Vec3 N = c.normalized();
    out[0] = c.norm();
    out[1] = triple(ru, nv, N) + triple(nu, rv, N);
    out[2] = triple(nu, nv, N);
}

} // namespace

TotalCurvatures total_curvatures(const SurfacePatch& s, const AreaOptions& opt)
{
    TotalCurvatures t;
    GridIntegrand f = [&s](double u, double v, double* out) { curvature_integrands(s, u, v, out); };
    auto res = integrate_2d(f, 3, s.domain, opt.rel_tol, std::max(opt.abs_tol, 1e-13), opt.exec);
    t.area = res.values[0];
    t.H_total = res.values[1];
    t.K_total = res.values[2];

    t.eps = {-1e-2, -5e-3, -2.5e-3, 2.5e-3, 5e-3, 1e-2};
    Eigen::Matrix<double, 6, 3> vand;
    Eigen::Matrix<double, 6, 1> rhs;
    for (int i = 0; i < 6; ++i) {
        t.offset_areas[i] = area(offset_surface(s, t.eps[i]), opt);
        vand(i, 0) = 1.0;
        vand(i, 1) = t.eps[i];
        vand(i, 2) = t.eps[i] * t.eps[i];
        rhs[i] = t.offset_areas[i];
    }
    Eigen::Vector3d coef = vand.colPivHouseholderQr().solve(rhs);
    t.fit_area = coef[0];
    t.fit_H = coef[1];
    t.fit_K = coef[2];

    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-4 * std::abs(b) + 1e-8; };
    t.fit_ok = close(t.fit_area, t.area) && close(t.fit_H, t.H_total) && close(t.fit_K, t.K_total);
    std::ostringstream os;
    os.precision(12);
    os << (t.fit_ok ? "offset fit agrees" : "VERIFICATION FAILURE: offset fit disagrees") << ": S " << t.area << " vs "
       << t.fit_area << ", H " << t.H_total << " vs " << t.fit_H << ", K " << t.K_total << " vs " << t.fit_K;
    t.report = os.str();
    return t;
}

double gauss_map_signed_area(const SurfacePatch& s, const Box2& region, const AreaOptions& opt)
{
    GridIntegrand f = [&s](double u, double v, double* out) {
        double tmp[3];
        curvature_integrands(s, u, v, tmp);
        out[0] = tmp[2];
    };
    return integrate_2d(f, 1, region, opt.rel_tol, opt.abs_tol, opt.exec).values[0];
}

double gauss_map_signed_area(const SurfacePatch& s, const AreaOptions& opt)
{
    return gauss_map_signed_area(s, s.domain, opt);
}

} // namespace curvatur
