#include <doctest.h>

#include "curvatur/error.hpp"
#include "curvatur/surface.hpp"

#include <cmath>
#include <numbers>

using namespace curvatur;
using std::numbers::pi;

namespace {

SurfacePatch plane_patch()
{
    return make_surface("plane", {0, 1, 0, 1}, [](auto u, auto v) {
        using T = decltype(u);
        return std::array<T, 3>{u, v, T(0.0)};
    });
}

// polar patch, n = r_u x r_v is outward
SurfacePatch sphere(double R = 1.0, double theta_max = pi)
{
    return make_surface(
        "sphere", {0, theta_max, 0, 2 * pi},
        [R](auto t, auto p) {
            using T = decltype(t);
            return std::array<T, 3>{R * sin(t) * cos(p), R * sin(t) * sin(p), R * cos(t)};
        },
        {0.0, 2 * pi});
}

SurfacePatch cylinder(double R)
{
    return make_surface(
        "cylinder", {0, 2 * pi, 0, 1},
        [R](auto u, auto v) {
            using T = decltype(u);
            return std::array<T, 3>{R * cos(u), R * sin(u), T(v)};
        },
        {2 * pi, 0.0});
}

SurfacePatch torus(double R = 2.0, double a = 0.5)
{
    return make_surface(
        "torus", {0, 2 * pi, 0, 2 * pi},
        [R, a](auto u, auto v) {
            using T = decltype(u);
            T rho = R + a * cos(v);
            return std::array<T, 3>{rho * cos(u), rho * sin(u), a * sin(v)};
        },
        {2 * pi, 2 * pi});
}

SurfacePatch graph(double a, double b, double c)
{
    // z = a x^2 / 2 + b x y + c y^2 / 2 + cubic term
    return make_surface("graph", {-1, 1, -1, 1}, [=](auto x, auto y) {
        using T = decltype(x);
        T z = 0.5 * a * x * x + b * x * y + 0.5 * c * y * y + 0.3 * x * x * y;
        return std::array<T, 3>{x, y, z};
    });
}

SurfacePatch revolution()
{
    // profile f(x) = 1 + 0.3 sin x rotated about the x axis
    return make_surface(
        "revolution", {0, 3, 0, 2 * pi},
        [](auto x, auto p) {
            auto f = 1.0 + 0.3 * sin(x);
            return std::array<decltype(x), 3>{x, f * cos(p), f * sin(p)};
        },
        {0.0, 2 * pi});
}

SurfacePatch ellipsoid(double a, double b, double c)
{
    return make_surface(
        "ellipsoid", {0, pi, 0, 2 * pi},
        [=](auto t, auto p) {
            using T = decltype(t);
            return std::array<T, 3>{a * sin(t) * cos(p), b * sin(t) * sin(p), c * cos(t)};
        },
        {0.0, 2 * pi});
}

SurfacePatch scaled(const SurfacePatch& s, double c)
{
    SurfacePatch out = s;
    auto wrap = [s, c]<int K>(std::integral_constant<int, K>) {
        return [s, c](double u, double v) {
            auto r = s.taylor<K>(u, v);
            return JVec3<PatchJet<K>>{c * r[0], c * r[1], c * r[2]};
        };
    };
    std::get<0>(out.taylors_) = wrap(std::integral_constant<int, 1>{});
    std::get<1>(out.taylors_) = wrap(std::integral_constant<int, 2>{});
    std::get<2>(out.taylors_) = wrap(std::integral_constant<int, 3>{});
    std::get<3>(out.taylors_) = wrap(std::integral_constant<int, 4>{});
    return out;
}

double max_abs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("forms examples")
{
    auto pl = forms_at(plane_patch(), 0.3, 0.4);
    CHECK(max_abs(pl.g - Mat2::Identity()) < 1e-15);
    CHECK(max_abs(pl.q) < 1e-15);

    auto in = sphere().flipped();
    for (double t : {0.3, 1.0, 2.2})
        for (double p : {0.0, 1.7, 4.0}) {
            auto f = forms_at(in, t, p);
            CHECK(max_abs(f.q - f.g) < 1e-13);
            CHECK(std::abs(f.n.norm() - 1.0) < 1e-14);
            CHECK(max_abs(shape_operator_at(in, t, p) - Mat2::Identity()) < 1e-12);
        }

    // graph tangent to the plane at the origin: q is the Hessian
    auto gf = forms_at(graph(1.5, -0.7, 0.4), 0.0, 0.0);
    Mat2 hess;
    hess << 1.5, -0.7, -0.7, 0.4;
    CHECK(max_abs(gf.q - hess) < 1e-14);
    CHECK(max_abs(gf.g - Mat2::Identity()) < 1e-15);
}

TEST_CASE("shape operator routes agree")
{
    for (const auto& s : {sphere(), torus(), graph(1.0, 0.5, -2.0), revolution(), cylinder(0.7), ellipsoid(1, 2, 3)})
        for (double u : {0.4, 1.1})
            for (double v : {0.2, 0.9, 2.5}) {
                double uu = u, vv = v;
                if (s.name == "graph") {
                    uu = u - 0.7;
                    vv = v * 0.3;
                }
                Mat2 a = shape_operator_at(s, uu, vv);
                Mat2 b = shape_operator_from_normal(s, uu, vv);
                CHECK(max_abs(a - b) < 1e-10);
                auto f = forms_at(s, uu, vv);
                CHECK(std::abs(f.q(0, 1) - f.q(1, 0)) == 0.0);
                CHECK(f.g.determinant() > 0.0);
            }

    auto cyl = cylinder(2.0).flipped();
    auto rep = principal_at(cyl, 1.0, 0.5);
    CHECK(rep.lambda_plus == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(std::abs(rep.lambda_minus) < 1e-13);
    Eigen::EigenSolver<Mat2> es(shape_operator_at(cyl, 1.0, 0.5));
    double e0 = es.eigenvalues()[0].real(), e1 = es.eigenvalues()[1].real();
    CHECK(std::max(e0, e1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(std::min(e0, e1)) < 1e-12);
}

TEST_CASE("principal curvatures")
{
    auto rep = principal_at(sphere().flipped(), 0.8, 2.0);
    CHECK(rep.lambda_plus == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.lambda_minus == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.K == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.tau == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rep.umbilic);
    CHECK(std::abs(rep.dir_plus.dot(rep.dir_minus)) < 1e-12);

    auto saddle = make_surface("saddle", {-1, 1, -1, 1}, [](auto x, auto y) {
        return std::array<decltype(x), 3>{x, y, x * y};
    });
    auto sr = principal_at(saddle, 0.0, 0.0);
    CHECK(sr.K == doctest::Approx(-1.0).epsilon(1e-13));

    auto gr = principal_at(graph(1.5, -0.7, 0.4), 0.0, 0.0);
    CHECK(gr.H_density == doctest::Approx(-1.5 - 0.4).epsilon(1e-13));
    CHECK(-gr.H_density / 2 == doctest::Approx(gr.mean).epsilon(1e-15));
    CHECK(gr.K == doctest::Approx(1.5 * 0.4 - 0.49).epsilon(1e-12));
    CHECK(gr.lambda_plus >= gr.lambda_minus);
    CHECK(std::abs(gr.dir_plus.dot(gr.dir_minus)) < 1e-12);

    // directions orthogonal in R^3 on a non-umbilic point of a skew chart
    auto tr = principal_at(torus(), 0.7, 1.3);
    CHECK(!tr.umbilic);
    CHECK(std::abs(tr.dir_plus.dot(tr.dir_minus)) < 1e-12);
    CHECK(tr.tau == doctest::Approx(2 * tr.lambda_plus * tr.lambda_minus));
}

TEST_CASE("section curvature examples and Meusnier")
{
    auto s = torus();
    auto rep = principal_at(s, 0.3, 0.8);
    CHECK(section_curvature(s, 0.3, 0.8, 0.0, 0.0) == doctest::Approx(rep.lambda_plus).epsilon(1e-14));
    CHECK(section_curvature(s, 0.3, 0.8, pi / 2, 0.0) == doctest::Approx(rep.lambda_minus).epsilon(1e-12));
    auto in = sphere().flipped();
    for (double phi : {0.0, 0.4, 2.0})
        CHECK(section_curvature(in, 1.0, 1.0, phi, pi / 3) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(section_curvature(in, 1.0, 1.0, 0.0, pi / 2), PreconditionError);

    // tilted slices measured by slicing match k_n / cos(theta)
    for (double theta : {0.3, pi / 3, 1.2}) {
        CHECK(std::abs(section_curvature_by_slicing(in, 1.0, 1.0, 0.5, theta) - 1.0 / std::cos(theta)) < 1e-6);
        for (double phi : {0.0, 0.9, 2.1}) {
            double a = section_curvature(s, 0.3, 0.8, phi, theta);
            double b = section_curvature_by_slicing(s, 0.3, 0.8, phi, theta);
            CHECK(std::abs(a - b) < 1e-6);
        }
    }
}

TEST_CASE("Euler formula residual by slicing")
{
    auto saddle = make_surface("saddle", {-1, 1, -1, 1}, [](auto x, auto y) {
        return std::array<decltype(x), 3>{x, y, x * x - y * y + 0.2 * x * y};
    });
    struct Case {
        SurfacePatch s;
        double u, v;
    };
    std::vector<Case> cases{{sphere(), 0.9, 0.4},   {sphere(2.0).flipped(), 2.1, 5.0},
                            {torus(), 0.2, 0.6},    {torus(), 1.0, 3.0},
                            {saddle, 0.0, 0.0},     {saddle, 0.3, -0.4},
                            {revolution(), 1.2, 0.7}, {revolution(), 2.5, 4.0}};
    for (const auto& c : cases) {
        auto rep = principal_at(c.s, c.u, c.v);
        double worst = 0.0;
        for (int i = 0; i < 24; ++i) {
            double phi = i * pi / 24;
            double euler = rep.lambda_plus * std::cos(phi) * std::cos(phi) +
                           rep.lambda_minus * std::sin(phi) * std::sin(phi);
            worst = std::max(worst, std::abs(section_curvature_by_slicing(c.s, c.u, c.v, phi, 0.0) - euler));
        }
        INFO(c.s.name << " at " << c.u << ", " << c.v);
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("coorientation flip")
{
    for (const auto& s : {torus(), graph(1.0, 0.5, -2.0), ellipsoid(1, 2, 3)}) {
        auto f = s.flipped();
        double u = 0.4, v = 0.7;
        auto a = forms_at(s, u, v), b = forms_at(f, u, v);
        CHECK(max_abs(a.q + b.q) < 1e-15);
        CHECK(max_abs(a.g - b.g) == 0.0);
        auto ra = principal_at(s, u, v), rb = principal_at(f, u, v);
        CHECK(rb.lambda_plus == doctest::Approx(-ra.lambda_minus).epsilon(1e-13));
        CHECK(rb.lambda_minus == doctest::Approx(-ra.lambda_plus).epsilon(1e-13));
        CHECK(rb.H_density == doctest::Approx(-ra.H_density).epsilon(1e-13));
        CHECK(rb.K == doctest::Approx(ra.K).epsilon(1e-13));
    }
}

TEST_CASE("homothety")
{
    const double c = 2.5;
    for (const auto& s : {torus(), ellipsoid(1, 2, 3)}) {
        auto h = scaled(s, c);
        for (double u : {0.5, 1.4})
            for (double v : {0.3, 2.0}) {
                auto a = forms_at(s, u, v), b = forms_at(h, u, v);
                CHECK(max_abs(b.g - c * c * a.g) < 1e-12 * c * c * max_abs(a.g));
                CHECK(max_abs(b.q - c * a.q) < 1e-12 * c * max_abs(a.q));
                auto ra = principal_at(s, u, v), rb = principal_at(h, u, v);
                CHECK(rb.lambda_plus == doctest::Approx(ra.lambda_plus / c).epsilon(1e-12));
                CHECK(rb.lambda_minus == doctest::Approx(ra.lambda_minus / c).epsilon(1e-12));
                CHECK(rb.K == doctest::Approx(ra.K / (c * c)).epsilon(1e-12));
            }
        CHECK(area(h) == doctest::Approx(c * c * area(s)).epsilon(1e-7));
        CHECK(gauss_map_signed_area(h) == doctest::Approx(gauss_map_signed_area(s)).epsilon(1e-8));
    }
}

TEST_CASE("area examples")
{
    CHECK(area(plane_patch()) == doctest::Approx(1.0).epsilon(1e-12));
    for (double R : {1.0, 2.5}) {
        double a = area(sphere(R));
        CHECK(std::abs(a - 4 * pi * R * R) < 1e-6 * 4 * pi * R * R);
    }
    // revolution formula 2 pi int f sqrt(1 + f'^2) for f = 1 + 0.3 sin x
    double rev = 2 * pi * quadrature([](double x) {
        double f = 1 + 0.3 * std::sin(x), fp = 0.3 * std::cos(x);
        return f * std::sqrt(1 + fp * fp);
    }, 0.0, 3.0, 1e-13);
    CHECK(std::abs(area(revolution()) - rev) < 1e-7 * rev);
    for (double R : {0.3, 1.0, 2.0}) {
        double cap = area(sphere(1.0, R));
        CHECK(std::abs(cap - 2 * pi * (1 - std::cos(R))) < 1e-8 * cap);
    }
    AreaOptions serial{1e-8, 1e-14, Exec::serial};
    CHECK(area(torus(), serial) == area(torus()));
    CHECK(area(torus()) == doctest::Approx(4 * pi * pi * 2.0 * 0.5).epsilon(1e-9));
}

TEST_CASE("offset surfaces")
{
    auto pl = offset_surface(plane_patch(), 0.7);
    CHECK(area(pl) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(geometry_at(pl, 0.2, 0.3).r.z() == doctest::Approx(0.7));

    for (double eps : {0.3, -0.4}) {
        auto sp = offset_surface(sphere(), eps);
        for (double t : {0.5, 2.0}) {
            auto g = geometry_at(sp, t, 1.0);
            CHECK(g.r.norm() == doctest::Approx(1 + eps).epsilon(1e-14));
            auto rep = principal_at(sp, t, 1.0);
            CHECK(rep.lambda_plus == doctest::Approx(-1 / (1 + eps)).epsilon(1e-12));
        }
        auto cy = offset_surface(cylinder(1.5), eps);
        auto g = geometry_at(cy, 0.8, 0.2);
        CHECK(std::hypot(g.r.x(), g.r.y()) == doctest::Approx(1.5 + eps).epsilon(1e-14));
        CHECK(area(cy) == doctest::Approx(2 * pi * (1.5 + eps)).epsilon(1e-10));
    }
    CHECK_THROWS_AS(offset_surface(sphere(), -1.2), PreconditionError);
    CHECK_THROWS_AS(offset_surface(torus(), 0.6), PreconditionError);
    CHECK_THROWS_AS(offset_surface(sphere(), 0.1).taylor<4>(0.5, 0.5), PreconditionError);
}

TEST_CASE("total curvatures")
{
    auto sp = total_curvatures(sphere());
    INFO(sp.report);
    CHECK(sp.fit_ok);
    CHECK(sp.area == doctest::Approx(4 * pi).epsilon(1e-9));
    CHECK(sp.H_total == doctest::Approx(8 * pi).epsilon(1e-9));
    CHECK(sp.K_total == doctest::Approx(4 * pi).epsilon(1e-9));
    CHECK(std::abs(sp.fit_H - 8 * pi) < 1e-4 * 8 * pi);
    CHECK(std::abs(sp.fit_K - 4 * pi) < 1e-4 * 4 * pi);

    // totals follow the coorientation: H flips, K does not
    auto in = total_curvatures(sphere().flipped());
    INFO(in.report);
    CHECK(in.fit_ok);
    CHECK(in.H_total == doctest::Approx(-8 * pi).epsilon(1e-9));
    CHECK(in.K_total == doctest::Approx(4 * pi).epsilon(1e-9));
    CHECK(std::abs(in.fit_H + 8 * pi) < 1e-4 * 8 * pi);
    CHECK(gauss_map_signed_area(sphere().flipped()) == doctest::Approx(4 * pi).epsilon(1e-9));

    auto pl = total_curvatures(plane_patch());
    CHECK(pl.fit_ok);
    CHECK(std::abs(pl.H_total) < 1e-12);
    CHECK(std::abs(pl.K_total) < 1e-12);

    auto to = total_curvatures(torus());
    INFO(to.report);
    CHECK(to.fit_ok);
    CHECK(std::abs(to.K_total) < 1e-9);
    CHECK(to.area == doctest::Approx(4 * pi * pi).epsilon(1e-9));

    auto gr = total_curvatures(graph(1.0, 0.5, -2.0));
    INFO(gr.report);
    CHECK(gr.fit_ok);
}

TEST_CASE("Gauss map signed area")
{
    for (const auto& e : {ellipsoid(1, 2, 3), ellipsoid(0.5, 0.5, 2), sphere(3.0)})
        CHECK(gauss_map_signed_area(e) == doctest::Approx(4 * pi).epsilon(1e-8));
    CHECK(std::abs(gauss_map_signed_area(plane_patch())) < 1e-14);

    // saddle z = x^2 - y^2 over the unit disk, polar chart
    auto saddle = make_surface("saddle-disk", {0, 1, 0, 2 * pi}, [](auto r, auto t) {
        auto x = r * cos(t), y = r * sin(t);
        return std::array<decltype(r), 3>{x, y, x * x - y * y};
    });
    double g = gauss_map_signed_area(saddle);
    CHECK(g < 0.0);
    auto tot = total_curvatures(torus());
    CHECK(std::abs(gauss_map_signed_area(torus()) - tot.K_total) < 1e-8);
    // outer half positive, inner half negative, equal magnitude
    double outer = gauss_map_signed_area(torus(), {0, 2 * pi, -pi / 2, pi / 2});
    double inner = gauss_map_signed_area(torus(), {0, 2 * pi, pi / 2, 3 * pi / 2});
    CHECK(outer == doctest::Approx(4 * pi).epsilon(1e-8));
    CHECK(inner == doctest::Approx(-4 * pi).epsilon(1e-8));
}

TEST_CASE("regularity failure names the point")
{
    auto bad = make_surface("pinched", {-1, 1, -1, 1}, [](auto u, auto v) {
        return std::array<decltype(u), 3>{u * u * u, v, u * v};
    });
    try {
        forms_at(bad, 0.0, 0.0);
        FAIL("no throw");
    } catch (const RegularityError& e) {
        CHECK(std::string(e.what()).find("(u, v) = (0, 0)") != std::string::npos);
    }
}
