#include <doctest.h>

#include "curvatur/catalog.hpp"
#include "curvatur/tensors.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace curvatur;
using std::numbers::pi;

namespace {

VecN P2(double a, double b)
{
    VecN v(2);
    v << a, b;
    return v;
}

// Random tree over a few variables, functions and non-negative constants.
ExprPtr random_expr(std::mt19937& rng, int depth)
{
    std::uniform_int_distribution<int> pick(0, 9);
    const int k = depth <= 0 ? pick(rng) % 2 : pick(rng);
    static const char* vars[] = {"u", "v", "x_1", "k", "sin", "in"};
    static const double nums[] = {0.0, 1.0, 2.5, 0.1, 1e-7, 3e20, 12345.678, 1.0 / 3.0};
    switch (k) {
    case 0: {
        std::uniform_int_distribution<int> i(0, 7);
        std::uniform_real_distribution<double> U(0.0, 100.0);
        return Expr::number(pick(rng) < 5 ? nums[i(rng)] : U(rng));
    }
    case 1: {
        std::uniform_int_distribution<int> i(0, 5);
        return Expr::variable(vars[i(rng)]);
    }
    case 2: return Expr::unary(Expr::Op::neg, random_expr(rng, depth - 1));
    case 3: return Expr::binary(Expr::Op::add, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 4: return Expr::binary(Expr::Op::sub, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 5: return Expr::binary(Expr::Op::mul, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 6: return Expr::binary(Expr::Op::div, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 7: return Expr::binary(Expr::Op::pow, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    default: {
        std::uniform_int_distribution<int> i(0, 7);
        return Expr::call(expr_functions()[i(rng)], random_expr(rng, depth - 1));
    }
    }
}

void check_parse_error(const std::string& text, int line, int column)
{
    try {
        load_geometry(text);
        FAIL("no error for: " << text);
    } catch (const ParseError& e) {
        INFO(e.what());
        CHECK(e.line() == line);
        CHECK(e.column() == column);
        CHECK(!e.expected().empty());
        CHECK(std::string(e.what()).find("line " + std::to_string(line) + ", column " + std::to_string(column)) == 0);
    }
}

} // namespace

TEST_CASE("expression printing and parsing")
{
    CHECK(print(*parse_expr("-x^2")) == "-x^2");
    CHECK(print(*parse_expr("(-x)^2")) == "(-x)^2");
    CHECK(print(*parse_expr("a - (b - c)")) == "a - (b - c)");
    CHECK(print(*parse_expr("(a - b) - c")) == "a - b - c");
    CHECK(print(*parse_expr("a^b^c")) == "a^b^c");
    CHECK(print(*parse_expr("(a^b)^c")) == "(a^b)^c");
    CHECK(print(*parse_expr("2*x/3")) == "2*x/3");
    CHECK(print(*parse_expr("2/(x*3)")) == "2/(x*3)");
    CHECK(print(*parse_expr("x^-2")) == "x^-2");
    CHECK(print(*parse_expr("sin(u)*cos(v) + 1e-3")) == "sin(u)*cos(v) + 0.001");
    CHECK(free_variables(*parse_expr("a*sin(b) + a")) == std::vector<std::string>{"a", "b"});

    ExprProgram p(*parse_expr("x^2 - 3*y + sqrt(x)"), {"x", "y"}, {});
    const double xy[2] = {4.0, 1.5};
    CHECK(p(xy) == doctest::Approx(16 - 4.5 + 2));
    ExprProgram q(*parse_expr("k*exp(x)^0.5 + 2^x"), {"x"}, {{"k", 3.0}});
    const double x1[1] = {2.0};
    CHECK(q(x1) == doctest::Approx(3 * std::exp(1.0) + 4));
    CHECK_THROWS_AS(ExprProgram(*parse_expr("x + z"), {"x"}, {}), PreconditionError);
}

TEST_CASE("1000 random trees round-trip through text")
{
    std::mt19937 rng(20240601);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        auto e = random_expr(rng, 5);
        const std::string text = print(*e);
        auto back = parse_expr(text);
        INFO(text);
        CHECK(equal(*e, *back));
        CHECK(print(*back) == text);
        ++checked;
    }
    CHECK(checked == 1000);
}

TEST_CASE("geometry definitions round-trip through text")
{
    const char* src = R"(# a torus with parameters
param R = 2
param r = 0.5   # tube
surface tor (u,v in [0, 2*pi]x[-pi, pi]) = ((R + r*cos(v))*cos(u), (R + r*cos(v))*sin(u), r*sin(v))
)";
    auto s = parse_geometry(src);
    CHECK(s.kind == GeometryKind::surface);
    CHECK(s.params.at("R") == 2.0);
    CHECK(s.params.at("r") == 0.5);
    auto back = parse_geometry(print(s));
    CHECK(equal(s, back));

    auto m = parse_geometry("param c = -0.25\nmetric m3 (x,y,z in [-1,1]x[-1,1]x[0,1]) = [[1, 0, c*x], [0, 2, 0], [c*x, 0, 1 + z^2]]");
    CHECK(m.coords.size() == 3);
    CHECK(m.components.size() == 9);
    CHECK(equal(m, parse_geometry(print(m))));
    auto g = compile(m);
    CHECK(g.warnings.empty());
    CHECK(g.chart->metric(VecN::Constant(3, 0.5))(2, 2) == doctest::Approx(1.25));
}

TEST_CASE("malformed definitions carry positions and expected tokens")
{
    check_parse_error("surface s (u,v in [0,1]x[0,1]) = (u, v)", 1, 39);
    check_parse_error("surface s (u,v in [0,1]x[0,1]) = (u, v, k*u)", 1, 41);
    check_parse_error("curve c (t in [0,1]) = (t, t @ 2)", 1, 30);
    check_parse_error("\n\ncurve c (t in [0,1]) = (t, foo(t))", 3, 28);
    check_parse_error("metric m (x,y in [0,1]x[1,2]) = [[1, 0], [0, 1/y^2]", 1, 52);
    check_parse_error("metric m (x,y in [0,1]x[1,2]) = [[1, x], [0, 1]]", 1, 43);
    check_parse_error("surface s (u,v in [0,1]) = (u, v, 0)", 1, 24);
    check_parse_error("curve c (t in [0,1]) = (t, t^)", 1, 30);
    check_parse_error("param k = 1\nparam k = 2\ncurve c (t in [0,1]) = (t, k)", 2, 7);
    check_parse_error("# nothing here\n", 2, 1);
    check_parse_error("curve a (t in [0,1]) = (t, t)\ncurve b (t in [0,1]) = (t, t)", 2, 1);

    try {
        parse_expr("2*(x + ");
        FAIL("no error");
    } catch (const ParseError& e) {
        CHECK(e.expected() == std::vector<std::string>{"number", "identifier", "'('", "'-'"});
        CHECK(e.column() == 8);
    }
    try {
        parse_expr("(x + 1");
        FAIL("no error");
    } catch (const ParseError& e) {
        CHECK(e.expected().front() == "')'");
    }
}

TEST_CASE("non-positive metrics give a warning")
{
    auto g = load_geometry("metric bad (x,y in [-1,1]x[-1,1]) = [[1, 0], [0, x]]");
    REQUIRE(g.warnings.size() == 1);
    CHECK(g.warnings[0].find("not positive definite") != std::string::npos);
}

TEST_CASE("grammar examples match their builtin twins")
{
    auto sph = load_geometry("surface sph (u,v in [0.1,3.04]x[0,6.28]) = (sin(u)*cos(v), sin(u)*sin(v), cos(u))");
    auto bs = builtin("sphere", {{"R", "1"}});
    for (auto [u, v] : {std::pair{1.0, 0.5}, std::pair{0.4, 2.0}, std::pair{2.5, 5.0}}) {
        auto a = forms_at(*sph.surface, u, v), b = forms_at(*bs.surface, u, v);
        CHECK((a.g - b.g).cwiseAbs().maxCoeff() < 1e-10);
        // the builtin sphere is cooriented inward
        auto pa = principal_at(sph.surface->flipped(), u, v), pb = principal_at(*bs.surface, u, v);
        CHECK(std::abs(pa.lambda_plus - pb.lambda_plus) < 1e-10);
        CHECK(std::abs(pa.lambda_minus - pb.lambda_minus) < 1e-10);
        CHECK(std::abs(principal_at(*sph.surface, u, v).K - pb.K) < 1e-10);
        CHECK(std::abs(ricci_at(*sph.chart, P2(u, v)).tau - ricci_at(*bs.chart, P2(u, v)).tau) < 1e-10);
    }

    auto hyp = load_geometry("metric hyp (x,y in [-5,5]x[0.1,10]) = [[1/y^2,0],[0,1/y^2]]");
    auto bh = builtin("lobachevsky_halfplane");
    CHECK(hyp.chart->origin == ChartOrigin::parsed);
    for (auto [x, y] : {std::pair{0.3, 1.0}, std::pair{-2.0, 0.5}, std::pair{4.0, 7.0}}) {
        VecN p = P2(x, y);
        CHECK((hyp.chart->metric(p) - bh.chart->metric(p)).cwiseAbs().maxCoeff() < 1e-10);
        auto ga = christoffel_at(*hyp.chart, p), gb = christoffel_at(*bh.chart, p);
        for (int i = 0; i < 27; ++i) CHECK(std::abs(ga.c[i] - gb.c[i]) < 1e-10);
        CHECK(std::abs(ricci_at(*hyp.chart, p).tau - ricci_at(*bh.chart, p).tau) < 1e-10);
    }

    auto hel = load_geometry("curve helix (t in [0,10]) = (cos(t), sin(t), 0.5*t)");
    auto bc = builtin("helix", {{"r", "1"}, {"w", "1"}, {"v", "0.5"}});
    for (double t : {0.0, 1.3, 7.7}) {
        auto a = space_curvature_torsion(*hel.curve, t), b = space_curvature_torsion(*bc.curve, t);
        CHECK(std::abs(a.k - b.k) < 1e-10);
        CHECK(std::abs(*a.torsion - *b.torsion) < 1e-10);
        CHECK((hel.curve->point(t) - bc.curve->point(t)).norm() < 1e-10);
    }
}

TEST_CASE("builtin examples")
{
    auto s = builtin("sphere");
    for (double r : {0.3, 1.5, 2.9}) {
        MatN g = s.chart->metric(P2(r, 1.0));
        CHECK(g(0, 0) == doctest::Approx(1.0));
        CHECK(std::abs(g(0, 1)) < 1e-15);
        CHECK(g(1, 1) == doctest::Approx(std::sin(r) * std::sin(r)));
    }
    auto rep = principal_at(*s.surface, 1.0, 0.5);
    CHECK(rep.lambda_plus == doctest::Approx(1.0));
    CHECK(rep.lambda_minus == doctest::Approx(1.0));

    auto t = builtin("torus", {{"R", "2"}, {"r", "1"}});
    const double u = 0.7, v = 1.9;
    Vec3 expect((2 + std::cos(v)) * std::cos(u), (2 + std::cos(v)) * std::sin(u), std::sin(v));
    CHECK((forms_at(*t.surface, u, v).point - expect).norm() < 1e-14);

    auto c = builtin("conformal", {{"lambda", "-0.5"}});
    CHECK(ricci_at(*c.chart, P2(0.1, 0.2)).tau == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(ricci_at(*builtin("conformal").chart, P2(0.3, -1.0)).tau == doctest::Approx(2.0).epsilon(1e-9));
    VecN o = VecN::Zero(3);
    CHECK(ricci_at(*builtin("s3_round").chart, o).tau == doctest::Approx(6.0).epsilon(1e-9));
    CHECK(builtin("revolution").surface->period[0] == doctest::Approx(2 * pi));
    CHECK(builtin("graph", {{"f", "u*v"}}).surface->domain.u1 == 1.0);

    CHECK_THROWS_AS(builtin("sphere", {{"R", "-1"}}), PreconditionError);
    CHECK_THROWS_AS(builtin("torus", {{"R", "1"}, {"r", "2"}}), PreconditionError);
    CHECK_THROWS_AS(builtin("klein_bottle"), PreconditionError);
    CHECK_THROWS_AS(builtin("plane", {{"R", "1"}}), PreconditionError);
    CHECK_THROWS_AS(builtin("revolution", {{"f", "2 + u"}}), PreconditionError);
    CHECK(builtin("sphere", {{"R", "2*pi"}}).params.at("R") == "2*pi");
}

TEST_CASE("every builtin is regular on a 32x32 grid")
{
    for (const auto& info : builtin_catalog()) {
        auto g = builtin(info.name);
        INFO(info.name);
        CHECK(g.warnings.empty());
        CHECK(g.kind == info.kind);
        const int m = 32;
        double worst = 1e300;
        if (g.surface) {
            const auto& d = g.surface->domain;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    const double u = d.u0 + (d.u1 - d.u0) * i / (m - 1), v = d.v0 + (d.v1 - d.v0) * j / (m - 1);
                    auto f = forms_at(*g.surface, u, v);
                    worst = std::min(worst, f.ru.cross(f.rv).norm());
                    CHECK(std::abs(f.n.norm() - 1.0) < 1e-12);
                }
            CHECK(worst > g.surface->eps_reg);
        }
        if (g.chart && g.chart->dim == 2) {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    VecN x = g.chart->lo + (g.chart->hi - g.chart->lo).cwiseProduct(P2(i / (m - 1.0), j / (m - 1.0)));
                    Eigen::SelfAdjointEigenSolver<MatN> es(g.chart->metric(x));
                    worst = std::min(worst, es.eigenvalues().minCoeff());
                }
            CHECK(worst > 0);
        }
        if (g.chart && g.chart->dim == 3) {
            for (int q = 0; q < 8 * 8 * 8; ++q) {
                VecN x(3);
                for (int a = 0, rem = q; a < 3; ++a, rem /= 8)
                    x[a] = g.chart->lo[a] + (g.chart->hi[a] - g.chart->lo[a]) * (rem % 8) / 7.0;
                Eigen::SelfAdjointEigenSolver<MatN> es(g.chart->metric(x));
                worst = std::min(worst, es.eigenvalues().minCoeff());
            }
            CHECK(worst > 0);
        }
        if (g.curve) {
            for (int i = 0; i < m; ++i) {
                const double t = g.curve->a + (g.curve->b - g.curve->a) * i / (m - 1);
                worst = std::min(worst, g.curve->sample(t).d1.norm());
            }
            CHECK(worst > g.curve->eps_reg);
        }
    }
}

TEST_CASE("hyperbolic distance")
{
    using C = std::complex<double>;
    CHECK(hyperbolic_distance(C(0, 1), C(0, 1)) == 0.0);
    for (double k : {0.2, 2.0, 50.0}) CHECK(hyperbolic_distance(C(0, 1), C(0, k)) == doctest::Approx(std::abs(std::log(k))).epsilon(1e-14));
    CHECK_THROWS_AS(hyperbolic_distance(C(0, 1), C(1, 0)), PreconditionError);

    std::mt19937 rng(99);
    std::uniform_real_distribution<double> X(-3, 3), Y(0.2, 4), A(0.1, 1.4);
    for (int i = 0; i < 50; ++i) {
        // right angle at i between the imaginary axis and the unit circle
        const double k = std::exp(A(rng)), th = pi / 2 - A(rng);
        const C a(0, 1), b(0, k), c = std::polar(1.0, th);
        const double ca = std::cosh(hyperbolic_distance(a, b)), cb = std::cosh(hyperbolic_distance(a, c));
        CHECK(std::abs(std::cosh(hyperbolic_distance(b, c)) - ca * cb) < 1e-9 * ca * cb);

        const C z1(X(rng), Y(rng)), z2(X(rng), Y(rng));
        const double d = hyperbolic_distance(z1, z2);
        CHECK(std::abs(hyperbolic_distance(z1 + 1.7, z2 + 1.7) - d) < 1e-10);
        CHECK(std::abs(hyperbolic_distance(-1.0 / z1, -1.0 / z2) - d) < 1e-10);
    }

    auto hp = builtin("lobachevsky_halfplane");
    for (int i = 0; i < 5; ++i) {
        const C z1(X(rng), Y(rng)), z2(X(rng), Y(rng));
        auto r = geodesic_distance(*hp.chart, P2(z1.real(), z1.imag()), P2(z2.real(), z2.imag()));
        CHECK(std::abs(r.distance - hyperbolic_distance(z1, z2)) < 1e-6);
    }
}

TEST_CASE("hyperboloid and half-plane models agree")
{
    auto hb = builtin("hyperboloid_pullback");
    auto hp = builtin("lobachevsky_halfplane");
    CHECK(ricci_at(*hb.chart, P2(0.4, -0.3)).tau == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(ricci_at(*hp.chart, P2(0.4, 1.3)).tau == doctest::Approx(-2.0).epsilon(1e-9));
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    for (int i = 0; i < 5; ++i) {
        VecN a = P2(U(rng), U(rng)), b = P2(U(rng), U(rng));
        auto r = geodesic_distance(*hb.chart, a, b);
        const double d = hyperbolic_distance(hyperboloid_to_halfplane(a[0], a[1]), hyperboloid_to_halfplane(b[0], b[1]));
        CHECK(std::abs(r.distance - d) < 1e-5);
    }
}

TEST_CASE("half-plane geodesics are vertical lines and semicircles")
{
    auto hp = builtin("lobachevsky_halfplane");
    auto vert = geodesic_trace(*hp.chart, P2(0.7, 1.0), P2(0.0, 1.0), 3.0, {1e-11, 1e-13, 200, {}});
    double drift = 0.0;
    for (const auto& x : vert.x) drift = std::max(drift, std::abs(x[0] - 0.7));
    CHECK(drift < 1e-8);

    std::mt19937 rng(8);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int i = 0; i < 5; ++i) {
        VecN dir = P2(1.0, U(rng));
        auto path = geodesic_trace(*hp.chart, P2(U(rng), 1.0 + 0.5 * U(rng)), dir, 2.0, {1e-11, 1e-13, 200, {}});
        // x^2 + y^2 = 2 c x + (r^2 - c^2)
        Eigen::MatrixXd A(path.x.size(), 2);
        Eigen::VectorXd b(path.x.size());
        for (std::size_t k = 0; k < path.x.size(); ++k) {
            A(k, 0) = 2 * path.x[k][0];
            A(k, 1) = 1.0;
            b[k] = path.x[k].squaredNorm();
        }
        Eigen::Vector2d sol = A.colPivHouseholderQr().solve(b);
        const double c = sol[0], r = std::sqrt(sol[1] + c * c);
        double res = 0.0;
        for (const auto& x : path.x) res = std::max(res, std::abs(std::hypot(x[0] - c, x[1]) - r));
        CHECK(res < 1e-6);
    }
}
