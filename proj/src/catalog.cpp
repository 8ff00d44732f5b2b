#include "curvatur/catalog.hpp"

#include <Eigen/Eigenvalues>

#include <charconv>
#include <cmath>
#include <numbers>

namespace curvatur {

using std::numbers::pi;

namespace {

std::string fmt(double v)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::map<std::string, double> constants(const GeometrySpec& s)
{
    std::map<std::string, double> c = s.params;
    c["pi"] = pi;
    return c;
}

double eval_constant(const Expr& e, const std::map<std::string, double>& bound)
{
    ExprProgram prog(e, {}, bound);
    return prog(static_cast<const double*>(nullptr));
}

void check_metric(Geometry& g)
{
    const MetricChart& c = *g.chart;
    const int n = c.dim, m = 5;
    int total = 1;
    for (int a = 0; a < n; ++a) total *= m;
    for (int q = 0; q < total; ++q) {
        VecN x(n);
        int rem = q;
        for (int a = 0; a < n; ++a) {
            x[a] = c.lo[a] + (rem % m) * (c.hi[a] - c.lo[a]) / (m - 1);
            rem /= m;
        }
        MatN gm = c.metric(x);
        Eigen::SelfAdjointEigenSolver<MatN> es(gm, Eigen::EigenvaluesOnly);
        if (!gm.allFinite() || !(es.eigenvalues().minCoeff() > 0)) {
            std::string at;
            for (int a = 0; a < n; ++a) at += (a ? ", " : "") + fmt(x[a]);
            g.warnings.push_back("metric is not positive definite at (" + at + ")");
            return;
        }
    }
}

Geometry finish_surface(SurfacePatch s)
{
    Geometry g;
    g.kind = GeometryKind::surface;
    g.name = s.name;
    auto sp = std::make_shared<const SurfacePatch>(std::move(s));
    g.surface = sp;
    g.chart = std::make_shared<const MetricChart>(pullback_metric(*sp));
    return g;
}

Geometry finish_metric(MetricChart c)
{
    Geometry g;
    g.kind = GeometryKind::metric;
    g.name = c.name;
    g.chart = std::make_shared<const MetricChart>(std::move(c));
    check_metric(g);
    return g;
}

Geometry finish_curve(ParamCurve c, std::string name)
{
    Geometry g;
    g.kind = GeometryKind::curve;
    g.name = std::move(name);
    g.curve = std::make_shared<const ParamCurve>(std::move(c));
    return g;
}

struct Programs {
    std::vector<ExprProgram> p;
    template <class T>
    T operator()(std::size_t i, const T* x) const
    {
        return p[i](x);
    }
};

} // namespace

Geometry compile(const GeometrySpec& spec)
{
    const auto bound = constants(spec);
    const std::size_t n = spec.coords.size();
    std::vector<double> lo(n), hi(n);
    for (std::size_t k = 0; k < n; ++k) {
        lo[k] = eval_constant(*spec.lo[k], bound);
        hi[k] = eval_constant(*spec.hi[k], bound);
        if (!(lo[k] < hi[k]) || !std::isfinite(lo[k]) || !std::isfinite(hi[k]))
            throw PreconditionError("interval for '" + spec.coords[k] + "' must satisfy lo < hi, got [" + fmt(lo[k]) +
                                    ", " + fmt(hi[k]) + "]");
    }
    auto progs = std::make_shared<Programs>();
    for (const auto& c : spec.components) progs->p.emplace_back(*c, spec.coords, bound);

    Geometry g;
    switch (spec.kind) {
    case GeometryKind::curve: {
        const int dim = static_cast<int>(spec.components.size());
        auto curve = make_curve(dim, lo[0], hi[0], [progs, dim](auto t) {
            using T = decltype(t);
            const T x[1] = {t};
            return std::array<T, 3>{(*progs)(0, x), (*progs)(1, x), dim == 3 ? (*progs)(2, x) : T(0.0)};
        });
        g = finish_curve(std::move(curve), spec.name);
        break;
    }
    case GeometryKind::surface: {
        auto s = make_surface(spec.name, {lo[0], hi[0], lo[1], hi[1]}, [progs](auto u, auto v) {
            using T = decltype(u);
            const T x[2] = {u, v};
            return std::array<T, 3>{(*progs)(0, x), (*progs)(1, x), (*progs)(2, x)};
        });
        g = finish_surface(std::move(s));
        break;
    }
    case GeometryKind::metric: {
        const int dim = static_cast<int>(n);
        VecN vlo(dim), vhi(dim);
        for (int k = 0; k < dim; ++k) vlo[k] = lo[k], vhi[k] = hi[k];
        auto c = make_metric(spec.name, dim, vlo, vhi, [progs, dim](auto x) {
            using T = typename decltype(x)::value_type;
            auto at = [&](int i, int j) { return (*progs)(i * dim + j, x.data()); };
            if (dim == 2) return std::array<T, 6>{at(0, 0), at(0, 1), T(0.0), at(1, 1), T(0.0), T(1.0)};
            return std::array<T, 6>{at(0, 0), at(0, 1), at(0, 2), at(1, 1), at(1, 2), at(2, 2)};
        });
        c.origin = ChartOrigin::parsed;
        g = finish_metric(std::move(c));
        break;
    }
    }
    for (const auto& [k, v] : spec.params) g.params[k] = fmt(v);
    g.source = print(spec);
    return g;
}

Geometry load_geometry(std::string_view text) { return compile(parse_geometry(text)); }

const std::vector<BuiltinInfo>& builtin_catalog()
{
    using K = GeometryKind;
    static const std::vector<BuiltinInfo> cat{
        {"plane", K::surface, {}, "(u, v, 0) on [-10,10]^2"},
        {"sphere", K::surface, {{"R", "1"}}, "polar chart R(sin u cos v, sin u sin v, cos u), u in [0.1, pi-0.1], inward normal"},
        {"cylinder", K::surface, {{"R", "1"}}, "(R cos u, R sin u, v), v in [-10,10], inward normal"},
        {"cone", K::surface, {{"a", "1"}}, "(u cos v, u sin v, a u), u in [0.2, 3]"},
        {"torus", K::surface, {{"R", "2"}, {"r", "1"}}, "((R + r cos v) cos u, (R + r cos v) sin u, r sin v)"},
        {"graph", K::surface, {{"f", "(u^2 + v^2)/2"}, {"u0", "-1"}, {"u1", "1"}, {"v0", "-1"}, {"v1", "1"}},
         "(u, v, f(u, v))"},
        {"revolution", K::surface, {{"f", "2 + cos(v)"}, {"h", "v"}, {"v0", "-3"}, {"v1", "3"}},
         "(f(v) cos u, f(v) sin u, h(v))"},
        {"saddle", K::surface, {}, "(u, v, u^2 - v^2) on [-1,1]^2"},
        {"helix", K::curve, {{"r", "1"}, {"w", "1"}, {"v", "0.5"}, {"T", "10"}}, "(r cos wt, r sin wt, v t), t in [0, T]"},
        {"parabola", K::curve, {{"a", "-1"}, {"b", "1"}}, "(t, t^2), t in [a, b]"},
        {"cycloid", K::curve, {{"R", "1"}}, "R(t - sin t, 1 - cos t), t in [0.1, 2pi - 0.1]"},
        {"viviani", K::curve, {{"R", "1"}}, "(R(1 + cos t), R sin t, 2R sin(t/2)), t in [0, 4pi]"},
        {"lobachevsky_halfplane", K::metric, {}, "(dx^2 + dy^2)/y^2, x in [-50,50], y in [1e-3, 1e3]"},
        {"conformal", K::metric, {{"lambda", "1"}}, "4(dx^2 + dy^2)/(1 + lambda(x^2 + y^2))^2, curvature lambda"},
        {"s3_round", K::metric, {}, "unit S^3 as a graph: delta + x x^T/(1 - |x|^2) on [-0.55,0.55]^3"},
        {"hyperboloid_pullback", K::metric, {},
         "dx^2 + dy^2 - dz^2 on z = sqrt(1 + x^2 + y^2), (x, y) in [-5,5]^2"},
    };
    return cat;
}

Geometry builtin(const std::string& name, const std::map<std::string, std::string>& given)
{
    const BuiltinInfo* info = nullptr;
    for (const auto& b : builtin_catalog())
        if (b.name == name) info = &b;
    if (!info) {
        std::string names;
        for (const auto& b : builtin_catalog()) names += (names.empty() ? "" : ", ") + b.name;
        throw PreconditionError("unknown builtin '" + name + "' (known: " + names + ")");
    }
    std::map<std::string, std::string> p;
    for (const auto& [k, v] : info->params) p[k] = v;
    for (const auto& [k, v] : given) {
        if (!p.count(k)) {
            std::string known;
            for (const auto& [kk, vv] : info->params) known += (known.empty() ? "" : ", ") + kk;
            throw PreconditionError("builtin '" + name + "' has no parameter '" + k + "'" +
                                    (known.empty() ? std::string(" (it takes none)") : " (known: " + known + ")"));
        }
        p[k] = v;
    }
    const std::map<std::string, double> pi_only{{"pi", pi}};
    auto num = [&](const std::string& k) {
        try {
            return eval_constant(*parse_expr(p.at(k)), pi_only);
        } catch (const PreconditionError& e) {
            throw PreconditionError("parameter " + k + " of '" + name + "' is not a constant: " + e.what());
        }
    };
    auto positive = [&](const std::string& k) {
        const double v = num(k);
        if (!(v > 0) || !std::isfinite(v))
            throw PreconditionError("parameter " + k + " of '" + name + "' must be positive, got " + p.at(k));
        return v;
    };

    Geometry g;
    if (name == "plane") {
        g = finish_surface(make_surface("plane", {-10, 10, -10, 10}, [](auto u, auto v) {
            using T = decltype(u);
            return std::array<T, 3>{u, v, T(0.0)};
        }));
    } else if (name == "sphere") {
        const double R = positive("R");
        auto s = make_surface(
            "sphere", {0.1, pi - 0.1, 0, 2 * pi},
            [R](auto t, auto f) {
                using T = decltype(t);
                return std::array<T, 3>{R * sin(t) * cos(f), R * sin(t) * sin(f), T(R * cos(t))};
            },
            {0.0, 2 * pi});
        s.orientation = -1.0;
        g = finish_surface(std::move(s));
    } else if (name == "cylinder") {
        const double R = positive("R");
        auto s = make_surface(
            "cylinder", {0, 2 * pi, -10, 10},
            [R](auto u, auto v) {
                using T = decltype(u);
                return std::array<T, 3>{T(R * cos(u)), T(R * sin(u)), v};
            },
            {2 * pi, 0.0});
        s.orientation = -1.0;
        g = finish_surface(std::move(s));
    } else if (name == "cone") {
        const double a = positive("a");
        g = finish_surface(make_surface(
            "cone", {0.2, 3.0, 0, 2 * pi},
            [a](auto r, auto f) {
                using T = decltype(r);
                return std::array<T, 3>{r * cos(f), r * sin(f), T(a * r)};
            },
            {0.0, 2 * pi}));
    } else if (name == "torus") {
        const double R = positive("R"), r = positive("r");
        if (!(r < R)) throw PreconditionError("torus needs r < R, got R = " + p["R"] + ", r = " + p["r"]);
        g = finish_surface(make_surface(
            "torus", {0, 2 * pi, 0, 2 * pi},
            [R, r](auto u, auto v) {
                auto rho = R + r * cos(v);
                return std::array<decltype(u), 3>{rho * cos(u), rho * sin(u), r * sin(v)};
            },
            {2 * pi, 2 * pi}));
    } else if (name == "graph" || name == "revolution") {
        GeometrySpec spec;
        spec.kind = GeometryKind::surface;
        spec.name = name;
        spec.coords = {"u", "v"};
        auto u = Expr::variable("u"), v = Expr::variable("v");
        if (name == "graph") {
            spec.lo = {parse_expr(p["u0"]), parse_expr(p["v0"])};
            spec.hi = {parse_expr(p["u1"]), parse_expr(p["v1"])};
            spec.components = {u, v, parse_expr(p["f"])};
        } else {
            spec.lo = {Expr::number(0), parse_expr(p["v0"])};
            spec.hi = {Expr::binary(Expr::Op::mul, Expr::number(2), Expr::variable("pi")), parse_expr(p["v1"])};
            auto f = parse_expr(p["f"]);
            spec.components = {Expr::binary(Expr::Op::mul, f, Expr::call("cos", u)),
                               Expr::binary(Expr::Op::mul, f, Expr::call("sin", u)), parse_expr(p["h"])};
            for (const auto& e : {p["f"], p["h"]})
                for (const auto& var : free_variables(*parse_expr(e)))
                    if (var != "v" && var != "pi")
                        throw PreconditionError("revolution profile may only use v, got '" + var + "'");
        }
        Geometry c = compile(spec);
        SurfacePatch s = *c.surface;
        if (name == "revolution") s.period = {2 * pi, 0.0};
        g = finish_surface(std::move(s));
        g.source = c.source;
    } else if (name == "saddle") {
        g = finish_surface(make_surface("saddle", {-1, 1, -1, 1}, [](auto u, auto v) {
            return std::array<decltype(u), 3>{u, v, u * u - v * v};
        }));
    } else if (name == "helix") {
        const double r = positive("r"), v = num("v"), T = positive("T"), w = num("w");
        if (w == 0) throw PreconditionError("helix needs w != 0");
        g = finish_curve(make_curve(3, 0.0, T,
                                    [r, w, v](auto t) {
                                        using J = decltype(t);
                                        return std::array<J, 3>{r * cos(w * t), r * sin(w * t), v * t};
                                    }),
                         "helix");
    } else if (name == "parabola") {
        const double a = num("a"), b = num("b");
        if (!(a < b)) throw PreconditionError("parabola needs a < b");
        g = finish_curve(make_curve(2, a, b,
                                    [](auto t) {
                                        using J = decltype(t);
                                        return std::array<J, 3>{t, t * t, J(0.0)};
                                    }),
                         "parabola");
    } else if (name == "cycloid") {
        const double R = positive("R");
        g = finish_curve(make_curve(2, 0.1, 2 * pi - 0.1,
                                    [R](auto t) {
                                        using J = decltype(t);
                                        return std::array<J, 3>{R * (t - sin(t)), R * (1.0 - cos(t)), J(0.0)};
                                    }),
                         "cycloid");
    } else if (name == "viviani") {
        const double R = positive("R");
        g = finish_curve(make_curve(3, 0.0, 4 * pi,
                                    [R](auto t) {
                                        return std::array<decltype(t), 3>{R * (1.0 + cos(t)), R * sin(t),
                                                                          2.0 * R * sin(0.5 * t)};
                                    }),
                         "viviani");
    } else if (name == "lobachevsky_halfplane") {
        VecN lo(2), hi(2);
        lo << -50, 1e-3;
        hi << 50, 1e3;
        g = finish_metric(make_metric("lobachevsky_halfplane", 2, lo, hi, [](auto x) {
            using T = typename decltype(x)::value_type;
            T w = 1.0 / (x[1] * x[1]);
            return std::array<T, 6>{w, T(0.0), T(0.0), w, T(0.0), T(1.0)};
        }));
    } else if (name == "conformal") {
        const double lam = num("lambda");
        const double half = lam < 0 ? 0.7 / std::sqrt(-lam) : 5.0;
        VecN lo = VecN::Constant(2, -half), hi = VecN::Constant(2, half);
        g = finish_metric(make_metric("conformal", 2, lo, hi, [lam](auto x) {
            using T = typename decltype(x)::value_type;
            T d = 1.0 + lam * (x[0] * x[0] + x[1] * x[1]);
            T w = 4.0 / (d * d);
            return std::array<T, 6>{w, T(0.0), T(0.0), w, T(0.0), T(1.0)};
        }));
    } else if (name == "s3_round") {
        VecN lo = VecN::Constant(3, -0.55), hi = VecN::Constant(3, 0.55);
        g = finish_metric(make_metric("s3_round", 3, lo, hi, [](auto x) {
            using T = typename decltype(x)::value_type;
            T w = 1.0 / (1.0 - x[0] * x[0] - x[1] * x[1] - x[2] * x[2]);
            return std::array<T, 6>{1.0 + x[0] * x[0] * w, x[0] * x[1] * w, x[0] * x[2] * w,
                                    1.0 + x[1] * x[1] * w, x[1] * x[2] * w, 1.0 + x[2] * x[2] * w};
        }));
    } else if (name == "hyperboloid_pullback") {
        VecN lo = VecN::Constant(2, -5.0), hi = VecN::Constant(2, 5.0);
        g = finish_metric(make_metric("hyperboloid_pullback", 2, lo, hi, [](auto x) {
            using T = typename decltype(x)::value_type;
            T z = sqrt(1.0 + x[0] * x[0] + x[1] * x[1]);
            T zx = x[0] / z, zy = x[1] / z;
            return std::array<T, 6>{1.0 - zx * zx, -zx * zy, T(0.0), 1.0 - zy * zy, T(0.0), T(1.0)};
        }));
    }
    g.params = p;
    return g;
}

double hyperbolic_distance(std::complex<double> z1, std::complex<double> z2)
{
    if (!(z1.imag() > 0) || !(z2.imag() > 0))
        throw PreconditionError("hyperbolic_distance: points must lie in the upper half-plane (Im z > 0)");
    // cosh d = 1 + |z1 - z2|^2 / (2 y1 y2), i.e. sinh(d/2) = |z1 - z2| / (2 sqrt(y1 y2))
    return 2.0 * std::asinh(std::abs(z1 - z2) / (2.0 * std::sqrt(z1.imag() * z2.imag())));
}

std::complex<double> hyperboloid_to_halfplane(double x, double y)
{
    const double z = std::sqrt(1.0 + x * x + y * y);
    const std::complex<double> w(x / (1.0 + z), y / (1.0 + z));
    return std::complex<double>(0.0, 1.0) * (1.0 + w) / (1.0 - w);
}

} // namespace curvatur
