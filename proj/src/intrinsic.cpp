#include "curvatur/intrinsic.hpp"

#include "curvatur/numkit/quadrature.hpp"
#include "curvatur/numkit/richardson.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace curvatur {

using std::numbers::pi;

const char* to_string(ChartOrigin o)
{
    switch (o) {
    case ChartOrigin::builtin: return "builtin";
    case ChartOrigin::pullback: return "pullback";
    case ChartOrigin::parsed: return "parsed";
    }
    return "?";
}

const char* to_string(PathEnd e) { return e == PathEnd::completed ? "completed" : "domain-exit"; }

double unit_ball_volume(int n)
{
    if (n == 2) return pi;
    if (n == 3) return 4.0 * pi / 3.0;
    throw PreconditionError("unit_ball_volume: dimension must be 2 or 3");
}

double unit_sphere_area(int n)
{
    if (n == 2) return 2.0 * pi;
    if (n == 3) return 4.0 * pi;
    throw PreconditionError("unit_sphere_area: dimension must be 2 or 3");
}

namespace {

std::string point_string(const VecN& x)
{
    std::ostringstream os;
    os.precision(10);
    os << "(";
    for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    return os.str();
}

} // namespace

MatN MetricChart::metric(const VecN& x) const
{
    auto j = jets<1>(x);
    MatN g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int k = 0; k < dim; ++k) g(i, k) = j[sym_index(i, k)].value();
    return g;
}

bool MetricChart::contains(const VecN& x) const
{
    const double tol = 1e-12;
    for (int i = 0; i < dim; ++i) {
        if (!std::isfinite(x[i])) return false;
        if (period[i] > 0) continue;
        if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
    }
    return true;
}

void MetricChart::require(const VecN& x, const char* what) const
{
    if (!contains(x))
        throw DomainExitError(std::string(what) + ": point " + point_string(x) + " lies outside chart '" + name + "'");
}

MetricChart pullback_metric(const SurfacePatch& s)
{
    MetricChart c;
    c.dim = 2;
    c.name = "pullback(" + s.name + ")";
    c.origin = ChartOrigin::pullback;
    c.lo = VecN(2);
    c.hi = VecN(2);
    c.lo << s.domain.u0, s.domain.v0;
    c.hi << s.domain.u1, s.domain.v1;
    c.period = {s.period[0], s.period[1], 0.0};
    auto surf = std::make_shared<const SurfacePatch>(s);
    c.surface = surf;
    auto one = [surf]<int K>(std::integral_constant<int, K>) {
        return [surf](const VecN& x) -> MetricJets<K> {
            auto r = surf->taylor<K + 1>(x[0], x[1]);
            JVec3<Jet<2, K>> ru, rv;
            for (int d = 0; d < 3; ++d) {
                ru[d] = differentiate(r[d], 0);
                rv[d] = differentiate(r[d], 1);
            }
            MetricJets<K> g;
            g.fill(ChartJet<K>(0.0));
            g[0] = widen<3>(dot(ru, ru));
            g[1] = widen<3>(dot(ru, rv));
            g[3] = widen<3>(dot(rv, rv));
            return g;
        };
    };
    std::get<0>(c.evaluators_) = one(std::integral_constant<int, 1>{});
    std::get<1>(c.evaluators_) = one(std::integral_constant<int, 2>{});
    return c;
}

MatN orthonormal_frame(const MatN& g)
{
    const int n = static_cast<int>(g.rows());
    MatN e = MatN::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        VecN v = e.col(i);
        for (int j = 0; j < i; ++j) v -= (e.col(j).dot(g * v)) * e.col(j);
        double len = std::sqrt(v.dot(g * v));
        if (!(len > 0)) throw PreconditionError("orthonormal_frame: metric is not positive definite");
        e.col(i) = v / len;
    }
    return e;
}

namespace {

inline double value_of_scalar(double x) { return x; }
template <int NV, int ORD>
double value_of_scalar(const Jet<NV, ORD>& x)
{
    return x.value();
}

template <class T>
void christoffel_from(int n, const T (&g)[3][3], const T (&dg)[3][3][3], std::array<T, 27>& out)
{
    // dg[m][i][j] = d g_ij / d x_m
    T inv[3][3];
    if (n == 2) {
        T det = g[0][0] * g[1][1] - g[0][1] * g[0][1];
        if (!(value_of_scalar(det) > 0))
            throw DomainExitError("metric is not positive definite");
        T r = 1.0 / det;
        inv[0][0] = g[1][1] * r;
        inv[1][1] = g[0][0] * r;
        inv[0][1] = inv[1][0] = -g[0][1] * r;
    } else {
        T c00 = g[1][1] * g[2][2] - g[1][2] * g[1][2];
        T c01 = g[0][2] * g[1][2] - g[0][1] * g[2][2];
        T c02 = g[0][1] * g[1][2] - g[0][2] * g[1][1];
        T c11 = g[0][0] * g[2][2] - g[0][2] * g[0][2];
        T c12 = g[0][2] * g[0][1] - g[0][0] * g[1][2];
        T c22 = g[0][0] * g[1][1] - g[0][1] * g[0][1];
        T det = g[0][0] * c00 + g[0][1] * c01 + g[0][2] * c02;
        if (!(value_of_scalar(det) > 0))
            throw DomainExitError("metric is not positive definite");
        T r = 1.0 / det;
        inv[0][0] = c00 * r;
        inv[0][1] = inv[1][0] = c01 * r;
        inv[0][2] = inv[2][0] = c02 * r;
        inv[1][1] = c11 * r;
        inv[1][2] = inv[2][1] = c12 * r;
        inv[2][2] = c22 * r;
    }
    for (auto& e : out) e = T(0.0);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            T lowered[3];
            for (int l = 0; l < n; ++l) lowered[l] = dg[i][l][j] + dg[j][l][i] - dg[l][i][j];
            for (int k = 0; k < n; ++k) {
                T s(0.0);
                for (int l = 0; l < n; ++l) s += inv[k][l] * lowered[l];
                s *= 0.5;
                out[(k * 3 + i) * 3 + j] = s;
                out[(k * 3 + j) * 3 + i] = s;
            }
        }
}

} // namespace


namespace {

Christoffel christoffel_values(const MetricChart& chart, const VecN& x)
{
    const int n = chart.dim;
    auto j = chart.jets<1>(x);
    double g[3][3] = {}, dg[3][3][3] = {};
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const auto& e = j[sym_index(i, k)];
            g[i][k] = e.value();
            for (int m = 0; m < n; ++m) dg[m][i][k] = e.d(m);
        }
    Christoffel c;
    c.dim = n;
    christoffel_from(n, g, dg, c.c);
    return c;
}

ChristoffelJet christoffel_jet_values(const MetricChart& chart, const VecN& x)
{
    using J1 = ChartJet<1>;
    const int n = chart.dim;
    auto j = chart.jets<2>(x);
    J1 g[3][3], dg[3][3][3];
    for (auto& row : g)
        for (auto& e : row) e = J1(0.0);
    for (auto& a : dg)
        for (auto& row : a)
            for (auto& e : row) e = J1(0.0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const auto& e = j[sym_index(i, k)];
            g[i][k] = truncate<1>(e);
            for (int m = 0; m < n; ++m) dg[m][i][k] = differentiate(e, m);
        }
    ChristoffelJet c;
    c.dim = n;
    christoffel_from(n, g, dg, c.c);
    return c;
}

VecN vec(const State& y, int offset, int n)
{
    VecN v(n);
    for (int i = 0; i < n; ++i) v[i] = y[offset + i];
    return v;
}

// Geodesic flow in chart coordinates with optional variational equations
// (Jacobian of x(t) with respect to the initial velocity) and optional
// parallel transport of the columns of a0.
// State layout: x, v, J (column-major), J', A (column-major).
OdeSolution integrate_flow(const MetricChart& chart, const VecN& x0, const VecN& v0, double T,
                           const std::vector<double>& stops, double rtol, double atol, bool jacobian,
                           const MatN* a0)
{
    const int n = chart.dim;
    const int k = a0 ? static_cast<int>(a0->cols()) : 0;
    const int jac = jacobian ? n * n : 0;
    const int size = 2 * n + 2 * jac + n * k;
    OdeProblem p;
    p.y0 = State::Zero(size);
    for (int i = 0; i < n; ++i) {
        p.y0[i] = x0[i];
        p.y0[n + i] = v0[i];
    }
    if (jacobian)
        for (int a = 0; a < n; ++a) p.y0[2 * n + jac + a * n + a] = 1.0;
    for (int c = 0; c < k; ++c)
        for (int i = 0; i < n; ++i) p.y0[2 * n + 2 * jac + c * n + i] = (*a0)(i, c);
    p.t0 = 0.0;
    p.t1 = T;
    p.rtol = rtol;
    p.atol = atol;
    p.stops = stops;
    p.inside = [&chart, n](double, const State& y) { return chart.contains(vec(y, 0, n)); };
    p.rhs = [&chart, n, k, jac, jacobian](double, const State& y, State& dy) {
        VecN x = vec(y, 0, n);
        const double* v = y.data() + n;
        try {
            double G[27];
            ChristoffelJet GJ;
            if (jacobian) {
                GJ = christoffel_jet_values(chart, x);
                for (int i = 0; i < 27; ++i) G[i] = GJ.c[i].value();
            } else {
                auto c = christoffel_values(chart, x);
                std::copy(c.c.begin(), c.c.end(), G);
            }
            auto gam = [&G](int a, int b, int c) { return G[(a * 3 + b) * 3 + c]; };
            for (int i = 0; i < n; ++i) dy[i] = v[i];
            for (int a = 0; a < n; ++a) {
                double s = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) s += gam(a, i, j) * v[i] * v[j];
                dy[n + a] = -s;
            }
            if (jacobian) {
                const double* J = y.data() + 2 * n;
                const double* Jp = J + jac;
                for (int c = 0; c < n; ++c) {
                    for (int a = 0; a < n; ++a) dy[2 * n + c * n + a] = Jp[c * n + a];
                    for (int a = 0; a < n; ++a) {
                        double s = 0.0;
                        for (int i = 0; i < n; ++i)
                            for (int j = 0; j < n; ++j) {
                                const auto& gj = GJ(a, i, j);
                                double dgam = 0.0;
                                for (int m = 0; m < n; ++m) dgam += gj.d(m) * J[c * n + m];
                                s += dgam * v[i] * v[j] + 2.0 * gj.value() * v[i] * Jp[c * n + j];
                            }
                        dy[2 * n + jac + c * n + a] = -s;
                    }
                }
            }
            const double* A = y.data() + 2 * n + 2 * jac;
            for (int c = 0; c < k; ++c)
                for (int a = 0; a < n; ++a) {
                    double s = 0.0;
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j) s += gam(a, i, j) * v[i] * A[c * n + j];
                    dy[2 * n + 2 * jac + c * n + a] = -s;
                }
        } catch (const DomainExitError&) {
            dy.setConstant(std::numeric_limits<double>::quiet_NaN());
        }
    };
    return integrate_ode(p);
}

void check_dims(const MetricChart& chart, const VecN& a, const char* what)
{
    if (a.size() != chart.dim)
        throw PreconditionError(std::string(what) + ": expected " + std::to_string(chart.dim) + " components, got " +
                                std::to_string(a.size()));
}

MatN jacobian_block(const State& y, int n)
{
    MatN J(n, n);
    for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a) J(a, c) = y[2 * n + c * n + a];
    return J;
}

} // namespace

Christoffel christoffel_at(const MetricChart& chart, const VecN& x)
{
    check_dims(chart, x, "christoffel_at");
    chart.require(x, "christoffel_at");
    return christoffel_values(chart, x);
}

ChristoffelJet christoffel_jet(const MetricChart& chart, const VecN& x)
{
    check_dims(chart, x, "christoffel_jet");
    chart.require(x, "christoffel_jet");
    return christoffel_jet_values(chart, x);
}

Christoffel christoffel_embedded(const SurfacePatch& s, double u, double v)
{
    auto geo = geometry_at(s, u, v);
    Mat2 g;
    g << geo.ru.dot(geo.ru), geo.ru.dot(geo.rv), geo.rv.dot(geo.ru), geo.rv.dot(geo.rv);
    const Vec3 rij[2][2] = {{geo.ruu, geo.ruv}, {geo.ruv, geo.rvv}};
    Christoffel c;
    c.dim = 2;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Vec2 b(geo.ru.dot(rij[i][j]), geo.rv.dot(rij[i][j]));
            Vec2 gam = g.ldlt().solve(b);
            for (int k = 0; k < 2; ++k) c.c[(k * 3 + i) * 3 + j] = gam[k];
        }
    return c;
}

GeodesicPath geodesic_flow(const MetricChart& chart, const VecN& x0, const VecN& v0, double T,
                           const GeodesicOptions& opt)
{
    check_dims(chart, x0, "geodesic");
    check_dims(chart, v0, "geodesic");
    chart.require(x0, "geodesic start");
    if (!(T >= 0.0) || !std::isfinite(T)) throw PreconditionError("geodesic: span must be finite and >= 0");
    const MatN g0 = chart.metric(x0);
    const double s0 = v0.dot(g0 * v0);
    if (!(s0 > 0.0)) throw PreconditionError("geodesic: initial velocity must be non-zero");
    const int n = chart.dim;

    std::vector<double> stops = opt.stops;
    for (int i = 1; i < opt.samples; ++i) stops.push_back(T * i / opt.samples);

    GeodesicPath path;
    path.dim = n;
    path.speed = std::sqrt(s0);
    path.solution = integrate_flow(chart, x0, v0, T, stops, opt.rtol, opt.atol, false, nullptr);
    const auto& sol = path.solution;
    for (std::size_t i = 0; i < sol.t.size(); ++i) {
        path.t.push_back(sol.t[i]);
        path.x.push_back(vec(sol.y[i], 0, n));
        path.v.push_back(vec(sol.y[i], n, n));
        const VecN& x = path.x.back();
        const VecN& v = path.v.back();
        double s = v.dot(chart.metric(x) * v);
        path.max_speed_drift = std::max(path.max_speed_drift, std::abs(s - s0) / s0);
    }
    path.length = path.speed * sol.t_end();
    if (sol.ok()) {
        path.end = PathEnd::completed;
    } else {
        path.end = PathEnd::domain_exit;
        std::ostringstream os;
        os << "geodesic left chart '" << chart.name << "' at t = " << sol.t_end() << " near "
           << point_string(path.x.back()) << " (" << sol.message << ")";
        path.message = os.str();
    }
    return path;
}

GeodesicPath geodesic_trace(const MetricChart& chart, const VecN& x0, const VecN& v0, double L,
                            const GeodesicOptions& opt)
{
    check_dims(chart, x0, "geodesic_trace");
    check_dims(chart, v0, "geodesic_trace");
    chart.require(x0, "geodesic_trace start");
    const double s = std::sqrt(v0.dot(chart.metric(x0) * v0));
    if (!(s > 0.0)) throw PreconditionError("geodesic_trace: initial direction must be non-zero");
    return geodesic_flow(chart, x0, v0 / s, L, opt);
}

VecN exp_map(const MetricChart& chart, const VecN& P, const VecN& u)
{
    check_dims(chart, P, "exp_map");
    check_dims(chart, u, "exp_map");
    chart.require(P, "exp_map");
    if (u.norm() == 0.0) return P;
    auto path = geodesic_flow(chart, P, u, 1.0);
    if (path.end != PathEnd::completed) throw DomainExitError("exp_map: " + path.message);
    return path.x.back();
}

ExpJacobian exp_map_jacobian(const MetricChart& chart, const VecN& P, const VecN& u)
{
    check_dims(chart, P, "exp_map");
    check_dims(chart, u, "exp_map");
    chart.require(P, "exp_map");
    const int n = chart.dim;
    ExpJacobian r;
    if (u.norm() == 0.0) {
        r.point = P;
        r.velocity = u;
        r.jacobian = MatN::Identity(n, n);
        return r;
    }
    auto sol = integrate_flow(chart, P, u, 1.0, {}, 1e-11, 1e-13, true, nullptr);
    if (!sol.ok())
        throw DomainExitError("exp_map: geodesic left chart '" + chart.name + "' near " +
                              point_string(vec(sol.final_state(), 0, n)));
    r.point = vec(sol.final_state(), 0, n);
    r.velocity = vec(sol.final_state(), n, n);
    r.jacobian = jacobian_block(sol.final_state(), n);
    return r;
}

VecN ChartCurve::start(const MetricChart& chart) const
{
    if (pieces.empty()) throw PreconditionError("empty path");
    const auto& p = pieces.front();
    if (p.geodesic) return p.x0;
    VecN x(chart.dim), dx(chart.dim);
    p.eval(p.t0, x, dx);
    return x;
}

VecN ChartCurve::end(const MetricChart& chart) const
{
    if (pieces.empty()) throw PreconditionError("empty path");
    const auto& p = pieces.back();
    if (p.geodesic) return geodesic_flow(chart, p.x0, p.v0, p.t1).x.back();
    VecN x(chart.dim), dx(chart.dim);
    p.eval(p.t1, x, dx);
    return x;
}

ChartCurve coordinate_polygon(const std::vector<VecN>& vertices, bool closed)
{
    if (vertices.size() < 2) throw PreconditionError("coordinate_polygon: need at least two vertices");
    ChartCurve c;
    const std::size_t sides = closed ? vertices.size() : vertices.size() - 1;
    for (std::size_t i = 0; i < sides; ++i) {
        VecN a = vertices[i], b = vertices[(i + 1) % vertices.size()];
        ChartPiece p;
        p.eval = [a, b](double t, VecN& x, VecN& dx) {
            x = a + t * (b - a);
            dx = b - a;
        };
        c.pieces.push_back(std::move(p));
    }
    return c;
}

ChartCurve geodesic_piece(const VecN& x0, const VecN& v0, double T)
{
    ChartPiece p;
    p.geodesic = true;
    p.x0 = x0;
    p.v0 = v0;
    p.t0 = 0.0;
    p.t1 = T;
    ChartCurve c;
    c.pieces.push_back(std::move(p));
    return c;
}

namespace {

// Barycentric interpolation through Chebyshev points of the second kind on [0, 1].
struct ChebyshevSide {
    std::vector<double> s;
    std::vector<double> w;
    std::vector<VecN> x, dx;

    void eval(double t, VecN& xo, VecN& dxo) const
    {
        const int n = static_cast<int>(s.size());
        for (int j = 0; j < n; ++j)
            if (t == s[j]) {
                xo = x[j];
                dxo = dx[j];
                return;
            }
        double den = 0.0;
        xo = VecN::Zero(x[0].size());
        dxo = VecN::Zero(x[0].size());
        for (int j = 0; j < n; ++j) {
            double c = w[j] / (t - s[j]);
            den += c;
            xo += c * x[j];
            dxo += c * dx[j];
        }
        xo /= den;
        dxo /= den;
    }
};

} // namespace

ChartCurve exp_image_polygon(const MetricChart& chart, const VecN& P, const std::vector<VecN>& tangent_vertices,
                             int nodes)
{
    if (tangent_vertices.size() < 2) throw PreconditionError("exp_image_polygon: need at least two vertices");
    if (nodes < 2) throw PreconditionError("exp_image_polygon: need at least two nodes");
    const std::size_t sides = tangent_vertices.size();
    std::vector<std::shared_ptr<ChebyshevSide>> side(sides);
    for (std::size_t k = 0; k < sides; ++k) {
        side[k] = std::make_shared<ChebyshevSide>();
        for (int j = 0; j <= nodes; ++j) {
            side[k]->s.push_back(0.5 * (1.0 - std::cos(pi * j / nodes)));
            double w = (j % 2 ? -1.0 : 1.0) * ((j == 0 || j == nodes) ? 0.5 : 1.0);
            side[k]->w.push_back(w);
        }
        side[k]->x.resize(nodes + 1);
        side[k]->dx.resize(nodes + 1);
    }
    const int total = static_cast<int>(sides) * (nodes + 1);
    for_each_index(total, [&](int idx) {
        const std::size_t k = idx / (nodes + 1);
        const int j = idx % (nodes + 1);
        const VecN& a = tangent_vertices[k];
        const VecN& b = tangent_vertices[(k + 1) % sides];
        VecN w = a + side[k]->s[j] * (b - a);
        auto e = exp_map_jacobian(chart, P, w);
        side[k]->x[j] = e.point;
        side[k]->dx[j] = e.jacobian * (b - a);
    });
    ChartCurve c;
    for (std::size_t k = 0; k < sides; ++k) {
        ChartPiece p;
        auto sk = side[k];
        p.eval = [sk](double t, VecN& x, VecN& dx) { sk->eval(t, x, dx); };
        c.pieces.push_back(std::move(p));
    }
    return c;
}

namespace {

MatN unpack(const State& y, int offset, int n, int k)
{
    MatN A(n, k);
    for (int c = 0; c < k; ++c)
        for (int i = 0; i < n; ++i) A(i, c) = y[offset + c * n + i];
    return A;
}

} // namespace

TransportResult parallel_transport(const MetricChart& chart, const ChartCurve& path, const MatN& a0, double rtol)
{
    const int n = chart.dim;
    const int k = static_cast<int>(a0.cols());
    if (a0.rows() != n || k < 1) throw PreconditionError("parallel_transport: vectors must have chart dimension");
    if (path.pieces.empty()) throw PreconditionError("parallel_transport: empty path");
    TransportResult res;
    MatN A = a0;
    double offset = 0.0;
    for (std::size_t pi_ = 0; pi_ < path.pieces.size(); ++pi_) {
        const ChartPiece& piece = path.pieces[pi_];
        OdeSolution sol;
        if (piece.geodesic) {
            chart.require(piece.x0, "parallel_transport");
            sol = integrate_flow(chart, piece.x0, piece.v0, piece.t1, {}, rtol, rtol * 1e-2, false, &A);
        } else {
            OdeProblem p;
            p.y0 = State(n * k);
            for (int c = 0; c < k; ++c)
                for (int i = 0; i < n; ++i) p.y0[c * n + i] = A(i, c);
            p.t0 = piece.t0;
            p.t1 = piece.t1;
            p.rtol = rtol;
            p.atol = rtol * 1e-2;
            const auto& eval = piece.eval;
            p.rhs = [&chart, &eval, n, k](double t, const State& y, State& dy) {
                VecN x(n), dx(n);
                eval(t, x, dx);
                if (!chart.contains(x)) {
                    dy.setConstant(std::numeric_limits<double>::quiet_NaN());
                    return;
                }
                Christoffel G;
                try {
                    G = christoffel_values(chart, x);
                } catch (const DomainExitError&) {
                    dy.setConstant(std::numeric_limits<double>::quiet_NaN());
                    return;
                }
                for (int c = 0; c < k; ++c)
                    for (int a = 0; a < n; ++a) {
                        double s = 0.0;
                        for (int i = 0; i < n; ++i)
                            for (int j = 0; j < n; ++j) s += G(a, i, j) * dx[i] * y[c * n + j];
                        dy[c * n + a] = -s;
                    }
            };
            sol = integrate_ode(p);
        }
        if (!sol.ok()) {
            throw DomainExitError("parallel_transport: path leaves chart '" + chart.name + "' (" + sol.message + ")");
        }
        const int a_off = piece.geodesic ? 2 * n : 0;
        for (std::size_t i = (pi_ == 0 ? 0 : 1); i < sol.t.size(); ++i) {
            VecN x;
            if (piece.geodesic) {
                x = vec(sol.y[i], 0, n);
            } else {
                VecN dx(n);
                x = VecN(n);
                piece.eval(sol.t[i], x, dx);
            }
            res.t.push_back(offset + sol.t[i] - sol.t.front());
            res.x.push_back(x);
            res.a.push_back(unpack(sol.y[i], a_off, n, k));
        }
        A = res.a.back();
        offset = res.t.back();
    }
    const MatN G0 = a0.transpose() * chart.metric(res.x.front()) * a0;
    for (std::size_t i = 0; i < res.x.size(); ++i) {
        MatN G = res.a[i].transpose() * chart.metric(res.x[i]) * res.a[i];
        res.max_gram_drift = std::max(res.max_gram_drift, (G - G0).cwiseAbs().maxCoeff());
    }
    res.final = A;
    return res;
}

TransportResult parallel_transport(const MetricChart& chart, const GeodesicPath& path, const MatN& a0, double rtol)
{
    if (path.x.empty()) throw PreconditionError("parallel_transport: empty geodesic");
    return parallel_transport(chart, geodesic_piece(path.x.front(), path.v.front(), path.t.back()), a0, rtol);
}

Holonomy holonomy(const MetricChart& chart, const ChartCurve& loop, double rtol)
{
    const int n = chart.dim;
    const VecN start = loop.start(chart);
    chart.require(start, "holonomy");
    Holonomy h;
    h.frame = orthonormal_frame(chart.metric(start));
    auto tr = parallel_transport(chart, loop, h.frame, rtol);
    VecN gap = tr.x.back() - start;
    for (int i = 0; i < n; ++i)
        if (chart.period[i] > 0) gap[i] -= std::round(gap[i] / chart.period[i]) * chart.period[i];
    if (gap.cwiseAbs().maxCoeff() > 1e-9) {
        std::ostringstream os;
        os << "holonomy: loop is not closed (gap " << gap.cwiseAbs().maxCoeff() << ")";
        throw PreconditionError(os.str());
    }
    const MatN Einv = h.frame.inverse();
    h.orthonormal = Einv * tr.final;
    h.coordinates = tr.final * Einv;
    h.orthogonality_residual =
        (h.orthonormal.transpose() * h.orthonormal - MatN::Identity(n, n)).cwiseAbs().maxCoeff();
    if (n == 2) h.angle = std::atan2(h.orthonormal(1, 0), h.orthonormal(0, 0));
    return h;
}

namespace {

struct Fan {
    std::vector<double> stops;
    // points[stop][direction]
    std::vector<std::vector<VecN>> points;
};

Fan trace_fan(const MetricChart& chart, const VecN& P, const MatN& plane, int M, std::vector<double> stops,
              Exec exec)
{
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
    const double T = stops.back();
    Fan fan;
    fan.stops = stops;
    fan.points.assign(stops.size(), std::vector<VecN>(M));
    for_each_index(
        M,
        [&](int j) {
            const double phi = 2.0 * pi * j / M;
            VecN v0 = std::cos(phi) * plane.col(0) + std::sin(phi) * plane.col(1);
            auto sol = integrate_flow(chart, P, v0, T, stops, 1e-12, 1e-14, false, nullptr);
            if (!sol.ok()) {
                std::ostringstream os;
                os << "geodesic circle: direction " << phi << " leaves chart '" << chart.name << "' before radius "
                   << T;
                throw DomainExitError(os.str());
            }
            for (std::size_t s = 0; s < stops.size(); ++s) {
                int idx = sol.index_at(stops[s]);
                fan.points[s][j] = vec(sol.y[idx], 0, chart.dim);
            }
        },
        exec);
    return fan;
}

std::size_t stop_index(const Fan& fan, double t)
{
    auto it = std::lower_bound(fan.stops.begin(), fan.stops.end(), t);
    return static_cast<std::size_t>(it - fan.stops.begin());
}

// Closed polygon through every `step`-th point; edges measured with the
// metric at the coordinate midpoint.
double polygon_length(const MetricChart& chart, const std::vector<VecN>& pts, int step)
{
    const int M = static_cast<int>(pts.size());
    double L = 0.0;
    for (int j = 0; j < M; j += step) {
        const VecN& a = pts[j];
        const VecN& b = pts[(j + step) % M];
        VecN d = b - a;
        VecN mid = 0.5 * (a + b);
        L += std::sqrt(d.dot(chart.metric(mid) * d));
    }
    return L;
}

Extrapolated fan_length(const MetricChart& chart, const std::vector<VecN>& pts)
{
    const int M = static_cast<int>(pts.size());
    ExtrapolationLadder lad;
    lad.order = 2;
    for (int step : {4, 2, 1}) {
        lad.steps.push_back(static_cast<double>(step) / M);
        lad.values.push_back(polygon_length(chart, pts, step));
    }
    return richardson(lad);
}

MatN circle_plane(const MetricChart& chart, const VecN& P, const CircleOptions& opt)
{
    MatN E = orthonormal_frame(chart.metric(P));
    if (!opt.plane) return E.leftCols(2);
    const MatN& pl = *opt.plane;
    if (pl.rows() != chart.dim || pl.cols() != 2)
        throw PreconditionError("geodesic circle: plane must be given by two tangent vectors");
    MatN G = pl.transpose() * chart.metric(P) * pl;
    if ((G - MatN::Identity(2, 2)).cwiseAbs().maxCoeff() > 1e-9)
        throw PreconditionError("geodesic circle: plane vectors must be g-orthonormal");
    return pl;
}

} // namespace

std::vector<GeodesicCircle> geodesic_circles(const MetricChart& chart, const VecN& P, const std::vector<double>& radii,
                                             const CircleOptions& opt)
{
    check_dims(chart, P, "geodesic_circle");
    chart.require(P, "geodesic_circle");
    if (radii.empty()) return {};
    if (opt.directions < 16 || opt.directions % 4 != 0)
        throw PreconditionError("geodesic circle: direction count must be a multiple of 4 and >= 16");
    for (double R : radii)
        if (!(R > 0.0) || !std::isfinite(R)) throw PreconditionError("geodesic circle: radius must be positive");
    const MatN plane = circle_plane(chart, P, opt);

    GaussLegendre gl;
    std::vector<double> stops;
    for (double R : radii) {
        stops.push_back(R);
        for (int i = 0; i < GaussLegendre::order; ++i) stops.push_back(0.5 * R * (1.0 + gl.nodes()[i]));
    }
    Fan fan = trace_fan(chart, P, plane, opt.directions, stops, opt.exec);

    std::vector<GeodesicCircle> out;
    for (double R : radii) {
        GeodesicCircle c;
        c.radius = R;
        auto L = fan_length(chart, fan.points[stop_index(fan, R)]);
        c.length = L.value;
        c.length_error = std::abs(L.error);
        for (int i = 0; i < GaussLegendre::order; ++i) {
            double rho = 0.5 * R * (1.0 + gl.nodes()[i]);
            auto Li = fan_length(chart, fan.points[stop_index(fan, rho)]);
            c.area += 0.5 * R * gl.weights()[i] * Li.value;
            c.area_error += 0.5 * R * gl.weights()[i] * std::abs(Li.error);
        }
        out.push_back(c);
    }
    return out;
}

GeodesicCircle geodesic_circle(const MetricChart& chart, const VecN& P, double R, const CircleOptions& opt)
{
    return geodesic_circles(chart, P, {R}, opt).front();
}

namespace {

std::vector<double> sphere_areas(const MetricChart& chart, const VecN& P, std::vector<double> radii, int polar_nodes,
                                 Exec exec)
{
    if (chart.dim != 3) throw PreconditionError("geodesic sphere: chart must be three-dimensional");
    if (polar_nodes < 2) throw PreconditionError("geodesic sphere: need at least two polar nodes");
    const int n = 3;
    const MatN E = orthonormal_frame(chart.metric(P));
    const int nphi = 2 * polar_nodes;
    std::vector<double> z(polar_nodes), wz(polar_nodes);
    gauss_legendre(polar_nodes, -1.0, 1.0, z.data(), wz.data());
    std::vector<double> stops = radii;
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
    const double T = stops.back();

    const int total = polar_nodes * nphi;
    std::vector<std::vector<double>> contrib(total, std::vector<double>(stops.size()));
    for_each_index(
        total,
        [&](int idx) {
            const int i = idx / nphi, j = idx % nphi;
            const double phi = 2.0 * pi * (j + 0.5) / nphi;
            const double ct = z[i], st = std::sqrt(1.0 - z[i] * z[i]);
            Eigen::Vector3d om(st * std::cos(phi), st * std::sin(phi), ct);
            Eigen::Vector3d xi1(-std::sin(phi), std::cos(phi), 0.0);
            Eigen::Vector3d xi2(ct * std::cos(phi), ct * std::sin(phi), -st);
            VecN v0 = E * VecN(om);
            auto sol = integrate_flow(chart, P, v0, T, stops, 1e-12, 1e-14, true, nullptr);
            if (!sol.ok()) throw DomainExitError("geodesic sphere: a direction leaves chart '" + chart.name + "'");
            MatN Xi(3, 2);
            Xi.col(0) = xi1;
            Xi.col(1) = xi2;
            for (std::size_t s = 0; s < stops.size(); ++s) {
                const State& y = sol.y[sol.index_at(stops[s])];
                MatN Y = jacobian_block(y, n) * E * Xi;
                MatN G = Y.transpose() * chart.metric(vec(y, 0, n)) * Y;
                contrib[idx][s] = wz[i] * (2.0 * pi / nphi) * std::sqrt(G.determinant());
            }
        },
        exec);
    std::vector<double> out;
    for (double R : radii) {
        std::size_t s = static_cast<std::size_t>(std::lower_bound(stops.begin(), stops.end(), R) - stops.begin());
        double a = 0.0;
        for (int idx = 0; idx < total; ++idx) a += contrib[idx][s];
        out.push_back(a);
    }
    return out;
}

} // namespace

double geodesic_sphere_area(const MetricChart& chart, const VecN& P, double R, int polar_nodes, Exec exec)
{
    check_dims(chart, P, "geodesic_sphere_area");
    chart.require(P, "geodesic_sphere_area");
    if (!(R > 0.0)) throw PreconditionError("geodesic sphere: radius must be positive");
    return sphere_areas(chart, P, {R}, polar_nodes, exec).front();
}

ScalarCurvatureEstimate scalar_curvature_estimate(const MetricChart& chart, const VecN& P,
                                                  const ScalarCurvatureOptions& opt)
{
    check_dims(chart, P, "scalar_curvature_estimate");
    chart.require(P, "scalar_curvature_estimate");
    if (!(opt.r0 > 0.0)) throw PreconditionError("scalar_curvature_estimate: r0 must be positive");
    const int n = chart.dim;
    const bool circle_route = n == 2 || opt.circle.plane.has_value();
    double r0 = opt.r0;
    for (int attempt = 0;; ++attempt) {
        std::vector<double> radii{r0, r0 / 2, r0 / 4};
        try {
            ScalarCurvatureEstimate est;
            est.radii = radii;
            ExtrapolationLadder lad, lad_disk;
            lad.order = lad_disk.order = 2;
            double noise = 0.0, noise_disk = 0.0;
            if (circle_route) {
                auto circles = geodesic_circles(chart, P, radii, opt.circle);
                for (const auto& c : circles) {
                    const double R = c.radius;
                    lad.steps.push_back(R);
                    lad.values.push_back(6.0 * (2.0 * pi * R - c.length) / (pi * R * R * R));
                    noise = std::max(noise, 6.0 * c.length_error / (pi * R * R * R));
                    lad_disk.steps.push_back(R);
                    lad_disk.values.push_back(24.0 * (pi * R * R - c.area) / (pi * R * R * R * R));
                    noise_disk = std::max(noise_disk, 24.0 * c.area_error / (pi * R * R * R * R));
                }
            } else {
                auto areas = sphere_areas(chart, P, radii, opt.sphere_polar_nodes, opt.circle.exec);
                const double Sn = unit_sphere_area(n), Vn = unit_ball_volume(n);
                for (std::size_t i = 0; i < radii.size(); ++i) {
                    const double R = radii[i];
                    lad.steps.push_back(R);
                    lad.values.push_back(6.0 * (Sn * R * R - areas[i]) / (Vn * std::pow(R, 4)));
                }
            }
            auto ex = richardson(lad);
            est.tau = ex.value;
            est.error = std::abs(ex.error) + noise;
            est.flagged = ex.non_monotone;
            est.rung_values = lad.values;
            if (circle_route) {
                auto exd = richardson(lad_disk);
                est.tau_disk = exd.value;
                est.error_disk = std::abs(exd.error) + noise_disk;
                est.disk_rung_values = lad_disk.values;
                est.flagged = est.flagged || exd.non_monotone;
                est.routes_agree = std::abs(est.tau - exd.value) <= est.error + *est.error_disk;
            }
            return est;
        } catch (const DomainExitError&) {
            if (attempt >= 6) throw;
            r0 *= 0.5;
        }
    }
}

DistanceResult geodesic_distance(const MetricChart& chart, const VecN& P, const VecN& Q, double tol)
{
    check_dims(chart, P, "geodesic_distance");
    check_dims(chart, Q, "geodesic_distance");
    chart.require(P, "geodesic_distance");
    chart.require(Q, "geodesic_distance");
    const int n = chart.dim;
    DistanceResult res;
    const MatN gP = chart.metric(P);
    // periodic coordinates: aim at the nearest copy of Q
    auto reduce = [&chart, n](VecN v) {
        for (int i = 0; i < n; ++i)
            if (chart.period[i] > 0) v[i] -= std::round(v[i] / chart.period[i]) * chart.period[i];
        return v;
    };
    const VecN d = reduce(Q - P);
    res.straight_length = quadrature(
        [&](double s) {
            VecN x = P + s * d;
            return chart.contains(x) ? std::sqrt(d.dot(chart.metric(x) * d)) : std::numeric_limits<double>::infinity();
        },
        0.0, 1.0, 1e-12);
    res.velocity = VecN::Zero(n);
    if (d.norm() == 0.0) return res;

    const double scale = 1.0 + Q.norm();
    VecN w = d;
    double best_miss = std::numeric_limits<double>::infinity();
    VecN best_w = w;
    ExpJacobian e;
    bool have = false;
    for (int iter = 0; iter < 64; ++iter) {
        // the straight-line guess may shoot out of the chart; shorten it
        for (int k = 0; !have; ++k) {
            try {
                e = exp_map_jacobian(chart, P, w);
                have = true;
            } catch (const DomainExitError&) {
                if (k >= 30) throw;
                w *= 0.5;
            }
        }
        VecN F = reduce(e.point - Q);
        const double miss = F.norm();
        if (miss < best_miss) {
            best_miss = miss;
            best_w = w;
        }
        res.iterations = iter;
        if (miss <= tol * scale) {
            res.velocity = w;
            res.miss = miss;
            res.distance = std::sqrt(w.dot(gP * w));
            return res;
        }
        VecN step = e.jacobian.fullPivLu().solve(F);
        double lam = 1.0;
        bool accepted = false;
        for (int k = 0; k < 30; ++k, lam *= 0.5) {
            VecN trial = w - lam * step;
            try {
                auto et = exp_map_jacobian(chart, P, trial);
                if (reduce(et.point - Q).norm() < miss || k == 29) {
                    w = trial;
                    e = et;
                    accepted = true;
                    break;
                }
            } catch (const DomainExitError&) {
            }
        }
        if (!accepted) break;
    }
    std::ostringstream os;
    os << "geodesic_distance: shooting did not converge; best miss " << best_miss;
    throw ConvergenceError(os.str(), std::sqrt(best_w.dot(gP * best_w)));
}

} // namespace curvatur
