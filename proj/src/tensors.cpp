#include "curvatur/tensors.hpp"

#include "curvatur/numkit/quadrature.hpp"
#include "curvatur/numkit/richardson.hpp"

#include <algorithm>
#include <cmath>

namespace curvatur {

VecN RiemannAt::apply(const VecN& u, const VecN& v, const VecN& w) const
{
    VecN out = VecN::Zero(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            for (int k = 0; k < dim; ++k)
                for (int l = 0; l < dim; ++l) out[i] += up[index(i, j, k, l)] * w[j] * u[k] * v[l];
    return out;
}

MatN RiemannAt::operator_matrix(const VecN& u, const VecN& v) const
{
    MatN m = MatN::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            for (int k = 0; k < dim; ++k)
                for (int l = 0; l < dim; ++l) m(i, j) += up[index(i, j, k, l)] * u[k] * v[l];
    return m;
}

double RiemannAt::max_abs() const
{
    double m = 0.0;
    for (double x : low) m = std::max(m, std::abs(x));
    return m;
}

RiemannAt riemann_at(const MetricChart& chart, const VecN& x)
{
    const int n = chart.dim;
    auto G = christoffel_jet(chart, x);
    RiemannAt r;
    r.dim = n;
    r.point = x;
    r.g = chart.metric(x);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double s = G(i, l, j).d(k) - G(i, k, j).d(l);
                    for (int m = 0; m < n; ++m)
                        s += G(i, k, m).value() * G(m, l, j).value() - G(i, l, m).value() * G(m, k, j).value();
                    r.up[RiemannAt::index(i, j, k, l)] = s;
                }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double s = 0.0;
                    for (int m = 0; m < n; ++m) s += r.g(i, m) * r.up[RiemannAt::index(m, j, k, l)];
                    r.low[RiemannAt::index(i, j, k, l)] = s;
                }
    return r;
}

double riemann_symmetry_residual(const RiemannAt& r)
{
    const int n = r.dim;
    double res = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    const double R = r.lowered(i, j, k, l);
                    res = std::max(res, std::abs(R + r.lowered(j, i, k, l)));
                    res = std::max(res, std::abs(R + r.lowered(i, j, l, k)));
                    res = std::max(res, std::abs(R - r.lowered(k, l, i, j)));
                    res = std::max(res, std::abs(r(i, j, k, l) + r(i, k, l, j) + r(i, l, j, k)));
                }
    return res / std::max(r.max_abs(), 1.0);
}

HolonomyOracle riemann_holonomy_oracle(const MetricChart& chart, const VecN& x, const VecN& u, const VecN& v,
                                       double h0)
{
    const int n = chart.dim;
    if (u.size() != n || v.size() != n || x.size() != n)
        throw PreconditionError("riemann_holonomy_oracle: dimension mismatch");
    chart.require(x, "riemann_holonomy_oracle");
    if (!(h0 > 0)) throw PreconditionError("riemann_holonomy_oracle: h0 must be positive");
    HolonomyOracle out;
    out.op = MatN::Zero(n, n);
    const MatN g = chart.metric(x);
    const double uu = u.dot(g * u), vv = v.dot(g * v), uv = u.dot(g * v);
    if (uu * vv - uv * uv <= 1e-24 * std::max(1.0, uu * vv)) return out; // dependent: zero by convention

    std::vector<MatN> samples;
    for (int k = 0; k < 3; ++k) {
        const double h = h0 / std::pow(2.0, k);
        out.steps.push_back(h);
        // the loops on (u, v) and (-u, -v) share R(u, v) while their odd
        // powers of h cancel in the mean
        MatN mean = MatN::Zero(n, n);
        for (double sgn : {1.0, -1.0}) {
            const VecN a = sgn * h * u, b = sgn * h * v;
            auto loop = exp_image_polygon(chart, x, {VecN::Zero(n), a, VecN(a + b), b});
            mean += 0.5 * holonomy(chart, loop, 1e-12).coordinates;
        }
        samples.push_back((MatN::Identity(n, n) - mean) / (h * h));
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            ExtrapolationLadder lad;
            lad.order = 2;
            lad.steps = out.steps;
            for (const auto& s : samples) lad.values.push_back(s(i, j));
            auto ex = richardson(lad);
            out.op(i, j) = ex.value;
            out.error = std::max(out.error, std::abs(ex.error));
            out.non_monotone = out.non_monotone || ex.non_monotone;
        }
    return out;
}

double sectional_at(const MetricChart& chart, const VecN& x, const VecN& u, const VecN& v)
{
    auto r = riemann_at(chart, x);
    const double uu = u.dot(r.g * u), vv = v.dot(r.g * v), uv = u.dot(r.g * v);
    const double den = uu * vv - uv * uv;
    if (!(den > 1e-14 * uu * vv)) throw PreconditionError("sectional_at: u and v must be linearly independent");
    return u.dot(r.g * r.apply(u, v, v)) / den;
}

RicciAt ricci_from(const RiemannAt& r)
{
    const int n = r.dim;
    RicciAt out;
    out.point = r.point;
    out.rho = MatN::Zero(n, n);
    // rho(u, v) = sum_i R(e_i, u)v . e_i, i.e. rho_lj = R^i_jil
    for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) out.rho(l, j) += r(i, j, i, l);
    out.op = r.g.inverse() * out.rho;
    out.tau = out.op.trace();
    return out;
}

RicciAt ricci_at(const MetricChart& chart, const VecN& x) { return ricci_from(riemann_at(chart, x)); }

RicciOracle ricci_volume_oracle(const MetricChart& chart, const VecN& P, double h0, int nodes)
{
    const int n = chart.dim;
    if (P.size() != n) throw PreconditionError("ricci_volume_oracle: dimension mismatch");
    chart.require(P, "ricci_volume_oracle");
    if (!(h0 > 0) || nodes < 2) throw PreconditionError("ricci_volume_oracle: bad ladder or node count");
    const MatN E = orthonormal_frame(chart.metric(P));

    // parallelepipeds M [-1/2, 1/2]^n centred at P: the unit cube, the cube
    // with one axis halved, and the cube sheared along each coordinate pair
    std::vector<MatN> boxes;
    boxes.push_back(MatN::Identity(n, n));
    for (int a = 0; a < n; ++a) {
        MatN M = MatN::Identity(n, n);
        M(a, a) = 0.5;
        boxes.push_back(M);
    }
    for (int a = 0; a < n; ++a)
        for (int c = a + 1; c < n; ++c) {
            MatN M = MatN::Identity(n, n);
            M(a, c) = 1.0;
            boxes.push_back(M);
        }
    const int unknowns = n * (n + 1) / 2;

    std::vector<double> s(nodes), w(nodes);
    gauss_legendre(nodes, -0.5, 0.5, s.data(), w.data());
    int npts = 1;
    for (int a = 0; a < n; ++a) npts *= nodes;

    RicciOracle out;
    for (int k = 0; k < 3; ++k) out.steps.push_back(h0 / std::pow(2.0, k));

    const int nb = static_cast<int>(boxes.size());
    std::vector<double> vol_factor(static_cast<std::size_t>(nb) * 3 * npts);
    for_each_index(nb * 3 * npts, [&](int idx) {
        const int b = idx / (3 * npts), k = (idx / npts) % 3, q = idx % npts;
        const double h = out.steps[k];
        VecN y(n);
        double weight = 1.0;
        int rem = q;
        for (int a = 0; a < n; ++a) {
            const int ia = rem % nodes;
            rem /= nodes;
            y[a] = s[ia];
            weight *= w[ia];
        }
        auto e = exp_map_jacobian(chart, P, E * (h * (boxes[b] * y)));
        const MatN J = e.jacobian * E;
        vol_factor[idx] = weight * std::sqrt(chart.metric(e.point).determinant()) * std::abs(J.determinant());
    });

    // V(exp hA) = h^n |A| (1 - h^2 tr(M^T rho M) / 72 + O(h^4)); odd orders
    // vanish on a centred box
    Eigen::MatrixXd A(nb, unknowns);
    Eigen::VectorXd rhs(nb);
    for (int b = 0; b < nb; ++b) {
        ExtrapolationLadder lad;
        lad.order = 2;
        lad.steps = out.steps;
        for (int k = 0; k < 3; ++k) {
            double integral = 0.0;
            for (int q = 0; q < npts; ++q) integral += vol_factor[(static_cast<std::size_t>(b) * 3 + k) * npts + q];
            const double h = out.steps[k];
            lad.values.push_back(6.0 * (1.0 - integral) / (h * h));
        }
        auto ex = richardson(lad);
        out.error = std::max(out.error, std::abs(ex.error));
        out.flagged = out.flagged || ex.non_monotone;
        rhs[b] = ex.value;
        const MatN& M = boxes[b];
        int col = 0;
        for (int a = 0; a < n; ++a)
            for (int c = a; c < n; ++c) {
                const double m = M.row(a).dot(M.row(c)) / 12.0;
                A(b, col++) = a == c ? m : 2.0 * m;
            }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    out.condition = sv[0] / sv[sv.size() - 1];
    out.flagged = out.flagged || out.condition > 1e8;
    Eigen::VectorXd sol = svd.solve(rhs);
    out.residual = (A * sol - rhs).cwiseAbs().maxCoeff();

    MatN rho_e(n, n);
    int col = 0;
    for (int a = 0; a < n; ++a)
        for (int c = a; c < n; ++c) {
            rho_e(a, c) = rho_e(c, a) = sol[col++];
        }
    const MatN Einv = E.inverse();
    out.rho = Einv.transpose() * rho_e * Einv;
    return out;
}

const char* to_string(FieldKind k)
{
    switch (k) {
    case FieldKind::scalar: return "scalar";
    case FieldKind::vector: return "vector";
    case FieldKind::covector: return "covector";
    case FieldKind::bilinear: return "bilinear";
    }
    return "?";
}

int component_count(FieldKind k, int dim)
{
    switch (k) {
    case FieldKind::scalar: return 1;
    case FieldKind::vector:
    case FieldKind::covector: return dim;
    case FieldKind::bilinear: return dim * dim;
    }
    return 0;
}

Eigen::VectorXd Field::values(const VecN& x) const
{
    auto j = jets<1>(x);
    Eigen::VectorXd v(count());
    for (int i = 0; i < count(); ++i) v[i] = j[i].value();
    return v;
}

namespace {

void check_chart(const MetricChart& chart, const Field& f)
{
    if (f.dim != chart.dim || (!f.chart.empty() && f.chart != chart.name))
        throw PreconditionError("field '" + f.name + "' belongs to chart '" + f.chart + "', not '" + chart.name + "'");
}

// nabla_u F from components, their coordinate partials d[j][c] and Christoffel symbols.
template <class T>
void nabla(FieldKind kind, int n, const std::array<T, 9>& c, const std::array<std::array<T, 9>, 3>& d,
           const std::array<T, 27>& G, const std::array<T, 3>& u, std::array<T, 9>& out)
{
    auto gam = [&G](int k, int i, int j) -> const T& { return G[(k * 3 + i) * 3 + j]; };
    for (auto& o : out) o = T(0.0);
    switch (kind) {
    case FieldKind::scalar:
        for (int j = 0; j < n; ++j) out[0] += d[j][0] * u[j];
        break;
    case FieldKind::vector:
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                T s = d[j][i];
                for (int k = 0; k < n; ++k) s += gam(i, j, k) * c[k];
                out[i] += s * u[j];
            }
        break;
    case FieldKind::covector:
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                T s = d[j][i];
                for (int k = 0; k < n; ++k) s -= gam(k, j, i) * c[k];
                out[i] += s * u[j];
            }
        break;
    case FieldKind::bilinear:
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int j = 0; j < n; ++j) {
                    T s = d[j][a * n + b];
                    for (int k = 0; k < n; ++k) s -= gam(k, j, a) * c[k * n + b] + gam(k, j, b) * c[a * n + k];
                    out[a * n + b] += s * u[j];
                }
        break;
    }
}

} // namespace

Field metric_field(const MetricChart& chart)
{
    Field f;
    f.kind = FieldKind::bilinear;
    f.dim = chart.dim;
    f.chart = chart.name;
    f.name = "g";
    const MetricChart c = chart;
    auto one = [c]<int K>(std::integral_constant<int, K>) {
        return [c](const VecN& x) -> Field::Components<K> {
            auto g = c.jets<K>(x);
            Field::Components<K> out;
            out.fill(ChartJet<K>(0.0));
            for (int i = 0; i < c.dim; ++i)
                for (int j = 0; j < c.dim; ++j) out[i * c.dim + j] = g[sym_index(i, j)];
            return out;
        };
    };
    std::get<0>(f.evaluators_) = one(std::integral_constant<int, 1>{});
    std::get<1>(f.evaluators_) = one(std::integral_constant<int, 2>{});
    return f;
}

Field commutator(const MetricChart& chart, const Field& u, const Field& v)
{
    check_chart(chart, u);
    check_chart(chart, v);
    if (u.kind != FieldKind::vector || v.kind != FieldKind::vector)
        throw PreconditionError("commutator: both fields must be vector fields");
    Field f;
    f.kind = FieldKind::vector;
    f.dim = chart.dim;
    f.chart = chart.name;
    f.name = "[" + u.name + ", " + v.name + "]";
    const int n = chart.dim;
    auto one = [u, v, n]<int K>(std::integral_constant<int, K>) {
        return [u, v, n](const VecN& x) -> Field::Components<K> {
            auto a = u.jets<K + 1>(x);
            auto b = v.jets<K + 1>(x);
            Field::Components<K> out;
            out.fill(ChartJet<K>(0.0));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    out[i] += truncate<K>(a[j]) * differentiate(b[i], j) - truncate<K>(b[j]) * differentiate(a[i], j);
            return out;
        };
    };
    std::get<0>(f.evaluators_) = one(std::integral_constant<int, 1>{});
    std::get<1>(f.evaluators_) = one(std::integral_constant<int, 2>{});
    return f;
}

Eigen::VectorXd covariant_derivative(const MetricChart& chart, const Field& f, const VecN& x, const VecN& u)
{
    check_chart(chart, f);
    if (u.size() != chart.dim) throw PreconditionError("covariant_derivative: direction has wrong dimension");
    const int n = chart.dim;
    auto G = christoffel_at(chart, x);
    auto j = f.jets<1>(x);
    std::array<double, 9> c{};
    std::array<std::array<double, 9>, 3> d{};
    for (int i = 0; i < f.count(); ++i) {
        c[i] = j[i].value();
        for (int m = 0; m < n; ++m) d[m][i] = j[i].d(m);
    }
    std::array<double, 3> uu{};
    for (int i = 0; i < n; ++i) uu[i] = u[i];
    std::array<double, 9> out{};
    nabla(f.kind, n, c, d, G.c, uu, out);
    Eigen::VectorXd r(f.count());
    for (int i = 0; i < f.count(); ++i) r[i] = out[i];
    return r;
}

Field covariant_derivative_field(const MetricChart& chart, const Field& f, const Field& u)
{
    check_chart(chart, f);
    check_chart(chart, u);
    if (u.kind != FieldKind::vector) throw PreconditionError("covariant_derivative: direction must be a vector field");
    Field out;
    out.kind = f.kind;
    out.dim = f.dim;
    out.chart = chart.name;
    out.name = "nabla_" + u.name + " " + f.name;
    const MetricChart c = chart;
    const int n = chart.dim;
    std::get<0>(out.evaluators_) = [c, f, u, n](const VecN& x) -> Field::Components<1> {
        using J1 = ChartJet<1>;
        auto fj = f.jets<2>(x);
        auto uj = u.jets<2>(x);
        auto G = christoffel_jet(c, x);
        std::array<J1, 9> comp;
        std::array<std::array<J1, 9>, 3> d;
        comp.fill(J1(0.0));
        for (auto& row : d) row.fill(J1(0.0));
        for (int i = 0; i < f.count(); ++i) {
            comp[i] = truncate<1>(fj[i]);
            for (int m = 0; m < n; ++m) d[m][i] = differentiate(fj[i], m);
        }
        std::array<J1, 3> uu{J1(0.0), J1(0.0), J1(0.0)};
        for (int i = 0; i < n; ++i) uu[i] = truncate<1>(uj[i]);
        Field::Components<1> r;
        nabla(f.kind, n, comp, d, G.c, uu, r);
        return r;
    };
    return out;
}

VecN covariant_derivative_embedded(const MetricChart& chart, const Field& v, const VecN& x, const VecN& u)
{
    check_chart(chart, v);
    if (!chart.surface) throw PreconditionError("covariant_derivative_embedded: chart is not a pullback chart");
    if (v.kind != FieldKind::vector) throw PreconditionError("covariant_derivative_embedded: needs a vector field");
    auto geo = geometry_at(*chart.surface, x[0], x[1]);
    auto j = v.jets<1>(x);
    Vec3 dV = Vec3::Zero();
    const Vec3 r[2] = {geo.ru, geo.rv};
    const Vec3 rij[2][2] = {{geo.ruu, geo.ruv}, {geo.ruv, geo.rvv}};
    for (int m = 0; m < 2; ++m)
        for (int i = 0; i < 2; ++i) dV += u[m] * (j[i].d(m) * r[i] + j[i].value() * rij[i][m]);
    Mat2 g;
    g << geo.ru.dot(geo.ru), geo.ru.dot(geo.rv), geo.rv.dot(geo.ru), geo.rv.dot(geo.rv);
    Vec2 b(geo.ru.dot(dV), geo.rv.dot(dV));
    Vec2 c = g.ldlt().solve(b);
    VecN out(2);
    out << c[0], c[1];
    return out;
}

Field exterior_derivative(const MetricChart& chart, const Field& phi)
{
    check_chart(chart, phi);
    if (phi.kind != FieldKind::covector) throw PreconditionError("exterior_derivative: needs a covector field");
    Field f;
    f.kind = FieldKind::bilinear;
    f.dim = chart.dim;
    f.chart = chart.name;
    f.name = "d" + phi.name;
    const int n = chart.dim;
    auto one = [phi, n]<int K>(std::integral_constant<int, K>) {
        return [phi, n](const VecN& x) -> Field::Components<K> {
            auto p = phi.jets<K + 1>(x);
            Field::Components<K> out;
            out.fill(ChartJet<K>(0.0));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) out[i * n + j] = differentiate(p[j], i) - differentiate(p[i], j);
            return out;
        };
    };
    std::get<0>(f.evaluators_) = one(std::integral_constant<int, 1>{});
    std::get<1>(f.evaluators_) = one(std::integral_constant<int, 2>{});
    return f;
}

MatN alt_covariant(const MetricChart& chart, const Field& phi, const VecN& x)
{
    check_chart(chart, phi);
    if (phi.kind != FieldKind::covector) throw PreconditionError("alt_covariant: needs a covector field");
    const int n = chart.dim;
    MatN nab(n, n); // nab(i, j) = (nabla_{e_i} phi)_j
    for (int i = 0; i < n; ++i) {
        VecN e = VecN::Zero(n);
        e[i] = 1.0;
        nab.row(i) = covariant_derivative(chart, phi, x, e).transpose();
    }
    return nab - nab.transpose();
}

IntegrabilityReport integrability_check(const MetricChart& chart, const Field& phi, const VecN& lo, const VecN& hi,
                                        int grid, double tol)
{
    check_chart(chart, phi);
    if (phi.kind != FieldKind::covector) throw PreconditionError("integrability_check: needs a covector field");
    const int n = chart.dim;
    if (lo.size() != n || hi.size() != n || grid < 1) throw PreconditionError("integrability_check: bad box");
    IntegrabilityReport rep;
    auto dphi = exterior_derivative(chart, phi);

    int total = 1;
    for (int a = 0; a < n; ++a) total *= grid;
    double scale = 0.0;
    for (int q = 0; q < total; ++q) {
        VecN x(n);
        int rem = q;
        for (int a = 0; a < n; ++a) {
            x[a] = lo[a] + (rem % grid + 0.5) * (hi[a] - lo[a]) / grid;
            rem /= grid;
        }
        rep.max_dphi = std::max(rep.max_dphi, dphi.values(x).cwiseAbs().maxCoeff());
        scale = std::max(scale, phi.values(x).cwiseAbs().maxCoeff());
    }

    auto line = [&](const VecN& a, const VecN& b) {
        const VecN d = b - a;
        return quadrature([&](double t) { return phi.values(VecN(a + t * d)).dot(d); }, 0.0, 1.0, 1e-13);
    };
    // rectangles in each coordinate plane: the full face and the four
    // quarter faces, at the mid-height of the remaining coordinate
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            VecN base = 0.5 * (lo + hi);
            std::vector<std::array<double, 4>> rects{{lo[a], hi[a], lo[b], hi[b]}};
            const double ma = 0.5 * (lo[a] + hi[a]), mb = 0.5 * (lo[b] + hi[b]);
            rects.push_back({lo[a], ma, lo[b], mb});
            rects.push_back({ma, hi[a], lo[b], mb});
            rects.push_back({lo[a], ma, mb, hi[b]});
            rects.push_back({ma, hi[a], mb, hi[b]});
            for (const auto& r : rects) {
                VecN c[4] = {base, base, base, base};
                c[0][a] = r[0], c[0][b] = r[2];
                c[1][a] = r[1], c[1][b] = r[2];
                c[2][a] = r[1], c[2][b] = r[3];
                c[3][a] = r[0], c[3][b] = r[3];
                double loop = 0.0;
                for (int k = 0; k < 4; ++k) loop += line(c[k], c[(k + 1) % 4]);
                rep.max_loop_integral = std::max(rep.max_loop_integral, std::abs(loop));
            }
        }
    const double ref = std::max(1.0, scale);
    rep.closed = rep.max_dphi <= tol * ref;
    rep.exact = rep.max_loop_integral <= tol * ref * (hi - lo).cwiseAbs().maxCoeff();
    rep.consistent = rep.closed == rep.exact;
    return rep;
}

BianchiResidual second_bianchi_residual(const MetricChart& chart, const VecN& x, double h)
{
    const int n = chart.dim;
    chart.require(x, "second_bianchi_residual");
    const RiemannAt R = riemann_at(chart, x);
    const auto G = christoffel_at(chart, x);
    std::array<std::array<double, 81>, 3> dR{};
    for (int m = 0; m < n; ++m) {
        VecN xp = x, xm = x;
        xp[m] += h;
        xm[m] -= h;
        auto Rp = riemann_at(chart, xp), Rm = riemann_at(chart, xm);
        for (int q = 0; q < 81; ++q) dR[m][q] = (Rp.up[q] - Rm.up[q]) / (2 * h);
    }
    auto idx = RiemannAt::index;
    auto nablaR = [&](int m, int i, int j, int k, int l) {
        double s = dR[m][idx(i, j, k, l)];
        for (int p = 0; p < n; ++p) {
            s += G(i, m, p) * R(p, j, k, l);
            s -= G(p, m, j) * R(i, p, k, l);
            s -= G(p, m, k) * R(i, j, p, l);
            s -= G(p, m, l) * R(i, j, k, p);
        }
        return s;
    };
    BianchiResidual out;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    for (int m = 0; m < n; ++m) {
                        double s = nablaR(m, i, j, k, l) + nablaR(k, i, j, l, m) + nablaR(l, i, j, m, k);
                        out.absolute = std::max(out.absolute, std::abs(s));
                    }
    for (double v : R.up) out.riemann_norm = std::max(out.riemann_norm, std::abs(v));
    out.relative = out.absolute / (out.riemann_norm + 1e-12);
    return out;
}

} // namespace curvatur
