#include "curvatur/curves.hpp"

#include "curvatur/error.hpp"
#include "curvatur/numkit/ode.hpp"
#include "curvatur/numkit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

namespace curvatur {

namespace {

Vec3 coeff_vec(const JVec3<CurveJet>& r, int k)
{
    // k-th derivative = k! * coefficient
    double f = jet_detail::factorial(k);
    return Vec3(r[0].coeff(k) * f, r[1].coeff(k) * f, r[2].coeff(k) * f);
}

double speed(const ParamCurve& c, double t) { return c.sample(t).d1.norm(); }

void require_regular(const ParamCurve& c, const ParamCurve::Sample& s, double t)
{
    if (!(s.d1.norm() > c.eps_reg)) {
        std::ostringstream os;
        os << "curve is not regular at t = " << t << " (|velocity| = " << s.d1.norm() << ")";
        throw RegularityError(os.str());
    }
}

// Septic Hermite interpolation through (y, y', y'', y''') at uniform nodes.
class HermiteTrack {
public:
    HermiteTrack(double s0, double h, std::vector<std::array<Vec3, 4>> data) : s0_(s0), h_(h), data_(std::move(data))
    {
        // coefficient map for c4..c7 from end conditions at tau = 1
        Eigen::Matrix4d m;
        for (int row = 0; row < 4; ++row)
            for (int k = 4; k < 8; ++k) {
                double f = 1.0;
                for (int j = 0; j < row; ++j) f *= (k - j);
                m(row, k - 4) = f;
            }
        inv_ = m.inverse();
    }

    JVec3<CurveJet> operator()(const CurveJet& s) const
    {
        const int nseg = static_cast<int>(data_.size()) - 1;
        int i = static_cast<int>(std::floor((s.value() - s0_) / h_));
        i = std::clamp(i, 0, nseg - 1);
        CurveJet tau = (s - (s0_ + i * h_)) / h_;
        JVec3<CurveJet> out;
        const auto& l = data_[i];
        const auto& r = data_[i + 1];
        for (int d = 0; d < 3; ++d) {
            double c[8];
            c[0] = l[0][d];
            c[1] = l[1][d] * h_;
            c[2] = l[2][d] * h_ * h_ / 2;
            c[3] = l[3][d] * h_ * h_ * h_ / 6;
            // residual end conditions after the known low-order part
            Eigen::Vector4d rhs;
            double hp = 1.0;
            for (int row = 0; row < 4; ++row) {
                double known = 0.0;
                for (int k = row; k < 4; ++k) {
                    double f = 1.0;
                    for (int j = 0; j < row; ++j) f *= (k - j);
                    known += f * c[k];
                }
                rhs[row] = r[row][d] * hp - known;
                hp *= h_;
            }
            Eigen::Vector4d hi = inv_ * rhs;
            for (int k = 0; k < 4; ++k) c[4 + k] = hi[k];
            CurveJet acc(c[7]);
            for (int k = 6; k >= 0; --k) acc = acc * tau + c[k];
            out[d] = acc;
        }
        return out;
    }

private:
    double s0_, h_;
    std::vector<std::array<Vec3, 4>> data_;
    Eigen::Matrix4d inv_;
};

} // namespace

ParamCurve::Sample ParamCurve::sample(double t) const
{
    auto r = eval(CurveJet::variable(0, t));
    return {coeff_vec(r, 0), coeff_vec(r, 1), coeff_vec(r, 2), coeff_vec(r, 3)};
}

ScalarFn constant_fn(double c)
{
    return [c](const CurveJet&) { return CurveJet(c); };
}

double arc_length(const ParamCurve& curve, double a, double b, double tol)
{
    if (a < curve.a - 1e-12 || b > curve.b + 1e-12 || a > b)
        throw PreconditionError("arc_length: interval outside the curve domain");
    return quadrature([&](double t) { return speed(curve, t); }, a, b, tol);
}

ParamCurve natural_reparametrize(const ParamCurve& curve)
{
    constexpr int table = 256;
    auto cum = std::make_shared<std::vector<double>>(table + 1, 0.0);
    const double dt = (curve.b - curve.a) / table;
    for (int i = 0; i <= table; ++i) {
        double t = curve.a + i * dt;
        require_regular(curve, curve.sample(t), t);
    }
    for (int i = 0; i < table; ++i) {
        double t0 = curve.a + i * dt;
        (*cum)[i + 1] = (*cum)[i] + quadrature([&](double t) { return speed(curve, t); }, t0, t0 + dt, 1e-14);
    }
    const double total = cum->back();

    ParamCurve out;
    out.dim = curve.dim;
    out.a = 0.0;
    out.b = total;
    out.eps_reg = curve.eps_reg;
    out.eps_bireg = curve.eps_bireg;
    out.eval = [curve, cum, dt, total](const CurveJet& s) -> JVec3<CurveJet> {
        const double target = std::clamp(s.value(), 0.0, total);
        // s(t) on the cached table plus one short quadrature
        auto length_to = [&](double t) {
            int i = std::clamp(static_cast<int>((t - curve.a) / dt), 0, static_cast<int>(cum->size()) - 2);
            double t0 = curve.a + i * dt;
            double part = t >= t0 ? quadrature([&](double x) { return speed(curve, x); }, t0, t, 1e-14)
                                  : -quadrature([&](double x) { return speed(curve, x); }, t, t0, 1e-14);
            return (*cum)[i] + part;
        };
        auto it = std::upper_bound(cum->begin(), cum->end(), target);
        int i = std::clamp(static_cast<int>(it - cum->begin()) - 1, 0, static_cast<int>(cum->size()) - 2);
        double frac = ((*cum)[i + 1] > (*cum)[i]) ? (target - (*cum)[i]) / ((*cum)[i + 1] - (*cum)[i]) : 0.0;
        double t = curve.a + (i + frac) * dt;
        for (int iter = 0; iter < 50; ++iter) {
            double step = (length_to(t) - target) / speed(curve, t);
            t = std::clamp(t - step, curve.a, curve.b);
            if (std::abs(step) < 1e-15 * (1.0 + std::abs(t))) break;
        }
        // invert the series s(t0 + d) - s(t0) = sum s_k d^k for d as a jet in s
        auto r = curve.eval(CurveJet::variable(0, t));
        JVec3<Jet<1, 2>> vel{differentiate(r[0], 0), differentiate(r[1], 0), differentiate(r[2], 0)};
        Jet<1, 2> sp = sqrt(dot(vel, vel));
        const double s1 = sp.coeff(0), s2 = sp.coeff(1) / 2.0, s3 = sp.coeff(2) / 3.0;
        CurveJet ds = s - target;
        CurveJet d = ds / s1;
        for (int iter = 0; iter < 3; ++iter) d = (ds - s2 * d * d - s3 * d * d * d) / s1;
        return curve.eval(d + t);
    };
    return out;
}

double plane_curvature(const ParamCurve& curve, double t)
{
    auto s = curve.sample(t);
    require_regular(curve, s, t);
    double sp = s.d1.head<2>().norm();
    return (s.d1.x() * s.d2.y() - s.d1.y() * s.d2.x()) / (sp * sp * sp);
}

SpaceCurvature space_curvature_torsion(const ParamCurve& curve, double t)
{
    auto s = curve.sample(t);
    require_regular(curve, s, t);
    Vec3 c = s.d1.cross(s.d2);
    double sp = s.d1.norm();
    SpaceCurvature out;
    out.k = c.norm() / (sp * sp * sp);
    if (c.norm() > curve.eps_bireg) out.torsion = c.dot(s.d3) / c.squaredNorm();
    return out;
}

FrenetFrame frenet_frame(const ParamCurve& curve, double t)
{
    auto s = curve.sample(t);
    require_regular(curve, s, t);
    Vec3 c = s.d1.cross(s.d2);
    if (!(c.norm() > curve.eps_bireg)) {
        std::ostringstream os;
        os << "curve is not biregular at t = " << t;
        throw RegularityError(os.str());
    }
    FrenetFrame f;
    f.point = s.p;
    f.v = s.d1.normalized();
    f.b = c.normalized();
    f.n = f.b.cross(f.v);
    auto ct = space_curvature_torsion(curve, t);
    f.k = ct.k;
    f.torsion = ct.torsion;
    return f;
}

ParamCurve reconstruct_plane_curve(const ScalarFn& kbar, double s_max, Vec2 origin, double heading, int nodes)
{
    if (!(s_max > 0.0)) throw PreconditionError("reconstruct_plane_curve: s_max must be positive");
    const double h = s_max / nodes;
    OdeProblem p;
    p.rhs = [&](double s, const State& y, State& dy) {
        dy[0] = std::cos(y[2]);
        dy[1] = std::sin(y[2]);
        dy[2] = kbar(CurveJet(s)).value();
    };
    p.y0 = State(3);
    p.y0 << origin.x(), origin.y(), heading;
    p.t0 = 0.0;
    p.t1 = s_max;
    p.rtol = 1e-13;
    p.atol = 1e-14;
    for (int i = 1; i < nodes; ++i) p.stops.push_back(i * h);
    auto sol = integrate_ode(p);
    if (!sol.ok()) throw ConvergenceError(std::string("reconstruct_plane_curve: ") + sol.message, sol.t_end());

    std::vector<std::array<Vec3, 4>> data(nodes + 1);
    for (int i = 0; i <= nodes; ++i) {
        double s = i == nodes ? s_max : i * h;
        int idx = sol.index_at(s);
        const State& y = sol.y[idx];
        auto kj = kbar(CurveJet::variable(0, s));
        double k = kj.value(), dk = kj.d(0);
        double c = std::cos(y[2]), sn = std::sin(y[2]);
        data[i] = {Vec3(y[0], y[1], 0.0), Vec3(c, sn, 0.0), Vec3(-k * sn, k * c, 0.0),
                   Vec3(-dk * sn - k * k * c, dk * c - k * k * sn, 0.0)};
    }
    ParamCurve out;
    out.dim = 2;
    out.a = 0.0;
    out.b = s_max;
    auto track = std::make_shared<HermiteTrack>(0.0, h, std::move(data));
    out.eval = [track](const CurveJet& s) { return (*track)(s); };
    return out;
}

ParamCurve reconstruct_space_curve(const ScalarFn& kbar, const ScalarFn& torsion, double s_max, const Vec3& origin,
                                   const Mat3& frame, int nodes)
{
    if (!(s_max > 0.0)) throw PreconditionError("reconstruct_space_curve: s_max must be positive");
    const double h = s_max / nodes;
    for (int i = 0; i <= 4 * nodes; ++i) {
        double s = s_max * i / (4.0 * nodes);
        if (!(kbar(CurveJet(s)).value() > 0.0)) {
            std::ostringstream os;
            os << "reconstruct_space_curve: curvature must be positive, fails at s = " << s;
            throw PreconditionError(os.str());
        }
    }
    auto rhs = [kbar, torsion](double s, const State& y, State& dy) {
        Vec3 v = y.segment<3>(3), n = y.segment<3>(6);
        double k = kbar(CurveJet(s)).value(), tw = torsion(CurveJet(s)).value();
        dy.segment<3>(0) = v;
        dy.segment<3>(3) = k * n;
        dy.segment<3>(6) = -k * v + tw * v.cross(n);
    };
    OdeProblem p;
    p.rhs = rhs;
    p.y0 = State(9);
    p.y0.segment<3>(0) = origin;
    p.y0.segment<3>(3) = frame.col(0);
    p.y0.segment<3>(6) = frame.col(1);
    p.t1 = s_max;
    p.rtol = 1e-13;
    p.atol = 1e-14;
    for (int i = 1; i < nodes; ++i) p.stops.push_back(i * h);
    auto sol = integrate_ode(p);
    if (!sol.ok()) throw ConvergenceError(std::string("reconstruct_space_curve: ") + sol.message, sol.t_end());

    auto states = std::make_shared<std::vector<State>>(nodes + 1);
    for (int i = 0; i <= nodes; ++i) (*states)[i] = sol.y[sol.index_at(i == nodes ? s_max : i * h)];

    // (x, v, n) by a short integration from the node below s; the derivatives
    // of x come from the Frenet equations, so torsion is not differentiated
    // out of interpolated positions
    ParamCurve out;
    out.dim = 3;
    out.a = 0.0;
    out.b = s_max;
    out.eval = [states, rhs, kbar, torsion, h, s_max, nodes](const CurveJet& s) -> JVec3<CurveJet> {
        const double s0 = std::clamp(s.value(), 0.0, s_max);
        const int i = std::clamp(static_cast<int>(std::floor(s0 / h)), 0, nodes - 1);
        State y = (*states)[i];
        const double si = i * h;
        if (s0 > si) {
            OdeProblem q;
            q.rhs = rhs;
            q.y0 = y;
            q.t0 = si;
            q.t1 = s0;
            q.rtol = 1e-13;
            q.atol = 1e-14;
            auto part = integrate_ode(q);
            if (!part.ok()) throw ConvergenceError(std::string("reconstruct_space_curve: ") + part.message, part.t_end());
            y = part.final_state();
        }
        const Vec3 x = y.segment<3>(0), v = y.segment<3>(3), n = y.segment<3>(6);
        const auto kj = kbar(CurveJet::variable(0, s0));
        const double k = kj.value(), dk = kj.d(0), tw = torsion(CurveJet(s0)).value();
        const Vec3 x2 = k * n, x3 = dk * n + k * (-k * v + tw * v.cross(n));
        const CurveJet d = s - s0;
        JVec3<CurveJet> r;
        for (int c = 0; c < 3; ++c) r[c] = x[c] + d * (v[c] + d * (x2[c] / 2 + d * (x3[c] / 6)));
        return r;
    };
    return out;
}

} // namespace curvatur
