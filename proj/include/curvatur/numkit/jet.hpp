#pragma once

// Truncated multivariate Taylor arithmetic ("jets").
//
// A Jet<NV, ORD> stores the Taylor coefficients of a scalar function of NV
// variables around a point, up to total degree ORD. Arithmetic and the
// elementary functions propagate those coefficients exactly (up to rounding),
// so every partial derivative up to order ORD is available without
// differencing. Mixed partials are symmetric by construction since one
// coefficient is stored per multi-index.

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>

namespace curvatur {

namespace jet_detail {

constexpr int binomial(int n, int k)
{
    if (k < 0 || k > n) return 0;
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return static_cast<int>(r);
}

constexpr int factorial(int n)
{
    int r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

// Monomials of NV variables with total degree <= ORD, graded order.
template <int NV, int ORD>
struct Layout {
    static constexpr int size = binomial(NV + ORD, ORD);
    using Exps = std::array<std::array<int, NV>, size>;

    static constexpr Exps make_exps()
    {
        Exps out{};
        int n = 0;
        std::array<int, NV> e{};
        for (int deg = 0; deg <= ORD; ++deg) {
            // enumerate all exponent tuples of total degree deg, lexicographic
            // descending in the first variable
            auto rec = [&](auto&& self, int var, int left) -> void {
                if (var == NV - 1) {
                    e[var] = left;
                    out[n++] = e;
                    return;
                }
                for (int k = left; k >= 0; --k) {
                    e[var] = k;
                    self(self, var + 1, left - k);
                }
            };
            if constexpr (NV > 0) rec(rec, 0, deg);
        }
        return out;
    }
    static constexpr Exps exps = make_exps();

    static constexpr int degree(int idx)
    {
        int d = 0;
        for (int v = 0; v < NV; ++v) d += exps[idx][v];
        return d;
    }

    static constexpr int index_of(const std::array<int, NV>& e)
    {
        for (int i = 0; i < size; ++i) {
            bool eq = true;
            for (int v = 0; v < NV; ++v) eq = eq && exps[i][v] == e[v];
            if (eq) return i;
        }
        return -1;
    }

    struct Triple {
        int a, b, c;
    };
    static constexpr int count_products()
    {
        int n = 0;
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j)
                if (degree(i) + degree(j) <= ORD) ++n;
        return n;
    }
    static constexpr int nproducts = count_products();
    static constexpr std::array<Triple, nproducts> make_products()
    {
        std::array<Triple, nproducts> out{};
        int n = 0;
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j)
                if (degree(i) + degree(j) <= ORD) {
                    std::array<int, NV> e{};
                    for (int v = 0; v < NV; ++v) e[v] = exps[i][v] + exps[j][v];
                    out[n++] = {i, j, index_of(e)};
                }
        return out;
    }
    static constexpr std::array<Triple, nproducts> products = make_products();

    // multi-index factorial alpha!
    static constexpr std::array<double, size> make_factorials()
    {
        std::array<double, size> out{};
        for (int i = 0; i < size; ++i) {
            double f = 1;
            for (int v = 0; v < NV; ++v) f *= factorial(exps[i][v]);
            out[i] = f;
        }
        return out;
    }
    static constexpr std::array<double, size> factorials = make_factorials();
};

} // namespace jet_detail

template <int NV, int ORD>
class Jet {
public:
    using Layout = jet_detail::Layout<NV, ORD>;
    static constexpr int nvars = NV;
    static constexpr int order = ORD;
    static constexpr int size = Layout::size;

    constexpr Jet() = default;
    constexpr Jet(double v) { c_[0] = v; } // NOLINT: scalars promote implicitly

    static Jet constant(double v) { return Jet(v); }

    // The coordinate function x_i seeded at value v.
    static Jet variable(int i, double v)
    {
        Jet j(v);
        if constexpr (ORD >= 1) {
            std::array<int, NV> e{};
            e[i] = 1;
            j.c_[Layout::index_of(e)] = 1.0;
        }
        return j;
    }

    double value() const { return c_[0]; }

    double coeff(int idx) const { return c_[idx]; }
    double& coeff(int idx) { return c_[idx]; }
    const std::array<double, size>& coeffs() const { return c_; }

    // Partial derivative for the multi-index given by exponent counts.
    double partial(const std::array<int, NV>& e) const
    {
        int idx = Layout::index_of(e);
        return idx < 0 ? 0.0 : c_[idx] * Layout::factorials[idx];
    }

    double d(int i) const
    {
        std::array<int, NV> e{};
        e[i] += 1;
        return partial(e);
    }
    double d(int i, int j) const
    {
        std::array<int, NV> e{};
        e[i] += 1;
        e[j] += 1;
        return partial(e);
    }
    double d(int i, int j, int k) const
    {
        std::array<int, NV> e{};
        e[i] += 1;
        e[j] += 1;
        e[k] += 1;
        return partial(e);
    }

    Jet& operator+=(const Jet& o)
    {
        for (int i = 0; i < size; ++i) c_[i] += o.c_[i];
        return *this;
    }
    Jet& operator-=(const Jet& o)
    {
        for (int i = 0; i < size; ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Jet& operator*=(double s)
    {
        for (auto& x : c_) x *= s;
        return *this;
    }
    Jet& operator*=(const Jet& o) { return *this = *this * o; }
    Jet& operator/=(const Jet& o) { return *this = *this / o; }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator-(Jet a)
    {
        for (auto& x : a.c_) x = -x;
        return a;
    }
    friend Jet operator+(const Jet& a) { return a; }
    friend Jet operator*(const Jet& a, const Jet& b)
    {
        Jet r(0.0);
        for (const auto& t : Layout::products) r.c_[t.c] += a.c_[t.a] * b.c_[t.b];
        return r;
    }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator+(Jet a, double s)
    {
        a.c_[0] += s;
        return a;
    }
    friend Jet operator+(double s, Jet a)
    {
        a.c_[0] += s;
        return a;
    }
    friend Jet operator-(Jet a, double s)
    {
        a.c_[0] -= s;
        return a;
    }
    friend Jet operator-(double s, const Jet& a) { return -a + s; }
    friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
    friend Jet operator/(Jet a, double s) { return a *= 1.0 / s; }
    friend Jet operator/(double s, const Jet& a) { return reciprocal(a) * s; }

    // Compose with a univariate function given its derivatives f^(k)(value)
    // for k = 0..ORD.
    friend Jet compose(const Jet& x, const std::array<double, ORD + 1>& derivs)
    {
        Jet delta = x;
        delta.c_[0] = 0.0;
        Jet r(derivs[ORD] / jet_detail::factorial(ORD));
        for (int k = ORD - 1; k >= 0; --k) {
            r = r * delta;
            r.c_[0] += derivs[k] / jet_detail::factorial(k);
        }
        return r;
    }

    friend Jet reciprocal(const Jet& x)
    {
        std::array<double, ORD + 1> d{};
        double inv = 1.0 / x.value();
        double p = inv;
        for (int k = 0; k <= ORD; ++k) {
            d[k] = ((k % 2) ? -1.0 : 1.0) * jet_detail::factorial(k) * p;
            p *= inv;
        }
        return compose(x, d);
    }

    friend Jet sqrt(const Jet& x)
    {
        std::array<double, ORD + 1> d{};
        double s = std::sqrt(x.value());
        // d^k/dx^k x^(1/2) = (1/2)(1/2-1)...(1/2-k+1) x^(1/2-k)
        double coef = 1.0;
        for (int k = 0; k <= ORD; ++k) {
            d[k] = coef * s / std::pow(x.value(), k);
            coef *= 0.5 - k;
        }
        return compose(x, d);
    }

    friend Jet pow(const Jet& x, double p)
    {
        std::array<double, ORD + 1> d{};
        double coef = 1.0;
        for (int k = 0; k <= ORD; ++k) {
            d[k] = coef * std::pow(x.value(), p - k);
            coef *= p - k;
        }
        return compose(x, d);
    }

    friend Jet pow(const Jet& x, int n)
    {
        if (n < 0) return reciprocal(pow(x, -n));
        Jet r(1.0), base = x;
        while (n) {
            if (n & 1) r = r * base;
            n >>= 1;
            if (n) base = base * base;
        }
        return r;
    }

    friend Jet exp(const Jet& x)
    {
        std::array<double, ORD + 1> d{};
        d.fill(std::exp(x.value()));
        return compose(x, d);
    }

    friend Jet log(const Jet& x)
    {
        std::array<double, ORD + 1> d{};
        d[0] = std::log(x.value());
        double inv = 1.0 / x.value();
        double p = inv;
        for (int k = 1; k <= ORD; ++k) {
            d[k] = ((k % 2) ? 1.0 : -1.0) * jet_detail::factorial(k - 1) * p;
            p *= inv;
        }
        return compose(x, d);
    }

    friend Jet sin(const Jet& x)
    {
        double s = std::sin(x.value()), c = std::cos(x.value());
        std::array<double, ORD + 1> d{};
        const double cyc[4] = {s, c, -s, -c};
        for (int k = 0; k <= ORD; ++k) d[k] = cyc[k % 4];
        return compose(x, d);
    }

    friend Jet cos(const Jet& x)
    {
        double s = std::sin(x.value()), c = std::cos(x.value());
        std::array<double, ORD + 1> d{};
        const double cyc[4] = {c, -s, -c, s};
        for (int k = 0; k <= ORD; ++k) d[k] = cyc[k % 4];
        return compose(x, d);
    }

    friend Jet tan(const Jet& x) { return sin(x) / cos(x); }

    friend Jet sinh(const Jet& x)
    {
        double s = std::sinh(x.value()), c = std::cosh(x.value());
        std::array<double, ORD + 1> d{};
        for (int k = 0; k <= ORD; ++k) d[k] = (k % 2) ? c : s;
        return compose(x, d);
    }

    friend Jet cosh(const Jet& x)
    {
        double s = std::sinh(x.value()), c = std::cosh(x.value());
        std::array<double, ORD + 1> d{};
        for (int k = 0; k <= ORD; ++k) d[k] = (k % 2) ? s : c;
        return compose(x, d);
    }

    friend Jet atan(const Jet& x)
    {
        // derivatives of atan: 1/(1+x^2), -2x/(1+x^2)^2, (6x^2-2)/(1+x^2)^3
        double v = x.value();
        double w = 1.0 / (1.0 + v * v);
        std::array<double, 4> all{std::atan(v), w, -2 * v * w * w, (6 * v * v - 2) * w * w * w};
        std::array<double, ORD + 1> d{};
        for (int k = 0; k <= ORD; ++k) d[k] = all[k];
        return compose(x, d);
    }

    friend std::ostream& operator<<(std::ostream& os, const Jet& j)
    {
        os << "Jet[";
        for (int i = 0; i < size; ++i) os << (i ? ", " : "") << j.c_[i];
        return os << "]";
    }

private:
    std::array<double, size> c_{};
};

// Partial derivative d/dx_i of a jet, as a jet of one lower order.
template <int NV, int ORD>
Jet<NV, ORD - 1> differentiate(const Jet<NV, ORD>& f, int i)
{
    using Lo = jet_detail::Layout<NV, ORD - 1>;
    using Hi = jet_detail::Layout<NV, ORD>;
    Jet<NV, ORD - 1> r;
    for (int k = 0; k < Lo::size; ++k) {
        auto e = Lo::exps[k];
        e[i] += 1;
        r.coeff(k) = f.coeff(Hi::index_of(e)) * e[i];
    }
    return r;
}

// Drop coefficients above degree LO.
template <int LO, int NV, int ORD>
Jet<NV, LO> truncate(const Jet<NV, ORD>& f)
{
    static_assert(LO <= ORD);
    Jet<NV, LO> r;
    for (int k = 0; k < Jet<NV, LO>::size; ++k) r.coeff(k) = f.coeff(k);
    return r;
}

// Re-express a jet in more variables; the extra variables do not appear.
template <int NV2, int NV, int ORD>
Jet<NV2, ORD> widen(const Jet<NV, ORD>& f)
{
    static_assert(NV2 >= NV);
    using Src = jet_detail::Layout<NV, ORD>;
    using Dst = jet_detail::Layout<NV2, ORD>;
    Jet<NV2, ORD> r;
    for (int k = 0; k < Src::size; ++k) {
        std::array<int, NV2> e{};
        for (int v = 0; v < NV; ++v) e[v] = Src::exps[k][v];
        r.coeff(Dst::index_of(e)) = f.coeff(k);
    }
    return r;
}

// Substitute jets for the variables of f (a truncated polynomial), i.e. the
// chain rule f(g_1(y), ..., g_NV(y)) to order ORD. f is expanded about the
// values of g.
template <int NV, int MV, int ORD>
Jet<MV, ORD> substitute(const Jet<NV, ORD>& f, const std::array<Jet<MV, ORD>, static_cast<std::size_t>(NV)>& g)
{
    using L = jet_detail::Layout<NV, ORD>;
    std::array<Jet<MV, ORD>, NV> delta = g;
    for (auto& dj : delta) dj.coeff(0) = 0.0;
    // powers delta_v^k
    std::array<std::array<Jet<MV, ORD>, ORD + 1>, NV> pw;
    for (int v = 0; v < NV; ++v) {
        pw[v][0] = Jet<MV, ORD>(1.0);
        for (int k = 1; k <= ORD; ++k) pw[v][k] = pw[v][k - 1] * delta[v];
    }
    Jet<MV, ORD> r(0.0);
    for (int k = 0; k < L::size; ++k) {
        if (f.coeff(k) == 0.0) continue;
        Jet<MV, ORD> term(f.coeff(k));
        for (int v = 0; v < NV; ++v)
            if (L::exps[k][v]) term = term * pw[v][L::exps[k][v]];
        r += term;
    }
    return r;
}

template <class J>
using JVec3 = std::array<J, 3>;

template <class J>
J dot(const JVec3<J>& a, const JVec3<J>& b)
{
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class J>
JVec3<J> cross(const JVec3<J>& a, const JVec3<J>& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

} // namespace curvatur
