#pragma once

#include "curvatur/intrinsic.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <string>
#include <tuple>

namespace curvatur {

// R(u,v)w = nabla_u nabla_v w - nabla_v nabla_u w - nabla_[u,v] w, so that the
// unit sphere has sectional curvature +1 and R(u,v)w = u(v.w) - v(u.w) there.
inline constexpr const char* kRiemannConvention =
    "R(u,v)w = nabla_u nabla_v w - nabla_v nabla_u w - nabla_[u,v] w; R(d_k,d_l)d_j = R^i_jkl d_i";

struct RiemannAt {
    int dim = 2;
    VecN point;
    MatN g;
    // R^i_jkl and R_ijkl at ((i * 3 + j) * 3 + k) * 3 + l.
    std::array<double, 81> up{};
    std::array<double, 81> low{};
    std::string convention = kRiemannConvention;

    static constexpr int index(int i, int j, int k, int l) { return ((i * 3 + j) * 3 + k) * 3 + l; }
    double operator()(int i, int j, int k, int l) const { return up[index(i, j, k, l)]; }
    double lowered(int i, int j, int k, int l) const { return low[index(i, j, k, l)]; }
    // R(u,v)w
    VecN apply(const VecN& u, const VecN& v, const VecN& w) const;
    // matrix of w -> R(u,v)w
    MatN operator_matrix(const VecN& u, const VecN& v) const;
    double max_abs() const;
};

RiemannAt riemann_at(const MetricChart& chart, const VecN& x);

// Largest residual of R_ijkl = -R_jikl = -R_ijlk = R_klij and the first
// Bianchi identity, divided by max(max |R_ijkl|, 1): relative for large
// curvature, absolute near flat charts where R is round-off.
double riemann_symmetry_residual(const RiemannAt& r);

struct HolonomyOracle {
    MatN op;        // R(u,v) acting on coordinate vectors
    double error = 0.0;
    bool non_monotone = false;
    std::vector<double> steps;
};

// Transport around exp_P of the parallelograms h(u, u + v, v) and
// -h(u, u + v, v), extract the h^2 term of the mean and extrapolate over
// h0, h0/2, h0/4.
HolonomyOracle riemann_holonomy_oracle(const MetricChart& chart, const VecN& x, const VecN& u, const VecN& v,
                                       double h0 = 0.1);

double sectional_at(const MetricChart& chart, const VecN& x, const VecN& u, const VecN& v);

struct RicciAt {
    VecN point;
    MatN rho;   // bilinear form rho_ij
    MatN op;    // g^-1 rho
    double tau = 0.0;
};

RicciAt ricci_at(const MetricChart& chart, const VecN& x);
// Same contraction from an already computed tensor.
RicciAt ricci_from(const RiemannAt& r);

struct RicciOracle {
    MatN rho;
    double error = 0.0;     // largest extrapolation error over the boxes
    double residual = 0.0;  // least-squares residual of the moment system
    double condition = 0.0; // condition number of the moment system
    bool flagged = false;
    std::vector<double> steps;
};

// Volumes of exp_P(hA) for parallelepipeds A centred at P in a g-orthonormal
// frame, extrapolated over h0, h0/2, h0/4 and solved for rho through the box
// moments.
RicciOracle ricci_volume_oracle(const MetricChart& chart, const VecN& P, double h0 = 0.2, int nodes = 4);

enum class FieldKind { scalar, vector, covector, bilinear };
const char* to_string(FieldKind k);
int component_count(FieldKind k, int dim);

// Tensor field on a chart with Taylor data of order 1..3 for its components
// (bilinear forms stored row-major).
class Field {
public:
    template <int K>
    using Components = std::array<ChartJet<K>, 9>;
    template <int K>
    using Evaluator = std::function<Components<K>(const VecN&)>;

    FieldKind kind = FieldKind::vector;
    int dim = 2;
    std::string chart;
    std::string name;

    template <int K>
    Components<K> jets(const VecN& x) const
    {
        static_assert(K >= 1 && K <= 3);
        const auto& fn = std::get<K - 1>(evaluators_);
        if (!fn) throw PreconditionError("field '" + name + "' has no Taylor data of order " + std::to_string(K));
        return fn(x);
    }
    Eigen::VectorXd values(const VecN& x) const;
    int count() const { return component_count(kind, dim); }

    std::tuple<Evaluator<1>, Evaluator<2>, Evaluator<3>> evaluators_;
};

// f(std::array<T, 3> x) -> std::array<T, count>, evaluated in chart coordinates.
template <class F>
Field make_field(const MetricChart& chart, FieldKind kind, std::string name, F f)
{
    Field fld;
    fld.kind = kind;
    fld.dim = chart.dim;
    fld.chart = chart.name;
    fld.name = std::move(name);
    const int dim = chart.dim;
    const int count = component_count(kind, dim);
    auto one = [f, dim, count]<int K>(std::integral_constant<int, K>) {
        return [f, dim, count](const VecN& x) -> Field::Components<K> {
            std::array<ChartJet<K>, 3> v{ChartJet<K>(0.0), ChartJet<K>(0.0), ChartJet<K>(0.0)};
            for (int i = 0; i < dim; ++i) v[i] = ChartJet<K>::variable(i, x[i]);
            auto r = f(v);
            Field::Components<K> out;
            out.fill(ChartJet<K>(0.0));
            for (int i = 0; i < count; ++i) out[i] = ChartJet<K>(r[i]);
            return out;
        };
    };
    std::get<0>(fld.evaluators_) = one(std::integral_constant<int, 1>{});
    std::get<1>(fld.evaluators_) = one(std::integral_constant<int, 2>{});
    std::get<2>(fld.evaluators_) = one(std::integral_constant<int, 3>{});
    return fld;
}

// The metric g as a bilinear field.
Field metric_field(const MetricChart& chart);

// [u, v]^i = u^j d_j v^i - v^j d_j u^i (orders 1 and 2).
Field commutator(const MetricChart& chart, const Field& u, const Field& v);

// (nabla_u F)(x) for F of any kind; the result has the kind of F
// (components as in Field::values).
Eigen::VectorXd covariant_derivative(const MetricChart& chart, const Field& f, const VecN& x, const VecN& u);
// nabla_u F as a field (order 1).
Field covariant_derivative_field(const MetricChart& chart, const Field& f, const Field& u);
// Embedded route for vector fields on pullback charts: tangential part of the
// ambient derivative of v along u, in the basis (r_u, r_v).
VecN covariant_derivative_embedded(const MetricChart& chart, const Field& v, const VecN& x, const VecN& u);

// (d phi)_ij = d_i phi_j - d_j phi_i (orders 1 and 2).
Field exterior_derivative(const MetricChart& chart, const Field& phi);
// Alt(nabla phi)_ij = (nabla_i phi)_j - (nabla_j phi)_i with Christoffel terms.
MatN alt_covariant(const MetricChart& chart, const Field& phi, const VecN& x);

struct IntegrabilityReport {
    double max_dphi = 0.0;          // over a grid of the box
    double max_loop_integral = 0.0; // over rectangles in coordinate planes
    bool closed = false;
    bool exact = false; // loop integrals vanish, i.e. line integrals are path independent
    bool consistent = false;
};

IntegrabilityReport integrability_check(const MetricChart& chart, const Field& phi, const VecN& lo, const VecN& hi,
                                        int grid = 6, double tol = 1e-8);

struct BianchiResidual {
    double absolute = 0.0;
    double riemann_norm = 0.0;
    double relative = 0.0; // absolute / (riemann_norm + 1e-12)
};

BianchiResidual second_bianchi_residual(const MetricChart& chart, const VecN& x, double h = 1e-3);

} // namespace curvatur
