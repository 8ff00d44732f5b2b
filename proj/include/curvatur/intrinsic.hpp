#pragma once

#include "curvatur/error.hpp"
#include "curvatur/numkit/jet.hpp"
#include "curvatur/numkit/linalg.hpp"
#include "curvatur/numkit/ode.hpp"
#include "curvatur/numkit/parallel.hpp"
#include "curvatur/surface.hpp"

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace curvatur {

// Metric jets are always carried in three variables; 2D charts leave the
// third one unused.
template <int K>
using ChartJet = Jet<3, K>;

// Symmetric metric packed as (00, 01, 02, 11, 12, 22).
template <int K>
using MetricJets = std::array<ChartJet<K>, 6>;

constexpr int sym_index(int i, int j)
{
    if (i > j) std::swap(i, j);
    return i == 0 ? j : (i == 1 ? 2 + j : 5);
}

enum class ChartOrigin { builtin, pullback, parsed };
const char* to_string(ChartOrigin o);

// Unit-ball volume V_n and unit-sphere area S_n for n = 2, 3.
double unit_ball_volume(int n);
double unit_sphere_area(int n);

// Coordinate box in R^n with a metric evaluator producing g_ij and its
// partials (order 1 for geodesics and transport, order 2 for curvature).
class MetricChart {
public:
    template <int K>
    using Evaluator = std::function<MetricJets<K>(const VecN&)>;

    int dim = 2;
    VecN lo, hi;
    // Period per coordinate, 0 when not periodic; periodic coordinates never
    // leave the domain.
    std::array<double, 3> period{0.0, 0.0, 0.0};
    std::string name;
    ChartOrigin origin = ChartOrigin::builtin;
    // Source patch of a pullback chart.
    std::shared_ptr<const SurfacePatch> surface;

    template <int K>
    MetricJets<K> jets(const VecN& x) const
    {
        static_assert(K == 1 || K == 2);
        return std::get<K - 1>(evaluators_)(x);
    }

    MatN metric(const VecN& x) const;
    bool contains(const VecN& x) const;
    // Throws DomainExitError naming the point when it lies outside.
    void require(const VecN& x, const char* what) const;

    std::tuple<Evaluator<1>, Evaluator<2>> evaluators_;
};

// Builds a chart from a generic callable f(std::array<T, 3> x) ->
// std::array<T, 6> returning the packed metric.
template <class F>
MetricChart make_metric(std::string name, int dim, VecN lo, VecN hi, F f,
                        std::array<double, 3> period = {0.0, 0.0, 0.0})
{
    MetricChart c;
    c.name = std::move(name);
    c.dim = dim;
    c.lo = std::move(lo);
    c.hi = std::move(hi);
    c.period = period;
    auto one = [f, dim]<int K>(std::integral_constant<int, K>) {
        return [f, dim](const VecN& x) -> MetricJets<K> {
            std::array<ChartJet<K>, 3> v{ChartJet<K>(0.0), ChartJet<K>(0.0), ChartJet<K>(0.0)};
            for (int i = 0; i < dim; ++i) v[i] = ChartJet<K>::variable(i, x[i]);
            auto g = f(v);
            MetricJets<K> out;
            for (int i = 0; i < 6; ++i) out[i] = ChartJet<K>(g[i]);
            return out;
        };
    };
    std::get<0>(c.evaluators_) = one(std::integral_constant<int, 1>{});
    std::get<1>(c.evaluators_) = one(std::integral_constant<int, 2>{});
    return c;
}

MetricChart pullback_metric(const SurfacePatch& s);

// Columns: g-orthonormal basis obtained from the coordinate basis by
// Gram-Schmidt (so it keeps the coordinate orientation).
MatN orthonormal_frame(const MatN& g);

// Gamma^k_ij stored at (k * 3 + i) * 3 + j.
struct Christoffel {
    int dim = 2;
    std::array<double, 27> c{};
    double operator()(int k, int i, int j) const { return c[(k * 3 + i) * 3 + j]; }
};

// Christoffel symbols with their first partials.
struct ChristoffelJet {
    int dim = 2;
    std::array<ChartJet<1>, 27> c{};
    const ChartJet<1>& operator()(int k, int i, int j) const { return c[(k * 3 + i) * 3 + j]; }
};

Christoffel christoffel_at(const MetricChart& chart, const VecN& x);
ChristoffelJet christoffel_jet(const MetricChart& chart, const VecN& x);
// Embedded route for a patch: tangential part of r_ij in the basis (r_u, r_v).
Christoffel christoffel_embedded(const SurfacePatch& s, double u, double v);

struct GeodesicOptions {
    double rtol = 1e-11;
    double atol = 1e-13;
    // Uniformly spaced output samples (in addition to the integrator's own
    // steps) when > 0.
    int samples = 0;
    // Extra times where the solution must be sampled exactly.
    std::vector<double> stops;
};

enum class PathEnd { completed, domain_exit };
const char* to_string(PathEnd e);

struct GeodesicPath {
    int dim = 2;
    std::vector<double> t;
    std::vector<VecN> x;
    std::vector<VecN> v;
    double length = 0.0;
    double speed = 0.0; // sqrt(g(v0, v0))
    double max_speed_drift = 0.0; // max |g(v, v) - g0| / g0
    PathEnd end = PathEnd::completed;
    std::string message;
    OdeSolution solution;

    // Index of the sample at exactly this time (a requested stop).
    int index_at(double time) const { return solution.index_at(time); }
};

// Geodesic of length L through x0 with unit-speed initial velocity along v0.
GeodesicPath geodesic_trace(const MetricChart& chart, const VecN& x0, const VecN& v0, double L,
                            const GeodesicOptions& opt = {});
// Geodesic with initial velocity v0 exactly, parameter span [0, T].
GeodesicPath geodesic_flow(const MetricChart& chart, const VecN& x0, const VecN& v0, double T,
                           const GeodesicOptions& opt = {});

struct ExpJacobian {
    VecN point;
    VecN velocity;
    // d exp_P(u) / du in coordinates.
    MatN jacobian;
};

VecN exp_map(const MetricChart& chart, const VecN& P, const VecN& u);
// Throws DomainExitError when the geodesic leaves the chart before t = 1.
ExpJacobian exp_map_jacobian(const MetricChart& chart, const VecN& P, const VecN& u);

// Piecewise smooth path in a chart. A piece is either an explicit curve
// x(t), x'(t) on [t0, t1] or a geodesic from x0 with velocity v0 on [0, t1].
struct ChartPiece {
    double t0 = 0.0;
    double t1 = 1.0;
    std::function<void(double, VecN&, VecN&)> eval;
    bool geodesic = false;
    VecN x0, v0;
};

struct ChartCurve {
    std::vector<ChartPiece> pieces;
    VecN start(const MetricChart& chart) const;
    VecN end(const MetricChart& chart) const;
};

// Straight coordinate segments; closed polygons return to the first vertex.
ChartCurve coordinate_polygon(const std::vector<VecN>& vertices, bool closed = true);
ChartCurve geodesic_piece(const VecN& x0, const VecN& v0, double T);
// Images under exp_P of the straight segments joining consecutive tangent
// vectors; each side is interpolated through Chebyshev nodes.
ChartCurve exp_image_polygon(const MetricChart& chart, const VecN& P, const std::vector<VecN>& tangent_vertices,
                             int nodes = 16);

struct TransportResult {
    std::vector<double> t; // concatenated parameter, pieces laid end to end
    std::vector<VecN> x;
    // Transported vectors at each sample, as columns.
    std::vector<MatN> a;
    MatN final;
    double max_gram_drift = 0.0; // max |G(t) - G(0)| of the transported Gram matrix
    PathEnd end = PathEnd::completed;
};

TransportResult parallel_transport(const MetricChart& chart, const ChartCurve& path, const MatN& a0,
                                   double rtol = 1e-11);
TransportResult parallel_transport(const MetricChart& chart, const GeodesicPath& path, const MatN& a0,
                                   double rtol = 1e-11);

struct Holonomy {
    MatN frame;       // g-orthonormal basis at the base point (columns)
    MatN orthonormal; // transport matrix in that basis
    MatN coordinates; // transport matrix acting on coordinate vectors
    double orthogonality_residual = 0.0;
    std::optional<double> angle; // n = 2: rotation angle in (-pi, pi]
};

// Loop must close within 1e-9 (modulo periods).
Holonomy holonomy(const MetricChart& chart, const ChartCurve& loop, double rtol = 1e-11);

struct CircleOptions {
    int directions = 512; // finest fan; Richardson uses M/4, M/2, M
    Exec exec = Exec::parallel;
    // Orthonormal pair spanning the plane of the circle (n = 3); defaults to
    // the first two frame vectors.
    std::optional<MatN> plane;
};

struct GeodesicCircle {
    double radius = 0.0;
    double length = 0.0;
    double length_error = 0.0;
    double area = 0.0;
    double area_error = 0.0;
};

GeodesicCircle geodesic_circle(const MetricChart& chart, const VecN& P, double R, const CircleOptions& opt = {});
std::vector<GeodesicCircle> geodesic_circles(const MetricChart& chart, const VecN& P, const std::vector<double>& radii,
                                             const CircleOptions& opt = {});

// Area of the geodesic sphere of radius R (n = 3), direction-grid quadrature.
double geodesic_sphere_area(const MetricChart& chart, const VecN& P, double R, int polar_nodes = 16,
                            Exec exec = Exec::parallel);

struct ScalarCurvatureOptions {
    double r0 = 0.2;
    CircleOptions circle;
    int sphere_polar_nodes = 16;
};

struct ScalarCurvatureEstimate {
    double tau = 0.0;
    double error = 0.0;
    // n = 2 disk route
    std::optional<double> tau_disk;
    std::optional<double> error_disk;
    bool routes_agree = true;
    bool flagged = false;
    std::vector<double> radii;
    std::vector<double> rung_values;
    std::vector<double> disk_rung_values;
};

ScalarCurvatureEstimate scalar_curvature_estimate(const MetricChart& chart, const VecN& P,
                                                  const ScalarCurvatureOptions& opt = {});

struct DistanceResult {
    double distance = 0.0;
    VecN velocity; // initial velocity with exp_P(velocity) = Q
    double miss = 0.0;
    int iterations = 0;
    double straight_length = 0.0; // g-length of the coordinate segment P Q
};

DistanceResult geodesic_distance(const MetricChart& chart, const VecN& P, const VecN& Q, double tol = 1e-12);

} // namespace curvatur
