#pragma once

#include "curvatur/curves.hpp"
#include "curvatur/expr.hpp"
#include "curvatur/intrinsic.hpp"
#include "curvatur/surface.hpp"

#include <complex>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace curvatur {

enum class GeometryKind { curve, surface, metric };
const char* to_string(GeometryKind k);

// Parsed geometry definition:
//   curve   <name> (t in [a,b]) = (<expr>, <expr>[, <expr>])
//   surface <name> (u,v in [a,b]x[c,d]) = (<expr>, <expr>, <expr>)
//   metric  <name> (x,y[,z] in [a,b]x[c,d][x[e,f]]) = [[...],[...][,[...]]]
// plus `param <name> = <number>` lines and `#` comments.
struct GeometrySpec {
    GeometryKind kind = GeometryKind::surface;
    std::string name;
    std::vector<std::string> coords;
    std::vector<ExprPtr> lo, hi; // bounds, constant expressions
    std::map<std::string, double> params;
    // curve: 2 or 3 coordinates; surface: 3; metric: n x n row-major
    std::vector<ExprPtr> components;
};

bool equal(const GeometrySpec& a, const GeometrySpec& b);
// Canonical text that parses back to an equal spec.
std::string print(const GeometrySpec& s);

GeometrySpec parse_geometry(std::string_view text);

// Compiled geometry: exactly one of curve, surface, chart is set for curves,
// metrics; surfaces carry both the patch and its pullback chart.
struct Geometry {
    GeometryKind kind = GeometryKind::surface;
    std::string name;
    std::map<std::string, std::string> params; // as resolved, defaults included
    std::string source;                        // definition text when available
    std::shared_ptr<const ParamCurve> curve;
    std::shared_ptr<const SurfacePatch> surface;
    std::shared_ptr<const MetricChart> chart;
    std::vector<std::string> warnings;
};

// Binds parameters, checks free variables and compiles evaluators. A metric
// that is not positive definite at a domain sample gives a warning.
Geometry compile(const GeometrySpec& spec);
Geometry load_geometry(std::string_view text);

struct BuiltinInfo {
    std::string name;
    GeometryKind kind;
    std::vector<std::pair<std::string, std::string>> params; // name, default
    std::string summary;
};

const std::vector<BuiltinInfo>& builtin_catalog();

// Throws PreconditionError for an unknown name, an unknown parameter or an
// invalid value (R <= 0 and the like).
Geometry builtin(const std::string& name, const std::map<std::string, std::string>& params = {});

// Distance in the upper half-plane; throws PreconditionError unless both
// imaginary parts are positive.
double hyperbolic_distance(std::complex<double> z1, std::complex<double> z2);

// Isometry from the hyperboloid chart (x, y) with z = sqrt(1 + x^2 + y^2) to
// the upper half-plane, through the disk w = (x + iy) / (1 + z).
std::complex<double> hyperboloid_to_halfplane(double x, double y);

} // namespace curvatur
