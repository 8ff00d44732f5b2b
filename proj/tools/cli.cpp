#include "cli.hpp"

#include "curvatur/catalog.hpp"
#include "curvatur/error.hpp"
#include "curvatur/tensors.hpp"
#include "curvatur/verify.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

namespace curvatur {

using json = nlohmann::ordered_json;

namespace {

using std::numbers::pi;

// Bad command line or unusable input: exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string num(double v)
{
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool primitive(const json& j) { return !j.is_array() && !j.is_object(); }

void write_json(const json& j, std::string& out, int indent, int level)
{
    const std::string pad(static_cast<std::size_t>(indent * (level + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * level), ' ');
    switch (j.type()) {
    case json::value_t::number_float: out += num(j.get<double>()); return;
    case json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        const bool flat = indent == 0 || std::all_of(j.begin(), j.end(), primitive);
        out += '[';
        bool first = true;
        for (const auto& e : j) {
            if (!first) out += flat ? ", " : ",";
            if (!flat) out += '\n' + pad;
            write_json(e, out, indent, level + 1);
            first = false;
        }
        if (!flat) out += '\n' + close;
        out += ']';
        return;
    }
    case json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ',';
            if (indent > 0) out += '\n' + pad;
            out += json(it.key()).dump();
            out += indent > 0 ? ": " : ":";
            write_json(it.value(), out, indent, level + 1);
            first = false;
        }
        if (indent > 0) out += '\n' + close;
        out += '}';
        return;
    }
    default: out += j.dump(); return;
    }
}

json vec(const VecN& v)
{
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json mat(const Eigen::MatrixXd& m)
{
    json a = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        a.push_back(row);
    }
    return a;
}

// Comma-separated constant expressions (pi allowed).
VecN parse_numbers(const std::string& text, const std::string& what, int expect = -1)
{
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            auto e = parse_expr(part);
            ExprProgram prog(*e, {}, {{"pi", pi}});
            vals.push_back(prog(static_cast<const double*>(nullptr)));
        } catch (const PreconditionError& e) {
            throw UsageError(what + ": '" + part + "' is not a number: " + e.what());
        }
    }
    if (text.empty() || (!text.empty() && text.back() == ',')) throw UsageError(what + ": empty value in '" + text + "'");
    if (expect >= 0 && static_cast<int>(vals.size()) != expect)
        throw UsageError(what + " needs " + std::to_string(expect) + " comma-separated values, got " +
                         std::to_string(vals.size()));
    VecN v(static_cast<int>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<int>(i)] = vals[i];
    return v;
}

ScalarFn scalar_of(const std::string& text, const std::string& what)
{
    ExprPtr e;
    try {
        e = parse_expr(text);
    } catch (const ParseError& err) {
        throw UsageError(what + ": " + err.what());
    }
    for (const auto& v : free_variables(*e))
        if (v != "s" && v != "pi") throw UsageError(what + ": only s and pi may appear, found '" + v + "'");
    auto prog = std::make_shared<ExprProgram>(*e, std::vector<std::string>{"s"}, std::map<std::string, double>{{"pi", pi}});
    return [prog](const CurveJet& s) { return (*prog)(&s); };
}

struct Options {
    std::string builtin;
    std::vector<std::string> params;
    std::string file;
    std::string format = "json";
    std::string output;
    std::optional<int> threads;
    std::uint64_t seed = 7;

    std::string at, from, to, dir, vector_, u, v, z1, z2, region, polygon, radius;
    std::string length, eps, tol, r0;
    std::optional<int> samples, directions;
    bool open = false, oracle = false, shoot = false;
    std::string curvature, torsion;
    std::string suite = "all";
    std::string check_file;
};

struct Doc {
    json geometry;
    json inputs = json::object();
    json results = json::object();
    json tolerances = json::object();
    json error_estimates = json::object();
    json warnings = json::array();
    // CSV table when the command has a natural one
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    int exit_code = exit_ok;
};

struct Loaded {
    Geometry geo;
    json description;
};

Loaded load(const Options& o)
{
    if (o.builtin.empty() == o.file.empty()) throw UsageError("give exactly one geometry source: --builtin NAME or --file PATH");
    Loaded l;
    json d;
    if (!o.builtin.empty()) {
        std::map<std::string, std::string> p;
        for (const auto& kv : o.params) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos || eq == 0) throw UsageError("--param expects name=value, got '" + kv + "'");
            p[kv.substr(0, eq)] = kv.substr(eq + 1);
        }
        try {
            l.geo = builtin(o.builtin, p);
        } catch (const PreconditionError& e) {
            throw UsageError(e.what());
        }
        d["source"] = "builtin";
    } else {
        if (!o.params.empty()) throw UsageError("--param only applies to --builtin; use param lines in the file");
        std::ifstream in(o.file);
        if (!in) throw UsageError("cannot read geometry file '" + o.file + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            l.geo = load_geometry(ss.str());
        } catch (const PreconditionError& e) {
            throw UsageError(o.file + ": " + e.what());
        }
        d["source"] = "file";
        d["path"] = o.file;
    }
    const Geometry& g = l.geo;
    d["name"] = g.name;
    d["kind"] = to_string(g.kind);
    json params = json::object();
    for (const auto& [k, v] : g.params) params[k] = v;
    d["params"] = params;
    if (g.curve) d["domain"] = {{"t", json::array({g.curve->a, g.curve->b})}, {"dim", g.curve->dim}};
    if (g.surface) {
        const auto& b = g.surface->domain;
        d["domain"] = {{"u", json::array({b.u0, b.u1})},
                       {"v", json::array({b.v0, b.v1})},
                       {"period", json::array({g.surface->period[0], g.surface->period[1]})}};
        d["orientation"] = g.surface->orientation;
    }
    if (g.chart && !g.surface) {
        const auto& c = *g.chart;
        d["domain"] = {{"lo", vec(c.lo)}, {"hi", vec(c.hi)}, {"period", json::array()}};
        for (int i = 0; i < c.dim; ++i) d["domain"]["period"].push_back(c.period[i]);
        d["dim"] = c.dim;
    }
    l.description = d;
    return l;
}

void add_warnings(Doc& doc, const Geometry& g)
{
    for (const auto& w : g.warnings) doc.warnings.push_back(w);
}

const ParamCurve& need_curve(const Loaded& l)
{
    if (!l.geo.curve) throw UsageError("this command needs a curve, '" + l.geo.name + "' is a " + to_string(l.geo.kind));
    return *l.geo.curve;
}

const SurfacePatch& need_surface(const Loaded& l)
{
    if (!l.geo.surface)
        throw UsageError("this command needs a surface, '" + l.geo.name + "' is a " + to_string(l.geo.kind));
    return *l.geo.surface;
}

const MetricChart& need_chart(const Loaded& l)
{
    if (!l.geo.chart)
        throw UsageError("this command needs a surface or metric chart, '" + l.geo.name + "' is a " +
                         to_string(l.geo.kind));
    return *l.geo.chart;
}

VecN point_in(const MetricChart& c, const std::string& text, const char* what)
{
    if (text.empty()) throw UsageError(std::string(what) + " is required");
    VecN p = parse_numbers(text, what, c.dim);
    if (!c.contains(p)) {
        std::ostringstream os;
        os << what << " = (" << text << ") lies outside the chart domain";
        throw UsageError(os.str());
    }
    return p;
}

double bounded(const std::string& v, double dflt, double lo, double hi, const char* what)
{
    const double x = v.empty() ? dflt : parse_numbers(v, what, 1)[0];
    if (!(x >= lo && x <= hi)) {
        std::ostringstream os;
        os << what << " must lie in [" << lo << ", " << hi << "], got " << x;
        throw UsageError(os.str());
    }
    return x;
}

int bounded(std::optional<int> v, int dflt, int lo, int hi, const char* what)
{
    const int x = v.value_or(dflt);
    if (x < lo || x > hi)
        throw UsageError(std::string(what) + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                         "], got " + std::to_string(x));
    return x;
}

// ---------------------------------------------------------------- curves

Doc curve_analyze(const Options& o)
{
    Doc doc;
    auto l = load(o);
    const ParamCurve& c = need_curve(l);
    doc.geometry = l.description;
    add_warnings(doc, l.geo);
    VecN ts;
    if (!o.at.empty())
        ts = parse_numbers(o.at, "--at");
    else {
        const int n = bounded(o.samples, 5, 2, 100000, "--samples");
        ts = VecN::LinSpaced(n, c.a, c.b);
    }
    const double tol = bounded(o.tol, 1e-10, 1e-15, 1e-2, "--tol");
    doc.inputs["at"] = vec(ts);
    json samples = json::array();
    doc.header = {"t", "x", "y", "z", "k", "torsion"};
    for (int i = 0; i < ts.size(); ++i) {
        const double t = ts[i];
        if (t < c.a || t > c.b) throw UsageError("--at t = " + num(t) + " lies outside [" + num(c.a) + ", " + num(c.b) + "]");
        auto sm = c.sample(t);
        json s;
        s["t"] = t;
        s["point"] = vec3(sm.p);
        s["speed"] = sm.d1.norm();
        double torsion = NAN;
        double k = NAN;
        if (c.dim == 2) {
            k = plane_curvature(c, t);
            s["signed_curvature"] = k;
        }
        auto f = frenet_frame(c, t);
        if (c.dim == 3) {
            k = f.k;
            s["curvature"] = f.k;
            if (f.torsion) torsion = *f.torsion;
            s["torsion"] = f.torsion ? json(*f.torsion) : json(nullptr);
        }
        s["frenet"] = {{"v", vec3(f.v)}, {"n", vec3(f.n)}, {"b", vec3(f.b)}};
        samples.push_back(s);
        doc.rows.push_back({t, sm.p.x(), sm.p.y(), sm.p.z(), k, torsion});
    }
    doc.results["samples"] = samples;
    doc.results["arc_length"] = arc_length(c, c.a, c.b, tol);
    doc.tolerances["arc_length"] = tol;
    doc.tolerances["eps_reg"] = c.eps_reg;
    doc.tolerances["eps_bireg"] = c.eps_bireg;
    return doc;
}

Doc curve_reconstruct(const Options& o)
{
    Doc doc;
    if (o.curvature.empty()) throw UsageError("--curvature is required");
    const double L = bounded(o.length, 2 * pi, 1e-9, 1e6, "--length");
    const int n = bounded(o.samples, 101, 2, 1000000, "--samples");
    ScalarFn k = scalar_of(o.curvature, "--curvature");
    doc.inputs = {{"curvature", o.curvature}, {"length", L}, {"samples", n}};
    ParamCurve c;
    const bool space = !o.torsion.empty();
    if (space) {
        doc.inputs["torsion"] = o.torsion;
        c = reconstruct_space_curve(k, scalar_of(o.torsion, "--torsion"), L);
    } else {
        c = reconstruct_plane_curve(k, L);
    }
    doc.results["dim"] = space ? 3 : 2;
    json samples = json::array();
    doc.header = {"s", "x", "y", "z", "k_measured"};
    double worst_k = 0.0, worst_t = 0.0;
    for (int i = 0; i < n; ++i) {
        const double s = L * i / (n - 1);
        const Vec3 p = c.point(s);
        double km;
        if (space) {
            auto ct = space_curvature_torsion(c, s);
            km = ct.k;
            if (ct.torsion)
                worst_t = std::max(worst_t, std::abs(*ct.torsion - scalar_of(o.torsion, "--torsion")(CurveJet(s)).value()));
        } else {
            km = plane_curvature(c, s);
        }
        worst_k = std::max(worst_k, std::abs(km - k(CurveJet(s)).value()));
        samples.push_back({{"s", s}, {"point", vec3(p)}, {"k", km}});
        doc.rows.push_back({s, p.x(), p.y(), p.z(), km});
    }
    doc.results["samples"] = samples;
    doc.error_estimates["max_curvature_residual"] = worst_k;
    if (space) doc.error_estimates["max_torsion_residual"] = worst_t;
    doc.tolerances["ode_rtol"] = 1e-13;
    doc.tolerances["ode_atol"] = 1e-14;
    doc.tolerances["nodes"] = 2048;
    return doc;
}

// ---------------------------------------------------------------- surfaces

Doc surface_report(const Options& o)
{
    Doc doc;
    auto l = load(o);
    const SurfacePatch& s = need_surface(l);
    doc.geometry = l.description;
    add_warnings(doc, l.geo);
    const VecN p = point_in(*l.geo.chart, o.at, "--at");
    doc.inputs["at"] = vec(p);
    const double u = p[0], v = p[1];
    auto f = forms_at(s, u, v);
    auto rep = principal_at(s, u, v);
    const Mat2 W = shape_operator_at(s, u, v), Wn = shape_operator_from_normal(s, u, v);
    json& r = doc.results;
    r["point"] = vec3(f.point);
    r["r_u"] = vec3(f.ru);
    r["r_v"] = vec3(f.rv);
    r["normal"] = vec3(f.n);
    r["first_form"] = mat(f.g);
    r["second_form"] = mat(f.q);
    r["shape_operator"] = mat(W);
    r["lambda_plus"] = rep.lambda_plus;
    r["lambda_minus"] = rep.lambda_minus;
    r["principal_directions"] = {{"plus", {{"coords", json::array({rep.dir_plus_coords[0], rep.dir_plus_coords[1]})},
                                           {"ambient", vec3(rep.dir_plus)}}},
                                 {"minus", {{"coords", json::array({rep.dir_minus_coords[0], rep.dir_minus_coords[1]})},
                                            {"ambient", vec3(rep.dir_minus)}}}};
    r["mean"] = rep.mean;
    r["H_density"] = rep.H_density;
    r["K"] = rep.K;
    r["tau"] = rep.tau;
    r["umbilic"] = rep.umbilic;
    r["orientation"] = rep.orientation;
    const double tau_intrinsic = ricci_at(*l.geo.chart, p).tau;
    r["tau_intrinsic"] = tau_intrinsic;
    doc.error_estimates["shape_operator_routes"] = (W - Wn).cwiseAbs().maxCoeff();
    doc.error_estimates["tau_intrinsic_minus_2K"] = std::abs(tau_intrinsic - 2 * rep.K);
    doc.tolerances["eps_reg"] = s.eps_reg;
    return doc;
}

Doc surface_area(const Options& o)
{
    Doc doc;
    auto l = load(o);
    const SurfacePatch& s = need_surface(l);
    doc.geometry = l.description;
    add_warnings(doc, l.geo);
    Box2 box = s.domain;
    if (!o.region.empty()) {
        VecN b = parse_numbers(o.region, "--region", 4);
        box = {b[0], b[1], b[2], b[3]};
        if (!(box.u0 < box.u1 && box.v0 < box.v1)) throw UsageError("--region needs u0 < u1 and v0 < v1");
    }
    const double tol = bounded(o.tol, 1e-10, 1e-14, 1e-2, "--tol");
    doc.inputs["region"] = json::array({box.u0, box.u1, box.v0, box.v1});
    GridIntegrand f = [&s](double u, double v, double* out) {
        auto g = forms_at(s, u, v);
        out[0] = std::sqrt(std::max(g.g.determinant(), 0.0));
    };
    auto res = integrate_2d(f, 1, box, tol, 1e-14);
    doc.results["area"] = res.values[0];
    doc.results["cells"] = res.cells;
    doc.error_estimates["area"] = res.error;
    doc.tolerances["rel_tol"] = tol;
    doc.tolerances["abs_tol"] = 1e-14;
    return doc;
}

Doc surface_offset(const Options& o)
{
    Doc doc;
    auto l = load(o);
    const SurfacePatch& s = need_surface(l);
    doc.geometry = l.description;
    add_warnings(doc, l.geo);
    const double tol = bounded(o.tol, 1e-12, 1e-14, 1e-2, "--tol");
    auto t = total_curvatures(s, {tol, 1e-14, Exec::parallel});
    json& r = doc.results;
    r["area"] = t.area;
    r["H_total"] = t.H_total;
    r["K_total"] = t.K_total;
    r["fit"] = {{"area", t.fit_area}, {"H", t.fit_H}, {"K", t.fit_K}, {"agrees", t.fit_ok}};
    r["eps"] = json(std::vector<double>(t.eps.begin(), t.eps.end()));
    r["offset_areas"] = json(std::vector<double>(t.offset_areas.begin(), t.offset_areas.end()));
    doc.header = {"eps", "offset_area"};
    for (int i = 0; i < 6; ++i) doc.rows.push_back({t.eps[i], t.offset_areas[i]});
    if (!o.eps.empty()) {
        const double eps = bounded(o.eps, 0.0, -1e6, 1e6, "--eps");
        doc.inputs["eps"] = eps;
        const double a = area(offset_surface(s, eps), {tol, 1e-14, Exec::parallel});
        r["offset_area"] = a;
        r["predicted_area"] = t.area + eps * t.H_total + eps * eps * t.K_total;
        doc.error_estimates["offset_area_minus_prediction"] = std::abs(a - r["predicted_area"].get<double>());
    }
    doc.error_estimates["fit_minus_integral"] = {{"area", std::abs(t.fit_area - t.area)},
                                                 {"H", std::abs(t.fit_H - t.H_total)},
                                                 {"K", std::abs(t.fit_K - t.K_total)}};
    doc.tolerances["rel_tol"] = tol;
    doc.tolerances["fit_rel_tol"] = 1e-4;
    if (!t.fit_ok) doc.warnings.push_back(t.report);
    return doc;
}

// ---------------------------------------------------------------- geodesics

void chart_row(const Loaded& l, double t, const VecN& x, std::vector<double>& row)
{
    row.push_back(t);
    for (int i = 0; i < x.size(); ++i) row.push_back(x[i]);
    if (l.geo.surface) {
        auto r = l.geo.surface->taylor<1>(x[0], x[1]);
        for (int k = 0; k < 3; ++k) row.push_back(r[k].value());
    }
}

std::vector<std::string> chart_header(const Loaded& l, const char* t)
{
    if (l.geo.surface) return {t, "u", "v", "x", "y", "z"};
    std::vector<std::string> h{t};
    for (int i = 0; i < l.geo.chart->dim; ++i) h.push_back("x" + std::to_string(i + 1));
    return h;
}

Doc geodesic_trace_cmd(const Options& o)
{
    Doc doc;
    auto l = load(o);
    const MetricChart& c = need_chart(l);
    doc.geometry = l.description;
    add_warnings(doc, l.geo);
    const VecN x0 = point_in(c, o.from, "--from");
    if (o.dir.empty()) throw UsageError("--dir is required");
    const VecN d = parse_numbers(o.dir, "--dir", c.dim);
    if (d.norm() == 0) throw UsageError("--dir must be non-zero");
    const double L = bounded(o.length, 1.0, 0.0, 1e6, "--length");
    const int n = bounded(o.samples, 200, 0, 1000000, "--samples");
    const double tol = bounded(o.tol, 1e-11, 1e-14, 1e-4, "--tol");
    doc.inputs = {{"from", vec(x0)}, {"dir", vec(d)}, {"length", L}, {"samples", n}};
    auto p = geodesic_trace(c, x0, d, L, {tol, tol * 1e-2, n, {}});
    doc.header = chart_header(l, "t");
    json samples = json::array();
    for (std::size_t i = 0; i < p.t.size(); ++i) {
        std::vector<double> row;
        chart_row(l, p.t[i], p.x[i], row);
        doc.rows.push_back(row);
        samples.push_back({{"t", p.t[i]}, {"x", vec(p.x[i])}, {"velocity", vec(p.v[i])}});
    }
    doc.results["end"] = to_string(p.end);
    if (!p.message.empty()) doc.results["message"] = p.message;
    doc.results["length"] = p.length;
    doc.results["initial_speed"] = p.speed;
    doc.results["final_point"] = vec(p.x.back());
    doc.results["samples"] = samples;
    doc.error_estimates["max_speed_drift"] = p.max_speed_drift;
    doc.tolerances["rtol"] = tol;
    doc.tolerances["atol"] = tol * 1e-2;
    if (p.end == PathEnd::domain_exit) doc.warnings.push_back("geodesic left the chart: " + p.message);
    return doc;
}

Doc geodesic_distance_cmd(const Options& o)
{
    Doc doc;
    auto l = load(o);
    const MetricChart& c = need_chart(l);
    doc.geometry = l.description;
    add_warnings(doc, l.geo);
    const VecN P = point_in(c, o.from, "--from"), Q = point_in(c, o.to, "--to");
    const double tol = bounded(o.tol, 1e-12, 1e-14, 1e-4, "--tol");
    doc.inputs = {{"from", vec(P)}, {"to", vec(Q)}};
    auto r = geodesic_distance(c, P, Q, tol);
    doc.results["distance"] = r.distance;
    doc.results["initial_velocity"] = vec(r.velocity);
    doc.results["iterations"] = r.iterations;
    doc.results["straight_segment_length"] = r.straight_length;
    doc.error_estimates["endpoint_miss"] = r.miss;
    doc.tolerances["newton_tol"] = tol;
    return doc;
}

Doc geodesic_circle_cmd(const Options& o)
{
    Doc doc;
    auto l = load(o);
    const MetricChart& c = need_chart(l);
    doc.geometry = l.description;
    add_warnings(doc, l.geo);
    const VecN P = point_in(c, o.at, "--at");
    if (o.radius.empty()) throw UsageError("--radius is required");
    const VecN radii = parse_numbers(o.radius, "--radius");
    CircleOptions opt;
    opt.directions = bounded(o.directions, 512, 16, 1 << 16, "--directions");
    if (opt.directions % 4) throw UsageError("--directions must be a multiple of 4");
    doc.inputs = {{"at", vec(P)}, {"radius", vec(radii)}, {"directions", opt.directions}};
    if (c.dim == 2) {
        auto cs = geodesic_circles(c, P, std::vector<double>(radii.data(), radii.data() + radii.size()), opt);
        json arr = json::array();
        doc.header = {"radius", "length", "length_error", "area", "area_error"};
        for (const auto& g : cs) {
            arr.push_back({{"radius", g.radius}, {"length", g.length}, {"area", g.area}});
            doc.rows.push_back({g.radius, g.length, g.length_error, g.area, g.area_error});
            doc.error_estimates["length(" + num(g.radius) + ")"] = g.length_error;
            doc.error_estimates["area(" + num(g.radius) + ")"] = g.area_error;
        }
        doc.results["circles"] = arr;
        doc.tolerances["direction_ladder"] = json::array({opt.directions / 4, opt.directions / 2, opt.directions});
    } else {
        const int nodes = bounded(o.samples, 16, 4, 256, "--samples");
        json arr = json::array();
        doc.header = {"radius", "sphere_area"};
        for (int i = 0; i < radii.size(); ++i) {
            const double a = geodesic_sphere_area(c, P, radii[i], nodes);
            arr.push_back({{"radius", radii[i]}, {"sphere_area", a}});
            doc.rows.push_back({radii[i], a});
        }
        doc.results["spheres"] = arr;
        doc.tolerances["polar_nodes"] = nodes;
    }
    return doc;
}

// ---------------------------------------------------------------- transport

Doc transport_along(const Options& o)
{
    Doc doc;
    auto l = load(o);
    const MetricChart& c = need_chart(l);
    doc.geometry = l.description;
    add_warnings(doc, l.geo);
    const VecN x0 = point_in(c, o.from, "--from");
    if (o.dir.empty() || o.vector_.empty()) throw UsageError("--dir and --vector are required");
    const VecN d = parse_numbers(o.dir, "--dir", c.dim), a = parse_numbers(o.vector_, "--vector", c.dim);
    if (d.norm() == 0) throw UsageError("--dir must be non-zero");
    const double L = bounded(o.length, 1.0, 0.0, 1e6, "--length");
    const int n = bounded(o.samples, 200, 0, 1000000, "--samples");
    doc.inputs = {{"from", vec(x0)}, {"dir", vec(d)}, {"vector", vec(a)}, {"length", L}};
    auto path = geodesic_trace(c, x0, d, L, {1e-11, 1e-13, n, {}});
    MatN a0(c.dim, 1);
    a0.col(0) = a;
    auto tr = parallel_transport(c, path, a0);
    doc.header = chart_header(l, "t");
    for (int i = 0; i < c.dim; ++i) doc.header.push_back("a" + std::to_string(i + 1));
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        std::vector<double> row;
        chart_row(l, tr.t[i], tr.x[i], row);
        for (int k = 0; k < c.dim; ++k) row.push_back(tr.a[i](k, 0));
        doc.rows.push_back(row);
    }
    const MatN g0 = c.metric(x0), g1 = c.metric(tr.x.back());
    const VecN af = tr.final.col(0);
    doc.results["end"] = to_string(tr.end);
    doc.results["final_point"] = vec(tr.x.back());
    doc.results["final_vector"] = vec(af);
    doc.results["initial_norm"] = std::sqrt(a.dot(g0 * a));
    doc.results["final_norm"] = std::sqrt(af.dot(g1 * af));
    doc.error_estimates["max_gram_drift"] = tr.max_gram_drift;
    doc.tolerances["rtol"] = 1e-11;
    if (tr.end == PathEnd::domain_exit) doc.warnings.push_back("path left the chart before its end");
    return doc;
}

Doc transport_holonomy(const Options& o)
{
    Doc doc;
    auto l = load(o);
    const MetricChart& c = need_chart(l);
    doc.geometry = l.description;
    add_warnings(doc, l.geo);
    if (o.polygon.empty()) throw UsageError("--polygon is required (vertices separated by ';')");
    std::vector<VecN> verts;
    std::stringstream ss(o.polygon);
    std::string part;
    json vj = json::array();
    while (std::getline(ss, part, ';')) {
        verts.push_back(point_in(c, part, "--polygon vertex"));
        vj.push_back(vec(verts.back()));
    }
    if (verts.size() < 2) throw UsageError("--polygon needs at least two vertices");
    doc.inputs = {{"polygon", vj}, {"open", o.open}};
    auto h = holonomy(c, coordinate_polygon(verts, !o.open));
    doc.results["frame"] = mat(h.frame);
    doc.results["orthonormal"] = mat(h.orthonormal);
    doc.results["coordinates"] = mat(h.coordinates);
    if (h.angle) doc.results["angle"] = *h.angle;
    doc.error_estimates["orthogonality_residual"] = h.orthogonality_residual;
    doc.tolerances["rtol"] = 1e-11;
    doc.tolerances["closure"] = 1e-9;
    return doc;
}

// ---------------------------------------------------------------- curvature

Doc curvature_scalar(const Options& o)
{
    Doc doc;
    auto l = load(o);
    const MetricChart& c = need_chart(l);
    doc.geometry = l.description;
    add_warnings(doc, l.geo);
    const VecN P = point_in(c, o.at, "--at");
    ScalarCurvatureOptions opt;
    opt.r0 = bounded(o.r0, 0.2, 1e-4, 1.0, "--r0");
    opt.circle.directions = bounded(o.directions, 512, 16, 1 << 16, "--directions");
    if (opt.circle.directions % 4) throw UsageError("--directions must be a multiple of 4");
    opt.sphere_polar_nodes = bounded(o.samples, 16, 4, 256, "--samples");
    doc.inputs = {{"at", vec(P)}, {"r0", opt.r0}};
    auto e = scalar_curvature_estimate(c, P, opt);
    json& r = doc.results;
    r["tau"] = e.tau;
    if (e.tau_disk) r["tau_disk"] = *e.tau_disk;
    r["routes_agree"] = e.routes_agree;
    r["flagged"] = e.flagged;
    r["tau_contraction"] = ricci_at(c, P).tau;
    r["rungs"] = json(e.rung_values);
    if (!e.disk_rung_values.empty()) r["disk_rungs"] = json(e.disk_rung_values);
    doc.error_estimates["tau"] = e.error;
    if (e.error_disk) doc.error_estimates["tau_disk"] = *e.error_disk;
    doc.tolerances["ladder_radii"] = json(e.radii);
    if (c.dim == 2)
        doc.tolerances["direction_ladder"] =
            json::array({opt.circle.directions / 4, opt.circle.directions / 2, opt.circle.directions});
    else
        doc.tolerances["polar_nodes"] = opt.sphere_polar_nodes;
    if (e.flagged) doc.warnings.push_back("extrapolation ladder did not converge monotonically");
    if (!e.routes_agree) doc.warnings.push_back("circle and disk routes disagree beyond their combined error");
    return doc;
}

json tensor4(const std::array<double, 81>& a, int n)
{
    json out = json::array();
    for (int i = 0; i < n; ++i) {
        json A = json::array();
        for (int j = 0; j < n; ++j) {
            json B = json::array();
            for (int k = 0; k < n; ++k) {
                json C = json::array();
                for (int m = 0; m < n; ++m) C.push_back(a[RiemannAt::index(i, j, k, m)]);
                B.push_back(C);
            }
            A.push_back(B);
        }
        out.push_back(A);
    }
    return out;
}

Doc curvature_riemann(const Options& o)
{
    Doc doc;
    auto l = load(o);
    const MetricChart& c = need_chart(l);
    doc.geometry = l.description;
    add_warnings(doc, l.geo);
    const VecN P = point_in(c, o.at, "--at");
    doc.inputs["at"] = vec(P);
    auto R = riemann_at(c, P);
    json& r = doc.results;
    r["convention"] = R.convention;
    r["metric"] = mat(R.g);
    r["R_up"] = tensor4(R.up, c.dim);
    r["R_low"] = tensor4(R.low, c.dim);
    r["max_abs"] = R.max_abs();
    doc.header = {"i", "j", "k", "l", "R_up", "R_low"};
    for (int i = 0; i < c.dim; ++i)
        for (int j = 0; j < c.dim; ++j)
            for (int k = 0; k < c.dim; ++k)
                for (int m = 0; m < c.dim; ++m)
                    doc.rows.push_back({double(i), double(j), double(k), double(m), R(i, j, k, m), R.lowered(i, j, k, m)});
    doc.error_estimates["symmetry_residual"] = riemann_symmetry_residual(R);
    auto b = second_bianchi_residual(c, P);
    doc.error_estimates["second_bianchi"] = {{"absolute", b.absolute}, {"relative", b.relative}};
    if (!o.u.empty() || !o.v.empty()) {
        const VecN u = parse_numbers(o.u, "--u", c.dim), v = parse_numbers(o.v, "--v", c.dim);
        const double h0 = bounded(o.r0, 0.1, 1e-4, 1.0, "--r0");
        auto h = riemann_holonomy_oracle(c, P, u, v, h0);
        doc.inputs["u"] = vec(u);
        doc.inputs["v"] = vec(v);
        r["operator"] = mat(R.operator_matrix(u, v));
        r["oracle_operator"] = mat(h.op);
        doc.error_estimates["oracle"] = h.error;
        doc.error_estimates["oracle_minus_components"] = (h.op - R.operator_matrix(u, v)).cwiseAbs().maxCoeff();
        doc.tolerances["oracle_steps"] = json(h.steps);
        if (h.non_monotone) doc.warnings.push_back("holonomy ladder is not monotone");
    }
    doc.tolerances["bianchi_step"] = 1e-3;
    return doc;
}

Doc curvature_ricci(const Options& o)
{
    Doc doc;
    auto l = load(o);
    const MetricChart& c = need_chart(l);
    doc.geometry = l.description;
    add_warnings(doc, l.geo);
    const VecN P = point_in(c, o.at, "--at");
    doc.inputs = {{"at", vec(P)}, {"oracle", o.oracle}};
    auto ric = ricci_at(c, P);
    doc.results["rho"] = mat(ric.rho);
    doc.results["operator"] = mat(ric.op);
    doc.results["tau"] = ric.tau;
    if (o.oracle) {
        const double h0 = bounded(o.r0, 0.2, 1e-4, 1.0, "--r0");
        auto vo = ricci_volume_oracle(c, P, h0);
        doc.results["oracle_rho"] = mat(vo.rho);
        doc.error_estimates["oracle"] = vo.error;
        doc.error_estimates["oracle_minus_contraction"] = (vo.rho - ric.rho).cwiseAbs().maxCoeff();
        doc.error_estimates["moment_residual"] = vo.residual;
        doc.error_estimates["moment_condition"] = vo.condition;
        doc.tolerances["oracle_steps"] = json(vo.steps);
        if (vo.flagged) doc.warnings.push_back("volume oracle flagged (non-monotone ladder or ill-conditioned moments)");
    }
    return doc;
}

Doc curvature_sectional(const Options& o)
{
    Doc doc;
    auto l = load(o);
    const MetricChart& c = need_chart(l);
    doc.geometry = l.description;
    add_warnings(doc, l.geo);
    const VecN P = point_in(c, o.at, "--at");
    const VecN u = parse_numbers(o.u.empty() ? std::string() : o.u, "--u", c.dim);
    const VecN v = parse_numbers(o.v.empty() ? std::string() : o.v, "--v", c.dim);
    doc.inputs = {{"at", vec(P)}, {"u", vec(u)}, {"v", vec(v)}};
    const double sigma = sectional_at(c, P, u, v);
    doc.results["sectional"] = sigma;
    const double h0 = bounded(o.r0, 0.1, 1e-4, 1.0, "--r0");
    const MatN g = c.metric(P);
    const double uu = u.dot(g * u), vv = v.dot(g * v), uv = u.dot(g * v);
    const VecN un = u / std::sqrt(uu), vn = v / std::sqrt(vv);
    auto h = riemann_holonomy_oracle(c, P, un, vn, h0);
    const double area2 = 1.0 - uv * uv / (uu * vv);
    const double sigma_h = un.dot(g * (h.op * vn)) / area2;
    doc.results["sectional_oracle"] = sigma_h;
    doc.error_estimates["oracle"] = h.error;
    doc.error_estimates["oracle_minus_components"] = std::abs(sigma_h - sigma);
    doc.tolerances["oracle_steps"] = json(h.steps);
    return doc;
}

// ---------------------------------------------------------------- hyperbolic

Doc hyperbolic_distance_cmd(const Options& o)
{
    Doc doc;
    if (o.z1.empty() || o.z2.empty()) throw UsageError("--z1 and --z2 are required (x,y with y > 0)");
    const VecN a = parse_numbers(o.z1, "--z1", 2), b = parse_numbers(o.z2, "--z2", 2);
    if (!(a[1] > 0) || !(b[1] > 0)) throw UsageError("--z1 and --z2 must lie in the upper half-plane (y > 0)");
    const std::complex<double> z1(a[0], a[1]), z2(b[0], b[1]);
    doc.inputs = {{"z1", vec(a)}, {"z2", vec(b)}, {"shoot", o.shoot}};
    const double d = hyperbolic_distance(z1, z2);
    doc.results["distance"] = d;
    doc.results["cosh_distance"] = 1.0 + std::norm(z1 - z2) / (2 * z1.imag() * z2.imag());
    if (o.shoot) {
        auto hp = builtin("lobachevsky_halfplane");
        if (!hp.chart->contains(a) || !hp.chart->contains(b))
            throw UsageError("--shoot needs both points inside the chart [-50,50]x[0.001,1000]");
        auto r = geodesic_distance(*hp.chart, a, b);
        doc.results["shooting_distance"] = r.distance;
        doc.error_estimates["shooting_minus_closed_form"] = std::abs(r.distance - d);
        doc.tolerances["newton_tol"] = 1e-12;
    }
    return doc;
}

// ---------------------------------------------------------------- verify, parse

Doc verify_cmd(const Options& o, std::ostream& err)
{
    Doc doc;
    std::vector<std::string> names;
    if (o.suite == "all") {
        for (const auto& s : verify_suites()) names.push_back(s.name);
    } else {
        const auto& all = verify_suites();
        if (std::none_of(all.begin(), all.end(), [&](const SuiteInfo& s) { return s.name == o.suite; })) {
            std::string known;
            for (const auto& s : all) known += " " + s.name;
            throw UsageError("unknown suite '" + o.suite + "'; known: all" + known);
        }
        names.push_back(o.suite);
    }
    doc.inputs = {{"suite", o.suite}, {"seed", o.seed}};
    json suites = json::array();
    doc.header = {"criterion", "check", "value", "tolerance", "pass"};
    bool all_pass = true;
    for (const auto& name : names) {
        auto r = run_suite(name, {o.seed, Exec::parallel});
        json checks = json::array();
        for (std::size_t i = 0; i < r.checks.size(); ++i) {
            const auto& c = r.checks[i];
            checks.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
            doc.rows.push_back({double(r.criterion), double(i), c.value, c.tolerance, c.pass ? 1.0 : 0.0});
            err << (c.pass ? "PASS " : "FAIL ") << r.name << ": " << c.name << " = " << num(c.value)
                << " (tolerance " << num(c.tolerance) << ")\n";
        }
        json s = {{"name", r.name}, {"criterion", r.criterion}, {"title", r.title}, {"pass", r.pass()}, {"checks", checks}};
        if (!r.error.empty()) {
            s["error"] = r.error;
            err << "FAIL " << r.name << ": aborted: " << r.error << "\n";
        }
        err << (r.pass() ? "PASS " : "FAIL ") << r.name << " (" << r.checks.size() << " checks)\n";
        suites.push_back(s);
        all_pass = all_pass && r.pass();
    }
    doc.results["pass"] = all_pass;
    doc.results["suites"] = suites;
    doc.tolerances["per_check"] = "each check carries its own tolerance";
    if (!all_pass) doc.exit_code = exit_verification;
    return doc;
}

Doc parse_cmd(const Options& o)
{
    Doc doc;
    if (o.check_file.empty()) throw UsageError("--check FILE is required");
    std::ifstream in(o.check_file);
    if (!in) throw UsageError("cannot read geometry file '" + o.check_file + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    doc.inputs["check"] = o.check_file;
    auto spec = parse_geometry(ss.str());
    auto g = compile(spec);
    json& r = doc.results;
    r["valid"] = true;
    r["kind"] = to_string(spec.kind);
    r["name"] = spec.name;
    r["coords"] = spec.coords;
    json params = json::object();
    for (const auto& [k, v] : spec.params) params[k] = v;
    r["params"] = params;
    json comps = json::array();
    for (const auto& e : spec.components) comps.push_back(print(*e));
    r["components"] = comps;
    r["canonical"] = print(spec);
    add_warnings(doc, g);
    return doc;
}

// ---------------------------------------------------------------- output

std::string csv_text(const Doc& d)
{
    std::string out;
    auto cell = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        return q + "\"";
    };
    if (!d.header.empty()) {
        for (std::size_t i = 0; i < d.header.size(); ++i) out += (i ? "," : "") + cell(d.header[i]);
        out += '\n';
        for (const auto& row : d.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + (std::isfinite(row[i]) ? num(row[i]) : "");
            out += '\n';
        }
        return out;
    }
    // key,value rows from the flattened results
    out = "key,value\n";
    std::function<void(const json&, const std::string&)> flat = [&](const json& j, const std::string& key) {
        if (j.is_object())
            for (auto it = j.begin(); it != j.end(); ++it) flat(it.value(), key.empty() ? it.key() : key + "." + it.key());
        else if (j.is_array())
            for (std::size_t i = 0; i < j.size(); ++i) flat(j[i], key + "[" + std::to_string(i) + "]");
        else
            out += cell(key) + "," + (j.is_number_float() ? num(j.get<double>()) : cell(j.is_string() ? j.get<std::string>() : j.dump())) + "\n";
    };
    flat(d.results, "");
    return out;
}

json error_doc(const std::string& command, int code, const std::string& type, const std::string& message)
{
    json e = {{"exit_code", code}, {"type", type}, {"message", message}};
    return {{"command", command}, {"error", e}};
}

const char* kFooter = R"(Conventions: angles in radians; points and vectors are comma-separated
coordinates in chart order (u,v for surfaces, x,y[,z] for metrics), and each
entry may be a constant expression such as pi/2. Negative leading values need
the --opt=value form, e.g. --from=-1,0.5.
Output: one JSON document {command, geometry, inputs, results, diagnostics}
with numbers in 17 significant digits, or CSV with --format csv.
Exit codes: 0 success, 1 computation failure, 2 usage error, 3 verification
failure. Errors also print a JSON error document on stderr.
CURVATUR_THREADS sets the worker count when --threads is absent.)";

std::string builtin_help()
{
    std::string s = "\n\nBuiltin geometries (--builtin NAME --param k=v):\n";
    for (const auto& b : builtin_catalog()) {
        s += "  " + b.name + " [" + to_string(b.kind) + "]";
        for (const auto& [k, v] : b.params) s += " " + k + "=" + v;
        s += "\n      " + b.summary + "\n";
    }
    return s;
}

} // namespace

std::string json_text(const json& j, int indent)
{
    std::string out;
    write_json(j, out, indent, 0);
    return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{"curvatur: curvature of curves, surfaces and metric charts"};
    app.footer(std::string(kFooter) + builtin_help());
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Expand all help");

    auto geometry_opts = [&o](CLI::App* c) {
        auto* b = c->add_option("--builtin", o.builtin, "Builtin geometry name");
        c->add_option("--param", o.params, "Builtin parameter name=value (repeatable)")->needs(b);
        c->add_option("--file", o.file, "Geometry definition file")->excludes(b);
    };
    auto common = [&o](CLI::App* c) {
        c->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
        c->add_option("--output", o.output, "Write the document to this file instead of stdout");
        c->add_option("--threads", o.threads, "Worker threads (default: CURVATUR_THREADS or all cores)");
        c->add_option("--seed", o.seed, "Seed for randomized suites");
    };
    struct Leaf {
        std::string name;
        CLI::App* app;
        std::function<Doc()> run;
    };
    std::vector<Leaf> leaves;
    auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help, bool geometry,
                    std::function<Doc()> run) {
        auto* c = parent->add_subcommand(name, help);
        if (geometry) geometry_opts(c);
        common(c);
        leaves.push_back({parent->get_name() + " " + name, c, std::move(run)});
        return c;
    };

    auto* curve = app.add_subcommand("curve", "Parametrized curves")->require_subcommand(1);
    auto* c_an = leaf(curve, "analyze", "Curvature, torsion and Frenet frame at parameter values", true,
                      [&] { return curve_analyze(o); });
    c_an->add_option("--at", o.at, "Parameter values t1,t2,...");
    c_an->add_option("--samples", o.samples, "Evenly spaced samples when --at is absent");
    c_an->add_option("--tol", o.tol, "Arc-length quadrature tolerance");
    auto* c_re = leaf(curve, "reconstruct", "Unit-speed curve from curvature (and torsion) functions of s", false,
                      [&] { return curve_reconstruct(o); });
    c_re->add_option("--curvature", o.curvature, "Curvature as an expression in s")->required();
    c_re->add_option("--torsion", o.torsion, "Torsion as an expression in s (space curve)");
    c_re->add_option("--length", o.length, "Arc length");
    c_re->add_option("--samples", o.samples, "Output samples");

    auto* surface = app.add_subcommand("surface", "Surfaces in R^3")->require_subcommand(1);
    auto* s_re = leaf(surface, "report", "Fundamental forms, principal curvatures, K and tau at a point", true,
                      [&] { return surface_report(o); });
    s_re->add_option("--at", o.at, "Parameter point u,v")->required();
    auto* s_ar = leaf(surface, "area", "Area of the patch or a parameter rectangle", true, [&] { return surface_area(o); });
    s_ar->add_option("--region", o.region, "u0,u1,v0,v1");
    s_ar->add_option("--tol", o.tol, "Relative quadrature tolerance");
    auto* s_of = leaf(surface, "offset", "Total curvatures and the offset-area expansion", true,
                      [&] { return surface_offset(o); });
    s_of->add_option("--eps", o.eps, "Also measure the offset surface at this distance");
    s_of->add_option("--tol", o.tol, "Relative quadrature tolerance");

    auto* geo = app.add_subcommand("geodesic", "Geodesics in a chart")->require_subcommand(1);
    auto* g_tr = leaf(geo, "trace", "Unit-speed geodesic from a point and direction", true,
                      [&] { return geodesic_trace_cmd(o); });
    g_tr->add_option("--from", o.from, "Start point")->required();
    g_tr->add_option("--dir", o.dir, "Initial direction (normalized)")->required();
    g_tr->add_option("--length", o.length, "Length");
    g_tr->add_option("--samples", o.samples, "Uniform output samples besides the integrator steps");
    g_tr->add_option("--tol", o.tol, "Relative integration tolerance");
    auto* g_di = leaf(geo, "distance", "Geodesic distance by shooting", true, [&] { return geodesic_distance_cmd(o); });
    g_di->add_option("--from", o.from, "Start point")->required();
    g_di->add_option("--to", o.to, "End point")->required();
    g_di->add_option("--tol", o.tol, "Newton tolerance");
    auto* g_ci = leaf(geo, "circle", "Length and area of geodesic circles (spheres in 3D)", true,
                      [&] { return geodesic_circle_cmd(o); });
    g_ci->add_option("--at", o.at, "Centre")->required();
    g_ci->add_option("--radius", o.radius, "Radii R1,R2,...")->required();
    g_ci->add_option("--directions", o.directions, "Finest direction fan (multiple of 4)");
    g_ci->add_option("--samples", o.samples, "Polar nodes for 3D spheres");

    auto* tr = app.add_subcommand("transport", "Parallel transport")->require_subcommand(1);
    auto* t_al = leaf(tr, "along", "Transport a vector along a geodesic", true, [&] { return transport_along(o); });
    t_al->add_option("--from", o.from, "Start point")->required();
    t_al->add_option("--dir", o.dir, "Geodesic direction")->required();
    t_al->add_option("--vector", o.vector_, "Vector to transport")->required();
    t_al->add_option("--length", o.length, "Length");
    t_al->add_option("--samples", o.samples, "Uniform output samples");
    auto* t_ho = leaf(tr, "holonomy", "Holonomy around a coordinate polygon", true, [&] { return transport_holonomy(o); });
    t_ho->add_option("--polygon", o.polygon, "Vertices p1;p2;... (closed unless --open)")->required();
    t_ho->add_flag("--open", o.open, "Do not return to the first vertex (loops closing through a period)");

    auto* cu = app.add_subcommand("curvature", "Intrinsic curvature")->require_subcommand(1);
    auto* k_sc = leaf(cu, "scalar", "Scalar curvature from geodesic circles or spheres", true,
                      [&] { return curvature_scalar(o); });
    k_sc->add_option("--at", o.at, "Point")->required();
    k_sc->add_option("--r0", o.r0, "Largest ladder radius");
    k_sc->add_option("--directions", o.directions, "Finest direction fan (multiple of 4)");
    k_sc->add_option("--samples", o.samples, "Polar nodes for 3D spheres");
    auto* k_ri = leaf(cu, "riemann", "Riemann tensor, symmetry and Bianchi residuals", true,
                      [&] { return curvature_riemann(o); });
    k_ri->add_option("--at", o.at, "Point")->required();
    k_ri->add_option("--u", o.u, "With --v: compare R(u,v) with the holonomy oracle");
    k_ri->add_option("--v", o.v, "Second vector");
    k_ri->add_option("--r0", o.r0, "Largest oracle step");
    auto* k_rc = leaf(cu, "ricci", "Ricci form and scalar curvature", true, [&] { return curvature_ricci(o); });
    k_rc->add_option("--at", o.at, "Point")->required();
    k_rc->add_flag("--oracle", o.oracle, "Also run the volume oracle");
    k_rc->add_option("--r0", o.r0, "Largest oracle step");
    auto* k_se = leaf(cu, "sectional", "Sectional curvature of the plane spanned by u, v", true,
                      [&] { return curvature_sectional(o); });
    k_se->add_option("--at", o.at, "Point")->required();
    k_se->add_option("--u", o.u, "First vector")->required();
    k_se->add_option("--v", o.v, "Second vector")->required();
    k_se->add_option("--r0", o.r0, "Largest oracle step");

    auto* hy = app.add_subcommand("hyperbolic", "Upper half-plane model")->require_subcommand(1);
    auto* h_di = leaf(hy, "distance", "Closed-form distance between z1 and z2", false,
                      [&] { return hyperbolic_distance_cmd(o); });
    h_di->add_option("--z1", o.z1, "x,y")->required();
    h_di->add_option("--z2", o.z2, "x,y")->required();
    h_di->add_flag("--shoot", o.shoot, "Also solve by geodesic shooting");

    auto* ve = app.add_subcommand("verify", "Run acceptance suites");
    common(ve);
    std::string suites_help = "all";
    for (const auto& s : verify_suites()) suites_help += ", " + s.name;
    ve->add_option("--suite", o.suite, "Suite: " + suites_help);
    leaves.push_back({"verify", ve, [&] { return verify_cmd(o, err); }});

    auto* pa = app.add_subcommand("parse", "Check a geometry definition file");
    common(pa);
    pa->add_option("--check", o.check_file, "File to check")->required();
    leaves.push_back({"parse", pa, [&] { return parse_cmd(o); }});

    std::string command = "curvatur";
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        if (code == 0) return exit_ok;
        err << json_text(error_doc(command, exit_usage, "UsageError", e.what())) << "\n";
        return exit_usage;
    }

    const Leaf* active = nullptr;
    for (const auto& l : leaves)
        if (l.app->parsed()) active = &l;
    if (!active) {
        err << json_text(error_doc(command, exit_usage, "UsageError", "no subcommand given")) << "\n";
        return exit_usage;
    }
    command = active->name;

    auto fail = [&](int code, const std::string& type, const std::string& msg, json extra = json::object()) {
        json d = error_doc(command, code, type, msg);
        for (auto it = extra.begin(); it != extra.end(); ++it) d["error"][it.key()] = it.value();
        err << json_text(d) << "\n";
        return code;
    };

    try {
        int threads = 0;
        if (o.threads) {
            threads = *o.threads;
        } else if (const char* env = std::getenv("CURVATUR_THREADS"); env && *env) {
            char* end = nullptr;
            const long v = std::strtol(env, &end, 10);
            if (*end != '\0') throw UsageError("CURVATUR_THREADS must be an integer, got '" + std::string(env) + "'");
            threads = static_cast<int>(v);
        }
        if (o.threads || threads != 0) {
            if (threads < 1 || threads > 1024) throw UsageError("thread count must lie in [1, 1024]");
            set_threads(threads);
        }

        Doc d = active->run();
        json doc;
        doc["command"] = command;
        doc["geometry"] = d.geometry.is_null() ? json(nullptr) : d.geometry;
        doc["inputs"] = d.inputs;
        doc["results"] = d.results;
        doc["diagnostics"] = {{"tolerances", d.tolerances},
                              {"error_estimates", d.error_estimates},
                              {"warnings", d.warnings}};
        const std::string text = o.format == "csv" ? csv_text(d) : json_text(doc) + "\n";
        if (o.output.empty()) {
            out << text;
        } else {
            std::ofstream f(o.output);
            if (!f) throw UsageError("cannot write '" + o.output + "'");
            f << text;
        }
        if (d.exit_code == exit_verification)
            return fail(exit_verification, "VerificationFailure", "one or more verification checks failed");
        return d.exit_code;
    } catch (const UsageError& e) {
        return fail(exit_usage, "UsageError", e.what());
    } catch (const ParseError& e) {
        return fail(exit_failure, "ParseError", e.what(),
                    {{"line", e.line()}, {"column", e.column()}, {"expected", e.expected()}});
    } catch (const ConvergenceError& e) {
        return fail(exit_failure, "ConvergenceError", e.what(), {{"best_estimate", e.best_estimate()}});
    } catch (const DomainExitError& e) {
        return fail(exit_failure, "DomainExitError", e.what());
    } catch (const RegularityError& e) {
        return fail(exit_failure, "RegularityError", e.what());
    } catch (const PreconditionError& e) {
        return fail(exit_failure, "PreconditionError", e.what());
    } catch (const std::exception& e) {
        return fail(exit_failure, "Error", e.what());
    }
}

} // namespace curvatur
