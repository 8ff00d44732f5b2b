#include <doctest.h>

#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace curvatur;
using json = nlohmann::ordered_json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "curvatur");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> v;
    std::stringstream ss(s);
    for (std::string l; std::getline(ss, l);) v.push_back(l);
    return v;
}

std::string temp_file(const std::string& name, const std::string& text)
{
    const std::string path = "/tmp/curvatur_test_" + name;
    std::ofstream(path) << text;
    return path;
}

} // namespace

TEST_CASE("json_text writes 17 significant digits and null for non-finite values")
{
    json j = {{"a", 0.1}, {"b", json::array({1.0, 2})}, {"c", std::nan("")}};
    CHECK(json_text(j, 0) == R"({"a":0.10000000000000001,"b":[1, 2],"c":null})");
    CHECK(json::parse(json_text(j))["a"].get<double>() == 0.1);
}

TEST_CASE("surface report on the unit sphere")
{
    auto r = run({"surface", "report", "--builtin", "sphere", "--param", "R=1", "--at", "1.0,0.5"});
    REQUIRE(r.code == exit_ok);
    auto j = json::parse(r.out);
    CHECK(j["command"] == "surface report");
    CHECK(j["geometry"]["name"] == "sphere");
    const auto& res = j["results"];
    CHECK(res["lambda_plus"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res["lambda_minus"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res["K"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res["tau"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(res["tau_intrinsic"].get<double>() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(j["diagnostics"].contains("tolerances"));
    CHECK(j["diagnostics"].contains("error_estimates"));
    CHECK(j["diagnostics"]["warnings"].is_array());
}

TEST_CASE("sphere radius parameter scales the curvatures")
{
    auto r = run({"surface", "report", "--builtin", "sphere", "--param", "R=2", "--at", "pi/3,1"});
    REQUIRE(r.code == exit_ok);
    auto j = json::parse(r.out);
    CHECK(j["results"]["K"].get<double>() == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("geodesic trace on the torus as CSV")
{
    auto r = run({"geodesic", "trace", "--builtin", "torus", "--from", "0.1,0.2", "--dir", "1,1", "--length", "2",
                  "--samples", "10", "--format", "csv"});
    REQUIRE(r.code == exit_ok);
    auto ls = lines(r.out);
    REQUIRE(ls.size() > 10);
    CHECK(ls[0] == "t,u,v,x,y,z");
    double last_t = -1.0;
    for (std::size_t i = 1; i < ls.size(); ++i) {
        std::stringstream ss(ls[i]);
        std::vector<double> row;
        for (std::string c; std::getline(ss, c, ',');) row.push_back(std::stod(c));
        REQUIRE(row.size() == 6);
        CHECK(row[0] > last_t);
        last_t = row[0];
        const double rho = std::hypot(row[3], row[4]) - 2.0;
        CHECK(std::abs(rho * rho + row[5] * row[5] - 1.0) < 1e-10);
    }
    CHECK(last_t == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("metric charts trace with coordinate columns")
{
    auto r = run({"geodesic", "trace", "--builtin", "lobachevsky_halfplane", "--from", "0,1", "--dir", "1,0",
                  "--length", "1", "--format", "csv"});
    REQUIRE(r.code == exit_ok);
    CHECK(lines(r.out)[0] == "t,x1,x2");
}

TEST_CASE("verify runs a suite and reports per-check lines")
{
    auto r = run({"verify", "--suite", "egregium", "--seed", "3"});
    CHECK(r.code == exit_ok);
    auto j = json::parse(r.out);
    CHECK(j["results"]["pass"] == true);
    CHECK(j["results"]["suites"][0]["name"] == "egregium");
    CHECK(r.err.find("PASS egregium") != std::string::npos);
}

TEST_CASE("usage errors exit with code 2 and a JSON error document")
{
    for (auto args : std::vector<std::vector<std::string>>{
             {"surface", "report", "--builtin", "sphere"},
             {"surface", "report", "--builtin", "no_such", "--at", "1,1"},
             {"surface", "report", "--builtin", "helix", "--at", "1,1"},
             {"surface", "report", "--builtin", "sphere", "--at", "1"},
             {"surface", "report", "--builtin", "sphere", "--at", "9,9"},
             {"surface", "report", "--builtin", "sphere", "--file", "x.geo", "--at", "1,1"},
             {"surface", "report", "--builtin", "sphere", "--at", "1,1", "--format", "xml"},
             {"surface", "report", "--builtin", "sphere", "--at", "1,1", "--threads", "0"},
             {"geodesic", "circle", "--builtin", "sphere", "--at", "1,1", "--radius", "0.1", "--directions", "30"},
             {"surface", "area", "--builtin", "torus", "--tol", "-1"},
             {"verify", "--suite", "bogus"},
             {"frobnicate"},
             {}}) {
        auto r = run(args);
        CHECK(r.code == exit_usage);
        CHECK(r.err.find("\"exit_code\": 2") != std::string::npos);
    }
}

TEST_CASE("help exits cleanly and lists the builtins")
{
    auto r = run({"--help"});
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("lobachevsky_halfplane") != std::string::npos);
    CHECK(r.out.find("radians") != std::string::npos);
}

TEST_CASE("output is byte-identical across runs and thread counts")
{
    const std::vector<std::string> args{"geodesic", "circle", "--builtin", "torus", "--at", "1,0.5", "--radius",
                                        "0.1,0.3"};
    auto a = run(args);
    auto b = run(args);
    auto with_threads = args;
    with_threads.insert(with_threads.end(), {"--threads", "1"});
    auto c = run(with_threads);
    REQUIRE(a.code == exit_ok);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
}

TEST_CASE("parse --check accepts valid files and locates errors")
{
    auto good = temp_file("good.geo", "surface tor (u,v in [0, 2*pi]x[-pi, pi]) = ((2 + cos(v))*cos(u), "
                                      "(2 + cos(v))*sin(u), sin(v))\n");
    auto r = run({"parse", "--check", good});
    CHECK(r.code == exit_ok);
    CHECK(json::parse(r.out)["results"]["valid"] == true);

    auto bad = temp_file("bad.geo", "surface s (u,v in [0,1]x[0,1]) = (u, v)\n");
    r = run({"parse", "--check", bad});
    CHECK(r.code == exit_failure);
    auto e = json::parse(r.err)["error"];
    CHECK(e["type"] == "ParseError");
    CHECK(e["line"] == 1);
    CHECK(e["column"] == 39);
    CHECK(!e["expected"].empty());
}

TEST_CASE("file geometries drive the same commands as builtins")
{
    auto path = temp_file("sphere.geo", "surface sph (u,v in [0.1,3.04]x[0,6.28]) = (sin(u)*cos(v), sin(u)*sin(v), cos(u))\n");
    auto r = run({"surface", "report", "--file", path, "--at", "1,1"});
    REQUIRE(r.code == exit_ok);
    CHECK(json::parse(r.out)["results"]["K"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hyperbolic distance matches shooting")
{
    auto r = run({"hyperbolic", "distance", "--z1", "0,1", "--z2", "1,2", "--shoot"});
    REQUIRE(r.code == exit_ok);
    auto j = json::parse(r.out);
    CHECK(j["results"]["distance"].get<double>() == doctest::Approx(std::acosh(1.5)).epsilon(1e-14));
    CHECK(j["diagnostics"]["error_estimates"]["shooting_minus_closed_form"].get<double>() < 1e-9);
}

TEST_CASE("reconstruct accepts expressions for curvature and length")
{
    auto r = run({"curve", "reconstruct", "--curvature", "1", "--length", "2*pi", "--samples", "5"});
    REQUIRE(r.code == exit_ok);
    auto j = json::parse(r.out);
    auto last = j["results"]["samples"].back()["point"];
    CHECK(std::abs(last[0].get<double>()) < 1e-9);
    CHECK(std::abs(last[1].get<double>()) < 1e-9);
}
