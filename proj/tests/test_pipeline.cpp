#include "doctest.h"
#include "toda/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace toda;
namespace fs = std::filesystem;

namespace {

const char* kConfig = R"(; test
[curve]
a0_re = 1
a0_im = 0
c = -3
[grid]
x_min = -0.1
x_max = 0.1
y_min = -0.1
y_max = 0.1
nx = 6
ny = 6
)";

RunConfig cfg_from(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

fs::path scratch(const char* name) {
    fs::path p = fs::temp_directory_path() / "toda_pipeline_tests" / name;
    fs::remove_all(p);
    return p;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::Validation;
}

}  // namespace

TEST_CASE("pipeline: config parsing and validation") {
    RunConfig c = cfg_from(kConfig);
    CHECK(c.c == -3.0);
    CHECK(c.nx == 6);
    CHECK(c.lambda == cplx(1.0, 0.0));
    CHECK(std::abs(c.grid().hx - 0.04) < 1e-15);
    c.validate();

    std::string missing = kConfig;
    missing.replace(missing.find("a0_im = 0\n"), 10, "");
    try {
        cfg_from(missing);
        FAIL("expected a validation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Validation);
        CHECK(std::string(e.what()).find("curve.a0_im") != std::string::npos);
    }
    CHECK(kind_of([] { cfg_from(std::string(kConfig) + "[model]\nN = two\n"); }) == ErrorKind::Validation);

    RunConfig e = c;
    e.nx = e.ny = 0;
    CHECK(kind_of([&] { e.validate(); }) == ErrorKind::Validation);
    RunConfig l = c;
    l.lambda = 2.0;
    CHECK(kind_of([&] { l.validate(); }) == ErrorKind::OffUnitCircle);
    RunConfig t = c;
    t.residual_tol = 0.0;
    CHECK(kind_of([&] { t.validate(); }) == ErrorKind::Validation);
    RunConfig n = c;
    n.N = 2;
    CHECK(kind_of([&] { n.validate(); }) == ErrorKind::Validation);
    n.source = "synthetic";
    n.validate();
    CHECK(exit_code_for(ErrorKind::OffUnitCircle) == 2);
    CHECK(exit_code_for(ErrorKind::Tolerance) == 3);
    CHECK(exit_code_for(ErrorKind::NoAdmissibleDivisor) == 4);
}

TEST_CASE("pipeline: report format") {
    CHECK(fmt17(0.1) == "0.10000000000000001");
    Report r;
    r.put("a.x", 1.5);
    r.put("b.y", cplx(1.0, -2.0));
    r.put("a.flag", true);
    std::ostringstream os;
    r.write(os);
    CHECK(os.str() == "[a]\nx = 1.5\nflag = true\n\n[b]\ny_re = 1\ny_im = -2\n");
}

TEST_CASE("pipeline: curve report round trip and solve") {
    RunConfig c = cfg_from(kConfig);
    c.out_dir = scratch("curve");
    std::ostringstream log;
    cmd_curve(c, log);
    CHECK(fs::exists(c.out_dir / "curve.report"));
    RunConfig s = c;
    s.curve_report = (c.out_dir / "curve.report").string();
    cmd_solve(s, log);
    std::ifstream is(c.out_dir / "solve.report");
    std::string text((std::istreambuf_iterator<char>(is)), {});
    CHECK(text.find("positive = true") != std::string::npos);
    // bit-identical reruns
    cmd_solve(s, log);
    std::ifstream is2(c.out_dir / "solve.report");
    CHECK(text == std::string((std::istreambuf_iterator<char>(is2)), {}));

    // non-solution data: O(1) residual, tolerance failure
    RunConfig bad = s;
    bad.u_scale = 1.2;
    CHECK(kind_of([&] { cmd_solve(bad, log); }) == ErrorKind::Tolerance);
}

TEST_CASE("pipeline: demo curve has no admissible divisor but a report") {
    RunConfig c = cfg_from(kConfig);
    c.c = 0.0;
    c.out_dir = scratch("demo");
    std::ostringstream log;
    CHECK(kind_of([&] { cmd_curve(c, log); }) == ErrorKind::NoAdmissibleDivisor);
    std::ifstream is(c.out_dir / "curve.report");
    std::string text((std::istreambuf_iterator<char>(is)), {});
    CHECK(text.find("admissible = false") != std::string::npos);
    CHECK(text.find("tau_im = 0.5") != std::string::npos);
    RunConfig d = c;
    d.c = 2.0;
    CHECK(kind_of([&] { cmd_curve(d, log); }) == ErrorKind::DegenerateCurve);
}

TEST_CASE("pipeline: surface outputs") {
    RunConfig c = cfg_from(kConfig);
    c.out_dir = scratch("surface");
    std::ostringstream log;
    cmd_surface(c, log);
    for (auto f : {"surface.csv", "coords.csv", "mesh.obj", "geometry.report", "geometry.csv"})
        CHECK(fs::exists(c.out_dir / f));
    // OBJ vertices on a sphere
    std::ifstream is(c.out_dir / "mesh.obj");
    std::string tag;
    double r0 = -1, worst = 0;
    int nv = 0, nf = 0;
    for (std::string line; std::getline(is, line);) {
        std::istringstream ls(line);
        ls >> tag;
        if (tag == "v") {
            double x, y, z;
            ls >> x >> y >> z;
            double r = std::sqrt(x * x + y * y + z * z);
            if (r0 < 0) r0 = r;
            worst = std::max(worst, std::abs(r - r0) / r0);
            ++nv;
        } else if (tag == "f") {
            ++nf;
        }
    }
    CHECK(nv == 36);
    CHECK(nf == 50);
    CHECK(worst < 1e-6);

    // the polynomial Killing field gives a curve: every point degenerate
    RunConfig k = c;
    k.field = "killing";
    CHECK(kind_of([&] { cmd_surface(k, log); }) == ErrorKind::DegenerateMetric);
    RunConfig m = c;
    m.lambda = std::polar(1.0, 0.7);
    cmd_surface(m, log);
}

TEST_CASE("pipeline: OBJ fan for masked corners") {
    GridSpec g;
    g.nx = g.ny = 3;
    std::vector<RVec> xyz(9, RVec::Zero(3));
    std::vector<bool> mask(9, false);
    mask[4] = true;  // centre point
    std::ostringstream os;
    write_obj(os, g, xyz, mask);
    std::string s = os.str();
    CHECK(std::count(s.begin(), s.end(), 'v') == 8);
    // each of the four cells loses one corner and keeps one triangle
    CHECK(std::count(s.begin(), s.end(), 'f') == 4);
}

TEST_CASE("pipeline: check suite and fault injection") {
    auto items = run_check_suite(false);
    CHECK(items.size() >= 10);
    for (auto& it : items) CHECK_MESSAGE(it.pass(), it.name);
    auto js = check_json(items);
    CHECK(js.find("\"all_pass\": true") != std::string::npos);
    CHECK(su2_lax_check(2, 3, 5, 0.01) > 1e-3);
    CHECK(su2_lax_check(2, 3, 5, 0.0) < 1e-9);
}
