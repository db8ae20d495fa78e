#include "toda/pipeline.hpp"

#include "toda/curve.hpp"
#include "toda/lax.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

namespace toda {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

template <class T>
T required(const pt::ptree& t, const std::string& key) {
    auto v = t.get_optional<std::string>(key);
    if (!v) throw Error(ErrorKind::Validation, "missing config key '" + key + "'");
    try {
        return t.get<T>(key);
    } catch (const pt::ptree_error&) {
        throw Error(ErrorKind::Validation, "bad value for config key '" + key + "': " + *v);
    }
}

template <class T>
T optional(const pt::ptree& t, const std::string& key, T def) {
    if (!t.get_optional<std::string>(key)) return def;
    return required<T>(t, key);
}

std::ofstream open_out(const fs::path& p) {
    fs::create_directories(p.parent_path());
    std::ofstream os(p);
    if (!os) throw Error(ErrorKind::Validation, "cannot write " + p.string());
    return os;
}

std::vector<cplx> unit_lambdas(int k) {
    std::vector<cplx> v;
    for (int i = 0; i < k; ++i) v.push_back(std::polar(1.0, 2 * kPi * i / k + 0.3));
    return v;
}

SiteJets random_stationary_jets(std::mt19937_64& rng, int N, const DiagPoly& lM) {
    std::uniform_real_distribution<double> U(-1, 1);
    std::vector<std::vector<cplx>> fr(static_cast<std::size_t>(N), std::vector<cplx>(12));
    for (auto& s : fr)
        for (auto& v : s) v = U(rng);
    auto j = make_site_jets(N, fr);
    make_stationary(lM, j);
    return j;
}

TodaThetaData theta_data(const RunConfig& cfg) {
    if (!cfg.curve_report.empty()) return read_theta_report(cfg.curve_report);
    EllipticSpectralCurve C(cfg.a0, cfg.c);
    C.validate();
    return build_toda_theta_data(C, find_admissible_divisor(C)).theta;
}

void put_stats(Report& r, const std::string& key, const ScalarStats& s) {
    r.put(key + "_min", s.min);
    r.put(key + "_max", s.max);
    r.put(key + "_mean", s.mean);
    r.put(key + "_stdev", s.stdev);
}

}  // namespace

// ----- config -----

GridSpec RunConfig::grid() const {
    GridSpec g;
    g.x0 = x_min, g.y0 = y_min;
    g.nx = nx, g.ny = ny;
    g.hx = nx > 1 ? (x_max - x_min) / (nx - 1) : 0.0;
    g.hy = ny > 1 ? (y_max - y_min) / (ny - 1) : 0.0;
    return g;
}

void RunConfig::validate() const {
    auto bad = [](const std::string& k, const std::string& why) {
        throw Error(ErrorKind::Validation, "config key '" + k + "': " + why);
    };
    if (nx < 4) bad("grid.nx", "need at least 4 points");
    if (ny < 4) bad("grid.ny", "need at least 4 points");
    if (!(x_max > x_min)) bad("grid.x_max", "must exceed grid.x_min");
    if (!(y_max > y_min)) bad("grid.y_max", "must exceed grid.y_min");
    if (!(residual_tol > 0)) bad("tolerances.residual", "must be positive");
    if (!(sphere_tol > 0)) bad("tolerances.sphere", "must be positive");
    if (N < 1) bad("model.N", "must be >= 1");
    if (m < 1) bad("model.m", "must be >= 1");
    if (source != "theta" && source != "synthetic") bad("surface.source", "expected theta or synthetic");
    if (field != "transported" && field != "killing") bad("surface.field", "expected transported or killing");
    if (source == "theta" && N != 1) bad("model.N", "theta data are genus-1 su(2): N must be 1");
    if (field == "killing" && m != 1) bad("model.m", "the polynomial Killing field has degree m = 1");
    if (std::abs(std::abs(lambda) - 1.0) > 1e-12)
        throw Error(ErrorKind::OffUnitCircle, "config key 'model.lambda': |lambda| must be 1");
}

RunConfig parse_config(std::istream& is) {
    pt::ptree t;
    try {
        pt::read_ini(is, t);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorKind::Validation, std::string("config syntax: ") + e.what());
    }
    RunConfig c;
    c.curve_report = optional<std::string>(t, "curve.report", "");
    if (c.curve_report.empty()) {
        c.a0 = {required<double>(t, "curve.a0_re"), required<double>(t, "curve.a0_im")};
        c.c = required<double>(t, "curve.c");
    }
    c.N = optional<int>(t, "model.N", 1);
    c.m = optional<int>(t, "model.m", 1);
    c.lambda = {optional<double>(t, "model.lambda_re", 1.0), optional<double>(t, "model.lambda_im", 0.0)};
    c.x_min = required<double>(t, "grid.x_min");
    c.x_max = required<double>(t, "grid.x_max");
    c.y_min = required<double>(t, "grid.y_min");
    c.y_max = required<double>(t, "grid.y_max");
    c.nx = required<int>(t, "grid.nx");
    c.ny = required<int>(t, "grid.ny");
    c.residual_tol = optional<double>(t, "tolerances.residual", 1e-5);
    c.sphere_tol = optional<double>(t, "tolerances.sphere", 1e-6);
    c.source = optional<std::string>(t, "surface.source", "theta");
    c.field = optional<std::string>(t, "surface.field", "transported");
    c.seed = optional<std::uint64_t>(t, "surface.seed", 7);
    double d = optional<double>(t, "surface.l0_diag", 0.3), ore = optional<double>(t, "surface.l0_off_re", 0.2),
           oim = optional<double>(t, "surface.l0_off_im", 0.5);
    c.L0.resize(2, 2);
    c.L0 << d, cplx(ore, oim), cplx(ore, -oim), -d;
    c.u_scale = optional<double>(t, "solve.u_scale", 1.0);
    c.out_dir = optional<std::string>(t, "output.dir", "out");
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorKind::Validation, "cannot read config " + path.string());
    RunConfig c = parse_config(is);
    // a relative curve report is resolved against the config's directory
    if (!c.curve_report.empty() && fs::path(c.curve_report).is_relative())
        c.curve_report = (path.parent_path() / c.curve_report).string();
    return c;
}

// ----- reports -----

std::string fmt17(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void Report::put(const std::string& key, double v) { entries_.emplace_back(key, fmt17(v)); }
void Report::put(const std::string& key, cplx v) {
    put(key + "_re", v.real());
    put(key + "_im", v.imag());
}
void Report::put(const std::string& key, int v) { entries_.emplace_back(key, std::to_string(v)); }
void Report::put(const std::string& key, bool v) { entries_.emplace_back(key, v ? "true" : "false"); }
void Report::put(const std::string& key, const std::string& v) { entries_.emplace_back(key, v); }

void Report::write(std::ostream& os) const {
    // sections in first-appearance order, keys in insertion order
    std::vector<std::string> sections;
    for (auto& [k, v] : entries_) {
        std::string s = k.substr(0, k.find('.'));
        if (std::find(sections.begin(), sections.end(), s) == sections.end()) sections.push_back(s);
    }
    for (std::size_t i = 0; i < sections.size(); ++i) {
        if (i) os << '\n';
        os << '[' << sections[i] << "]\n";
        for (auto& [k, v] : entries_)
            if (k.substr(0, k.find('.')) == sections[i]) os << k.substr(k.find('.') + 1) << " = " << v << '\n';
    }
}

void Report::write(const fs::path& path) const {
    auto os = open_out(path);
    write(os);
}

TodaThetaData read_theta_report(const fs::path& path) {
    pt::ptree t;
    try {
        pt::read_ini(path.string(), t);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorKind::Validation, std::string("curve report: ") + e.what());
    }
    auto c = [&](const std::string& k) { return cplx(required<double>(t, k + "_re"), required<double>(t, k + "_im")); };
    auto v1 = [&](const std::string& k) {
        CVec v(1);
        v(0) = c(k);
        return v;
    };
    if (!required<bool>(t, "divisor.admissible"))
        throw Error(ErrorKind::NoAdmissibleDivisor, "curve report has no admissible divisor");
    TodaThetaData d;
    d.Pi = PeriodMatrix::genus1(c("theta.tau"));
    d.W_inf = v1("theta.W_inf");
    d.W_0 = v1("theta.W_0");
    d.Delta = v1("theta.Delta");
    d.B1 = v1("theta.B1");
    d.B2 = v1("theta.B2");
    d.c_const = required<double>(t, "theta.c_const");
    d.cn_const = required<double>(t, "theta.cn_const");
    d.N = required<int>(t, "theta.N");
    d.validate();
    return d;
}

// ----- commands -----

void cmd_curve(const RunConfig& cfg, std::ostream& log) {
    if (!cfg.curve_report.empty()) throw Error(ErrorKind::Validation, "curve needs curve.a0_re/a0_im/c, not a report");
    EllipticSpectralCurve C(cfg.a0, cfg.c);
    C.validate();
    Report r;
    r.put("curve.a0", cfg.a0);
    r.put("curve.c", cfg.c);
    auto br = branch_points(C);  // DegenerateCurve
    r.put("branch.r1", br.r1);
    r.put("branch.r2", br.r2);
    auto per = cycle_periods(C);
    r.put("periods.tau", per.tau);
    r.put("periods.A0", per.A0);
    r.put("periods.B0", per.B0);
    log << "curve: tau = " << fmt17(per.tau.real()) << " + " << fmt17(per.tau.imag()) << "i\n";
    const fs::path out = cfg.out_dir / "curve.report";
    CurvePoint gamma;
    try {
        gamma = find_admissible_divisor(C);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoAdmissibleDivisor) throw;
        r.put("divisor.admissible", false);
        r.put("divisor.reason", std::string(e.what()));
        r.write(out);
        throw;
    }
    auto sol = build_toda_theta_data(C, gamma);
    const Genus1Data& g = sol.g1;
    r.put("divisor.admissible", true);
    r.put("divisor.lambda", gamma.lambda);
    r.put("divisor.y", gamma.y);
    r.put("genus1.tau", g.tau);
    r.put("genus1.U_Q0", g.U_Q0);
    r.put("genus1.U_Qinf", g.U_Qinf);
    r.put("genus1.U_D", g.U_D);
    r.put("genus1.B1", g.B1);
    r.put("genus1.B2", g.B2);
    r.put("genus1.riemann_K", g.riemann_K);
    r.put("genus1.s0", g.s0);
    r.put("genus1.s_inf", g.s_inf);
    r.put("genus1.c_const", g.c_const);
    r.put("genus1.cn_const", g.cn_const);
    r.put("genus1.A0", g.A0);
    r.put("genus1.rho_lift", g.rho_lift);
    const TodaThetaData& d = sol.theta;
    r.put("theta.tau", d.Pi.Pi(0, 0));
    r.put("theta.W_inf", d.W_inf(0));
    r.put("theta.W_0", d.W_0(0));
    r.put("theta.Delta", d.Delta(0));
    r.put("theta.B1", d.B1(0));
    r.put("theta.B2", d.B2(0));
    r.put("theta.c_const", d.c_const);
    r.put("theta.cn_const", d.cn_const);
    r.put("theta.N", d.N);
    r.write(out);
    log << "curve: admissible divisor at lambda = " << fmt17(gamma.lambda.real()) << "; wrote " << out.string()
        << '\n';
}

void cmd_solve(const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    TodaThetaData d = theta_data(cfg);
    GridSpec g = cfg.grid();
    JetField f = evaluate_jet_field(d, g, 4);
    if (cfg.u_scale != 1.0)
        for (auto& site : f.values)
            for (auto& tab : site)
                for (auto& row : tab)
                    for (auto& v : row) v *= cfg.u_scale;
    auto res = toda_residual(f);
    auto sign = h_sign_check(d, g);
    {
        auto os = open_out(cfg.out_dir / "jets.csv");
        write_jet_csv(os, f);
    }
    Report r;
    r.put("grid.nx", g.nx);
    r.put("grid.ny", g.ny);
    r.put("grid.hx", g.hx);
    r.put("grid.hy", g.hy);
    r.put("residual.max", res.max);
    r.put("residual.mean", res.mean);
    for (std::size_t k = 0; k < res.per_site_max.size(); ++k)
        r.put("residual.site" + std::to_string(k) + "_max", res.per_site_max[k]);
    r.put("residual.points", res.points);
    r.put("residual.tolerance", cfg.residual_tol);
    r.put("mask.masked", f.masked_count());
    r.put("mask.total", g.size());
    r.put("sign.positive", sign.positive);
    r.put("sign.checked", sign.checked);
    r.put("sign.flagged", sign.flagged);
    r.put("sign.worst_phase", sign.worst_phase);
    r.write(cfg.out_dir / "solve.report");
    log << "solve: toda residual " << fmt17(res.max) << " (tolerance " << fmt17(cfg.residual_tol) << "), "
        << f.masked_count() << " masked points\n";
    if (!(res.max < cfg.residual_tol))
        throw Error(ErrorKind::Tolerance, "solve: toda residual " + fmt17(res.max) + " exceeds tolerance " +
                                              fmt17(cfg.residual_tol));
    if (!sign.positive) throw Error(ErrorKind::Tolerance, "solve: h-sign condition fails");
}

void cmd_surface(const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    GridSpec g = cfg.grid();
    SurfaceField s;
    if (cfg.source == "synthetic") {
        s = synth_surface(cfg.N, cfg.seed, g).s;
    } else {
        TodaThetaData d = theta_data(cfg);
        JetField f = evaluate_jet_field(d, g, 2);
        auto conn = connection_field(f, cfg.lambda);
        std::vector<CMat> L;
        if (cfg.field == "killing") {
            L = eval_field(killing_field(d, f), cfg.lambda);
        } else {
            L = transported_field(parallel_frame(theta_connection(d, cfg.lambda), g, 2), cfg.L0);
        }
        s = build_X(L, conn, g, cfg.lambda, f.mask);
    }
    log << "surface: " << s.n << "x" << s.n << " field on " << g.nx << "x" << g.ny << " grid, " << s.masked_count()
        << " masked\n";

    auto basis = su_basis(s.n);
    std::vector<RVec> xyz(s.X.size());
    {
        auto os = open_out(cfg.out_dir / "surface.csv");
        auto oc = open_out(cfg.out_dir / "coords.csv");
        os << std::setprecision(17) << "x,y,mask";
        oc << std::setprecision(17) << "x,y,mask";
        for (int a = 0; a < s.n; ++a)
            for (int b = 0; b < s.n; ++b) os << ",X" << a << b << "_re,X" << a << b << "_im";
        for (std::size_t k = 0; k < basis.size(); ++k) oc << ",x" << k + 1;
        os << '\n';
        oc << '\n';
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                auto p = s.idx(i, j);
                cplx z = g.point(i, j);
                os << z.real() << ',' << z.imag() << ',' << int(s.mask[p]);
                oc << z.real() << ',' << z.imag() << ',' << int(s.mask[p]);
                if (!s.mask[p]) xyz[p] = su_coordinates(s.X[p], basis);
                for (int a = 0; a < s.n; ++a)
                    for (int b = 0; b < s.n; ++b) {
                        cplx v = s.mask[p] ? cplx(NAN, NAN) : s.X[p](a, b);
                        os << ',' << v.real() << ',' << v.imag();
                    }
                for (std::size_t k = 0; k < basis.size(); ++k)
                    oc << ',' << (s.mask[p] ? NAN : xyz[p](static_cast<Eigen::Index>(k)));
                os << '\n';
                oc << '\n';
            }
    }
    if (s.n == 2) {
        auto os = open_out(cfg.out_dir / "mesh.obj");
        write_obj(os, g, xyz, s.mask);
    }

    Report r;
    r.put("surface.n", s.n);
    r.put("surface.source", cfg.source);
    r.put("surface.field", cfg.source == "theta" ? cfg.field : std::string("pure_gauge"));
    r.put("surface.lambda", cfg.lambda);
    r.put("surface.masked", s.masked_count());
    r.put("surface.antihermitian_defect", s.antihermitian_defect());
    r.put("surface.reality_defect", s.reality_defect());
    auto ti = trace_invariants(s);
    for (std::size_t k = 0; k < ti.rel_drift.size(); ++k) {
        r.put("invariants.trX" + std::to_string(k + 2) + "_mean", ti.mean[k]);
        r.put("invariants.trX" + std::to_string(k + 2) + "_rel_drift", ti.rel_drift[k]);
    }
    auto cur = conserved_current(s);
    r.put("invariants.current_consistency", current_consistency(cur, s));
    r.put("invariants.conservation_residual", conservation_residual(cur));
    auto tid = trace_identities(s);
    r.put("invariants.trace_identity_1", tid.d1);
    r.put("invariants.trace_identity_2", tid.d2);
    r.put("invariants.trace_identity_3", tid.d3);
    r.put("invariants.trace_identity_scale", tid.scale);

    std::vector<double> rad(s.X.size(), NAN);
    for (std::size_t p = 0; p < s.X.size(); ++p)
        if (!s.mask[p]) rad[p] = xyz[p].norm();
    auto rs = scalar_stats(rad, s.mask);
    double sphere_dev = (rs.max - rs.min) / rs.mean;
    put_stats(r, "sphere.radius", rs);
    r.put("sphere.rel_deviation", sphere_dev);
    r.put("sphere.tolerance", cfg.sphere_tol);

    std::optional<Error> fatal;
    try {
        GeometryReport G = geometry_report(s);
        r.put("metric.degenerate", G.degenerate);
        r.put("metric.reality_defect", G.g.reality_defect());
        put_stats(r, "metric.abs_g11", G.g11_abs);
        put_stats(r, "metric.abs_detG", G.detG_abs);
        put_stats(r, "curvature.H", G.H_stats);
        put_stats(r, "curvature.K", G.K_gauss);
        put_stats(r, "curvature.K_intrinsic", G.K_brioschi);
        if (s.n == 2) r.put("curvature.II_defect_max", G.II_defect_max);
        r.put("willmore.W", G.W.W);
        r.put("willmore.area", G.W.area);
        auto op = open_out(cfg.out_dir / "geometry.csv");
        op << std::setprecision(17) << "x,y,flag,g11_re,g11_im,g12_re,g12_im,g22_re,g22_im,H,K,K_intrinsic\n";
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                auto p = s.idx(i, j);
                cplx z = g.point(i, j);
                op << z.real() << ',' << z.imag() << ',' << int(G.g.flagged[p]) << ',' << G.g.g11[p].real() << ','
                   << G.g.g11[p].imag() << ',' << G.g.g12[p].real() << ',' << G.g.g12[p].imag() << ','
                   << G.g.g22[p].real() << ',' << G.g.g22[p].imag() << ',' << G.H_norm[p] << ',' << G.K.gauss[p]
                   << ',' << G.K.brioschi[p] << '\n';
            }
        log << "surface: H mean " << fmt17(G.H_stats.mean) << ", K mean " << fmt17(G.K_gauss.mean) << ", W "
            << fmt17(G.W.W) << '\n';
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateMetric) throw;
        r.put("metric.degenerate", static_cast<int>(s.mask.size()) - s.masked_count());
        r.put("metric.status", std::string(e.what()));
        fatal = e;
    }
    r.write(cfg.out_dir / "geometry.report");
    log << "surface: sphere radius deviation " << fmt17(sphere_dev) << "; wrote " << (cfg.out_dir / "geometry.report").string()
        << '\n';
    if (fatal) throw *fatal;
    if (!(sphere_dev < cfg.sphere_tol))
        throw Error(ErrorKind::Tolerance, "surface: sphere radius deviation " + fmt17(sphere_dev) +
                                              " exceeds tolerance " + fmt17(cfg.sphere_tol));
}

// ----- OBJ -----

void write_obj(std::ostream& os, const GridSpec& g, const std::vector<RVec>& xyz, const std::vector<bool>& mask) {
    os << std::setprecision(17);
    std::vector<int> vid(mask.size(), 0);
    int next = 1;
    for (std::size_t p = 0; p < mask.size(); ++p) {
        if (mask[p]) continue;
        const RVec& v = xyz[p];
        os << "v " << v(0) << ' ' << v(1) << ' ' << v(2) << '\n';
        vid[p] = next++;
    }
    auto id = [&](int i, int j) { return vid[static_cast<std::size_t>(j * g.nx + i)]; };
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            // corners counter-clockwise: (i,j), (i+1,j), (i+1,j+1), (i,j+1)
            int c[4] = {id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)};
            int live = (c[0] > 0) + (c[1] > 0) + (c[2] > 0) + (c[3] > 0);
            if (live == 4) {
                os << "f " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
                os << "f " << c[0] << ' ' << c[2] << ' ' << c[3] << '\n';
            } else if (live == 3) {
                os << 'f';
                for (int k : c)
                    if (k > 0) os << ' ' << k;
                os << '\n';
            }
        }
}

// ----- invariant suite -----

double su2_lax_check(int m, int trials, std::uint64_t seed, double eps) {
    std::mt19937_64 rng(seed);
    auto l = ds_recursion(1, su2_degree(m));
    PQR pqr = su2_PQR(m);
    if (eps != 0.0) {
        if (m != 2) throw Error(ErrorKind::Validation, "fault injection needs m = 2");
        Rational e(static_cast<long long>(std::llround(eps * 1e9)), 1000000000LL);
        pqr.Q[0] += e * dp_negate_site(su2_calL(2)[2], 0) * DiffPoly::expo(0, 1);
    }
    auto L = su2_L_from_PQR(pqr);
    auto lams = unit_lambdas(8);
    double w = 0;
    for (int t = 0; t < trials; ++t) w = std::max(w, lax_residual_xi_ungauged(L, random_stationary_jets(rng, 1, l.back()), lams));
    return w;
}

double su3_lax_check(int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto l = ds_recursion(2, su3_degree(1));
    auto Lh = L_hat(l);
    auto lams = unit_lambdas(8);
    double w = 0;
    for (int t = 0; t < trials; ++t) w = std::max(w, lax_residual_xi(Lh, random_stationary_jets(rng, 2, l.back()), lams));
    return w;
}

std::vector<CheckItem> run_check_suite(bool inject_fault) {
    std::vector<CheckItem> out;
    // theta quasi-periodicity on random (z, Π), g = 1, 2
    {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> U(-1, 1);
        double w = 0;
        for (int trial = 0; trial < 100; ++trial) {
            int g = 1 + trial % 2;
            PeriodMatrix pm;
            for (;;) {
                RMat A = RMat::NullaryExpr(g, g, [&]() { return U(rng); });
                RMat R = RMat::NullaryExpr(g, g, [&]() { return U(rng); });
                CMat P = (0.5 * (R + R.transpose())).cast<cplx>() +
                         kI * (A * A.transpose() + 0.6 * RMat::Identity(g, g)).cast<cplx>();
                pm = PeriodMatrix(P);
                if (pm.lambda_min_imag() >= 0.5) break;
            }
            CVec z(g);
            for (int i = 0; i < g; ++i) z(i) = cplx(U(rng), 0.5 * U(rng));
            cplx th = theta(z, pm);
            for (int k = 0; k < g; ++k) {
                CVec e = CVec::Zero(g);
                e(k) = 1.0;
                w = std::max(w, std::abs(theta(z + e, pm) - th) / std::abs(th));
                cplx f = std::exp(2.0 * kPi * kI * (-z(k) - pm.Pi(k, k) / 2.0));
                cplx lhs = theta(z + pm.Pi.col(k), pm);
                w = std::max(w, std::abs(lhs - f * th) / std::abs(lhs));
            }
        }
        out.push_back({"theta_quasi_periodicity", w, 1e-10});
        out.push_back({"theta_value_tau_i", std::abs(theta(0.0, kI) - 1.086434811213308), 1e-9});
    }
    // ∂-Lax identities
    out.push_back({"lax_su2_m1", su2_lax_check(1, 10, 21), 1e-9});
    out.push_back({"lax_su2_m2", su2_lax_check(2, 10, 22, inject_fault ? 0.01 : 0.0), 1e-9});
    out.push_back({"lax_su3_n1", su3_lax_check(10, 23), 1e-9});
    // pure-gauge su(3) frame
    {
        GridSpec g;
        g.x0 = 0.1, g.y0 = -0.2, g.hx = g.hy = 5e-4, g.nx = g.ny = 9;
        auto ss = synth_surface(2, 7, g);
        auto m = first_form(ss.s);
        auto c = gauss_weingarten_check(diagonalize_X(ss.s), ss.s, m);
        out.push_back({"su3_normal_orthogonality", c.normal_ortho, 1e-8});
        out.push_back({"su3_gauss_weingarten_residual", c.residual, 1e-5});
        out.push_back({"su3_christoffel_agreement", c.alpha_agreement, 1e-9});
    }
    // su(2) closed forms on a pure-gauge sphere patch
    {
        GridSpec g;
        g.x0 = 0.1, g.y0 = -0.2, g.hx = g.hy = 1e-3, g.nx = g.ny = 9;
        auto ss = synth_surface(1, 7, g);
        const SurfaceField& s = ss.s;
        auto G = geometry_report(s);
        double tr2 = (s.X[0] * s.X[0]).trace().real();
        double hd = 0, kd = 0;
        for (std::size_t p = 0; p < s.X.size(); ++p) {
            if (G.g.flagged[p]) continue;
            hd = std::max(hd, std::abs(G.H_norm[p] + 2.0 * std::sqrt(2.0 / std::abs(tr2))));
            kd = std::max(kd, std::abs(G.K.gauss[p] + 2.0 / tr2) / std::abs(2.0 / tr2));
        }
        out.push_back({"su2_second_form_proportional", G.II_defect_max, 1e-6});
        out.push_back({"su2_mean_curvature", hd, 1e-5});
        out.push_back({"su2_gaussian_curvature", kd, 1e-5});
        out.push_back({"su2_willmore", std::abs(G.W.W - G.H_stats.mean * G.H_stats.mean * G.W.area) / G.W.W, 1e-6});
    }
    return out;
}

std::string check_json(const std::vector<CheckItem>& items) {
    nlohmann::ordered_json j;
    bool all = true;
    j["properties"] = nlohmann::ordered_json::array();
    for (auto& it : items) {
        all = all && it.pass();
        j["properties"].push_back({{"name", it.name},
                                   {"value", it.value},
                                   {"tolerance", it.tolerance},
                                   {"comparison", it.upper ? "<" : ">"},
                                   {"pass", it.pass()}});
    }
    j["all_pass"] = all;
    return j.dump(2);
}

}  // namespace toda
