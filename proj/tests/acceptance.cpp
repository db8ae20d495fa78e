// Acceptance run: one PASS/FAIL line per criterion, supplementary lines indented below.
// Exit status is nonzero only for failures that are not documented as unattainable.

#include "toda/curve.hpp"
#include "toda/geometry.hpp"
#include "toda/lax.hpp"
#include "toda/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace toda;
namespace fs = std::filesystem;

namespace {

// literal clauses that cannot hold as reference (analysis in the decisions ledger)
const std::set<int> kDocumentedFailures = {2, 4};

std::vector<int> g_failed;

std::string sci(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.2e", v);
    return b;
}

struct Clause {
    std::string what;
    double value;
    double tol;
    bool ok() const { return value < tol; }
};

void criterion(int k, const std::string& title, const std::vector<Clause>& cs) {
    bool ok = true;
    std::ostringstream os;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        ok = ok && cs[i].ok();
        os << (i ? "; " : "") << cs[i].what << ' ' << sci(cs[i].value) << (cs[i].ok() ? " < " : " >= ")
           << sci(cs[i].tol);
    }
    std::cout << "criterion " << k << ": " << (ok ? "PASS" : "FAIL") << "  " << title << " | " << os.str() << '\n';
    if (!ok) g_failed.push_back(k);
}

void info(const std::string& s) { std::cout << "    " << s << '\n'; }

double rel(cplx a, cplx b, double floor = 1.0) { return std::abs(a - b) / std::max(std::abs(b), floor); }

template <class F>
std::pair<cplx, cplx> fd_dd(F f, cplx z, double h) {
    cplx fx = (f(z + h) - f(z - h)) / (2 * h);
    cplx fy = (f(z + kI * h) - f(z - kI * h)) / (2 * h);
    return {0.5 * (fx - kI * fy), 0.5 * (fx + kI * fy)};
}

TodaThetaData curve_data(double c) {
    EllipticSpectralCurve C(1.0, c);
    return build_toda_theta_data(C, find_admissible_divisor(C)).theta;
}

GridSpec square(double x0, double y0, double h, int n) {
    GridSpec g;
    g.x0 = x0, g.y0 = y0, g.hx = g.hy = h, g.nx = g.ny = n;
    return g;
}

CMat seed_L0() {
    CMat L(2, 2);
    L << 0.3, cplx(0.2, 0.5), cplx(0.2, -0.5), -0.3;
    return L;
}

SurfaceField transported_surface(const TodaThetaData& d, const GridSpec& g, int jet_order = 2) {
    JetField f = evaluate_jet_field(d, g, jet_order);
    return build_X(transported_field(parallel_frame(theta_connection(d, 1.0), g, 2), seed_L0()),
                   connection_field(f, 1.0), g, 1.0, f.mask);
}

PeriodMatrix random_pm(std::mt19937_64& rng, int g) {
    std::uniform_real_distribution<double> U(-1, 1);
    for (;;) {
        RMat A = RMat::NullaryExpr(g, g, [&]() { return U(rng); });
        RMat R = RMat::NullaryExpr(g, g, [&]() { return U(rng); });
        CMat P = (0.5 * (R + R.transpose())).cast<cplx>() +
                 kI * (A * A.transpose() + 0.6 * RMat::Identity(g, g)).cast<cplx>();
        PeriodMatrix pm(P);
        if (pm.lambda_min_imag() >= 0.5) return pm;
    }
}

// ---------------------------------------------------------------------------------------------

void c1_theta() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> U(-1, 1);
    double w = 0;
    for (int trial = 0; trial < 100; ++trial) {
        int g = 1 + trial % 2;
        auto pm = random_pm(rng, g);
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
    cplx brute = 0;
    for (int n = -40; n <= 40; ++n) brute += std::exp(-kPi * double(n * n));
    cplx v = theta(0.0, kI);
    criterion(1, "theta quasi-periodicity and the tau = i value",
              {{"quasi-periodicity rel (100 draws, g=1,2)", w, 1e-10},
               {"|Theta(0|i) - 1.086434811213308|", std::abs(v - 1.086434811213308), 1e-9},
               {"|Theta(0|i) - lattice sum|", std::abs(v - brute), 1e-9}});
}

void c2_symbolic() {
    auto l = ds_recursion(2, su3_degree(1));
    auto pr = su3_reference_coeffs();
    int exact = 0, scalar_ok = 0;
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 3; ++k) exact += pr[j][k] == l[j][k];
    // l2..l4 up to a scalar: reference − derived must be the same polynomial on every diagonal slot
    for (int j = 2; j <= 4; ++j) {
        DiffPoly d0 = dp_traceless(pr[j][0] - l[j][0], 2);
        bool same = true;
        for (int k = 1; k < 3; ++k) same = same && dp_traceless(pr[j][k] - l[j][k], 2) == d0;
        scalar_ok += same;
    }
    auto L = su2_calL(2);
    DiffPoly E = DiffPoly::expo(0, 1);
    int calL = (L[0] == DiffPoly(1)) + (L[1] == -dp_derive(E, 2));
    criterion(2, "recursion vs reference coefficients",
              {{"l0,l1 slots not matching (of 6)", double(6 - exact), 0.5},
               {"l2..l4 not matching up to a scalar (of 3)", double(3 - scalar_ok), 0.5},
               {"calL0, calL1 not matching (of 2)", double(2 - calL), 0.5}});
    info("derived l2 = (2/3)(d^2 u_k - d^2 u_{k+1} - c2) cyclically; the reference l2..l4 fail the Lax identity");
    info("reference calL2 equals the recursion output: " + std::string(su2_calL2_reference() == L[2] ? "yes" : "no") +
         " (not required; recorded)");
}

void c3_lax() {
    double m1 = su2_lax_check(1, 10, 301), m2 = su2_lax_check(2, 10, 302), s3 = su3_lax_check(10, 303);
    criterion(3, "d-Lax identity on 10 random stationary jet assignments, 8 lambdas on |lambda|=1",
              {{"su(2) m=1", m1, 1e-9}, {"su(2) m=2", m2, 1e-9}, {"su(3) n=1", s3, 1e-9}});
    info("negative control, calL2 term perturbed by 1%: residual " + sci(su2_lax_check(2, 3, 304, 0.01)));
}

void c4_pipeline() {
    GridSpec g = square(-1.0, -1.0, 2.0 / 49, 50);
    std::string demo_status;
    double demo_res = INFINITY;
    try {
        auto d = curve_data(0.0);
        demo_res = toda_residual(evaluate_jet_field(d, g, 2)).max;
        demo_status = "ran";
    } catch (const Error& e) {
        demo_status = e.what();
    }
    auto d = curve_data(-3.0);
    auto f = evaluate_jet_field(d, g, 2);
    auto res = toda_residual(f);
    auto sign = h_sign_check(d, g);
    criterion(4, "genus-1 su(2) pipeline on the demo curve a0=1, c=0, 50x50 grid",
              {{"demo toda residual", demo_res, 1e-5}});
    info("demo curve: " + demo_status);
    info(std::string("supplementary curve a0=1, c=-3: toda residual ") + sci(res.max) + " (< 1e-5: " +
         (res.max < 1e-5 ? "yes" : "no") + "), h-sign " + (sign.positive ? "holds" : "fails") + " at " +
         std::to_string(sign.checked) + " points, " + std::to_string(f.masked_count()) + " masked");
    if (!(res.max < 1e-5) || !sign.positive) g_failed.push_back(-4);
}

void c5_conservation(const SurfaceField& s) {
    auto cur = conserved_current(s);
    double cons = conservation_residual(cur);
    const int n = s.grid.nx - 1;
    CMat p1 = reconstruct_by_integral(cur, staircase_path(0, 0, n, n, true));
    CMat p2 = reconstruct_by_integral(cur, staircase_path(0, 0, n, n, false));
    const CMat C = s.X[s.idx(0, 0)];
    double w = 0;
    std::mt19937_64 rng(505);
    std::uniform_int_distribution<int> U(1, n);
    for (int e = 0; e < 10; ++e) {
        int i = U(rng), j = U(rng);
        CMat R = reconstruct_by_integral(cur, staircase_path(0, 0, i, j, e % 2 == 0));
        w = std::max(w, (s.X[s.idx(i, j)] - R - C).norm());
    }
    criterion(5, "conservation and integral reconstruction (c=-3, transported Lax field, h=5e-4)",
              {{"dK - dbar K^dag", cons, 1e-5},
               {"path independence", (p1 - p2).norm(), 1e-5},
               {"direct - reconstructed - const (10 endpoints)", w, 1e-4}});
    info("iK^dag = dX, iK = dbar X consistency " + sci(current_consistency(cur, s)));
}

void c6_isospectral(const TodaThetaData& d, const SurfaceField& s) {
    auto ti = trace_invariants(s);
    double cp = 0;
    CVec c0;
    for (std::size_t p = 0; p < s.X.size(); ++p) {
        if (s.mask[p]) continue;
        CVec c = char_poly(s.X[p]);
        if (c0.size() == 0) c0 = c;
        for (Eigen::Index k = 1; k < c.size(); ++k) cp = std::max(cp, rel(c(k), c0(k), 1e-300 + std::abs(c0(k))));
    }
    // polynomial Killing field: char poly of L + rho(L) at several lambda
    GridSpec g = square(-0.3, 0.2, 1e-2, 11);
    JetField f = evaluate_jet_field(d, g, 2);
    std::vector<cplx> lams;
    for (int k = 0; k < 6; ++k) lams.push_back(std::polar(1.0, 0.4 + 1.1 * k));
    auto cf = characteristic_field(killing_field(d, f), f.mask, lams);

    RunConfig rc;
    rc.a0 = 1.0, rc.c = -3.0;
    rc.nx = rc.ny = 20;
    rc.L0 = seed_L0();
    rc.out_dir = fs::temp_directory_path() / "toda_acceptance_mesh";
    std::ostringstream log;
    cmd_surface(rc, log);
    std::ifstream obj(rc.out_dir / "mesh.obj");
    double r0 = -1, dev = 0;
    int nv = 0;
    for (std::string line; std::getline(obj, line);) {
        if (line.rfind("v ", 0) != 0) continue;
        std::istringstream ls(line.substr(2));
        double x, y, z;
        ls >> x >> y >> z;
        double r = std::sqrt(x * x + y * y + z * z);
        if (r0 < 0) r0 = r;
        dev = std::max(dev, std::abs(r - r0) / r0);
        ++nv;
    }
    criterion(6, "isospectrality and the hypersphere",
              {{"tr X^2 rel drift", ti.rel_drift[0], 1e-8},
               {"char-poly coefficient drift, transported X", cp, 1e-8},
               {"char-poly drift, Killing field over 6 lambdas", cf.max_drift, 1e-8},
               {"OBJ vertex radius rel deviation", dev, 1e-6}});
    info("OBJ mesh: " + std::to_string(nv) + " vertices; Killing field det(L+rho L) fit " + sci(cf.fit_residual) +
         " to p1=" + sci(cf.fit[0].real()) + " p0=" + sci(cf.fit[1].real()) + " p-1=" + sci(cf.fit[2].real()) +
         " (4(a0 lambda + c + conj(a0)/lambda) for a0=1, c=-3)");
}

void c7_geometry(const TodaThetaData& d) {
    SurfaceField s = transported_surface(d, square(-0.3, 0.2, 1e-3, 11));
    auto G = geometry_report(s);
    double hd = 0, kd = 0, kb = 0, kp = 0;
    for (std::size_t p = 0; p < s.X.size(); ++p) {
        if (G.g.flagged[p]) continue;
        double tr2 = (s.X[p] * s.X[p]).trace().real();
        double Hx = -2.0 * std::sqrt(2.0 / std::abs(tr2)), Kx = -2.0 / tr2;
        hd = std::max(hd, std::abs(G.H_norm[p] - Hx) / std::abs(Hx));
        kd = std::max(kd, std::abs(G.K.gauss[p] - Kx) / Kx);
        kb = std::max(kb, std::abs(G.K.brioschi[p] - Kx) / Kx);
        kp = std::max(kp, std::abs(G.K.reference[p] - Kx) / Kx);
    }
    double HH = G.H_stats.mean * G.H_stats.mean;
    criterion(7, "su(2) closed-form geometry (c=-3, transported Lax field)",
              {{"|II - cI|/max|I|", G.II_defect_max, 1e-6},
               {"H vs -2 sqrt(2/tr X^2) rel", hd, 1e-5},
               {"K vs -2/tr X^2 rel", kd, 1e-5},
               {"Willmore vs |H|^2 area rel", std::abs(G.W.W - HH * G.W.area) / G.W.W, 1e-6}});
    // FD-based intrinsic route and the reference expression
    SurfaceField s2 = transported_surface(d, square(-0.3, 0.2, 5e-4, 11));
    auto G2 = geometry_report(s2);
    double kb2 = 0;
    for (std::size_t p = 0; p < s2.X.size(); ++p) {
        if (G2.g.flagged[p]) continue;
        double Kx = -2.0 / (s2.X[p] * s2.X[p]).trace().real();
        kb2 = std::max(kb2, std::abs(G2.K.brioschi[p] - Kx) / Kx);
    }
    info("K from the Gauss equation (analytic); intrinsic Brioschi K with FD second derivatives: rel err " + sci(kb) +
         " at h=1e-3, " + sci(kb2) + " at h=5e-4");
    info("reference K expression: rel err " + sci(kp) + " (wrong formula, see ledger)");
    JetField f = evaluate_jet_field(d, square(-0.3, 0.2, 1e-3, 5), 2);
    try {
        first_form(build_X(eval_field(killing_field(d, f), 1.0), connection_field(f, 1.0), f.grid, 1.0, f.mask));
        info("Killing field surface: nondegenerate");
    } catch (const Error& e) {
        info(std::string("Killing field surface: ") + e.what() + " (the image is a curve)");
    }
}

void c8_frame() {
    auto ss = synth_surface(2, 7, square(0.1, -0.2, 5e-4, 9));
    auto m = first_form(ss.s);
    auto c = gauss_weingarten_check(diagonalize_X(ss.s), ss.s, m);
    auto s1 = synth_surface(1, 7, square(0.1, -0.2, 5e-4, 9));
    auto m1 = first_form(s1.s);
    auto f1 = su2_frame(s1.s, m1);
    double red = su2_reduction_defect(diagonalize_X(s1.s), s1.s, m1, f1);
    criterion(8, "su(3) frame machinery on a pure-gauge surface (h=5e-4)",
              {{"normal orthogonality", c.normal_ortho, 1e-8},
               {"Gauss-Weingarten residual", c.residual, 1e-5},
               {"alpha reference vs solve", c.alpha_agreement, 1e-9},
               {"su(2) reduction vs su2_frame", red, 1e-8}});
    info("reference nu/mu/chi determinants defect " + sci(c.reference_nu_defect) + ", reference d-coefficient defect " +
         sci(c.reference_d_defect) + ", reference su(2) M X-coefficients residual " + sci(f1.reference_residual) +
         " (see ledger)");
}

void c9_hygiene(const TodaThetaData& d) {
    const double h = 1e-4;
    double w_theta = 0, w_jet = 0, w_conn = 0, w_X = 0, w_g = 0;
    // theta: D^k Θ against central FD of D^{k−1}Θ along the last direction
    {
        std::mt19937_64 rng(909);
        std::uniform_real_distribution<double> U(-1, 1);
        auto pm = random_pm(rng, 2);
        CVec z(2), a(2), b(2), c(2);
        for (int i = 0; i < 2; ++i)
            z(i) = cplx(U(rng), 0.3 * U(rng)), a(i) = U(rng), b(i) = cplx(U(rng), U(rng)), c(i) = U(rng);
        std::vector<std::vector<CVec>> ds = {{a}, {a, b}, {a, b, c}};
        for (auto& dirs : ds) {
            std::vector<CVec> lower(dirs.begin(), dirs.end() - 1);
            const CVec& w = dirs.back();
            cplx an = theta_deriv(z, pm, dirs);
            auto low = [&](const CVec& q) { return lower.empty() ? theta(q, pm) : theta_deriv(q, pm, lower); };
            cplx fd = (low(z + h * w) - low(z - h * w)) / (2 * h);
            w_theta = std::max(w_theta, rel(fd, an));
        }
    }
    // u jets of order 1..3
    for (cplx xi : {cplx(0.3, -0.4), cplx(-0.7, 0.9)})
        for (int n = 0; n <= 1; ++n) {
            JetTable J = u_jets(d, n, xi, 3);
            for (int a = 0; a <= 2; ++a)
                for (int b = 0; a + b <= 2; ++b) {
                    auto fd = fd_dd([&](cplx z) { return u_jets(d, n, z, 2)[a][b]; }, xi, h);
                    w_jet = std::max({w_jet, rel(fd.first, J[a + 1][b]), rel(fd.second, J[a][b + 1])});
                }
        }
    // connection derivatives
    {
        cplx xi(0.2, -0.1);
        auto conn = theta_connection(d, std::polar(1.0, 0.8));
        GridSpec g = square(xi.real(), xi.imag(), 1.0, 1);
        auto cs = connection_field(evaluate_jet_field(d, g, 2), std::polar(1.0, 0.8))[0];
        for (int k = 0; k < 2; ++k) {
            auto fdA = [&](cplx z) { return k == 0 ? conn(z).first : conn(z).second; };
            CMat fx = (fdA(xi + h) - fdA(xi - h)) / (2 * h), fy = (fdA(xi + kI * h) - fdA(xi - kI * h)) / (2 * h);
            CMat dd = 0.5 * (fx - kI * fy), db = 0.5 * (fx + kI * fy);
            const CMat& an_d = k == 0 ? cs.dA : cs.dB;
            const CMat& an_db = k == 0 ? cs.dbA : cs.dbB;
            w_conn = std::max({w_conn, (dd - an_d).norm() / std::max(an_d.norm(), 1.0),
                               (db - an_db).norm() / std::max(an_db.norm(), 1.0)});
        }
    }
    // surface derivatives (orders 1, 2) and metric derivatives on a pure-gauge su(3) surface
    {
        auto ss = synth_surface(2, 13, square(0.05, 0.05, h, 3));
        const SurfaceField& s = ss.s;
        auto m = first_form(s);
        auto p = s.idx(1, 1);
        auto fd = [&](const std::vector<CMat>& v) {
            CMat fx = (v[s.idx(2, 1)] - v[s.idx(0, 1)]) / (2 * h), fy = (v[s.idx(1, 2)] - v[s.idx(1, 0)]) / (2 * h);
            return std::pair<CMat, CMat>{0.5 * (fx - kI * fy), 0.5 * (fx + kI * fy)};
        };
        auto chk = [&](const CMat& a, const CMat& b) { w_X = std::max(w_X, (a - b).norm() / std::max(b.norm(), 1e-3)); };
        auto [dX, dbX] = fd(s.X);
        chk(dX, s.dX[p]);
        chk(dbX, s.dbX[p]);
        auto [d2, ddb] = fd(s.dX);
        chk(d2, s.d2X[p]);
        chk(ddb, s.ddbX[p]);
        auto [dbd, db2] = fd(s.dbX);
        chk(dbd, s.ddbX[p]);
        chk(db2, s.db2X[p]);
        auto fs = [&](const std::vector<cplx>& v) {
            cplx fx = (v[s.idx(2, 1)] - v[s.idx(0, 1)]) / (2 * h), fy = (v[s.idx(1, 2)] - v[s.idx(1, 0)]) / (2 * h);
            return std::pair<cplx, cplx>{0.5 * (fx - kI * fy), 0.5 * (fx + kI * fy)};
        };
        MetricDerivs md = metric_derivatives(s, p);
        auto [g11d, g11db] = fs(m.g11);
        auto [g12d, g12db] = fs(m.g12);
        auto [g22d, g22db] = fs(m.g22);
        double sc = std::abs(m.g11[p]);
        w_g = std::max({std::abs(g11d - md.dg11), std::abs(g11db - md.dbg11), std::abs(g12d - md.dg12),
                        std::abs(g12db - md.dbg12), std::abs(g22d - md.dg22), std::abs(g22db - md.dbg22)}) /
              sc;
    }
    // refinement: FD-limited residuals at h and h/2
    auto cons = [&](double hh) { return conservation_residual(conserved_current(transported_surface(d, square(-0.3, 0.2, hh, 7)))); };
    auto gw = [&](double hh) {
        auto ss = synth_surface(2, 7, square(0.1, -0.2, hh, 5));
        return gauss_weingarten_check(diagonalize_X(ss.s), ss.s, first_form(ss.s)).residual;
    };
    auto bri = [&](double hh) {
        auto ss = synth_surface(1, 7, square(0.1, -0.2, hh, 5));
        auto G = geometry_report(ss.s);
        auto p = ss.s.idx(2, 2);
        return std::abs(G.K.brioschi[p] - G.K.gauss[p]);
    };
    double r_cons = cons(4e-3) / cons(2e-3), r_gw = gw(2e-3) / gw(1e-3), r_bri = bri(2e-3) / bri(1e-3);
    double worst_ratio = std::min({r_cons, r_gw, r_bri});
    criterion(9, "analytic derivatives vs central FD (orders 1-3) and second-order refinement",
              {{"theta D^1..D^3 rel", w_theta, 1e-6},
               {"u jets order 1..3 rel", w_jet, 1e-6},
               {"dA, dbar A, dB, dbar B rel", w_conn, 1e-6},
               {"dX, second derivatives of X rel", w_X, 1e-6},
               {"metric derivatives rel", w_g, 1e-6},
               {"3 / min refinement ratio", 3.0 / worst_ratio, 1.0}});
    info("refinement ratios (h -> h/2, ideal 4): conservation " + sci(r_cons) + ", Gauss-Weingarten " + sci(r_gw) +
         ", intrinsic K " + sci(r_bri));
}

}  // namespace

int main() {
    auto t0 = std::chrono::steady_clock::now();
    std::cout << std::unitbuf;
    try {
        c1_theta();
        c2_symbolic();
        c3_lax();
        c4_pipeline();
        auto d = curve_data(-3.0);
        SurfaceField s = transported_surface(d, square(-0.3, 0.2, 5e-4, 31));
        c5_conservation(s);
        c6_isospectral(d, s);
        c7_geometry(d);
        c8_frame();
        c9_hygiene(d);
    } catch (const std::exception& e) {
        std::cout << "acceptance aborted: " << e.what() << '\n';
        return 1;
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    int unexpected = 0;
    for (int k : g_failed)
        if (!kDocumentedFailures.count(k)) ++unexpected;
    std::cout << "summary: " << 9 - static_cast<int>(std::count_if(g_failed.begin(), g_failed.end(),
                                                                       [](int k) { return k > 0; }))
              << "/9 criteria pass; documented failures: 2 (reference l2..l4), 4 (demo curve has no admissible "
                 "divisor); unexpected failures: "
              << unexpected << "; " << sci(secs) << " s\n";
    return unexpected == 0 ? 0 : 1;
}
