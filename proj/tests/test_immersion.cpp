#include "doctest.h"
#include "toda/curve.hpp"
#include "toda/geometry.hpp"

using namespace toda;

namespace {

struct Demo {
    TodaThetaData d;
    GridSpec g;
    JetField f;
    std::vector<ConnectionSample> conn;
};

const Demo& demo() {
    static const Demo D = [] {
        Demo r;
        EllipticSpectralCurve C(1.0, -3.0);
        r.d = build_toda_theta_data(C, find_admissible_divisor(C)).theta;
        r.g.x0 = -0.3;
        r.g.y0 = 0.2;
        r.g.hx = r.g.hy = 1e-3;
        r.g.nx = r.g.ny = 13;
        r.f = evaluate_jet_field(r.d, r.g, 2);
        r.conn = connection_field(r.f, 1.0);
        return r;
    }();
    return D;
}

CMat L0() {
    CMat L(2, 2);
    L << 0.3, cplx(0.2, 0.5), cplx(0.2, -0.5), -0.3;
    return L;
}

const SurfaceField& transported() {
    static const SurfaceField s = [] {
        const Demo& D = demo();
        auto Phi = parallel_frame(theta_connection(D.d, 1.0), D.g, 2, 4);
        return build_X(transported_field(Phi, L0()), D.conn, D.g, 1.0, D.f.mask);
    }();
    return s;
}

CMat fd_d(const SurfaceField& s, const std::vector<CMat>& v, int i, int j) {
    CMat fx = (v[s.idx(i + 1, j)] - v[s.idx(i - 1, j)]) / (2 * s.grid.hx);
    CMat fy = (v[s.idx(i, j + 1)] - v[s.idx(i, j - 1)]) / (2 * s.grid.hy);
    return 0.5 * (fx - kI * fy);
}

}  // namespace

TEST_CASE("immersion: build_X basics") {
    const Demo& D = demo();
    std::vector<CMat> L(static_cast<std::size_t>(D.g.size()), L0());
    // a hermitian L gives X = 2iL
    auto s = build_X(L, D.conn, D.g, 1.0, D.f.mask);
    CHECK((s.X[0] - 2.0 * kI * L0()).norm() < 1e-14);
    CHECK(s.antihermitian_defect() < 1e-12);
    CHECK(s.reality_defect() < 1e-12);
    CHECK_THROWS_AS(build_X(L, D.conn, D.g, 2.0, D.f.mask), Error);
    try {
        build_X(L, D.conn, D.g, cplx(0.0, 1.0 + 1e-9), D.f.mask);
        FAIL("expected OffUnitCircle");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::OffUnitCircle);
    }
    // diagonal X and diagonal A commute
    CMat Xd = CMat::Zero(2, 2), Ad = CMat::Zero(2, 2);
    Xd(0, 0) = kI, Xd(1, 1) = -kI;
    Ad(0, 0) = 0.7, Ad(1, 1) = -0.7;
    CHECK(tangent_fields(Xd, Ad, Ad).first.norm() == 0.0);
}

TEST_CASE("immersion: Killing field of the genus-1 solution") {
    const Demo& D = demo();
    auto L = killing_field(D.d, D.f);
    auto s = build_X(eval_field(L, 1.0), D.conn, D.g, 1.0, D.f.mask);
    CHECK(s.antihermitian_defect() < 1e-12);
    // L is hermitian on the unit circle, so X = 2iL
    CHECK((s.X[5] - 2.0 * kI * L[5].eval(1.0)).norm() < 1e-12);
    // FD oracle for the tangents
    double w = 0;
    for (int j = 2; j < 11; j += 4)
        for (int i = 2; i < 11; i += 4)
            w = std::max(w, (fd_d(s, s.X, i, j) - s.dX[s.idx(i, j)]).norm() / s.dX[s.idx(i, j)].norm());
    CHECK(w < 1e-5);
    // spectral curve: det(L + ρL) = 4(a0λ + c + ā0/λ) for a0 = 1, c = −3
    std::vector<cplx> lams;
    for (int k = 0; k < 8; ++k) lams.push_back(std::polar(1.0, 0.3 + 0.7 * k));
    auto cf = characteristic_field(L, D.f.mask, lams);
    CHECK(cf.fit_residual < 1e-6);
    CHECK(cf.max_drift < 1e-8);
    CHECK(std::abs(cf.fit[0] - 4.0) < 1e-8);
    CHECK(std::abs(cf.fit[1] + 12.0) < 1e-8);
    CHECK(std::abs(cf.fit[2] - 4.0) < 1e-8);
    // the image is a curve: u depends on one real combination of x and y
    auto m = [&] {
        try {
            first_form(s);
            return false;
        } catch (const Error& e) {
            return e.kind() == ErrorKind::DegenerateMetric;
        }
    }();
    CHECK(m);
}

TEST_CASE("immersion: transported Lax field") {
    const SurfaceField& s = transported();
    CHECK(s.antihermitian_defect() < 1e-12);
    CHECK(s.reality_defect() < 1e-12);
    double w = 0, w2 = 0;
    for (int j = 1; j < 12; j += 5)
        for (int i = 1; i < 12; i += 5) {
            w = std::max(w, (fd_d(s, s.X, i, j) - s.dX[s.idx(i, j)]).norm() / s.dX[s.idx(i, j)].norm());
            // second derivatives from the analytic ∂A
            w2 = std::max(w2, (fd_d(s, s.dX, i, j) - s.d2X[s.idx(i, j)]).norm());
            w2 = std::max(w2, (fd_d(s, s.dbX, i, j) - s.ddbX[s.idx(i, j)]).norm());
        }
    CHECK(w < 1e-5);
    CHECK(w2 < 1e-4);
    auto t = trace_invariants(s);
    CHECK(t.rel_drift[0] < 1e-8);
    CHECK(std::abs(t.mean[0] - (2.0 * kI * L0() * 2.0 * kI * L0()).trace()) < 1e-8);
}

TEST_CASE("immersion: conserved current and reconstruction") {
    const SurfaceField& s = transported();
    auto c = conserved_current(s);
    CHECK(current_consistency(c, s) < 1e-10);
    CHECK(conservation_residual(c) < 1e-5);
    // constant data: K constant, residual exactly 0
    ConservedCurrent k;
    k.grid = s.grid;
    k.mask.assign(s.mask.size(), false);
    k.K.assign(s.mask.size(), L0());
    k.Kdag.assign(s.mask.size(), L0().adjoint());
    CHECK(conservation_residual(k) == 0.0);
    CHECK(reconstruct_by_integral(c, {}).norm() == 0.0);
    CHECK(reconstruct_by_integral(c, {{3, 3}}).norm() == 0.0);

    auto p1 = staircase_path(0, 0, 12, 9, true), p2 = staircase_path(0, 0, 12, 9, false);
    CMat X1 = reconstruct_by_integral(c, p1), X2 = reconstruct_by_integral(c, p2);
    CHECK((X1 - X2).norm() < 1e-5);
    // reconstructed minus direct is the value at the start
    double w = 0;
    for (auto [i, j] : std::vector<std::pair<int, int>>{{12, 9}, {4, 11}, {7, 2}, {1, 12}, {10, 10}}) {
        CMat R = reconstruct_by_integral(c, staircase_path(0, 0, i, j, (i + j) % 2 == 0));
        w = std::max(w, (s.X[s.idx(i, j)] - R - s.X[s.idx(0, 0)]).norm());
    }
    CHECK(w < 1e-4);
    CHECK_THROWS_AS(reconstruct_by_integral(c, {{0, 0}, {1, 1}}), Error);
    ConservedCurrent cm = c;
    cm.mask[s.idx(5, 0)] = true;
    try {
        reconstruct_by_integral(cm, staircase_path(0, 0, 8, 0, true));
        FAIL("expected MaskedPath");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MaskedPath);
    }
}

TEST_CASE("immersion: conservation residual is second order") {
    const Demo& D = demo();
    auto run = [&](double h) {
        GridSpec g = D.g;
        g.hx = g.hy = h;
        g.nx = g.ny = 7;
        auto f = evaluate_jet_field(D.d, g, 2);
        auto Phi = parallel_frame(theta_connection(D.d, 1.0), g, 2, 4);
        auto s = build_X(transported_field(Phi, L0()), connection_field(f, 1.0), g, 1.0, f.mask);
        return conservation_residual(conserved_current(s));
    };
    double r1 = run(4e-3), r2 = run(2e-3);
    CHECK(r1 / r2 > 3.0);
}

TEST_CASE("immersion: characteristic polynomial") {
    CMat M(3, 3);
    M << 1, 2, 0, 0, 3, 1, 1, 0, 2;
    CVec c = char_poly(M);
    // det(y − M) = y³ − 6y² + 11y − 8
    CHECK(std::abs(c(1) + 6.0) < 1e-12);
    CHECK(std::abs(c(2) - 11.0) < 1e-12);
    CHECK(std::abs(c(3) + 8.0) < 1e-12);
    CHECK(std::abs(c(3) + M.determinant()) < 1e-12);
}
