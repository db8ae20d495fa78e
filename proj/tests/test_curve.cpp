#include "doctest.h"
#include "toda/curve.hpp"

#include <random>

using namespace toda;

namespace {

// j-invariant of w² = −λ(a0λ² + cλ + ā0) from its roots {0, r1, r2} via the Legendre modulus
cplx j_from_roots(cplx r1, cplx r2) {
    cplx m = r2 / r1;
    cplx num = m * m - m + 1.0;
    return 256.0 * num * num * num / (m * m * (m - 1.0) * (m - 1.0));
}

EllipticSpectralCurve random_curve(std::mt19937& rng) {
    std::uniform_real_distribution<double> U(-1, 1);
    for (;;) {
        cplx a0 = std::polar(0.5 + std::abs(U(rng)), kPi * U(rng));
        double c = 5 * U(rng);
        if (std::abs(std::abs(c) - 2 * std::abs(a0)) < 0.3) continue;
        return {a0, c};
    }
}

}  // namespace

TEST_CASE("curve: branch points") {
    auto b = branch_points({1.0, 0.0});
    CHECK(std::abs(b.r1 + kI) < 1e-15);
    CHECK(std::abs(b.r2 - kI) < 1e-15);
    auto b3 = branch_points({1.0, 3.0});
    CHECK(std::abs(b3.r1 - (-3 + std::sqrt(5.0)) / 2) < 1e-15);
    CHECK(std::abs(b3.r2 - (-3 - std::sqrt(5.0)) / 2) < 1e-14);
    try {
        branch_points({1.0, 2.0});
        FAIL("expected DegenerateCurve");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateCurve);
    }
    CHECK_THROWS_AS(EllipticSpectralCurve(0.0, 1.0), Error);
    std::mt19937 rng(4);
    for (int i = 0; i < 20; ++i) {
        auto C = random_curve(rng);
        auto r = branch_points(C);
        CHECK(std::abs(r.r1 * r.r2 - std::conj(C.a0) / C.a0) < 1e-12);
        CHECK(std::abs(r.r1 + r.r2 + C.c / C.a0) < 1e-12 * (1 + std::abs(C.c)));
        CHECK(std::abs(C.y2(r.r1)) < 1e-12 * (1 + std::abs(C.c)));
        CHECK(std::abs(r.r1) <= std::abs(r.r2));
    }
}

TEST_CASE("curve: points and the involution") {
    EllipticSpectralCurve C(cplx(0.6, 0.8), -2.7);
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int i = 0; i < 10; ++i) {
        cplx lam = std::polar(std::exp(U(rng)), 3 * U(rng));
        auto p = CurvePoint::on_sheet(C, lam, i % 2 ? 1 : -1);
        CHECK(std::abs(p.y * p.y + C.a0 * lam + C.c + std::conj(C.a0) / lam) < 1e-10);
        for (int lift : {1, -1}) {
            auto q = rho(p, lift);
            CHECK(std::abs(q.y * q.y - C.y2(q.lambda)) < 1e-10);
            CHECK(rho(q, lift).distance(p) < 1e-12);
        }
    }
    CHECK(rho(CurvePoint::at_infinity()).kind == CurvePoint::Kind::Zero);
    CHECK_THROWS_AS(CurvePoint::with_y(C, 1.0, 5.0), Error);
}

TEST_CASE("curve: periods") {
    // lemniscatic configuration: lattice equivalent to τ = i
    EllipticSpectralCurve C0(1.0, 0.0);
    cplx tau = periods(C0);
    CHECK(tau.imag() > 0);
    CHECK(std::abs(reduce_tau(tau) - kI) < 1e-8);
    CHECK(std::abs(j_invariant(tau) - 1728.0) < 1e-6 * 1728.0);
    std::mt19937 rng(12);
    for (int i = 0; i < 12; ++i) {
        auto C = random_curve(rng);
        auto br = branch_points(C);
        cplx t = periods(C);
        CHECK(t.imag() > 0);
        // independent oracle: j from the cross-ratio of the branch points
        cplx jr = j_from_roots(br.r1, br.r2), jt = j_invariant(t);
        CHECK(std::abs(jt - jr) < 1e-6 * std::max(1.0, std::abs(jr)));
        // refinement
        cplx t2 = periods(C, QuadratureSpec{}.refined());
        CHECK(std::abs(t - t2) < 1e-9);
        // swapping cycle roles gives an equivalent lattice
        CHECK(std::abs(j_invariant(-1.0 / t) - jt) < 1e-6 * std::max(1.0, std::abs(jt)));
    }
    // convergence: coarse rules approach the refined value
    EllipticSpectralCurve C(1.0, -2.3);
    QuadratureSpec q;
    q.loop_panels = 3;
    cplx ref = periods(C, QuadratureSpec{}.refined());
    double e1 = std::abs(periods(C, q) - ref);
    q.loop_panels = 6;
    double e2 = std::abs(periods(C, q) - ref);
    CHECK((e2 < 1e-10 || e1 / e2 >= 1.8));
}

TEST_CASE("curve: Abel map") {
    EllipticSpectralCurve C(cplx(0.6, 0.8), -2.7);
    auto per = cycle_periods(C);
    auto Qi = CurvePoint::at_infinity();
    CHECK(std::abs(abel_map(Qi, Qi, C)) < 1e-15);
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> U(-1, 1);
    auto one = [](cplx) { return cplx(1.0); };
    auto br = branch_points(C);
    cplx m1 = std::log(br.r1), m2 = std::log(br.r2);
    auto clear = [&](cplx m) {
        for (int k = -2; k <= 2; ++k)
            if (std::abs(m - m1 - cplx(0, 2 * kPi * k)) < 0.15 || std::abs(m - m2 - cplx(0, 2 * kPi * k)) < 0.15)
                return false;
        return true;
    };
    cplx cst = 0;
    int used = 0;
    for (int i = 0; i < 40 && used < 10; ++i) {
        cplx mu(U(rng), 3 * U(rng));
        if (!clear(mu)) continue;
        auto p = CurvePoint::on_sheet(C, std::exp(mu), 1);
        cplx u = abel_from_infinity(p, C, per);
        // homotopic path: ray at a shifted height, then a vertical leg (checked to avoid branch points)
        std::vector<cplx> path{cplx(80, mu.imag() + 0.11), cplx(mu.real(), mu.imag() + 0.11), mu};
        bool ok = true;
        for (double t = 0; t <= 1; t += 0.01)
            ok = ok && clear(path[1] + (mu - path[1]) * t) && clear(path[0] + (path[1] - path[0]) * t);
        if (ok) {
            auto r = path_integral(C, path, one);
            cplx u2 = r.value / per.A0;
            if (std::abs(r.y_end + p.y) < std::abs(r.y_end - p.y)) u2 = -u2;
            CHECK(lattice_distance(u, u2, per.tau) < 1e-8);
        }
        // the antiholomorphic involution: U(p) + conj U(ρ(p)) is constant mod the lattice
        cplx s = abel_from_infinity(p, C, per) + std::conj(abel_from_infinity(rho(p), C, per));
        if (used == 0) cst = s;
        CHECK(lattice_distance(s, cst, per.tau) < 1e-8);
        // the hyperelliptic involution negates U
        auto pm = CurvePoint::on_sheet(C, std::exp(mu), -1);
        CHECK(lattice_distance(abel_from_infinity(pm, C, per), -u, per.tau) < 1e-8);
        ++used;
    }
    CHECK(used == 10);
    // closed cycles: a-loop gives 1, b-loop gives τ
    Cycles cy = default_cycles(C);
    CHECK(std::abs(loop_integral(C, cy.a, cy.da, one, 48).value / per.A0 - 1.0) < 1e-8);
    double bsign = std::abs(loop_integral(C, cy.b, cy.db, one, 48).value / per.A0 - per.tau) < 1e-8 ? 1 : -1;
    CHECK(std::abs(bsign * loop_integral(C, cy.b, cy.db, one, 48).value / per.A0 - per.tau) < 1e-8);
    // a polygonal a-loop starting from a point p returns U(p) + 1
    std::vector<cplx> poly;
    for (int k = 0; k <= 400; ++k) poly.push_back(cy.a(2 * kPi * k / 400));
    CHECK(std::abs(path_integral(C, poly, one).value / per.A0 - 1.0) < 1e-8);
    // Q₀ and the branch points map to half-periods
    cplx uq0 = abel_from_infinity(CurvePoint::at_zero(), C, per);
    CHECK(lattice_distance(2.0 * uq0, 0.0, per.tau) < 1e-8);
    auto g = CurvePoint::with_y(C, br.r1, 0.0);
    CHECK(lattice_distance(2.0 * abel_from_infinity(g, C, per), 0.0, per.tau) < 1e-8);
}

TEST_CASE("curve: second-kind differentials and the Riemann constant") {
    std::mt19937 rng(5);
    for (int i = 0; i < 6; ++i) {
        auto C = random_curve(rng);
        auto sk = second_kind_data(C);
        CHECK(std::abs(sk.a_period1) < 1e-9);
        CHECK(std::abs(sk.a_period2) < 1e-9);
        CHECK(sk.fit1 < 1e-8);
        CHECK(sk.fit2 < 1e-8);
        CHECK(std::abs(sk.B2 + std::conj(sk.B1)) < 1e-9 * std::max(1.0, std::abs(sk.B1)));
        auto sk2 = second_kind_data(C, QuadratureSpec{}.refined());
        CHECK(std::abs(sk.B1 - sk2.B1) < 1e-9);
        cplx K = riemann_constant(C);
        cplx t = periods(C);
        CHECK(std::abs(K - (1.0 + t) / 2.0) < 1e-15);
        CHECK(std::abs(theta(K, t)) < 1e-8);
        // the zero of Θ(U(P) − K) is simple: nearby points are not zeros
        CHECK(std::abs(theta(K + 0.05, t)) > 1e-4);
    }
    CHECK(std::abs(theta((1.0 + kI) / 2.0, kI)) < 1e-12);
}

TEST_CASE("curve: admissible divisor") {
    // a0 = 1, c = 0: the zeros of ω are ±i, each fixed by ρ
    EllipticSpectralCurve C0(1.0, 0.0);
    auto t0 = third_kind_differential(C0);
    CHECK(std::abs(t0.a) < 1e-12);
    for (auto& z : t0.zeros) {
        CHECK(std::abs(std::abs(z.lambda) - 1.0) < 1e-12);
        CHECK(rho(z).distance(z) < 1e-12);
    }
    try {
        find_admissible_divisor(C0);
        FAIL("expected NoAdmissibleDivisor");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoAdmissibleDivisor);
    }
    EllipticSpectralCurve C(1.0, -3.0);
    auto g = find_admissible_divisor(C);
    auto br = branch_points(C);
    CHECK(std::abs(g.lambda - br.r1) < 1e-14);
    CHECK(rho(g).distance(CurvePoint::with_y(C, br.r2, 0.0)) < 1e-12);
    CHECK(rho(rho(g)).distance(g) < 1e-15);
    try {
        find_admissible_divisor({1.0, 2.0});
        FAIL("expected DegenerateCurve");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateCurve);
    }
}

TEST_CASE("curve: theta data end to end") {
    for (double c : {-3.0, 3.0}) {
        EllipticSpectralCurve C(1.0, c);
        auto g = find_admissible_divisor(C);
        auto s = build_toda_theta_data(C, g);
        auto per = cycle_periods(C);
        cplx dq = abel_map(CurvePoint::at_zero(), CurvePoint::at_infinity(), C);
        CHECK(lattice_distance(s.theta.Delta(0), dq, per.tau) < 1e-12);
        CHECK(lattice_distance(s.theta.W_0(0) - s.theta.W_inf(0), dq, per.tau) < 1e-12);
        // reality: the theta argument is real along the real structure
        CHECK(std::abs(s.theta.B2(0) - std::conj(s.theta.B1(0))) < 1e-9);
        GridSpec grid;
        grid.x0 = grid.y0 = -1.5;
        grid.hx = grid.hy = 3.0 / 19;
        grid.nx = grid.ny = 20;
        auto f = evaluate_jet_field(s.theta, grid, 2);
        CHECK(f.masked_count() == 0);
        CHECK(toda_residual(f).max < 1e-5);
        CHECK(h_sign_check(s.theta, grid).positive);
        CHECK(std::abs(s.g1.cn_const) < 1e-10);
    }
}
