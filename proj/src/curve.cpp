#include "toda/curve.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>

namespace toda {

namespace {

using GL = boost::math::quadrature::gauss<double, 20>;

// nearest-value continuation of y
cplx continue_root(cplx y2, cplx prev) {
    cplx s = std::sqrt(y2);
    return std::abs(s - prev) <= std::abs(s + prev) ? s : -s;
}

cplx wrap_im(cplx d) {
    double im = std::remainder(d.imag(), 2 * kPi);
    return {d.real(), im};
}

struct BranchMu {
    cplx m1, m2;
};

BranchMu branch_mu(const EllipticSpectralCurve& C) {
    auto b = branch_points(C);
    return {std::log(b.r1), std::log(b.r2)};
}

// distance in μ from the nearest image of a finite branch point
double branch_distance(cplx mu, const BranchMu& bm) {
    return std::min(std::abs(wrap_im(mu - bm.m1)), std::abs(wrap_im(mu - bm.m2)));
}

double polyline_clearance(const std::vector<cplx>& path, const BranchMu& bm, double skip_end) {
    double best = 1e300;
    for (std::size_t s = 0; s + 1 < path.size(); ++s) {
        cplx a = path[s], b = path[s + 1];
        int n = std::max(2, static_cast<int>(std::abs(b - a) / 0.01));
        for (int k = 0; k <= n; ++k) {
            cplx m = a + (b - a) * (double(k) / n);
            if (s + 2 == path.size() && std::abs(m - path.back()) < skip_end) continue;
            best = std::min(best, branch_distance(m, bm));
        }
    }
    return best;
}

// winding number of a sampled closed curve around w
int winding(const std::function<cplx(double)>& z, cplx w, int samples = 4000) {
    double total = 0;
    cplx prev = z(0.0) - w;
    for (int k = 1; k <= samples; ++k) {
        cplx cur = z(2 * kPi * k / samples) - w;
        total += std::arg(cur / prev);
        prev = cur;
    }
    return static_cast<int>(std::lround(total / (2 * kPi)));
}

}  // namespace

const std::array<double, 20>& gl_nodes() {
    static const std::array<double, 20> x = [] {
        std::array<double, 20> r{};
        const auto& a = GL::abscissa();
        for (int i = 0; i < 10; ++i) {
            r[static_cast<std::size_t>(9 - i)] = -a[static_cast<std::size_t>(i)];
            r[static_cast<std::size_t>(10 + i)] = a[static_cast<std::size_t>(i)];
        }
        return r;
    }();
    return x;
}

const std::array<double, 20>& gl_weights() {
    static const std::array<double, 20> w = [] {
        std::array<double, 20> r{};
        const auto& a = GL::weights();
        for (int i = 0; i < 10; ++i) {
            r[static_cast<std::size_t>(9 - i)] = a[static_cast<std::size_t>(i)];
            r[static_cast<std::size_t>(10 + i)] = a[static_cast<std::size_t>(i)];
        }
        return r;
    }();
    return w;
}

EllipticSpectralCurve::EllipticSpectralCurve(cplx a0_, double c_) : a0(a0_), c(c_) { validate(); }

void EllipticSpectralCurve::validate() const {
    if (!std::isfinite(a0.real()) || !std::isfinite(a0.imag()) || !std::isfinite(c))
        throw Error(ErrorKind::Validation, "curve coefficients must be finite");
    if (std::abs(a0) == 0.0) throw Error(ErrorKind::Validation, "a0 must be nonzero");
}

CurvePoint CurvePoint::on_sheet(const EllipticSpectralCurve& C, cplx lambda, int sheet) {
    if (sheet != 1 && sheet != -1) throw Error(ErrorKind::Validation, "sheet must be +1 or -1");
    if (lambda == 0.0) throw Error(ErrorKind::Validation, "lambda = 0 is the puncture Q0");
    return {Kind::Finite, lambda, double(sheet) * std::sqrt(C.y2(lambda))};
}

CurvePoint CurvePoint::with_y(const EllipticSpectralCurve& C, cplx lambda, cplx y) {
    if (lambda == 0.0) throw Error(ErrorKind::Validation, "lambda = 0 is the puncture Q0");
    cplx d = y * y - C.y2(lambda);
    if (std::abs(d) > 1e-10 * std::max(1.0, std::abs(y * y))) throw Error(ErrorKind::Validation, "point not on the curve");
    return {Kind::Finite, lambda, y};
}

bool CurvePoint::is_branch(double tol) const { return kind != Kind::Finite || std::abs(y) < tol; }

double CurvePoint::distance(const CurvePoint& o) const {
    if (kind != o.kind) return 1e300;
    if (kind != Kind::Finite) return 0.0;
    return std::abs(lambda - o.lambda) + std::abs(y - o.y);
}

CurvePoint rho(const CurvePoint& p, int lift) {
    if (p.kind == CurvePoint::Kind::Infinity) return CurvePoint::at_zero();
    if (p.kind == CurvePoint::Kind::Zero) return CurvePoint::at_infinity();
    return {CurvePoint::Kind::Finite, 1.0 / std::conj(p.lambda), double(lift) * std::conj(p.y)};
}

BranchPoints branch_points(const EllipticSpectralCurve& C) {
    C.validate();
    // a0λ² + cλ + ā0, stable quadratic formula
    cplx a = C.a0, b = C.c, cc = std::conj(C.a0);
    cplx disc = std::sqrt(b * b - 4.0 * a * cc);
    if (std::abs(disc) < 1e-10 * std::max(1.0, std::abs(b)))
        throw Error(ErrorKind::DegenerateCurve, "repeated branch point: c^2 = 4|a0|^2");
    cplx qq = -0.5 * (b + (std::real(std::conj(b) * disc) >= 0 ? disc : -disc));
    cplx x1 = qq / a, x2 = cc / qq;
    if (std::abs(x1) > std::abs(x2) || (std::abs(x1) == std::abs(x2) && std::arg(x1) > std::arg(x2))) std::swap(x1, x2);
    return {x1, x2};
}

QuadratureSpec QuadratureSpec::refined() const {
    QuadratureSpec r = *this;
    r.loop_panels *= 2;
    r.panel_length /= 2;
    return r;
}

Cycles default_cycles(const EllipticSpectralCurve& C) {
    BranchMu bm = branch_mu(C);
    cplx mu1 = bm.m1;
    cplx d = wrap_im(bm.m2 - mu1);
    cplx m = mu1 + d / 2.0, e = d / std::abs(d);
    double A = std::abs(d) / 2 + 0.3, B = 0.3;
    Cycles cy;
    cy.a = [=](double t) { return m + e * cplx(A * std::cos(t), B * std::sin(t)); };
    cy.da = [=](double t) { return e * cplx(-A * std::sin(t), B * std::cos(t)); };
    double dd = std::fmod(bm.m2.imag() - mu1.imag() + 4 * kPi, 2 * kPi);
    double thm = mu1.imag() + dd / 2 - kPi / 2;
    double sig0 = 0.5 * (bm.m1.real() + bm.m2.real());
    // branch points near |λ| = 1: wiggle the circle so it passes outside r1 and inside r2
    double delta = std::abs(mu1.real()) < 0.25 ? 0.5 : 0.0;
    cy.b = [=](double t) { return cplx(sig0 + delta * std::cos(t - thm), t); };
    cy.db = [=](double t) { return cplx(-delta * std::sin(t - thm), 1.0); };

    // homotopy checks: a encloses one image of each finite branch point, b (in λ) exactly one of them
    double clear = 1e300;
    for (int k = 0; k < 2000; ++k) {
        double t = 2 * kPi * k / 2000;
        clear = std::min({clear, branch_distance(cy.a(t), bm), branch_distance(cy.b(t), bm)});
    }
    if (clear < 0.05) throw Error(ErrorKind::ContourError, "cycle passes too close to a branch point");
    int wa1 = 0, wa2 = 0;
    for (int k = -3; k <= 3; ++k) {
        wa1 += std::abs(winding(cy.a, bm.m1 + cplx(0, 2 * kPi * k)));
        wa2 += std::abs(winding(cy.a, bm.m2 + cplx(0, 2 * kPi * k)));
    }
    auto blam = [&](double t) { return std::exp(cy.b(t)); };
    auto br = branch_points(C);
    int wb1 = std::abs(winding(blam, br.r1)), wb2 = std::abs(winding(blam, br.r2)), wb0 = std::abs(winding(blam, 0.0));
    if (wa1 != 1 || wa2 != 1 || wb0 != 1 || wb1 + wb2 != 1)
        throw Error(ErrorKind::ContourError, "cycle paths do not separate the branch points");
    return cy;
}

PathResult loop_integral(const EllipticSpectralCurve& C, const std::function<cplx(double)>& mu,
                         const std::function<cplx(double)>& dmu, const std::function<cplx(cplx)>& f,
                         int panels, cplx y_start) {
    const auto& x = gl_nodes();
    const auto& w = gl_weights();
    cplx y0 = std::sqrt(C.y2_mu(mu(0.0)));
    if (y_start != 0.0 && std::abs(y0 + y_start) < std::abs(y0 - y_start)) y0 = -y0;
    cplx y = y0, total = 0;
    const double h = 2 * kPi / panels;
    for (int p = 0; p < panels; ++p) {
        double a = p * h;
        for (std::size_t k = 0; k < x.size(); ++k) {
            double t = a + 0.5 * h * (x[k] + 1);
            cplx m = mu(t);
            y = continue_root(C.y2_mu(m), y);
            total += 0.5 * h * w[k] * f(m) * dmu(t) / y;
        }
    }
    cplx yend = continue_root(C.y2_mu(mu(2 * kPi)), y);
    if (std::abs(yend - y0) > 1e-6 * std::abs(y0))
        throw Error(ErrorKind::ContourError, "y does not return to its start value around the loop");
    return {total, y0};
}

PathResult path_integral(const EllipticSpectralCurve& C, const std::vector<cplx>& mu_path,
                         const std::function<cplx(cplx)>& f, const QuadratureSpec& q, cplx y_start,
                         bool end_branch) {
    if (mu_path.size() < 2) return {0.0, y_start};
    const auto& x = gl_nodes();
    const auto& w = gl_weights();
    cplx y = std::sqrt(C.y2_mu(mu_path.front()));
    if (y_start != 0.0 && std::abs(y + y_start) < std::abs(y - y_start)) y = -y;
    cplx total = 0;
    for (std::size_t s = 0; s + 1 < mu_path.size(); ++s) {
        cplx a = mu_path[s], b = mu_path[s + 1];
        double len = std::abs(b - a);
        if (len == 0) continue;
        int np = std::max(1, static_cast<int>(std::ceil(len / q.panel_length)));
        bool last_seg = s + 2 == mu_path.size();
        for (int p = 0; p < np; ++p) {
            cplx pa = a + (b - a) * (double(p) / np), pb = a + (b - a) * (double(p + 1) / np);
            bool sing = end_branch && last_seg && p == np - 1;
            if (!sing) {
                for (std::size_t k = 0; k < x.size(); ++k) {
                    cplx m = 0.5 * (pa + pb) + 0.5 * (pb - pa) * x[k];
                    y = continue_root(C.y2_mu(m), y);
                    total += 0.5 * (pb - pa) * w[k] * f(m) / y;
                }
            } else {
                // μ = pb + (pa − pb)(1−t)², t ∈ [0, 1]: removes the 1/√ endpoint singularity
                for (std::size_t k = 0; k < x.size(); ++k) {
                    double t = 0.5 * (x[k] + 1), s1 = 1 - t;
                    cplx m = pb + (pa - pb) * s1 * s1;
                    cplx dm = -2.0 * (pa - pb) * s1;
                    y = continue_root(C.y2_mu(m), y);
                    total += 0.5 * w[k] * f(m) * dm / y;
                }
            }
        }
    }
    if (end_branch) y = 0.0;
    return {total, y};
}

CyclePeriods cycle_periods(const EllipticSpectralCurve& C, const QuadratureSpec& q) {
    Cycles cy = default_cycles(C);
    auto one = [](cplx) { return cplx(1.0); };
    auto ep = [](cplx m) { return std::exp(m); };
    auto em = [](cplx m) { return std::exp(-m); };
    CyclePeriods r;
    // one continuation per cycle: all three integrands share the lift of y
    auto a0 = loop_integral(C, cy.a, cy.da, one, q.loop_panels);
    r.A0 = a0.value;
    r.A1 = loop_integral(C, cy.a, cy.da, ep, q.loop_panels, a0.y_end).value;
    r.Am1 = loop_integral(C, cy.a, cy.da, em, q.loop_panels, a0.y_end).value;
    auto b0 = loop_integral(C, cy.b, cy.db, one, q.loop_panels);
    r.B0 = b0.value;
    r.B1 = loop_integral(C, cy.b, cy.db, ep, q.loop_panels, b0.y_end).value;
    r.Bm1 = loop_integral(C, cy.b, cy.db, em, q.loop_panels, b0.y_end).value;
    if (std::abs(r.A0) < 1e-12) throw Error(ErrorKind::ContourError, "vanishing a-period");
    r.tau = r.B0 / r.A0;
    if (r.tau.imag() < 0) {
        r.B0 = -r.B0;
        r.B1 = -r.B1;
        r.Bm1 = -r.Bm1;
        r.tau = -r.tau;
    }
    if (!(r.tau.imag() > 0)) throw Error(ErrorKind::ContourError, "cycles are not a canonical basis (Im tau = 0)");
    return r;
}

cplx periods(const EllipticSpectralCurve& C, const QuadratureSpec& q) { return cycle_periods(C, q).tau; }

cplx reduce_mod_lattice(cplx z, cplx tau) {
    double n = std::round(z.imag() / tau.imag());
    z -= n * tau;
    z -= std::round(z.real());
    return z;
}

double lattice_distance(cplx a, cplx b, cplx tau) {
    cplx d = reduce_mod_lattice(a - b, tau);
    double best = 1e300;
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) best = std::min(best, std::abs(d + double(i) + double(j) * tau));
    return best;
}

cplx abel_from_infinity(const CurvePoint& p, const EllipticSpectralCurve& C, const CyclePeriods& per,
                        const QuadratureSpec& q) {
    BranchMu bm = branch_mu(C);
    auto one = [](cplx) { return cplx(1.0); };
    static const double offsets[] = {0.0, 0.3, -0.3, 0.6, -0.6, 1.0, -1.0, 1.5, -1.5};
    if (p.kind == CurvePoint::Kind::Infinity) return 0.0;
    if (p.kind == CurvePoint::Kind::Zero) {
        // Q₀ is branched: the sign of the integral is immaterial mod the lattice
        double th0 = 0.5 * (bm.m1.imag() + bm.m2.imag());
        for (double o : offsets) {
            std::vector<cplx> path{cplx(q.far, th0 + o + 0.3), cplx(-q.far, th0 + o + 0.3)};
            if (polyline_clearance(path, bm, 0.0) < 0.1) continue;
            return path_integral(C, path, one, q).value / per.A0;
        }
        throw Error(ErrorKind::ContourError, "no clear path from Q_inf to Q_0");
    }
    cplx mu = std::log(p.lambda);
    bool br = p.is_branch(1e-9);
    for (double o : offsets) {
        std::vector<cplx> path{cplx(q.far, mu.imag() + o)};
        if (o != 0.0) path.push_back(cplx(mu.real(), mu.imag() + o));
        path.push_back(mu);
        if (polyline_clearance(path, bm, br ? 0.05 : 0.0) < (br ? 0.05 : 0.02)) continue;
        auto r = path_integral(C, path, one, q, 0.0, br);
        cplx I = r.value / per.A0;
        if (br) return I;
        return std::abs(r.y_end - p.y) <= std::abs(r.y_end + p.y) ? I : -I;
    }
    throw Error(ErrorKind::ContourError, "no clear Abel path to the requested point");
}

cplx abel_map(const CurvePoint& p, const CurvePoint& base, const EllipticSpectralCurve& C,
              const QuadratureSpec& q) {
    auto per = cycle_periods(C, q);
    return abel_from_infinity(p, C, per, q) - abel_from_infinity(base, C, per, q);
}

SecondKindData second_kind_data(const EllipticSpectralCurve& C, const QuadratureSpec& q) {
    auto per = cycle_periods(C, q);
    const cplx s = C.s_inf();
    SecondKindData d;
    d.beta1 = -(s / 2.0) * per.A1 / per.A0;
    d.B1 = (s / 2.0) * per.B1 + d.beta1 * per.B0;
    // Ω² with lift +1, then choose the lift of ρ for which the reality relation B2 = −B̄1 holds
    cplx beta2 = -(std::conj(s) / 2.0) * per.Am1 / per.A0;
    cplx B2 = (std::conj(s) / 2.0) * per.Bm1 + beta2 * per.B0;
    d.rho_lift = std::abs(B2 + std::conj(d.B1)) <= std::abs(B2 - std::conj(d.B1)) ? 1 : -1;
    d.beta2 = double(d.rho_lift) * beta2;
    d.B2 = double(d.rho_lift) * B2;
    if (std::abs(d.B2 + std::conj(d.B1)) > 1e-6 * std::max(1.0, std::abs(d.B1)))
        throw Error(ErrorKind::NormalizationError, "b-periods of the second-kind differentials violate B2 = -conj(B1)");
    const cplx s2 = double(d.rho_lift) * std::conj(s) / 2.0;

    // a-periods on a refined rule (independent check of the normalization)
    auto pr = cycle_periods(C, q.refined());
    d.a_period1 = (s / 2.0) * pr.A1 + d.beta1 * pr.A0;
    d.a_period2 = s2 * pr.Am1 + d.beta2 * pr.A0;

    // principal parts: Ω¹/dk₁ → 1 at Q∞ with k₁ = √λ on the branch y ≈ s k₁;
    // Ω²/dk₂ → 1 at Q₀ with k₂ = −conj(k₁∘ρ)
    auto k1_at = [&](cplx lam, cplx y) {
        cplx k = std::sqrt(lam);
        return std::abs(k - y / s) <= std::abs(k + y / s) ? k : -k;
    };
    auto ratio1 = [&](double R) {
        cplx lam = std::polar(R, 0.37);
        cplx y = std::sqrt(C.y2(lam));
        cplx k1 = k1_at(lam, y);
        return ((s / 2.0) * lam + d.beta1) / (lam * y) * 2.0 * k1;
    };
    auto ratio2 = [&](double R) {
        cplx lam = std::polar(1.0 / R, 0.37);
        cplx y = std::sqrt(C.y2(lam));
        CurvePoint rp = rho({CurvePoint::Kind::Finite, lam, y}, d.rho_lift);
        cplx k2 = -std::conj(k1_at(rp.lambda, rp.y));
        // λ = k₂⁻², dλ/dk₂ = −2k₂⁻³
        return (s2 / lam + d.beta2) / (lam * y) * (-2.0 / (k2 * k2 * k2));
    };
    const double R = 1e6;
    d.fit1 = std::abs(2.0 * ratio1(2 * R) - ratio1(R) - 1.0);
    d.fit2 = std::abs(2.0 * ratio2(2 * R) - ratio2(R) - 1.0);
    if (d.fit1 > 1e-8 || d.fit2 > 1e-8)
        throw Error(ErrorKind::NormalizationError, "principal part of a second-kind differential does not match dk");
    return d;
}

cplx riemann_constant(const EllipticSpectralCurve& C, const QuadratureSpec& q) {
    cplx tau = periods(C, q);
    cplx K = (1.0 + tau) / 2.0;
    // Θ(U(Q∞) − K) = Θ(−K) must vanish: Q∞ is the single zero of Θ(U(P) − K)
    double scale = std::abs(theta(0.0, tau));
    if (std::abs(theta(-K, tau)) > 1e-8 * scale)
        throw Error(ErrorKind::NormalizationError, "odd half-period is not a theta zero");
    return K;
}

ThirdKindDifferential third_kind_differential(const EllipticSpectralCurve& C, const QuadratureSpec& q) {
    auto per = cycle_periods(C, q);
    Cycles cy = default_cycles(C);
    // a-period of dλ/λ = dμ over the closed μ-loop
    cplx Ia = 0;
    const auto& x = gl_nodes();
    const auto& w = gl_weights();
    const double h = 2 * kPi / q.loop_panels;
    for (int p = 0; p < q.loop_panels; ++p)
        for (std::size_t k = 0; k < x.size(); ++k) Ia += 0.5 * h * w[k] * cy.da(p * h + 0.5 * h * (x[k] + 1));
    ThirdKindDifferential t;
    t.a = 0.5 * Ia / per.A0;
    if (std::abs(t.a) < 1e-13) t.a = 0.0;
    // zeros: y = 2a on the curve, i.e. a0λ² + (c + 4a²)λ + ā0 = 0
    cplx a = C.a0, b = C.c + 4.0 * t.a * t.a, cc = std::conj(C.a0);
    cplx disc = std::sqrt(b * b - 4.0 * a * cc);
    cplx qq = -0.5 * (b + (std::real(std::conj(b) * disc) >= 0 ? disc : -disc));
    if (std::abs(qq) < 1e-300) throw Error(ErrorKind::DegenerateCurve, "degenerate third-kind zero set");
    std::array<cplx, 2> lam{qq / a, cc / qq};
    if (std::abs(lam[0]) > std::abs(lam[1])) std::swap(lam[0], lam[1]);
    for (int i = 0; i < 2; ++i) {
        t.zeros[static_cast<std::size_t>(i)] = {CurvePoint::Kind::Finite, lam[static_cast<std::size_t>(i)], 2.0 * t.a};
        cplx l = lam[static_cast<std::size_t>(i)];
        t.zero_defect = std::max(t.zero_defect, std::abs(4.0 * t.a * t.a - C.y2(l)) / std::max(1.0, std::abs(l)));
    }
    return t;
}

CurvePoint find_admissible_divisor(const EllipticSpectralCurve& C, const QuadratureSpec& q) {
    branch_points(C);  // DegenerateCurve upstream
    auto t = third_kind_differential(C, q);
    if (t.zero_defect > 1e-9) throw Error(ErrorKind::NoAdmissibleDivisor, "zeros of the third-kind differential not resolved");
    const CurvePoint& g = t.zeros[0];
    CurvePoint rg = rho(g);
    double swap_err = rg.distance(t.zeros[1]);
    double fixed = rg.distance(g);
    if (fixed < 1e-6 * std::max(1.0, std::abs(g.lambda)))
        throw Error(ErrorKind::NoAdmissibleDivisor,
                    "zeros of the third-kind differential lie on |lambda| = 1 and are fixed by rho");
    if (swap_err > 1e-8 * std::max(1.0, std::abs(t.zeros[1].lambda)))
        throw Error(ErrorKind::NoAdmissibleDivisor, "zero pair of the third-kind differential is not rho-symmetric");
    return g;
}

CurveSolution build_toda_theta_data(const EllipticSpectralCurve& C, const CurvePoint& gamma, const QuadratureSpec& q) {
    CurveSolution out;
    Genus1Data& g = out.g1;
    g.branch = branch_points(C);
    auto per = cycle_periods(C, q);
    auto sk = second_kind_data(C, q);
    g.tau = per.tau;
    g.A0 = per.A0;
    g.B1 = sk.B1;
    g.B2 = sk.B2;
    g.rho_lift = sk.rho_lift;
    g.riemann_K = riemann_constant(C, q);
    g.U_Qinf = 0.0;
    g.U_Q0 = abel_from_infinity(CurvePoint::at_zero(), C, per, q);
    g.U_D = abel_from_infinity(gamma, C, per, q);

    PeriodMatrix pm = PeriodMatrix::genus1(g.tau);
    auto v = [](cplx z) {
        CVec r(1);
        r(0) = z;
        return r;
    };
    const cplx K = g.riemann_K;
    // Θ(U(P) − K) ≈ Θ'(−K)·(dU/dt) t with t = 1/k at the puncture; dμ/y = −(2/s) dt at Q∞,
    // −(2/(lift·s̄)) dt at Q₀
    cplx th1 = theta_deriv(v(-K), pm, {v(1.0)});
    const cplx s = C.s_inf();
    g.s_inf = th1 * (-2.0 / (s * per.A0));
    g.s0 = th1 * (-2.0 / (double(sk.rho_lift) * std::conj(s) * per.A0));

    TodaThetaData& d = out.theta;
    d.Pi = pm;
    d.N = 1;
    d.W_inf = v(g.U_Qinf - g.U_D - K);
    d.W_0 = v(g.U_Q0 - g.U_D - K);
    d.Delta = v(g.U_Q0 - g.U_Qinf);
    d.B1 = v(g.B1 / (2.0 * kPi * kI));
    d.B2 = v(g.B2 / (2.0 * kPi * kI));

    // c = ln Θ(W₀)/Θ(W∞), c_n = ln Θ(−Δ−K)s₀ / (Θ(Δ−K)s∞); e^{2u} = |h| takes half their real parts
    cplx lw0 = log_theta_jet(d.W_0, pm, {});
    cplx lwi = log_theta_jet(d.W_inf, pm, {});
    cplx lm = log_theta_jet(v(-g.U_Q0 - K), pm, {});
    cplx lp = log_theta_jet(v(g.U_Q0 - K), pm, {});
    g.c_const = 0.5 * (lw0 - lwi).real();
    g.cn_const = 0.5 * ((lm - lp).real() + std::log(std::abs(g.s0 / g.s_inf)));
    d.c_const = g.c_const;
    d.cn_const = g.cn_const;
    d.validate();
    return out;
}

}  // namespace toda
