#pragma once

// Genus-1 spectral curve y² = −(a0 λ + c + ā0 λ⁻¹) of the su(2) Toda lattice.
// All integrals are taken in μ = log λ, where the holomorphic differential is dμ/y = dλ/(λy),
// and the second-kind differentials are built from e^{±μ}dμ/y.

#include "toda/solution.hpp"

#include <array>
#include <functional>
#include <vector>

namespace toda {

struct EllipticSpectralCurve {
    cplx a0{1.0, 0.0};
    double c = 0.0;

    EllipticSpectralCurve() = default;
    EllipticSpectralCurve(cplx a0_, double c_);
    void validate() const;  // Validation for a0 = 0 or non-finite input
    cplx y2(cplx lambda) const { return -(a0 * lambda + c + std::conj(a0) / lambda); }
    cplx y2_mu(cplx mu) const { return y2(std::exp(mu)); }
    // y ≈ s_inf λ^{1/2} at Q∞
    cplx s_inf() const { return std::sqrt(-a0); }
};

struct CurvePoint {
    enum class Kind { Finite, Zero, Infinity };
    Kind kind = Kind::Finite;
    cplx lambda{1.0, 0.0};
    cplx y{0.0, 0.0};

    static CurvePoint at_infinity() { return {Kind::Infinity, {}, {}}; }
    static CurvePoint at_zero() { return {Kind::Zero, {}, {}}; }
    // sheet = ±1 selects ±(principal √y²)
    static CurvePoint on_sheet(const EllipticSpectralCurve& C, cplx lambda, int sheet);
    static CurvePoint with_y(const EllipticSpectralCurve& C, cplx lambda, cplx y);
    bool is_branch(double tol = 1e-12) const;
    double distance(const CurvePoint& o) const;
};

// ρ(y, λ) = (s ȳ, λ̄⁻¹), s = ±1 selects the lift of λ ↦ λ̄⁻¹ (both are antiholomorphic involutions)
CurvePoint rho(const CurvePoint& p, int lift = 1);

struct BranchPoints {
    cplx r1, r2;  // finite nonzero branch points, |r1| ≤ |r2|; 0 and ∞ are always branched
};
BranchPoints branch_points(const EllipticSpectralCurve& C);

struct QuadratureSpec {
    int loop_panels = 48;        // Gauss–Legendre panels on closed cycles
    double panel_length = 0.25;  // maximal panel length in μ on open paths
    double far = 80.0;           // |Re μ| used for the punctures
    QuadratureSpec refined() const;
};

// 20-point Gauss–Legendre rule on [−1, 1], ascending
const std::array<double, 20>& gl_nodes();
const std::array<double, 20>& gl_weights();

struct Cycles {
    // a: ellipse around the images of r1, r2 in the μ-plane; b: μ = σ(θ) + iθ, θ ∈ [0, 2π]
    std::function<cplx(double)> a, da, b, db;
    int b_orientation = 1;
};
Cycles default_cycles(const EllipticSpectralCurve& C);

struct CyclePeriods {
    // ∮ f dμ/y for f = 1, e^μ, e^{−μ}
    cplx A0, A1, Am1, B0, B1, Bm1;
    cplx tau;
};
CyclePeriods cycle_periods(const EllipticSpectralCurve& C, const QuadratureSpec& q = {});
cplx periods(const EllipticSpectralCurve& C, const QuadratureSpec& q = {});

// ∫ f(μ) dμ/y along a polyline in μ, y continued from y_start (principal root if y_start = 0).
// end_branch: the last vertex is a branch point (endpoint singularity removed by μ = μ_e + (μ_s−μ_e)(1−t)²).
struct PathResult {
    cplx value;
    cplx y_end;
};
PathResult path_integral(const EllipticSpectralCurve& C, const std::vector<cplx>& mu_path,
                         const std::function<cplx(cplx)>& f, const QuadratureSpec& q = {}, cplx y_start = 0.0,
                         bool end_branch = false);
// same on a closed parametrized loop θ ∈ [0, 2π]; throws ContourError if y does not close up
PathResult loop_integral(const EllipticSpectralCurve& C, const std::function<cplx(double)>& mu,
                         const std::function<cplx(double)>& dmu, const std::function<cplx(cplx)>& f,
                         int panels, cplx y_start = 0.0);

// z modulo the lattice {1, τ}, into the parallelogram centred at 0
cplx reduce_mod_lattice(cplx z, cplx tau);
double lattice_distance(cplx a, cplx b, cplx tau);

// U(p) − U(base), normalized by the a-period of dμ/y; defined modulo {1, τ}
cplx abel_map(const CurvePoint& p, const CurvePoint& base, const EllipticSpectralCurve& C,
              const QuadratureSpec& q = {});
// with Q∞ as base
cplx abel_from_infinity(const CurvePoint& p, const EllipticSpectralCurve& C, const CyclePeriods& per,
                        const QuadratureSpec& q = {});

struct SecondKindData {
    // Ω¹ = (s∞/2)e^μ dμ/y + β1 dμ/y = dk₁ + … at Q∞; Ω² = (s̄∞/2)e^{−μ}dμ/y + β2 dμ/y = dk₂ + … at Q₀
    cplx beta1, beta2;
    cplx B1, B2;           // b-periods
    cplx a_period1, a_period2;
    double fit1 = 0.0, fit2 = 0.0;  // principal-part fit defects
    int rho_lift = 1;      // lift of ρ for which B2 = −B̄1
};
SecondKindData second_kind_data(const EllipticSpectralCurve& C, const QuadratureSpec& q = {});

// odd half-period (1+τ)/2, checked to be a theta zero
cplx riemann_constant(const EllipticSpectralCurve& C, const QuadratureSpec& q = {});

struct ThirdKindDifferential {
    // ω = −½ dλ/λ + a dλ/(λy): residues −1 at Q∞, +1 at Q₀, zero a-period
    cplx a;
    // zeros of ω: y = 2a, a0λ² + (c + 4a²)λ + ā0 = 0
    std::array<CurvePoint, 2> zeros;
    double zero_defect = 0.0;
};
ThirdKindDifferential third_kind_differential(const EllipticSpectralCurve& C, const QuadratureSpec& q = {});
// γ with D + ρ(D) the zero divisor of ω, ρ(γ) ≠ γ; NoAdmissibleDivisor otherwise
CurvePoint find_admissible_divisor(const EllipticSpectralCurve& C, const QuadratureSpec& q = {});

struct Genus1Data {
    cplx tau;
    cplx U_Q0, U_Qinf, U_D;
    cplx B1, B2;            // b-periods of Ω¹, Ω²
    cplx riemann_K;
    cplx s0, s_inf;         // leading coefficients of Θ(U(P) − U(Q·) − K) in k⁻¹
    double c_const = 0.0, cn_const = 0.0;
    cplx A0;                // a-period of dμ/y
    int rho_lift = 1;
    BranchPoints branch;
};

struct CurveSolution {
    Genus1Data g1;
    TodaThetaData theta;
};
CurveSolution build_toda_theta_data(const EllipticSpectralCurve& C, const CurvePoint& gamma,
                                    const QuadratureSpec& q = {});

}  // namespace toda
