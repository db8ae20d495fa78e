#pragma once

// Induced geometry of X: fundamental forms, curvatures, Willmore functional, the su(2) frame and
// the su(N) moving frame with its Gauss–Weingarten coefficients. All pairings use the
// complex-bilinear (X, Y) = −½ tr(XY).

#include "toda/immersion.hpp"

#include <cstdint>

namespace toda {

cplx inner(const CMat& X, const CMat& Y);

struct MetricField {
    GridSpec grid;
    std::vector<cplx> g11, g12, g22, detG;
    std::vector<bool> flagged;  // masked upstream or degenerate metric
    int degenerate = 0;

    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j * grid.nx + i); }
    // g22 = conj(g11), g12 real
    double reality_defect() const;
};
// DegenerateMetric when |det G| < rel_tol·max(|g|)² at every unmasked point
MetricField first_form(const SurfaceField& s, double rel_tol = 1e-12);

struct MetricDerivs {
    cplx dg11, dbg11, dg12, dbg12, dg22, dbg22;
};
MetricDerivs metric_derivatives(const SurfaceField& s, std::size_t p);

// coefficients (a, b) with V − a∂X − b∂̄X orthogonal to both tangents
std::pair<cplx, cplx> tangential_coeffs(const CMat& V, const CMat& dX, const CMat& dbX);
CMat normal_part(const CMat& V, const CMat& dX, const CMat& dbX);

// ∂²X = α11∂X + α12∂̄X + ⊥,  ∂∂̄X = α21∂X + α22∂̄X + ⊥
struct Christoffel {
    cplx a11, a12, a21, a22;
};
Christoffel christoffel_reference(cplx g11, cplx g12, cplx g22, const MetricDerivs& dg);
Christoffel christoffel_solve(const SurfaceField& s, std::size_t p);

struct SecondForm {
    std::vector<CMat> II11, II12, II22;  // (∂²X)⊥, (∂∂̄X)⊥, (∂̄²X)⊥
    std::vector<Christoffel> alpha;
    double ortho_residual = 0.0;  // max |(II, ∂X)|, |(II, ∂̄X)|
};
SecondForm second_form(const SurfaceField& s, const MetricField& g);

// H = det G⁻¹(g22(∂²X)⊥ − 2g12(∂∂̄X)⊥ + g11(∂̄²X)⊥)
std::vector<CMat> mean_curvature(const SecondForm& II, const MetricField& g);

struct CurvatureField {
    std::vector<double> gauss;     // Gauss equation ((II11, II22) − (II12, II12))/det G, analytic
    std::vector<double> brioschi;  // intrinsic, real metric E, F, G, second derivatives by FD
    std::vector<cplx> reference;     // the reference ∂/∂̄ expression in g_ij, outer derivatives by FD
};
CurvatureField gaussian_curvature(const SurfaceField& s, const MetricField& g, const SecondForm& II);

struct WillmoreResult {
    double W = 0.0;
    double area = 0.0;
};
// W = ∫(H, H) dA with dA = 2√|det G| dx dy (= √det G dξdξ̄), trapezoid rule over unflagged points
WillmoreResult willmore(const std::vector<CMat>& H, const MetricField& g);

// su(2): frame η = (∂X, ∂̄X, X), ∂η = M1 η, ∂̄η = M2 η
struct Su2Frame {
    std::vector<Eigen::Matrix3cd> M1, M2;
    std::vector<Christoffel> alpha;
    double gamma_identity = 0.0;  // max |½tr(∂²X X) − g11|
    double gw_residual = 0.0;     // FD check of ∂η − M1η and ∂̄η − M2η
    double reference_residual = 0.0;  // same with the reference X-coefficients 2g11, 2g12
};
Su2Frame su2_frame(const SurfaceField& s, const MetricField& g);

// orthonormal anti-hermitian basis of su(n) under Re(·,·): i·(generalized Gell-Mann)
std::vector<CMat> su_basis(int n);
RVec su_coordinates(const CMat& X, const std::vector<CMat>& basis);

// the identities tr(∂∂̄X ∂X) = tr([X,∂̄A][X,A]), tr(∂∂̄X ∂̄X) = tr([X,∂B][X,B]) = tr([X,∂̄A][X,B]);
// max absolute defects and the scale max|tr(∂∂̄X ∂X)|. They hold on the polynomial Killing field of
// the genus-1 solution but not for an arbitrary solution of the Lax equations.
struct TraceIdentityDefects {
    double d1 = 0.0, d2 = 0.0, d3 = 0.0, scale = 0.0;
};
TraceIdentityDefects trace_identities(const SurfaceField& s);

struct ScalarStats {
    double min = 0.0, max = 0.0, mean = 0.0, stdev = 0.0;
    int count = 0;
};
ScalarStats scalar_stats(const std::vector<double>& v, const std::vector<bool>& skip);

struct GeometryReport {
    MetricField g;
    SecondForm II;
    std::vector<CMat> H;
    CurvatureField K;
    WillmoreResult W;
    std::vector<double> H_norm;  // (H, X/‖X‖), the signed normal component in su(2); √(H,H) otherwise
    std::vector<double> II_defect;  // su(2): |(II, −X/‖X‖) − c·I| / max|I| with c = √(−2/tr X²)
    ScalarStats g11_abs, detG_abs, H_stats, K_gauss, K_brioschi, radius;
    double II_defect_max = 0.0;
    double trace_drift = 0.0;
    int masked = 0, degenerate = 0;
};
// everything short of the moving frame; DegenerateMetric only if no usable point is left
GeometryReport geometry_report(const SurfaceField& s);

// ----- su(N) moving frame -----

struct FrameField {
    GridSpec grid;
    int n = 0;
    std::vector<CMat> Phi;  // unitary, X = Φ diag(y) Φ⁻¹, parallel: Φ⁻¹∂Φ = −Φ⁻¹AΦ
    CVec y;                 // eigenvalues of X (imaginary), ascending in y/i at the basepoint
    std::vector<bool> mask;
    double y_drift = 0.0;   // max spread of the eigenvalues over the grid
};
// eigen-decomposition of X/i; order continued from the basepoint (0,0) by eigenvector overlap, phases
// fixed at the basepoint (largest component real positive) and carried along grid edges so that the
// frame is parallel for the connection
FrameField diagonalize_X(const SurfaceField& s, double gap_tol = 1e-8);

// s(k,l) = (k−2)(k−1)/2 + l (1-based, l < k); returns 0-based (k, l) pairs in s-order
std::vector<std::pair<int, int>> basis_index(int n);

struct FrameScalars {
    CMat Xi1, Xi2, dX0;
    std::vector<CMat> u, v, d;  // u_s, v_s (s = 1..S) and d_k (k = 2..N+1), conjugated by Φ
    CVec J, Jb, Q, Qb;          // (u_s, ∂X), (u_s, ∂̄X), (v_s, ∂X), (v_s, ∂̄X)
    CMat beta, gamma, kappa;    // i·2×2 determinants
    double tangent_defect = 0.0;  // ‖∂X⁰ − (y_k − y_l)Ξ1‖
};
FrameScalars xi_and_scalars(const FrameField& F, const SurfaceField& s, std::size_t p);
// the metric from Ξ sums: g11 = −½Σ(y_k−y_l)²Ξ1_klΞ1_lk, etc.
void xi_metric(const FrameField& F, const FrameScalars& sc, cplx& g11, cplx& g12, cplx& g22);

struct NormalBasis {
    std::vector<CMat> nv, nu, nd;
    std::vector<CMat> all() const;
};
// FrameDegenerate when |γ_{1,1}| is tiny
NormalBasis normal_basis(const FrameField& F, const FrameScalars& sc, const CMat& X, double tol = 1e-10);
// modified Gram–Schmidt under Re(·,·); FrameDegenerate on rank loss
std::vector<CMat> orthonormal_frame(const std::vector<CMat>& normals, double tol = 1e-10);

// ∂η_r = Σ_s coef(r, s) η_s for η = (∂X, ∂̄X, n^v, n^u, n^d)
struct GWTable {
    std::vector<CMat> eta;
    std::vector<CMat> d_eta;  // analytic ∂η
    CMat coef;
    Christoffel alpha;                // reference closed forms
    Christoffel alpha_solve;          // linear solve
    double reference_nu_defect = 0.0;   // reference ν/μ/χ determinants vs the solved tangential parts
    double reference_d_defect = 0.0;    // reference −i tr(·ΦE_kkΦ⁻¹) vs the n^d coordinates
    double last_row_defect = 0.0;     // ∂n_N^d − i y_{N+1}⁻¹ ∂X
    double decomposition_residual = 0.0;
};
GWTable gauss_weingarten(const FrameField& F, const SurfaceField& s, const MetricField& g, std::size_t p);

struct GWCheck {
    double residual = 0.0;      // max ‖FD ∂η_r − Σ coef η_s‖ over interior points
    double normal_ortho = 0.0;  // max |(n, ∂X)|, |(n, ∂̄X)|
    double alpha_agreement = 0.0;
    double reference_nu_defect = 0.0;
    double reference_d_defect = 0.0;
    double last_row = 0.0;
    int points = 0;
};
GWCheck gauss_weingarten_check(const FrameField& F, const SurfaceField& s, const MetricField& g);

// N = 1: the general table on η = (∂X, ∂̄X, (i/y₂)X) against su2_frame's M1 on (∂X, ∂̄X, X)
double su2_reduction_defect(const FrameField& F, const SurfaceField& s, const MetricField& g, const Su2Frame& f);

// ----- synthetic pure-gauge surfaces -----

struct SynthSurface {
    SurfaceField s;
    std::vector<CMat> Phi;  // generator Φ = e^{xH1} e^{yH2}
    CMat H1, H2;
    CVec y;
};
// X = ΦYΦ⁻¹, A = −∂ΦΦ⁻¹, B = −∂̄ΦΦ⁻¹ with random traceless anti-hermitian H1, H2 and Y
SynthSurface synth_surface(int N, std::uint64_t seed, const GridSpec& grid);

}  // namespace toda
