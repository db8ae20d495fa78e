#pragma once

// Lax matrices of the periodic 2D Toda lattice: A_λ, B_λ = −ρ(A_λ), the gauged Â_λ,
// L-matrices from the Drinfeld–Sokolov recursion, and the su(2) closed forms.

#include "toda/diffpoly.hpp"

#include <map>
#include <vector>

namespace toda {

// numeric Laurent polynomial in λ with matrix coefficients
struct LaurentMatrix {
    int n = 0;  // matrix size N+1
    std::map<int, CMat> c;

    CMat eval(cplx lambda) const;
    CMat& at(int power);
    LaurentMatrix operator+(const LaurentMatrix& o) const;
    LaurentMatrix operator-(const LaurentMatrix& o) const;
    LaurentMatrix operator*(const LaurentMatrix& o) const;
    LaurentMatrix operator*(cplx s) const;
    double max_abs_diff(const LaurentMatrix& o) const;
};

// symbolic counterpart, entries in the differential polynomial ring
struct SymLaurentMatrix {
    int n = 0;
    std::map<int, std::vector<std::vector<DiffPoly>>> c;

    DiffPoly& at(int power, int i, int j);
    LaurentMatrix eval(const JetAssignment& a) const;
};

using DiagPoly = std::vector<DiffPoly>;

// ρ(Σ X_i λ^i) = Σ X_i† λ^{−i}
LaurentMatrix rho_series(const LaurentMatrix& M);

// Λ^p: entry (k, k−r) = λ^q for k ≥ r and (k, k−r+N+1) = λ^{q+1} for k < r, p = q(N+1) + r
LaurentMatrix Lambda_power(int N, int p);

// A_λ with diagonal ∂u_i, subdiagonal e^{u_i−u_{i−1}} and corner λe^{u_0−u_N}
LaurentMatrix build_A(int N, const CVec& u, const CVec& du);
// B_λ = −ρ(A_λ); for real u the conjugate of ∂u_i is ∂̄u_i
LaurentMatrix build_B(int N, const CVec& u, const CVec& dbu);
// analytic derivatives: ∂̄A_λ and ∂B_λ from ∂∂̄u and first jets
LaurentMatrix build_dbar_A(int N, const CVec& u, const CVec& dbu, const CVec& ddbu);
LaurentMatrix build_d_B(int N, const CVec& u, const CVec& du, const CVec& ddbu);
// ∂A_λ (diagonal ∂²u_i, off-diagonal (∂u_i − ∂u_j)U_ij)
LaurentMatrix build_d_A(int N, const CVec& u, const CVec& du, const CVec& d2u);

// G⁻¹AG + G⁻¹∂G with G = diag(e^{u_i})
LaurentMatrix gauge_hat(const LaurentMatrix& A, const CVec& u, const CVec& du);
// Λ + diag(2∂u_i) symbolically, with the traceless substitution applied
SymLaurentMatrix hat_A_symbolic(int N);

// the DS recursion: l_{j+1} − σ(l_{j+1}) = ∂l_j − l_j(σ^{M−j}(Â_0) − Â_0), l_0 = I, j < M;
// scalar freedom fixed by tracelessness of the next right-hand side (l_M traceless)
std::vector<DiagPoly> ds_recursion(int N, int M);
inline int su2_degree(int m) { return 2 * m - 1; }
inline int su3_degree(int n) { return 3 * n + 1; }

// σ acting on a diagonal: (σl)_k = l_{k−1}, (σl)_0 = l_N
DiagPoly sigma(const DiagPoly& l, int times = 1);

// gauged L̂ = Σ_{p=0}^{M} l_{M−p} Λ^p
SymLaurentMatrix L_hat(const std::vector<DiagPoly>& l);
SymLaurentMatrix sym_derive(const SymLaurentMatrix& M);

// reference su(3), n = 1 coefficients l_0..l_4
std::vector<DiagPoly> su3_reference_coeffs();

// ℒ_n from ∂ℒ_n = ¼(∂³ − 8(∂²e^{2u₀})∂ − 4(∂³e^{2u₀}))ℒ_{n−1}, ℒ_0 = 1
std::vector<DiffPoly> su2_calL(int n);
// the reference ℒ_2 = −1/16 ∂⁴e^{2u₀} + 9/8 ∂²e^{2u₀}
DiffPoly su2_calL2_reference();

// λ-polynomials: index = power of λ
struct PQR {
    std::vector<DiffPoly> P, Q, R;
};
// from the DS recursion for N = 1: L = [[P, Q], [R, −P]] in the ungauged frame
PQR su2_PQR(int m);
// the reference assembly from ℒ_n (Q with ℒ[−u_0])
PQR su2_PQR_reference(int m);
// residuals of ∂P = Qe^{−2u₀} − λRe^{2u₀}, ∂Q = 2(PλE − Q∂u₀), ∂R = 2(−PE⁻¹ + R∂u₀), per λ-power
std::vector<DiffPoly> su2_coef_defects(const PQR& pqr);
SymLaurentMatrix su2_L_from_PQR(const PQR& pqr);

// numeric jets for sites 0..N−1 up to `order`; site N filled by −Σ
struct SiteJets {
    int N = 1;
    std::vector<std::vector<cplx>> d;  // d[site][k] = ∂^k u_site, sites 0..N
    JetAssignment assignment() const;
    CVec order(int k) const;
};
SiteJets make_site_jets(int N, const std::vector<std::vector<cplx>>& free_sites);

// ungauged L = G L̂ G⁻¹ and ∂L = G(∂L̂ + [D, L̂])G⁻¹, D = diag(∂u)
void ungauge(const LaurentMatrix& Lh, const LaurentMatrix& dLh, const CVec& u, const CVec& du,
             LaurentMatrix& L, LaurentMatrix& dL);

// max over λ samples of ‖∂L − [L, A_λ]‖_F in the ungauged frame
double lax_residual_xi(const SymLaurentMatrix& Lh, const SiteJets& jets, const std::vector<cplx>& lambdas);
// same for an ungauged symbolic L (su(2) closed forms, entries may contain E_0^{±1})
double lax_residual_xi_ungauged(const SymLaurentMatrix& L, const SiteJets& jets,
                                const std::vector<cplx>& lambdas);

// overwrite the top jets ∂^K u_i (i < N) so that ∂l_M = 0 at the point; K = max order of ∂l_M.
// Returns the residual max|∂l_M| after the solve.
double make_stationary(const DiagPoly& lM, SiteJets& jets);

// ‖∂̄A − ∂B − [A, B]‖_F at λ
double zero_curvature_residual(int N, const CVec& u, const CVec& du, const CVec& dbu, const CVec& ddbu,
                               cplx lambda);

}  // namespace toda
