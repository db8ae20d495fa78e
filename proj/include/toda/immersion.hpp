#pragma once

// The immersed surface X = i(L + ρ(L)) ∈ su(N+1) attached to a Lax field L, its tangent and
// second-derivative fields, the conserved current and the integral reconstruction.

#include "toda/lax.hpp"
#include "toda/solution.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace toda {

// A_λ, B_λ and their first derivatives at one point, numeric at a fixed λ
struct ConnectionSample {
    CMat A, B, dA, dbA, dB, dbB;
};

// connection samples on the grid of a jet field (needs jets through order 2); masked points left empty
std::vector<ConnectionSample> connection_field(const JetField& f, cplx lambda);

// A_λ, B_λ at an arbitrary point
using ConnectionFn = std::function<std::pair<CMat, CMat>(cplx xi)>;
ConnectionFn theta_connection(const TodaThetaData& d, cplx lambda);

struct SurfaceField {
    GridSpec grid;
    cplx lambda = 1.0;
    int n = 2;  // matrix size N+1
    std::vector<CMat> X, dX, dbX, d2X, ddbX, db2X;
    std::vector<ConnectionSample> conn;
    std::vector<bool> mask;

    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j * grid.nx + i); }
    bool masked(int i, int j) const { return mask[idx(i, j)]; }
    int masked_count() const;
    // max of ‖X† + X‖, |tr X| over unmasked points
    double antihermitian_defect() const;
    // ∂̄X = −(∂X)† for a real immersion
    double reality_defect() const;
};

// X = i(L + L†) (ρ(L) = L† on |λ| = 1); tangents [X, A], [X, B]; second derivatives
// ∂²X = [∂X, A] + [X, ∂A], ∂∂̄X = [∂̄X, A] + [X, ∂̄A], ∂̄²X = [∂̄X, B] + [X, ∂̄B]
SurfaceField build_X(const std::vector<CMat>& L, const std::vector<ConnectionSample>& conn, const GridSpec& grid,
                     cplx lambda, const std::vector<bool>& mask);

// the tangent pair at one point
std::pair<CMat, CMat> tangent_fields(const CMat& X, const CMat& A, const CMat& B);

// genus-1 polynomial Killing field L = (V₂A_λ − V₁B_λ)/|V₁| with V₁, V₂ the theta directions of ξ, ξ̄:
// solves ∂L = [L, A], ∂̄L = [L, B] exactly because u depends on ξ only through V₁ξ + V₂ξ̄
std::vector<LaurentMatrix> killing_field(const TodaThetaData& d, const JetField& f);
std::vector<CMat> eval_field(const std::vector<LaurentMatrix>& L, cplx lambda);

// parallel transport dΦ = −(A dξ + B dξ̄)Φ from the grid basepoint (0,0): along row 0, then up
// each column, RK4 with `substeps` per grid edge; returns Φ per point (unitary when |λ| = 1)
std::vector<CMat> parallel_frame(const ConnectionFn& conn, const GridSpec& grid, int n, int substeps = 4);
// L = Φ L₀ Φ⁻¹ solves both Lax equations for any constant L₀
std::vector<CMat> transported_field(const std::vector<CMat>& Phi, const CMat& L0);

// K = [L + L†, B] and K†; with X = i(L + L†): iK = ∂̄X and iK† = ∂X
struct ConservedCurrent {
    GridSpec grid;
    std::vector<CMat> K, Kdag;
    std::vector<bool> mask;
};
ConservedCurrent conserved_current(const SurfaceField& s);
// max ‖iK† − ∂X‖ and ‖iK − ∂̄X‖
double current_consistency(const ConservedCurrent& c, const SurfaceField& s);
// ∂K − ∂̄K† by central differences on interior unmasked points; max Frobenius norm
double conservation_residual(const ConservedCurrent& c);

using GridPath = std::vector<std::pair<int, int>>;
// staircase between grid points; x_first chooses the order of the two legs
GridPath staircase_path(int i0, int j0, int i1, int j1, bool x_first);
// i∫(K† dξ + K dξ̄) along consecutive grid neighbours, trapezoid rule
CMat reconstruct_by_integral(const ConservedCurrent& c, const GridPath& path);

struct TraceInvariants {
    // tr[k−2][p] = tr X^k at point p, k = 2..N+1
    std::vector<std::vector<cplx>> tr;
    std::vector<double> rel_drift;  // per k: max |tr − mean| / max(|mean|, tiny)
    std::vector<cplx> mean;
};
TraceInvariants trace_invariants(const SurfaceField& s);

// characteristic polynomial det(y − M) = y^n + c_1 y^{n−1} + … + c_n of M = L + ρ(L)
CVec char_poly(const CMat& M);
struct CharacteristicField {
    std::vector<cplx> lambdas;
    // coeffs[l][p] = char-poly coefficient vector at λ_l, point p
    std::vector<std::vector<CVec>> coeffs;
    double max_drift = 0.0;  // relative spread across the grid, max over λ and coefficient
    // su(2): det M(λ) fitted to p₁λ + p₀ + p₋₁λ⁻¹ (at the first unmasked point)
    cplx fit[3] = {0.0, 0.0, 0.0};
    double fit_residual = 0.0;
};
CharacteristicField characteristic_field(const std::vector<LaurentMatrix>& L, const std::vector<bool>& mask,
                                         const std::vector<cplx>& lambdas);

}  // namespace toda
