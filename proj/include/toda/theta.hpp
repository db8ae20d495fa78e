#pragma once

// Riemann theta functions Θ(z|Π) = Σ_n exp(iπ n·Πn − 2iπ z·n) with a certified
// box truncation, argument reduction and term-wise directional derivatives.

#include "toda/common.hpp"

#include <vector>

namespace toda {

struct PeriodMatrix {
    int g = 1;
    CMat Pi;

    PeriodMatrix() = default;
    explicit PeriodMatrix(const CMat& P);
    static PeriodMatrix genus1(cplx tau);

    // throws Validation if Π is not symmetric or Im Π is not positive definite
    void validate() const;
    double lambda_min_imag() const;
};

struct TruncationSpec {
    double target_abs_error = 1e-14;
    // 0 means: pick the radius per call from the tail bound
    int radius = 0;
};

// Largest radius the evaluator will ever use; beyond it the tolerance is reported unreachable.
inline constexpr int kMaxThetaRadius = 64;
// Requested tolerances below this floor cannot be delivered in double arithmetic.
inline constexpr double kMinThetaTolerance = 1e-15;

// Tail bound  Σ_{k>R} #{|n|∞ = k} · exp(−π λ k² + 2π b √g k) · poly(k)
// with λ = λ_min(Im Π), b an |Im z| budget, and poly(k) = Π_j 2π|w_j|(|m| + √g k)
// accounting for derivative factors.  Returned radius includes one guard shell:
// the smallest R ≥ 1 whose bound at R−1 is already below eps.
int truncation_radius(const PeriodMatrix& P, double eps, double imz_budget = 0.0);
double theta_tail_bound(const PeriodMatrix& P, int R, double imz_budget,
                        const std::vector<double>& dir_norms = {}, double shift_norm = 0.0);

cplx theta(const CVec& z, const PeriodMatrix& P, const TruncationSpec& t = {});
cplx theta(cplx z, cplx tau, const TruncationSpec& t = {});

// D_{w1}…D_{wk} Θ(z); each direction contributes (−2πi w·n) per series term.
cplx theta_deriv(const CVec& z, const PeriodMatrix& P, const std::vector<CVec>& dirs,
                 const TruncationSpec& t = {});

// D_{w1}…D_{wk} log Θ(z) via the set-partition (Faà di Bruno) formula.
// dirs empty → principal log Θ(z) (the reduction cocycle is added to the log).
// Throws NearThetaZero when |Θ| < zero_guard · (max summand).
cplx log_theta_jet(const CVec& z, const PeriodMatrix& P, const std::vector<CVec>& dirs,
                   const TruncationSpec& t = {}, double zero_guard = 1e-10);

// All subset derivatives in one lattice pass.  Result[mask] = D_{S(mask)}Θ / e^{C},
// where e^{C} is the reduction cocycle, returned separately as logscale = C.
struct ThetaSubsetJet {
    std::vector<cplx> d;   // indexed by bitmask over dirs
    cplx logscale = 0.0;   // log of the cocycle factor
    double max_term = 0.0; // largest reduced summand modulus
};
ThetaSubsetJet theta_subset_jet(const CVec& z, const PeriodMatrix& P, const std::vector<CVec>& dirs,
                                const TruncationSpec& t = {});

// Klein j-invariant from τ via q-series of E4, E6 (used for lattice-equivalence checks)
cplx j_invariant(cplx tau);

// Reduce τ to the standard fundamental domain of SL2(Z)
cplx reduce_tau(cplx tau);

}  // namespace toda
