#pragma once

// Theta-function solutions u_n of the periodic 2D Toda lattice and their ∂/∂̄ jets.
// Convention: ξ = x + iy, ∂ = ½(∂x − i∂y), ∂̄ = ½(∂x + i∂y).

#include "toda/theta.hpp"

#include <iosfwd>
#include <vector>

namespace toda {

struct TodaThetaData {
    PeriodMatrix Pi;
    CVec W_inf, W_0;   // U(Q∞)−U(D)−K, U(Q₀)−U(D)−K
    CVec Delta;        // U(Q₀)−U(Q∞)
    CVec B1, B2;       // theta-argument directions multiplying ξ and ξ̄
    double c_const = 0.0;
    double cn_const = 0.0;
    int N = 1;

    int g() const { return Pi.g; }
    void validate() const;
};

// theta argument W + nΔ + ξB1 + ξ̄B2
CVec theta_argument(const TodaThetaData& d, const CVec& W, int n, cplx xi);

// u_n before the traceless projection: ½ log|Θ(W∞+nΔ+z)/Θ(W₀+nΔ+z)| + c + c_n·n
double u_raw(const TodaThetaData& d, int n, cplx xi);
// all sites, projected so that Σ_n u_n = 0
RVec u_all(const TodaThetaData& d, cplx xi);
double u_site(const TodaThetaData& d, int n, cplx xi);

// J[a][b] = ∂^a ∂̄^b u_n for a + b ≤ max_order (J[a] has max_order − a + 1 entries)
using JetTable = std::vector<std::vector<cplx>>;
// unprojected jets of the raw u_n
JetTable u_raw_jets(const TodaThetaData& d, int n, cplx xi, int max_order = 4);
// projected jets
JetTable u_jets(const TodaThetaData& d, int n, cplx xi, int max_order = 4);

struct GridSpec {
    double x0 = -1.0, y0 = -1.0;
    double hx = 0.1, hy = 0.1;
    int nx = 21, ny = 21;

    cplx point(int i, int j) const { return {x0 + i * hx, y0 + j * hy}; }
    int size() const { return nx * ny; }
    void validate() const;
};

struct JetField {
    GridSpec grid;
    int sites = 2;
    int max_order = 4;
    // values[p][n] for grid point p = j*nx + i
    std::vector<std::vector<JetTable>> values;
    std::vector<bool> mask;          // true = singular (NearThetaZero), skipped downstream
    std::vector<double> subtracted;  // site mean removed by the projection, per point

    const JetTable& at(int i, int j, int n) const { return values[static_cast<std::size_t>(j * grid.nx + i)][n]; }
    bool masked(int i, int j) const { return mask[static_cast<std::size_t>(j * grid.nx + i)]; }
    int masked_count() const;
};

JetField evaluate_jet_field(const TodaThetaData& d, const GridSpec& grid, int max_order = 4);

struct ResidualReport {
    double max = 0.0;
    double mean = 0.0;
    std::vector<double> per_site_max;  // largest |diag| entry per site
    int points = 0;
};
// ∂̄A − ∂B − [A, B] with B = −ρ(A), built from the jets; max over a few λ on the unit circle
ResidualReport toda_residual(const JetField& f);

struct SignReport {
    bool positive = true;
    int checked = 0;
    int flagged = 0;             // NearThetaZero points
    double worst_phase = 0.0;    // largest phase drift of the theta ratio from a real reference
};
// e^{2u_n} is a theta ratio; it must be a strictly positive real across the grid
SignReport h_sign_check(const TodaThetaData& d, const GridSpec& grid, double phase_tol = 1e-8);

// CSV: x,y,site,a,b,value_re,value_im,mask
void write_jet_csv(std::ostream& os, const JetField& f);

}  // namespace toda
