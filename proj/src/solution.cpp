#include "toda/solution.hpp"

#include "toda/lax.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace toda {

void TodaThetaData::validate() const {
    Pi.validate();
    const int g = Pi.g;
    if (W_inf.size() != g || W_0.size() != g || Delta.size() != g || B1.size() != g || B2.size() != g)
        throw Error(ErrorKind::Validation, "theta data vectors must have dimension g");
    if (N < 1) throw Error(ErrorKind::Validation, "N must be >= 1");
    if (!W_inf.allFinite() || !W_0.allFinite() || !Delta.allFinite() || !B1.allFinite() || !B2.allFinite() ||
        !std::isfinite(c_const) || !std::isfinite(cn_const))
        throw Error(ErrorKind::Validation, "theta data has non-finite entries");
}

void GridSpec::validate() const {
    if (nx < 1 || ny < 1) throw Error(ErrorKind::Validation, "grid must have at least one point");
    if (!(hx > 0) || !(hy > 0)) throw Error(ErrorKind::Validation, "grid spacing must be positive");
}

CVec theta_argument(const TodaThetaData& d, const CVec& W, int n, cplx xi) {
    return W + double(n) * d.Delta + xi * d.B1 + std::conj(xi) * d.B2;
}

namespace {

// ∂^a ∂̄^b of F = ½[log Θ(W∞+…) − log Θ(W₀+…)], treating ξ and ξ̄ as independent
cplx F_jet(const TodaThetaData& d, int n, cplx xi, int a, int b) {
    std::vector<CVec> dirs;
    for (int i = 0; i < a; ++i) dirs.push_back(d.B1);
    for (int i = 0; i < b; ++i) dirs.push_back(d.B2);
    cplx num = log_theta_jet(theta_argument(d, d.W_inf, n, xi), d.Pi, dirs);
    cplx den = log_theta_jet(theta_argument(d, d.W_0, n, xi), d.Pi, dirs);
    return 0.5 * (num - den);
}

}  // namespace

double u_raw(const TodaThetaData& d, int n, cplx xi) {
    return F_jet(d, n, xi, 0, 0).real() + d.c_const + d.cn_const * n;
}

RVec u_all(const TodaThetaData& d, cplx xi) {
    RVec u(d.N + 1);
    for (int n = 0; n <= d.N; ++n) u(n) = u_raw(d, n, xi);
    u.array() -= u.mean();
    return u;
}

double u_site(const TodaThetaData& d, int n, cplx xi) {
    if (n < 0 || n > d.N) throw Error(ErrorKind::Validation, "site index out of range");
    return u_all(d, xi)(n);
}

JetTable u_raw_jets(const TodaThetaData& d, int n, cplx xi, int max_order) {
    if (max_order < 0 || max_order > 6) throw Error(ErrorKind::Validation, "jet order must be in 0..6");
    // u = Re F, so ∂^a∂̄^b u = ½(∂^a∂̄^b F + conj(∂^b∂̄^a F))
    JetTable G(static_cast<std::size_t>(max_order + 1));
    for (int a = 0; a <= max_order; ++a) {
        G[a].resize(static_cast<std::size_t>(max_order - a + 1));
        for (int b = 0; a + b <= max_order; ++b) G[a][b] = F_jet(d, n, xi, a, b);
    }
    JetTable J = G;
    for (int a = 0; a <= max_order; ++a)
        for (int b = 0; a + b <= max_order; ++b) J[a][b] = 0.5 * (G[a][b] + std::conj(G[b][a]));
    J[0][0] = J[0][0].real() + d.c_const + d.cn_const * n;
    return J;
}

JetTable u_jets(const TodaThetaData& d, int n, cplx xi, int max_order) {
    if (n < 0 || n > d.N) throw Error(ErrorKind::Validation, "site index out of range");
    std::vector<JetTable> all;
    for (int s = 0; s <= d.N; ++s) all.push_back(u_raw_jets(d, s, xi, max_order));
    JetTable J = all[n];
    for (int a = 0; a <= max_order; ++a)
        for (int b = 0; a + b <= max_order; ++b) {
            cplx m = 0;
            for (auto& t : all) m += t[a][b];
            J[a][b] -= m / double(d.N + 1);
        }
    return J;
}

int JetField::masked_count() const {
    int k = 0;
    for (bool m : mask) k += m;
    return k;
}

JetField evaluate_jet_field(const TodaThetaData& d, const GridSpec& grid, int max_order) {
    d.validate();
    grid.validate();
    JetField f;
    f.grid = grid;
    f.sites = d.N + 1;
    f.max_order = max_order;
    f.values.resize(static_cast<std::size_t>(grid.size()));
    f.mask.assign(static_cast<std::size_t>(grid.size()), false);
    f.subtracted.assign(static_cast<std::size_t>(grid.size()), 0.0);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            auto p = static_cast<std::size_t>(j * grid.nx + i);
            cplx xi = grid.point(i, j);
            try {
                std::vector<JetTable> raw;
                for (int s = 0; s <= d.N; ++s) raw.push_back(u_raw_jets(d, s, xi, max_order));
                std::vector<JetTable> proj = raw;
                for (int a = 0; a <= max_order; ++a)
                    for (int b = 0; a + b <= max_order; ++b) {
                        cplx m = 0;
                        for (auto& t : raw) m += t[a][b];
                        m /= double(d.N + 1);
                        for (auto& t : proj) t[a][b] -= m;
                        if (a == 0 && b == 0) f.subtracted[p] = m.real();
                    }
                f.values[p] = std::move(proj);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NearThetaZero) throw;
                f.mask[p] = true;
            }
        }
    return f;
}

ResidualReport toda_residual(const JetField& f) {
    if (f.max_order < 2) throw Error(ErrorKind::Validation, "toda residual needs jets through order 2");
    const int N = f.sites - 1;
    ResidualReport r;
    r.per_site_max.assign(static_cast<std::size_t>(f.sites), 0.0);
    const cplx lams[] = {1.0, std::polar(1.0, 0.9), std::polar(1.0, 2.3)};
    double sum = 0;
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            if (f.masked(i, j)) continue;
            CVec u(f.sites), du(f.sites), dbu(f.sites), ddbu(f.sites);
            for (int n = 0; n < f.sites; ++n) {
                const JetTable& J = f.at(i, j, n);
                u(n) = J[0][0].real();
                du(n) = J[1][0];
                dbu(n) = J[0][1];
                ddbu(n) = J[1][1];
            }
            LaurentMatrix A = build_A(N, u, du), B = build_B(N, u, dbu);
            LaurentMatrix dA = build_dbar_A(N, u, dbu, ddbu), dB = build_d_B(N, u, du, ddbu);
            double worst = 0;
            for (cplx lam : lams) {
                CMat Am = A.eval(lam), Bm = B.eval(lam);
                CMat R = dA.eval(lam) - dB.eval(lam) - (Am * Bm - Bm * Am);
                worst = std::max(worst, R.norm());
                for (int n = 0; n < f.sites; ++n)
                    r.per_site_max[static_cast<std::size_t>(n)] =
                        std::max(r.per_site_max[static_cast<std::size_t>(n)], std::abs(R(n, n)));
            }
            r.max = std::max(r.max, worst);
            sum += worst;
            ++r.points;
        }
    r.mean = r.points ? sum / r.points : 0.0;
    return r;
}

SignReport h_sign_check(const TodaThetaData& d, const GridSpec& grid, double phase_tol) {
    d.validate();
    grid.validate();
    SignReport s;
    // the constant phase of the ratio depends on the lattice representatives of W∞, W₀ and is
    // absorbed by the complex constants c, c_n; what matters is a single real sign over the grid
    std::vector<double> ref(static_cast<std::size_t>(d.N + 1), NAN);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
            for (int n = 0; n <= d.N; ++n) {
                cplx xi = grid.point(i, j);
                try {
                    cplx l = log_theta_jet(theta_argument(d, d.W_inf, n, xi), d.Pi, {}) -
                             log_theta_jet(theta_argument(d, d.W_0, n, xi), d.Pi, {});
                    double& r0 = ref[static_cast<std::size_t>(n)];
                    if (std::isnan(r0)) {
                        r0 = std::arg(std::exp(cplx(0.0, l.imag())));
                        // a definite sign needs the ratio to be real at the reference point
                        double off = std::min(std::abs(r0), kPi - std::abs(r0));
                        s.worst_phase = std::max(s.worst_phase, off);
                        if (off > phase_tol) s.positive = false;
                    }
                    double ph = std::abs(std::arg(std::exp(cplx(0.0, l.imag() - r0))));
                    s.worst_phase = std::max(s.worst_phase, ph);
                    if (ph > phase_tol) s.positive = false;
                    ++s.checked;
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::NearThetaZero) throw;
                    ++s.flagged;
                    s.positive = false;
                }
            }
    return s;
}

void write_jet_csv(std::ostream& os, const JetField& f) {
    os << "x,y,site,a,b,value_re,value_im,mask\n";
    os << std::setprecision(17);
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            cplx xi = f.grid.point(i, j);
            bool m = f.masked(i, j);
            for (int n = 0; n < f.sites; ++n)
                for (int a = 0; a <= f.max_order; ++a)
                    for (int b = 0; a + b <= f.max_order; ++b) {
                        cplx v = m ? cplx(NAN, NAN) : f.at(i, j, n)[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
                        os << xi.real() << ',' << xi.imag() << ',' << n << ',' << a << ',' << b << ',' << v.real()
                           << ',' << v.imag() << ',' << (m ? 1 : 0) << '\n';
                    }
        }
}

}  // namespace toda
