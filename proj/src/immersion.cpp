#include "toda/immersion.hpp"

#include <cmath>

namespace toda {

namespace {

CMat comm(const CMat& a, const CMat& b) { return a * b - b * a; }

void check_unit(cplx lambda) {
    if (std::abs(std::abs(lambda) - 1.0) > 1e-12)
        throw Error(ErrorKind::OffUnitCircle, "|lambda| must be 1, got " + std::to_string(std::abs(lambda)));
}

struct PointJets {
    CVec u, du, dbu, ddbu, d2u, db2u;
};

PointJets point_jets(const JetField& f, int i, int j) {
    PointJets p;
    const int n = f.sites;
    p.u.resize(n), p.du.resize(n), p.dbu.resize(n), p.ddbu.resize(n), p.d2u.resize(n), p.db2u.resize(n);
    for (int s = 0; s < n; ++s) {
        const JetTable& J = f.at(i, j, s);
        p.u(s) = J[0][0].real();
        p.du(s) = J[1][0];
        p.dbu(s) = J[0][1];
        p.ddbu(s) = J[1][1];
        p.d2u(s) = J[2][0];
        p.db2u(s) = J[0][2];
    }
    return p;
}

}  // namespace

std::vector<ConnectionSample> connection_field(const JetField& f, cplx lambda) {
    if (f.max_order < 2) throw Error(ErrorKind::Validation, "connection field needs jets through order 2");
    const int N = f.sites - 1;
    std::vector<ConnectionSample> out(static_cast<std::size_t>(f.grid.size()));
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            if (f.masked(i, j)) continue;
            PointJets p = point_jets(f, i, j);
            ConnectionSample& c = out[static_cast<std::size_t>(j * f.grid.nx + i)];
            c.A = build_A(N, p.u, p.du).eval(lambda);
            c.B = build_B(N, p.u, p.dbu).eval(lambda);
            LaurentMatrix dA = build_d_A(N, p.u, p.du, p.d2u);
            c.dA = dA.eval(lambda);
            c.dbA = build_dbar_A(N, p.u, p.dbu, p.ddbu).eval(lambda);
            c.dB = build_d_B(N, p.u, p.du, p.ddbu).eval(lambda);
            // u real: ∂̄B = −ρ(∂A)
            c.dbB = -rho_series(dA).eval(lambda);
        }
    return out;
}

ConnectionFn theta_connection(const TodaThetaData& d, cplx lambda) {
    return [d, lambda](cplx xi) {
        const int n = d.N + 1;
        CVec u(n), du(n), dbu(n);
        for (int s = 0; s < n; ++s) {
            JetTable J = u_jets(d, s, xi, 1);
            u(s) = J[0][0].real();
            du(s) = J[1][0];
            dbu(s) = J[0][1];
        }
        return std::make_pair(build_A(d.N, u, du).eval(lambda), build_B(d.N, u, dbu).eval(lambda));
    };
}

int SurfaceField::masked_count() const {
    int k = 0;
    for (bool m : mask) k += m;
    return k;
}

double SurfaceField::antihermitian_defect() const {
    double w = 0;
    for (std::size_t p = 0; p < X.size(); ++p) {
        if (mask[p]) continue;
        w = std::max({w, (X[p] + X[p].adjoint()).norm(), std::abs(X[p].trace())});
    }
    return w;
}

double SurfaceField::reality_defect() const {
    double w = 0;
    for (std::size_t p = 0; p < X.size(); ++p) {
        if (mask[p]) continue;
        w = std::max(w, (dbX[p] + dX[p].adjoint()).norm());
    }
    return w;
}

std::pair<CMat, CMat> tangent_fields(const CMat& X, const CMat& A, const CMat& B) {
    return {comm(X, A), comm(X, B)};
}

SurfaceField build_X(const std::vector<CMat>& L, const std::vector<ConnectionSample>& conn, const GridSpec& grid,
                     cplx lambda, const std::vector<bool>& mask) {
    check_unit(lambda);
    grid.validate();
    const auto np = static_cast<std::size_t>(grid.size());
    if (L.size() != np || conn.size() != np || mask.size() != np)
        throw Error(ErrorKind::Validation, "field sizes do not match the grid");
    SurfaceField s;
    s.grid = grid;
    s.lambda = lambda;
    s.mask = mask;
    s.conn = conn;
    s.X.resize(np), s.dX.resize(np), s.dbX.resize(np), s.d2X.resize(np), s.ddbX.resize(np), s.db2X.resize(np);
    s.n = 0;
    for (std::size_t p = 0; p < np; ++p) {
        if (mask[p]) continue;
        const ConnectionSample& c = conn[p];
        s.n = static_cast<int>(L[p].rows());
        CMat X = kI * (L[p] + L[p].adjoint());
        X -= (X.trace() / double(s.n)) * CMat::Identity(s.n, s.n);
        auto [dX, dbX] = tangent_fields(X, c.A, c.B);
        s.d2X[p] = comm(dX, c.A) + comm(X, c.dA);
        s.ddbX[p] = comm(dbX, c.A) + comm(X, c.dbA);
        s.db2X[p] = comm(dbX, c.B) + comm(X, c.dbB);
        s.X[p] = std::move(X);
        s.dX[p] = std::move(dX);
        s.dbX[p] = std::move(dbX);
    }
    if (s.n == 0) throw Error(ErrorKind::Validation, "every grid point is masked");
    return s;
}

std::vector<LaurentMatrix> killing_field(const TodaThetaData& d, const JetField& f) {
    if (d.g() != 1) throw Error(ErrorKind::Validation, "the polynomial Killing field is built for genus 1");
    if (f.max_order < 1) throw Error(ErrorKind::Validation, "Killing field needs first jets");
    const cplx V1 = d.B1(0), V2 = d.B2(0);
    if (std::abs(V1) < 1e-14) throw Error(ErrorKind::Validation, "theta direction vanishes");
    const int N = f.sites - 1;
    std::vector<LaurentMatrix> out(static_cast<std::size_t>(f.grid.size()));
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            if (f.masked(i, j)) continue;
            CVec u(f.sites), du(f.sites), dbu(f.sites);
            for (int s = 0; s < f.sites; ++s) {
                const JetTable& J = f.at(i, j, s);
                u(s) = J[0][0].real();
                du(s) = J[1][0];
                dbu(s) = J[0][1];
            }
            LaurentMatrix A = build_A(N, u, du), B = build_B(N, u, dbu);
            out[static_cast<std::size_t>(j * f.grid.nx + i)] = (A * V2 - B * V1) * (1.0 / std::abs(V1));
        }
    return out;
}

std::vector<CMat> eval_field(const std::vector<LaurentMatrix>& L, cplx lambda) {
    std::vector<CMat> out(L.size());
    for (std::size_t p = 0; p < L.size(); ++p)
        if (L[p].n > 0) out[p] = L[p].eval(lambda);
    return out;
}

namespace {

// Φ' = −(A Δ + B Δ̄)Φ along ξ(s) = a + sΔ, s ∈ [0, 1]
CMat transport_edge(const ConnectionFn& conn, cplx a, cplx delta, CMat Phi, int substeps) {
    auto rhs = [&](cplx xi, const CMat& P) {
        auto [A, B] = conn(xi);
        return CMat(-(A * delta + B * std::conj(delta)) * P);
    };
    const double h = 1.0 / substeps;
    for (int k = 0; k < substeps; ++k) {
        cplx xi = a + (k * h) * delta;
        cplx mid = xi + (0.5 * h) * delta, end = xi + h * delta;
        CMat k1 = rhs(xi, Phi);
        CMat k2 = rhs(mid, Phi + 0.5 * h * k1);
        CMat k3 = rhs(mid, Phi + 0.5 * h * k2);
        CMat k4 = rhs(end, Phi + h * k3);
        Phi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return Phi;
}

}  // namespace

std::vector<CMat> parallel_frame(const ConnectionFn& conn, const GridSpec& grid, int n, int substeps) {
    grid.validate();
    if (substeps < 1) throw Error(ErrorKind::Validation, "substeps must be >= 1");
    std::vector<CMat> Phi(static_cast<std::size_t>(grid.size()));
    auto at = [&](int i, int j) -> CMat& { return Phi[static_cast<std::size_t>(j * grid.nx + i)]; };
    at(0, 0) = CMat::Identity(n, n);
    for (int i = 1; i < grid.nx; ++i)
        at(i, 0) = transport_edge(conn, grid.point(i - 1, 0), cplx(grid.hx, 0), at(i - 1, 0), substeps);
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 1; j < grid.ny; ++j)
            at(i, j) = transport_edge(conn, grid.point(i, j - 1), cplx(0, grid.hy), at(i, j - 1), substeps);
    return Phi;
}

std::vector<CMat> transported_field(const std::vector<CMat>& Phi, const CMat& L0) {
    std::vector<CMat> out(Phi.size());
    for (std::size_t p = 0; p < Phi.size(); ++p) out[p] = Phi[p] * L0 * Phi[p].inverse();
    return out;
}

ConservedCurrent conserved_current(const SurfaceField& s) {
    ConservedCurrent c;
    c.grid = s.grid;
    c.mask = s.mask;
    c.K.resize(s.X.size());
    c.Kdag.resize(s.X.size());
    for (std::size_t p = 0; p < s.X.size(); ++p) {
        if (s.mask[p]) continue;
        // L + L† = −iX
        CMat H = -kI * s.X[p];
        c.K[p] = comm(H, s.conn[p].B);
        c.Kdag[p] = c.K[p].adjoint();
    }
    return c;
}

double current_consistency(const ConservedCurrent& c, const SurfaceField& s) {
    double w = 0;
    for (std::size_t p = 0; p < c.K.size(); ++p) {
        if (c.mask[p]) continue;
        w = std::max({w, (kI * c.Kdag[p] - s.dX[p]).norm(), (kI * c.K[p] - s.dbX[p]).norm()});
    }
    return w;
}

double conservation_residual(const ConservedCurrent& c) {
    const GridSpec& g = c.grid;
    auto id = [&](int i, int j) { return static_cast<std::size_t>(j * g.nx + i); };
    double w = 0;
    for (int j = 1; j + 1 < g.ny; ++j)
        for (int i = 1; i + 1 < g.nx; ++i) {
            if (c.mask[id(i, j)] || c.mask[id(i - 1, j)] || c.mask[id(i + 1, j)] || c.mask[id(i, j - 1)] ||
                c.mask[id(i, j + 1)])
                continue;
            CMat Kx = (c.K[id(i + 1, j)] - c.K[id(i - 1, j)]) / (2 * g.hx);
            CMat Ky = (c.K[id(i, j + 1)] - c.K[id(i, j - 1)]) / (2 * g.hy);
            CMat Tx = (c.Kdag[id(i + 1, j)] - c.Kdag[id(i - 1, j)]) / (2 * g.hx);
            CMat Ty = (c.Kdag[id(i, j + 1)] - c.Kdag[id(i, j - 1)]) / (2 * g.hy);
            CMat r = 0.5 * (Kx - kI * Ky) - 0.5 * (Tx + kI * Ty);
            w = std::max(w, r.norm());
        }
    return w;
}

GridPath staircase_path(int i0, int j0, int i1, int j1, bool x_first) {
    GridPath p{{i0, j0}};
    int i = i0, j = j0;
    auto walk_x = [&] {
        while (i != i1) p.emplace_back(i += (i1 > i ? 1 : -1), j);
    };
    auto walk_y = [&] {
        while (j != j1) p.emplace_back(i, j += (j1 > j ? 1 : -1));
    };
    if (x_first) {
        walk_x();
        walk_y();
    } else {
        walk_y();
        walk_x();
    }
    return p;
}

CMat reconstruct_by_integral(const ConservedCurrent& c, const GridPath& path) {
    const GridSpec& g = c.grid;
    std::size_t n0 = 0;
    while (n0 < c.K.size() && c.mask[n0]) ++n0;
    if (n0 == c.K.size()) throw Error(ErrorKind::MaskedPath, "every grid point is masked");
    const auto n = c.K[n0].rows();
    CMat acc = CMat::Zero(n, n);
    auto id = [&](const std::pair<int, int>& q) {
        if (q.first < 0 || q.first >= g.nx || q.second < 0 || q.second >= g.ny)
            throw Error(ErrorKind::Validation, "path leaves the grid");
        auto p = static_cast<std::size_t>(q.second * g.nx + q.first);
        if (c.mask[p]) throw Error(ErrorKind::MaskedPath, "path crosses a masked point");
        return p;
    };
    for (std::size_t k = 0; k < path.size(); ++k) id(path[k]);
    for (std::size_t k = 1; k < path.size(); ++k) {
        auto a = path[k - 1], b = path[k];
        if (std::abs(a.first - b.first) + std::abs(a.second - b.second) != 1)
            throw Error(ErrorKind::Validation, "path steps must join grid neighbours");
        auto pa = id(a), pb = id(b);
        cplx dxi = g.point(b.first, b.second) - g.point(a.first, a.second);
        acc += kI * 0.5 * ((c.Kdag[pa] + c.Kdag[pb]) * dxi + (c.K[pa] + c.K[pb]) * std::conj(dxi));
    }
    return acc;
}

TraceInvariants trace_invariants(const SurfaceField& s) {
    TraceInvariants t;
    const std::size_t np = s.X.size();
    for (int k = 2; k <= s.n; ++k) {
        std::vector<cplx> v(np, cplx(NAN, NAN));
        cplx sum = 0;
        int cnt = 0;
        for (std::size_t p = 0; p < np; ++p) {
            if (s.mask[p]) continue;
            CMat P = s.X[p];
            for (int e = 1; e < k; ++e) P = P * s.X[p];
            v[p] = P.trace();
            sum += v[p];
            ++cnt;
        }
        cplx mean = sum / double(cnt);
        double w = 0;
        for (std::size_t p = 0; p < np; ++p)
            if (!s.mask[p]) w = std::max(w, std::abs(v[p] - mean));
        t.tr.push_back(std::move(v));
        t.mean.push_back(mean);
        t.rel_drift.push_back(w / std::max(std::abs(mean), 1e-300));
    }
    return t;
}

CVec char_poly(const CMat& M) {
    // Faddeev–LeVerrier
    const auto n = M.rows();
    CVec c(n + 1);
    c(0) = 1.0;
    CMat Mk = CMat::Zero(n, n), I = CMat::Identity(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        Mk = M * Mk + c(k - 1) * I;
        c(k) = -(M * Mk).trace() / double(k);
    }
    return c;
}

CharacteristicField characteristic_field(const std::vector<LaurentMatrix>& L, const std::vector<bool>& mask,
                                         const std::vector<cplx>& lambdas) {
    CharacteristicField cf;
    cf.lambdas = lambdas;
    if (L.size() != mask.size()) throw Error(ErrorKind::Validation, "mask size mismatch");
    std::vector<LaurentMatrix> M(L.size());
    std::size_t first = L.size();
    for (std::size_t p = 0; p < L.size(); ++p) {
        if (mask[p]) continue;
        M[p] = L[p] + rho_series(L[p]);
        if (first == L.size()) first = p;
    }
    if (first == L.size()) throw Error(ErrorKind::Validation, "every grid point is masked");
    for (cplx lam : lambdas) {
        std::vector<CVec> row(L.size());
        CVec mean = CVec::Zero(M[first].n + 1);
        int cnt = 0;
        for (std::size_t p = 0; p < L.size(); ++p) {
            if (mask[p]) continue;
            row[p] = char_poly(M[p].eval(lam));
            mean += row[p];
            ++cnt;
        }
        mean /= double(cnt);
        double scale = mean.tail(mean.size() - 1).cwiseAbs().maxCoeff();
        for (std::size_t p = 0; p < L.size(); ++p)
            if (!mask[p])
                cf.max_drift =
                    std::max(cf.max_drift, (row[p] - mean).cwiseAbs().maxCoeff() / std::max(scale, 1e-300));
        cf.coeffs.push_back(std::move(row));
    }
    if (M[first].n == 2 && lambdas.size() >= 3) {
        // det M = c_2 at the first unmasked point, fitted by p₁λ + p₀ + p₋₁/λ
        const auto m = static_cast<Eigen::Index>(lambdas.size());
        CMat V(m, 3);
        CVec b(m);
        for (Eigen::Index l = 0; l < m; ++l) {
            cplx lam = lambdas[static_cast<std::size_t>(l)];
            V(l, 0) = lam;
            V(l, 1) = 1.0;
            V(l, 2) = 1.0 / lam;
            b(l) = cf.coeffs[static_cast<std::size_t>(l)][first](2);
        }
        CVec x = V.colPivHouseholderQr().solve(b);
        for (int k = 0; k < 3; ++k) cf.fit[k] = x(k);
        cf.fit_residual = (V * x - b).norm() / std::max(b.norm(), 1e-300);
    }
    return cf;
}

}  // namespace toda
