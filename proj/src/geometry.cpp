#include "toda/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace toda {

namespace {

CMat comm(const CMat& a, const CMat& b) { return a * b - b * a; }

// central difference in the interior, one-sided second order at the edges
template <class Get>
cplx diff1(Get get, int k, int n, double h) {
    if (n < 3) return cplx(NAN, NAN);
    if (k == 0) return (-3.0 * get(0) + 4.0 * get(1) - get(2)) / (2 * h);
    if (k == n - 1) return (3.0 * get(n - 1) - 4.0 * get(n - 2) + get(n - 3)) / (2 * h);
    return (get(k + 1) - get(k - 1)) / (2 * h);
}

// complex derivatives of a scalar grid field by FD; NaN propagates from flagged points
void fd_scalar(const std::vector<cplx>& f, const GridSpec& g, int i, int j, cplx& d, cplx& db) {
    auto fx = diff1([&](int a) { return f[static_cast<std::size_t>(j * g.nx + a)]; }, i, g.nx, g.hx);
    auto fy = diff1([&](int b) { return f[static_cast<std::size_t>(b * g.nx + i)]; }, j, g.ny, g.hy);
    d = 0.5 * (fx - kI * fy);
    db = 0.5 * (fx + kI * fy);
}

double fnorm(const CMat& m) { return m.norm(); }

}  // namespace

cplx inner(const CMat& X, const CMat& Y) {
    if (X.rows() != Y.rows() || X.cols() != Y.cols()) throw Error(ErrorKind::Validation, "inner: size mismatch");
    return -0.5 * X.cwiseProduct(Y.transpose()).sum();
}

double MetricField::reality_defect() const {
    double w = 0;
    for (std::size_t p = 0; p < g11.size(); ++p) {
        if (flagged[p]) continue;
        w = std::max({w, std::abs(g22[p] - std::conj(g11[p])), std::abs(g12[p].imag())});
    }
    return w;
}

MetricField first_form(const SurfaceField& s, double rel_tol) {
    MetricField m;
    m.grid = s.grid;
    const std::size_t np = s.X.size();
    m.g11.assign(np, cplx(NAN, NAN));
    m.g12 = m.g22 = m.detG = m.g11;
    m.flagged = s.mask;
    int live = 0;
    for (std::size_t p = 0; p < np; ++p) {
        if (s.mask[p]) continue;
        m.g11[p] = inner(s.dX[p], s.dX[p]);
        m.g12[p] = inner(s.dX[p], s.dbX[p]);
        m.g22[p] = inner(s.dbX[p], s.dbX[p]);
        m.detG[p] = m.g11[p] * m.g22[p] - m.g12[p] * m.g12[p];
        double scale = std::max({std::abs(m.g11[p]), std::abs(m.g12[p]), std::abs(m.g22[p])});
        if (!(std::abs(m.detG[p]) >= rel_tol * scale * scale) || scale == 0.0) {
            m.flagged[p] = true;
            ++m.degenerate;
        } else {
            ++live;
        }
    }
    if (live == 0) throw Error(ErrorKind::DegenerateMetric, "det G vanishes at every unmasked point");
    return m;
}

MetricDerivs metric_derivatives(const SurfaceField& s, std::size_t p) {
    const CMat &dX = s.dX[p], &dbX = s.dbX[p];
    MetricDerivs r;
    r.dg11 = 2.0 * inner(s.d2X[p], dX);
    r.dbg11 = 2.0 * inner(s.ddbX[p], dX);
    r.dg12 = inner(s.d2X[p], dbX) + inner(dX, s.ddbX[p]);
    r.dbg12 = inner(s.ddbX[p], dbX) + inner(dX, s.db2X[p]);
    r.dg22 = 2.0 * inner(s.ddbX[p], dbX);
    r.dbg22 = 2.0 * inner(s.db2X[p], dbX);
    return r;
}

std::pair<cplx, cplx> tangential_coeffs(const CMat& V, const CMat& dX, const CMat& dbX) {
    cplx g11 = inner(dX, dX), g12 = inner(dX, dbX), g22 = inner(dbX, dbX);
    cplx r1 = inner(V, dX), r2 = inner(V, dbX);
    cplx det = g11 * g22 - g12 * g12;
    if (det == 0.0) throw Error(ErrorKind::DegenerateMetric, "tangent plane is degenerate");
    return {(g22 * r1 - g12 * r2) / det, (g11 * r2 - g12 * r1) / det};
}

CMat normal_part(const CMat& V, const CMat& dX, const CMat& dbX) {
    auto [a, b] = tangential_coeffs(V, dX, dbX);
    return V - a * dX - b * dbX;
}

Christoffel christoffel_reference(cplx g11, cplx g12, cplx g22, const MetricDerivs& dg) {
    cplx det = g11 * g22 - g12 * g12;
    // ḡ11 = g22 on real immersions; ∂ḡ11 is ∂ of the function g22
    Christoffel a;
    a.a11 = (0.5 * dg.dg11 * g22 - dg.dg12 * g12 + 0.5 * dg.dbg11 * g12) / det;
    a.a12 = (g11 * dg.dg12 - 0.5 * g11 * dg.dbg11 - 0.5 * g12 * dg.dg11) / det;
    a.a21 = (dg.dbg11 * g22 - dg.dg22 * g12) / (2.0 * det);
    a.a22 = (g11 * dg.dg22 - dg.dbg11 * g12) / (2.0 * det);
    return a;
}

Christoffel christoffel_solve(const SurfaceField& s, std::size_t p) {
    Eigen::Matrix2cd G;
    G << inner(s.dX[p], s.dX[p]), inner(s.dX[p], s.dbX[p]), inner(s.dX[p], s.dbX[p]), inner(s.dbX[p], s.dbX[p]);
    Eigen::Matrix2cd R;
    R << inner(s.d2X[p], s.dX[p]), inner(s.ddbX[p], s.dX[p]), inner(s.d2X[p], s.dbX[p]), inner(s.ddbX[p], s.dbX[p]);
    Eigen::Matrix2cd S = G.fullPivLu().solve(R);
    return {S(0, 0), S(1, 0), S(0, 1), S(1, 1)};
}

SecondForm second_form(const SurfaceField& s, const MetricField& g) {
    SecondForm II;
    const std::size_t np = s.X.size();
    II.II11.resize(np), II.II12.resize(np), II.II22.resize(np), II.alpha.resize(np);
    int live = 0;
    for (std::size_t p = 0; p < np; ++p) {
        if (g.flagged[p]) continue;
        ++live;
        II.II11[p] = normal_part(s.d2X[p], s.dX[p], s.dbX[p]);
        II.II12[p] = normal_part(s.ddbX[p], s.dX[p], s.dbX[p]);
        II.II22[p] = normal_part(s.db2X[p], s.dX[p], s.dbX[p]);
        II.alpha[p] = christoffel_solve(s, p);
        double t = fnorm(s.dX[p]);
        for (const CMat* m : {&II.II11[p], &II.II12[p], &II.II22[p]}) {
            double sc = std::max(fnorm(*m) * t, 1e-300);
            II.ortho_residual = std::max(
                {II.ortho_residual, std::abs(inner(*m, s.dX[p])) / sc, std::abs(inner(*m, s.dbX[p])) / sc});
        }
    }
    if (live == 0) throw Error(ErrorKind::DegenerateMetric, "no point with a nondegenerate metric");
    return II;
}

std::vector<CMat> mean_curvature(const SecondForm& II, const MetricField& g) {
    std::vector<CMat> H(II.II11.size());
    for (std::size_t p = 0; p < H.size(); ++p) {
        if (g.flagged[p]) continue;
        H[p] = (g.g22[p] * II.II11[p] - 2.0 * g.g12[p] * II.II12[p] + g.g11[p] * II.II22[p]) / g.detG[p];
    }
    return H;
}

CurvatureField gaussian_curvature(const SurfaceField& s, const MetricField& g, const SecondForm& II) {
    const GridSpec& G = g.grid;
    const std::size_t np = s.X.size();
    CurvatureField K;
    K.gauss.assign(np, NAN);
    K.brioschi.assign(np, NAN);
    K.reference.assign(np, cplx(NAN, NAN));
    // real metric E, F, G (x = u, y = v) and its first derivatives, analytic
    std::vector<cplx> E(np, NAN), F(np, NAN), Gm(np, NAN), Ex(np, NAN), Ey(np, NAN), Fx(np, NAN), Fy(np, NAN),
        Gx(np, NAN), Gy(np, NAN), P1(np, cplx(NAN, NAN)), P2(np, cplx(NAN, NAN));
    for (std::size_t p = 0; p < np; ++p) {
        if (g.flagged[p]) continue;
        K.gauss[p] = ((inner(II.II11[p], II.II22[p]) - inner(II.II12[p], II.II12[p])) / g.detG[p]).real();
        cplx g11 = g.g11[p], g12 = g.g12[p], g22 = g.g22[p];
        MetricDerivs d = metric_derivatives(s, p);
        E[p] = g11 + 2.0 * g12 + g22;
        F[p] = kI * (g11 - g22);
        Gm[p] = -g11 + 2.0 * g12 - g22;
        auto dx = [](cplx a, cplx b) { return a + b; };           // ∂x = ∂ + ∂̄
        auto dy = [](cplx a, cplx b) { return kI * (a - b); };    // ∂y = i(∂ − ∂̄)
        cplx dE = d.dg11 + 2.0 * d.dg12 + d.dg22, dbE = d.dbg11 + 2.0 * d.dbg12 + d.dbg22;
        cplx dF = kI * (d.dg11 - d.dg22), dbF = kI * (d.dbg11 - d.dbg22);
        cplx dG = -d.dg11 + 2.0 * d.dg12 - d.dg22, dbG = -d.dbg11 + 2.0 * d.dbg12 - d.dbg22;
        Ex[p] = dx(dE, dbE), Ey[p] = dy(dE, dbE);
        Fx[p] = dx(dF, dbF), Fy[p] = dy(dF, dbF);
        Gx[p] = dx(dG, dbG), Gy[p] = dy(dG, dbG);
        cplx det = g.detG[p];
        P1[p] = (g12 * d.dbg11 / g11 - d.dg22) / det;
        P2[p] = (2.0 * d.dg12 - d.dbg11 - g12 * d.dg11 / g11) / det;
    }
    for (int j = 0; j < G.ny; ++j)
        for (int i = 0; i < G.nx; ++i) {
            auto p = static_cast<std::size_t>(j * G.nx + i);
            if (g.flagged[p]) continue;
            auto col = [&](const std::vector<cplx>& f) {
                return [&f, &G, i](int b) { return f[static_cast<std::size_t>(b * G.nx + i)]; };
            };
            auto row = [&](const std::vector<cplx>& f) {
                return [&f, &G, j](int a) { return f[static_cast<std::size_t>(j * G.nx + a)]; };
            };
            double Eyy = diff1(col(Ey), j, G.ny, G.hy).real();
            double Gxx = diff1(row(Gx), i, G.nx, G.hx).real();
            double Fxy = diff1(col(Fx), j, G.ny, G.hy).real();
            double e = E[p].real(), f = F[p].real(), gg = Gm[p].real();
            double ex = Ex[p].real(), ey = Ey[p].real(), fx = Fx[p].real(), fy = Fy[p].real();
            double gx = Gx[p].real(), gy = Gy[p].real();
            Eigen::Matrix3d M1, M2;
            M1 << -0.5 * Eyy + Fxy - 0.5 * Gxx, 0.5 * ex, fx - 0.5 * ey, fy - 0.5 * gx, e, f, 0.5 * gy, f, gg;
            M2 << 0.0, 0.5 * ey, 0.5 * gx, 0.5 * ey, e, f, 0.5 * gx, f, gg;
            double W = e * gg - f * f;
            K.brioschi[p] = (M1.determinant() - M2.determinant()) / (W * W);
            cplx d1, db1, d2, db2;
            fd_scalar(P1, G, i, j, d1, db1);
            fd_scalar(P2, G, i, j, d2, db2);
            K.reference[p] = (d1 + db2) / (2.0 * g.detG[p]);
        }
    return K;
}

WillmoreResult willmore(const std::vector<CMat>& H, const MetricField& g) {
    const GridSpec& G = g.grid;
    WillmoreResult r;
    for (int j = 0; j < G.ny; ++j)
        for (int i = 0; i < G.nx; ++i) {
            auto p = static_cast<std::size_t>(j * G.nx + i);
            if (g.flagged[p]) continue;
            double w = G.hx * G.hy;
            if (G.nx > 1 && (i == 0 || i == G.nx - 1)) w *= 0.5;
            if (G.ny > 1 && (j == 0 || j == G.ny - 1)) w *= 0.5;
            double dA = 2.0 * std::sqrt(std::abs(g.detG[p]));
            r.area += w * dA;
            r.W += w * inner(H[p], H[p]).real() * dA;
        }
    return r;
}

Su2Frame su2_frame(const SurfaceField& s, const MetricField& g) {
    if (s.n != 2) throw Error(ErrorKind::Validation, "su2_frame needs 2x2 data");
    const std::size_t np = s.X.size();
    Su2Frame f;
    f.M1.resize(np), f.M2.resize(np), f.alpha.resize(np);
    std::vector<Eigen::Matrix3cd> P1(np), P2(np);
    for (std::size_t p = 0; p < np; ++p) {
        if (g.flagged[p]) continue;
        const CMat& X = s.X[p];
        cplx xx = inner(X, X);
        Christoffel a = christoffel_solve(s, p);
        f.alpha[p] = a;
        cplx c11 = inner(s.d2X[p], X) / xx, c12 = inner(s.ddbX[p], X) / xx, c22 = inner(s.db2X[p], X) / xx;
        auto [b1, b2] = tangential_coeffs(s.db2X[p], s.dX[p], s.dbX[p]);
        f.M1[p] << a.a11, a.a12, c11, a.a21, a.a22, c12, 1.0, 0.0, 0.0;
        f.M2[p] << a.a21, a.a22, c12, b1, b2, c22, 0.0, 1.0, 0.0;
        P1[p] = f.M1[p];
        P2[p] = f.M2[p];
        P1[p](0, 2) = 2.0 * g.g11[p];
        P1[p](1, 2) = 2.0 * g.g12[p];
        P2[p](0, 2) = 2.0 * g.g12[p];
        P2[p](1, 2) = 2.0 * std::conj(g.g11[p]);
        f.gamma_identity = std::max(f.gamma_identity, std::abs(0.5 * (s.d2X[p] * X).trace() - g.g11[p]));
    }
    const GridSpec& G = s.grid;
    auto id = [&](int i, int j) { return static_cast<std::size_t>(j * G.nx + i); };
    for (int j = 1; j + 1 < G.ny; ++j)
        for (int i = 1; i + 1 < G.nx; ++i) {
            auto p = id(i, j);
            if (g.flagged[p] || g.flagged[id(i + 1, j)] || g.flagged[id(i - 1, j)] || g.flagged[id(i, j + 1)] ||
                g.flagged[id(i, j - 1)])
                continue;
            const std::vector<CMat>* rows[3] = {&s.dX, &s.dbX, &s.X};
            for (int r = 0; r < 3; ++r) {
                const auto& v = *rows[r];
                CMat fx = (v[id(i + 1, j)] - v[id(i - 1, j)]) / (2 * G.hx);
                CMat fy = (v[id(i, j + 1)] - v[id(i, j - 1)]) / (2 * G.hy);
                CMat d = 0.5 * (fx - kI * fy), db = 0.5 * (fx + kI * fy);
                CMat m1 = f.M1[p](r, 0) * s.dX[p] + f.M1[p](r, 1) * s.dbX[p] + f.M1[p](r, 2) * s.X[p];
                CMat m2 = f.M2[p](r, 0) * s.dX[p] + f.M2[p](r, 1) * s.dbX[p] + f.M2[p](r, 2) * s.X[p];
                CMat q1 = P1[p](r, 0) * s.dX[p] + P1[p](r, 1) * s.dbX[p] + P1[p](r, 2) * s.X[p];
                CMat q2 = P2[p](r, 0) * s.dX[p] + P2[p](r, 1) * s.dbX[p] + P2[p](r, 2) * s.X[p];
                f.gw_residual = std::max({f.gw_residual, (d - m1).norm(), (db - m2).norm()});
                f.reference_residual = std::max({f.reference_residual, (d - q1).norm(), (db - q2).norm()});
            }
        }
    return f;
}

// ----- su(N) frame -----

FrameField diagonalize_X(const SurfaceField& s, double gap_tol) {
    const GridSpec& G = s.grid;
    const int n = s.n;
    FrameField F;
    F.grid = G;
    F.n = n;
    F.mask = s.mask;
    F.Phi.resize(s.X.size());
    auto id = [&](int i, int j) { return static_cast<std::size_t>(j * G.nx + i); };
    if (s.mask[0]) throw Error(ErrorKind::Validation, "the frame basepoint (0,0) is masked");

    std::vector<RVec> mu(s.X.size());
    auto decompose = [&](std::size_t p) {
        Eigen::SelfAdjointEigenSolver<CMat> es(CMat(-kI * s.X[p]));
        mu[p] = es.eigenvalues();
        double scale = std::max(1.0, mu[p].cwiseAbs().maxCoeff());
        for (int k = 1; k < n; ++k)
            if (mu[p](k) - mu[p](k - 1) < gap_tol * scale)
                throw Error(ErrorKind::SpectralCollision, "eigenvalues of X collide");
        return CMat(es.eigenvectors());
    };
    // basepoint: ascending order, largest component of each column real positive
    {
        CMat V = decompose(0);
        for (int k = 0; k < n; ++k) {
            Eigen::Index m;
            V.col(k).cwiseAbs().maxCoeff(&m);
            V.col(k) *= std::abs(V(m, k)) / V(m, k);
        }
        F.Phi[0] = V;
        F.y = kI * mu[0].cast<cplx>();
    }
    // carry order and phase from a to b along one grid edge
    auto carry = [&](std::size_t a, std::size_t b, cplx dxi) {
        CMat V = decompose(b);
        const CMat& P = F.Phi[a];
        CMat W(n, n);
        std::vector<bool> used(static_cast<std::size_t>(n), false);
        RVec mub(n);
        for (int k = 0; k < n; ++k) {
            int best = -1;
            double ov = -1;
            for (int l = 0; l < n; ++l)
                if (!used[static_cast<std::size_t>(l)] && std::abs(P.col(k).dot(V.col(l))) > ov) {
                    ov = std::abs(P.col(k).dot(V.col(l)));
                    best = l;
                }
            used[static_cast<std::size_t>(best)] = true;
            W.col(k) = V.col(best);
            mub(k) = mu[b](best);
        }
        mu[b] = mub;
        // parallel phase: arg⟨φ_a, φ_b⟩ = −∫ Im φ†(A dξ + B dξ̄)φ, trapezoid
        CMat Ca = s.conn[a].A * dxi + s.conn[a].B * std::conj(dxi);
        CMat Cb = s.conn[b].A * dxi + s.conn[b].B * std::conj(dxi);
        for (int k = 0; k < n; ++k) {
            double target = -0.5 * ((P.col(k).adjoint() * Ca * P.col(k))(0, 0).imag() +
                                    (W.col(k).adjoint() * Cb * W.col(k))(0, 0).imag());
            double have = std::arg(P.col(k).dot(W.col(k)));
            W.col(k) *= std::polar(1.0, target - have);
        }
        F.Phi[b] = W;
    };
    std::size_t last = 0;
    for (int i = 1; i < G.nx; ++i) {
        if (s.mask[id(i, 0)]) continue;
        carry(last, id(i, 0), G.point(i, 0) - G.point(static_cast<int>(last % static_cast<std::size_t>(G.nx)), 0));
        last = id(i, 0);
    }
    for (int i = 0; i < G.nx; ++i) {
        if (s.mask[id(i, 0)]) continue;
        std::size_t prev = id(i, 0);
        for (int j = 1; j < G.ny; ++j) {
            if (s.mask[id(i, j)]) continue;
            int pj = static_cast<int>(prev / static_cast<std::size_t>(G.nx));
            carry(prev, id(i, j), G.point(i, j) - G.point(i, pj));
            prev = id(i, j);
        }
    }
    for (std::size_t p = 0; p < s.X.size(); ++p) {
        if (s.mask[p] || F.Phi[p].size() == 0) continue;
        F.y_drift = std::max(F.y_drift, (mu[p] - mu[0]).cwiseAbs().maxCoeff());
    }
    return F;
}

std::vector<std::pair<int, int>> basis_index(int n) {
    std::vector<std::pair<int, int>> r;
    for (int k = 1; k < n; ++k)
        for (int l = 0; l < k; ++l) r.emplace_back(k, l);
    return r;
}

FrameScalars xi_and_scalars(const FrameField& F, const SurfaceField& s, std::size_t p) {
    const int n = F.n;
    const CMat& P = F.Phi[p];
    if (P.size() == 0) throw Error(ErrorKind::Validation, "no frame at a masked point");
    CMat Pi = P.adjoint();
    FrameScalars sc;
    sc.Xi1 = Pi * s.conn[p].A * P;
    sc.Xi2 = Pi * s.conn[p].B * P;
    sc.dX0 = Pi * s.dX[p] * P;
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
            sc.tangent_defect =
                std::max(sc.tangent_defect, std::abs(sc.dX0(k, l) - (F.y(k) - F.y(l)) * sc.Xi1(k, l)));
    auto idx = basis_index(n);
    const auto S = static_cast<Eigen::Index>(idx.size());
    sc.J.resize(S), sc.Jb.resize(S), sc.Q.resize(S), sc.Qb.resize(S);
    for (Eigen::Index t = 0; t < S; ++t) {
        auto [k, l] = idx[static_cast<std::size_t>(t)];
        CMat v0 = CMat::Zero(n, n), u0 = CMat::Zero(n, n);
        v0(k, l) = 1.0, v0(l, k) = -1.0;
        u0(k, l) = kI, u0(l, k) = kI;
        sc.v.push_back(P * v0 * Pi);
        sc.u.push_back(P * u0 * Pi);
        sc.J(t) = inner(sc.u.back(), s.dX[p]);
        sc.Jb(t) = inner(sc.u.back(), s.dbX[p]);
        sc.Q(t) = inner(sc.v.back(), s.dX[p]);
        sc.Qb(t) = inner(sc.v.back(), s.dbX[p]);
    }
    for (int k = 1; k < n; ++k) {
        CMat d0 = CMat::Zero(n, n);
        d0(0, 0) = kI, d0(k, k) = -kI;
        sc.d.push_back(P * d0 * Pi);
    }
    sc.beta.resize(S, S), sc.gamma.resize(S, S), sc.kappa.resize(S, S);
    for (Eigen::Index k = 0; k < S; ++k)
        for (Eigen::Index l = 0; l < S; ++l) {
            sc.beta(k, l) = kI * (sc.J(k) * sc.Jb(l) - sc.J(l) * sc.Jb(k));
            sc.gamma(k, l) = kI * (sc.J(k) * sc.Qb(l) - sc.Q(l) * sc.Jb(k));
            sc.kappa(k, l) = kI * (sc.Q(k) * sc.Qb(l) - sc.Q(l) * sc.Qb(k));
        }
    return sc;
}

void xi_metric(const FrameField& F, const FrameScalars& sc, cplx& g11, cplx& g12, cplx& g22) {
    g11 = g12 = g22 = 0.0;
    for (int k = 0; k < F.n; ++k)
        for (int l = 0; l < F.n; ++l) {
            cplx w = 0.5 * (F.y(k) - F.y(l)) * (F.y(k) - F.y(l));
            g11 += w * sc.Xi1(k, l) * sc.Xi1(l, k);
            g12 += w * sc.Xi1(k, l) * sc.Xi2(l, k);
            g22 += w * sc.Xi2(k, l) * sc.Xi2(l, k);
        }
}

std::vector<CMat> NormalBasis::all() const {
    std::vector<CMat> r = nv;
    r.insert(r.end(), nu.begin(), nu.end());
    r.insert(r.end(), nd.begin(), nd.end());
    return r;
}

NormalBasis normal_basis(const FrameField& F, const FrameScalars& sc, const CMat& X, double tol) {
    const auto S = sc.J.size();
    double scale = std::max(sc.J.cwiseAbs().maxCoeff(), sc.Q.cwiseAbs().maxCoeff());
    if (!(std::abs(sc.gamma(0, 0)) > tol * scale * scale))
        throw Error(ErrorKind::FrameDegenerate, "gamma_11 vanishes");
    NormalBasis nb;
    const cplx g11 = sc.gamma(0, 0);
    for (Eigen::Index j = 1; j < S; ++j) {
        auto js = static_cast<std::size_t>(j);
        nb.nv.push_back(g11 * sc.v[js] - sc.gamma(0, j) * sc.v[0] - sc.kappa(j, 0) * sc.u[0]);
        nb.nu.push_back(g11 * sc.u[js] - sc.beta(0, j) * sc.v[0] - sc.gamma(j, 0) * sc.u[0]);
    }
    // n_j^d = iΦ(E11 − E_{j+1,j+1})Φ⁻¹ for j < N, and n_N^d = i y_{N+1}⁻¹ X
    for (int j = 0; j + 2 < F.n; ++j) nb.nd.push_back(sc.d[static_cast<std::size_t>(j)]);
    nb.nd.push_back((kI / F.y(F.n - 1)) * X);
    return nb;
}

std::vector<CMat> orthonormal_frame(const std::vector<CMat>& normals, double tol) {
    std::vector<CMat> out;
    double scale = 0;
    for (auto& v : normals) scale = std::max(scale, std::sqrt(std::abs(inner(v, v).real())));
    for (auto v : normals) {
        for (auto& e : out) v -= inner(v, e).real() * e;
        for (auto& e : out) v -= inner(v, e).real() * e;  // second pass
        double nrm = std::sqrt(std::max(inner(v, v).real(), 0.0));
        if (!(nrm > tol * std::max(scale, 1e-300))) throw Error(ErrorKind::FrameDegenerate, "normal set loses rank");
        out.push_back(v / nrm);
    }
    return out;
}

GWTable gauss_weingarten(const FrameField& F, const SurfaceField& s, const MetricField& g, std::size_t p) {
    if (g.flagged[p]) throw Error(ErrorKind::DegenerateMetric, "point is flagged");
    const int n = F.n;
    FrameScalars sc = xi_and_scalars(F, s, p);
    NormalBasis nb = normal_basis(F, sc, s.X[p]);
    const CMat& A = s.conn[p].A;
    const CMat &dX = s.dX[p], &dbX = s.dbX[p];
    const auto S = sc.J.size();

    // ∂ of the frame scalars (parallel frame: ∂u_s = [u_s, A], ∂v_s = [v_s, A])
    CVec dJ(S), dJb(S), dQ(S), dQb(S);
    for (Eigen::Index t = 0; t < S; ++t) {
        auto ts = static_cast<std::size_t>(t);
        CMat du = comm(sc.u[ts], A), dv = comm(sc.v[ts], A);
        dJ(t) = inner(du, dX) + inner(sc.u[ts], s.d2X[p]);
        dJb(t) = inner(du, dbX) + inner(sc.u[ts], s.ddbX[p]);
        dQ(t) = inner(dv, dX) + inner(sc.v[ts], s.d2X[p]);
        dQb(t) = inner(dv, dbX) + inner(sc.v[ts], s.ddbX[p]);
    }
    auto dbeta = [&](Eigen::Index k, Eigen::Index l) {
        return kI * (dJ(k) * sc.Jb(l) + sc.J(k) * dJb(l) - dJ(l) * sc.Jb(k) - sc.J(l) * dJb(k));
    };
    auto dgamma = [&](Eigen::Index k, Eigen::Index l) {
        return kI * (dJ(k) * sc.Qb(l) + sc.J(k) * dQb(l) - dQ(l) * sc.Jb(k) - sc.Q(l) * dJb(k));
    };
    auto dkappa = [&](Eigen::Index k, Eigen::Index l) {
        return kI * (dQ(k) * sc.Qb(l) + sc.Q(k) * dQb(l) - dQ(l) * sc.Qb(k) - sc.Q(l) * dQb(k));
    };

    GWTable t;
    t.eta = {dX, dbX};
    t.d_eta = {s.d2X[p], s.ddbX[p]};
    for (Eigen::Index j = 1; j < S; ++j) {
        auto js = static_cast<std::size_t>(j);
        t.eta.push_back(nb.nv[js - 1]);
        t.d_eta.push_back(comm(nb.nv[js - 1], A) + dgamma(0, 0) * sc.v[js] - dgamma(0, j) * sc.v[0] -
                          dkappa(j, 0) * sc.u[0]);
    }
    for (Eigen::Index j = 1; j < S; ++j) {
        auto js = static_cast<std::size_t>(j);
        t.eta.push_back(nb.nu[js - 1]);
        t.d_eta.push_back(comm(nb.nu[js - 1], A) + dgamma(0, 0) * sc.u[js] - dbeta(0, j) * sc.v[0] -
                          dgamma(j, 0) * sc.u[0]);
    }
    for (auto& nd : nb.nd) {
        t.eta.push_back(nd);
        t.d_eta.push_back(comm(nd, A));
    }
    t.last_row_defect = (t.d_eta.back() - (kI / F.y(n - 1)) * dX).norm();

    const auto R = static_cast<Eigen::Index>(t.eta.size());
    t.coef = CMat::Zero(R, R);
    const cplx g11 = g.g11[p], g12 = g.g12[p], g22 = g.g22[p], det = g.detG[p];
    const cplx gam = sc.gamma(0, 0);
    // n^d coordinates from the diagonal of Φ⁻¹WΦ
    CMat Dm = CMat::Zero(n, n - 1);
    for (int j = 0; j + 1 < n - 1; ++j) {
        Dm(0, j) = kI;
        Dm(j + 1, j) = -kI;
    }
    for (int m = 0; m < n; ++m) Dm(m, n - 2) = kI * F.y(m) / F.y(n - 1);
    const CMat& P = F.Phi[p];
    for (Eigen::Index r = 0; r < R; ++r) {
        const CMat& W = t.d_eta[static_cast<std::size_t>(r)];
        auto [a, b] = tangential_coeffs(W, dX, dbX);
        t.coef(r, 0) = a;
        t.coef(r, 1) = b;
        if (r >= 2) {
            // reference ν/μ/χ determinants
            cplx b1 = inner(W, dX), b2 = inner(W, dbX);
            cplx nu1 = (b1 * g12 - g11 * b2) / det, nu2 = (g12 * b2 - g22 * b1) / det;
            double sc_ = std::max({std::abs(a), std::abs(b), 1e-300});
            t.reference_nu_defect = std::max(t.reference_nu_defect, std::max(std::abs(nu1 - a), std::abs(nu2 - b)) / sc_);
        }
        CMat Wn = W - a * dX - b * dbX;
        for (Eigen::Index j = 1; j < S; ++j) {
            t.coef(r, 1 + j) = inner(Wn, sc.v[static_cast<std::size_t>(j)]) / gam;
            t.coef(r, S + j) = inner(Wn, sc.u[static_cast<std::size_t>(j)]) / gam;
        }
        CVec delta = (P.adjoint() * Wn * P).diagonal();
        CVec cd = Dm.colPivHouseholderQr().solve(delta);
        for (int k = 0; k < n - 1; ++k) {
            t.coef(r, 2 * S + k) = cd(k);
            cplx reference = -kI * delta(k + 1);
            t.reference_d_defect = std::max(t.reference_d_defect, std::abs(reference - cd(k)));
        }
        CMat rec = CMat::Zero(n, n);
        for (Eigen::Index q = 0; q < R; ++q) rec += t.coef(r, q) * t.eta[static_cast<std::size_t>(q)];
        t.decomposition_residual = std::max(t.decomposition_residual, (rec - W).norm());
    }
    t.alpha = christoffel_reference(g11, g12, g22, metric_derivatives(s, p));
    t.alpha_solve = christoffel_solve(s, p);
    return t;
}

GWCheck gauss_weingarten_check(const FrameField& F, const SurfaceField& s, const MetricField& g) {
    const GridSpec& G = s.grid;
    const std::size_t np = s.X.size();
    std::vector<GWTable> T(np);
    std::vector<bool> ok(np, false);
    GWCheck c;
    for (std::size_t p = 0; p < np; ++p) {
        if (g.flagged[p]) continue;
        T[p] = gauss_weingarten(F, s, g, p);
        ok[p] = true;
        const Christoffel &a = T[p].alpha, &b = T[p].alpha_solve;
        double sc = std::max({std::abs(b.a11), std::abs(b.a12), std::abs(b.a21), std::abs(b.a22), 1.0});
        c.alpha_agreement = std::max({c.alpha_agreement, std::abs(a.a11 - b.a11) / sc, std::abs(a.a12 - b.a12) / sc,
                                      std::abs(a.a21 - b.a21) / sc, std::abs(a.a22 - b.a22) / sc});
        c.reference_nu_defect = std::max(c.reference_nu_defect, T[p].reference_nu_defect);
        c.reference_d_defect = std::max(c.reference_d_defect, T[p].reference_d_defect);
        c.last_row = std::max(c.last_row, T[p].last_row_defect);
        double t = s.dX[p].norm();
        for (std::size_t r = 2; r < T[p].eta.size(); ++r) {
            const CMat& v = T[p].eta[r];
            double sc2 = std::max(v.norm() * t, 1e-300);
            c.normal_ortho = std::max(
                {c.normal_ortho, std::abs(inner(v, s.dX[p])) / sc2, std::abs(inner(v, s.dbX[p])) / sc2});
        }
    }
    auto id = [&](int i, int j) { return static_cast<std::size_t>(j * G.nx + i); };
    for (int j = 1; j + 1 < G.ny; ++j)
        for (int i = 1; i + 1 < G.nx; ++i) {
            auto p = id(i, j);
            if (!ok[p] || !ok[id(i + 1, j)] || !ok[id(i - 1, j)] || !ok[id(i, j + 1)] || !ok[id(i, j - 1)]) continue;
            ++c.points;
            for (std::size_t r = 0; r < T[p].eta.size(); ++r) {
                CMat fx = (T[id(i + 1, j)].eta[r] - T[id(i - 1, j)].eta[r]) / (2 * G.hx);
                CMat fy = (T[id(i, j + 1)].eta[r] - T[id(i, j - 1)].eta[r]) / (2 * G.hy);
                CMat d = 0.5 * (fx - kI * fy);
                CMat rec = CMat::Zero(F.n, F.n);
                for (std::size_t q = 0; q < T[p].eta.size(); ++q)
                    rec += T[p].coef(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) * T[p].eta[q];
                c.residual = std::max(c.residual, (d - rec).norm());
            }
        }
    return c;
}

// ----- synthetic surfaces -----

namespace {

CMat expm_antihermitian(const CMat& H, double t) {
    Eigen::SelfAdjointEigenSolver<CMat> es(CMat(-kI * H));
    CVec ph = (kI * t * es.eigenvalues().cast<cplx>()).array().exp();
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

CMat random_su(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    CMat M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = cplx(nd(rng), nd(rng));
    CMat H = 0.5 * (M - M.adjoint());
    H -= (H.trace() / double(n)) * CMat::Identity(n, n);
    return H;
}

}  // namespace

SynthSurface synth_surface(int N, std::uint64_t seed, const GridSpec& grid) {
    if (N < 1) throw Error(ErrorKind::Validation, "N must be >= 1");
    grid.validate();
    const int n = N + 1;
    std::mt19937_64 rng(seed);
    SynthSurface out;
    out.H1 = random_su(n, rng);
    out.H2 = random_su(n, rng);
    // well separated traceless spectrum
    std::uniform_real_distribution<double> ud(0.0, 0.5);
    RVec mu(n);
    for (int k = 0; k < n; ++k) mu(k) = 1.0 * k + ud(rng);
    mu.array() -= mu.mean();
    out.y = kI * mu.cast<cplx>();
    CMat Y = out.y.asDiagonal();
    const auto np = static_cast<std::size_t>(grid.size());
    std::vector<CMat> L(np);
    std::vector<ConnectionSample> conn(np);
    out.Phi.resize(np);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            auto p = static_cast<std::size_t>(j * grid.nx + i);
            cplx xi = grid.point(i, j);
            CMat E1 = expm_antihermitian(out.H1, xi.real()), E2 = expm_antihermitian(out.H2, xi.imag());
            CMat Phi = E1 * E2;
            CMat Gm = E1 * out.H2 * E1.adjoint();
            CMat C = comm(out.H1, Gm);
            ConnectionSample& c = conn[p];
            c.A = -0.5 * (out.H1 - kI * Gm);
            c.B = -0.5 * (out.H1 + kI * Gm);
            c.dA = (kI / 4.0) * C;
            c.dbA = (kI / 4.0) * C;
            c.dB = (-kI / 4.0) * C;
            c.dbB = (-kI / 4.0) * C;
            // i(L + L†) = X for the hermitian L = −iX/2
            L[p] = -0.5 * kI * (Phi * Y * Phi.adjoint());
            out.Phi[p] = Phi;
        }
    out.s = build_X(L, conn, grid, 1.0, std::vector<bool>(np, false));
    return out;
}

std::vector<CMat> su_basis(int n) {
    std::vector<CMat> B;
    // (iσ, iσ) = 1 for the Pauli-like pieces below, since (X, X) = −½tr X²
    for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
            CMat a = CMat::Zero(n, n), b = CMat::Zero(n, n);
            a(k, l) = kI, a(l, k) = kI;
            b(k, l) = 1.0, b(l, k) = -1.0;
            B.push_back(a);
            B.push_back(b);
        }
    for (int m = 1; m < n; ++m) {
        CMat d = CMat::Zero(n, n);
        double c = std::sqrt(2.0 / (m * (m + 1.0)));
        for (int k = 0; k < m; ++k) d(k, k) = kI * c;
        d(m, m) = -kI * c * static_cast<double>(m);
        B.push_back(d);
    }
    return B;
}

RVec su_coordinates(const CMat& X, const std::vector<CMat>& basis) {
    RVec x(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t k = 0; k < basis.size(); ++k) x(static_cast<Eigen::Index>(k)) = inner(X, basis[k]).real();
    return x;
}

TraceIdentityDefects trace_identities(const SurfaceField& s) {
    TraceIdentityDefects t;
    for (std::size_t p = 0; p < s.X.size(); ++p) {
        if (s.mask[p]) continue;
        const CMat& X = s.X[p];
        const ConnectionSample& c = s.conn[p];
        CMat XA = comm(X, c.A), XB = comm(X, c.B), XdbA = comm(X, c.dbA);
        cplx l1 = (s.ddbX[p] * s.dX[p]).trace(), l2 = (s.ddbX[p] * s.dbX[p]).trace();
        cplx r2 = (comm(X, c.dB) * XB).trace();
        t.d1 = std::max(t.d1, std::abs(l1 - (XdbA * XA).trace()));
        t.d2 = std::max(t.d2, std::abs(l2 - r2));
        t.d3 = std::max(t.d3, std::abs(r2 - (XdbA * XB).trace()));
        t.scale = std::max({t.scale, std::abs(l1), std::abs(l2)});
    }
    return t;
}

ScalarStats scalar_stats(const std::vector<double>& v, const std::vector<bool>& skip) {
    ScalarStats st;
    double s1 = 0, s2 = 0;
    st.min = INFINITY, st.max = -INFINITY;
    for (std::size_t p = 0; p < v.size(); ++p) {
        if (skip[p] || !std::isfinite(v[p])) continue;
        ++st.count;
        s1 += v[p];
        st.min = std::min(st.min, v[p]), st.max = std::max(st.max, v[p]);
    }
    if (st.count == 0) return ScalarStats{NAN, NAN, NAN, NAN, 0};
    st.mean = s1 / st.count;
    for (std::size_t p = 0; p < v.size(); ++p)
        if (!skip[p] && std::isfinite(v[p])) s2 += (v[p] - st.mean) * (v[p] - st.mean);
    st.stdev = std::sqrt(s2 / st.count);
    return st;
}

GeometryReport geometry_report(const SurfaceField& s) {
    GeometryReport r;
    r.g = first_form(s);
    r.II = second_form(s, r.g);
    r.H = mean_curvature(r.II, r.g);
    r.K = gaussian_curvature(s, r.g, r.II);
    r.W = willmore(r.H, r.g);
    r.masked = s.masked_count();
    r.degenerate = r.g.degenerate;
    const std::size_t np = s.X.size();
    std::vector<double> g11(np, NAN), det(np, NAN), rad(np, NAN);
    r.H_norm.assign(np, NAN);
    r.II_defect.assign(np, NAN);
    double gmax = 0;
    for (std::size_t p = 0; p < np; ++p)
        if (!r.g.flagged[p])
            gmax = std::max({gmax, std::abs(r.g.g11[p]), std::abs(r.g.g12[p]), std::abs(r.g.g22[p])});
    double t0 = NAN, tdrift = 0;
    for (std::size_t p = 0; p < np; ++p) {
        if (s.mask[p]) continue;
        double tr2 = (s.X[p] * s.X[p]).trace().real();
        if (std::isnan(t0)) t0 = tr2;
        tdrift = std::max(tdrift, std::abs(tr2 - t0) / std::abs(t0));
        rad[p] = std::sqrt(inner(s.X[p], s.X[p]).real());
        if (r.g.flagged[p]) continue;
        g11[p] = std::abs(r.g.g11[p]);
        det[p] = std::abs(r.g.detG[p]);
        if (s.n == 2) {
            r.H_norm[p] = inner(r.H[p], s.X[p] / rad[p]).real();
            // in su(2) the second-form components are multiples of the inward unit normal −X/‖X‖
            double c = std::sqrt(-2.0 / tr2);
            CMat nx = -s.X[p] / rad[p];
            double d = std::max({std::abs(inner(r.II.II11[p], nx) - c * r.g.g11[p]),
                                 std::abs(inner(r.II.II12[p], nx) - c * r.g.g12[p]),
                                 std::abs(inner(r.II.II22[p], nx) - c * r.g.g22[p])});
            r.II_defect[p] = d / gmax;
            r.II_defect_max = std::max(r.II_defect_max, r.II_defect[p]);
        } else {
            r.H_norm[p] = std::sqrt(std::abs(inner(r.H[p], r.H[p])));
        }
    }
    r.trace_drift = tdrift;
    r.g11_abs = scalar_stats(g11, r.g.flagged);
    r.detG_abs = scalar_stats(det, r.g.flagged);
    r.H_stats = scalar_stats(r.H_norm, r.g.flagged);
    r.K_gauss = scalar_stats(r.K.gauss, r.g.flagged);
    r.K_brioschi = scalar_stats(r.K.brioschi, r.g.flagged);
    r.radius = scalar_stats(rad, s.mask);
    return r;
}

double su2_reduction_defect(const FrameField& F, const SurfaceField& s, const MetricField& g, const Su2Frame& f) {
    if (F.n != 2) throw Error(ErrorKind::Validation, "su(2) reduction needs 2x2 data");
    const cplx t = kI / F.y(1);
    Eigen::Matrix3cd T = Eigen::Matrix3cd::Identity(), Ti = T;
    T(2, 2) = t, Ti(2, 2) = 1.0 / t;
    double w = 0;
    for (std::size_t p = 0; p < s.X.size(); ++p) {
        if (g.flagged[p]) continue;
        GWTable tab = gauss_weingarten(F, s, g, p);
        if (tab.coef.rows() != 3) throw Error(ErrorKind::Validation, "unexpected frame size");
        Eigen::Matrix3cd M = T * f.M1[p] * Ti;
        double sc = std::max(M.cwiseAbs().maxCoeff(), 1.0);
        w = std::max(w, (tab.coef - CMat(M)).cwiseAbs().maxCoeff() / sc);
    }
    return w;
}

}  // namespace toda
