#include "toda/lax.hpp"

#include <Eigen/LU>

namespace toda {

// ---------- LaurentMatrix ----------

CMat LaurentMatrix::eval(cplx lambda) const {
    CMat out = CMat::Zero(n, n);
    for (auto& [p, M] : c) out += std::pow(lambda, p) * M;
    return out;
}

CMat& LaurentMatrix::at(int power) {
    auto it = c.find(power);
    if (it == c.end()) it = c.emplace(power, CMat::Zero(n, n)).first;
    return it->second;
}

LaurentMatrix LaurentMatrix::operator+(const LaurentMatrix& o) const {
    LaurentMatrix r = *this;
    r.n = std::max(n, o.n);
    for (auto& [p, M] : o.c) r.at(p) += M;
    return r;
}

LaurentMatrix LaurentMatrix::operator-(const LaurentMatrix& o) const {
    LaurentMatrix r = *this;
    r.n = std::max(n, o.n);
    for (auto& [p, M] : o.c) r.at(p) -= M;
    return r;
}

LaurentMatrix LaurentMatrix::operator*(const LaurentMatrix& o) const {
    LaurentMatrix r;
    r.n = n;
    for (auto& [p, M] : c)
        for (auto& [q, K] : o.c) r.at(p + q) += M * K;
    return r;
}

LaurentMatrix LaurentMatrix::operator*(cplx s) const {
    LaurentMatrix r = *this;
    for (auto& [p, M] : r.c) M *= s;
    return r;
}

double LaurentMatrix::max_abs_diff(const LaurentMatrix& o) const {
    LaurentMatrix d = *this - o;
    double m = 0;
    for (auto& [p, M] : d.c)
        if (M.size()) m = std::max(m, M.cwiseAbs().maxCoeff());
    return m;
}

DiffPoly& SymLaurentMatrix::at(int power, int i, int j) {
    auto it = c.find(power);
    if (it == c.end())
        it = c.emplace(power, std::vector<std::vector<DiffPoly>>(n, std::vector<DiffPoly>(n))).first;
    return it->second[i][j];
}

LaurentMatrix SymLaurentMatrix::eval(const JetAssignment& a) const {
    LaurentMatrix r;
    r.n = n;
    for (auto& [p, M] : c) {
        CMat& R = r.at(p);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (!M[i][j].is_zero()) R(i, j) = dp_eval(M[i][j], a);
    }
    return r;
}

LaurentMatrix rho_series(const LaurentMatrix& M) {
    LaurentMatrix r;
    r.n = M.n;
    for (auto& [p, X] : M.c) r.c[-p] = X.adjoint();
    return r;
}

LaurentMatrix Lambda_power(int N, int p) {
    const int n = N + 1;
    LaurentMatrix r;
    r.n = n;
    const int q = p / n, rr = p % n;
    for (int k = 0; k < n; ++k) {
        if (k >= rr)
            r.at(q)(k, k - rr) = 1.0;
        else
            r.at(q + 1)(k, k - rr + n) = 1.0;
    }
    return r;
}

// ---------- A_λ, B_λ and derivatives ----------

namespace {

void check_sizes(int N, std::initializer_list<const CVec*> vs) {
    if (N < 1) throw Error(ErrorKind::Validation, "N must be at least 1");
    for (auto* v : vs)
        if (v->size() != N + 1) throw Error(ErrorKind::Validation, "site vector must have N+1 entries");
}

// fills the off-diagonal pattern of A: (i, i−1) at λ⁰ and (0, N) at λ¹, with weights w(i, j)
template <class F>
void a_pattern(LaurentMatrix& A, int N, const CVec& u, F w) {
    for (int i = 1; i <= N; ++i) A.at(0)(i, i - 1) = std::exp(u(i) - u(i - 1)) * w(i, i - 1);
    A.at(1)(0, N) = std::exp(u(0) - u(N)) * w(0, N);
}

// B pattern: (i−1, i) at λ⁰ and (N, 0) at λ⁻¹
template <class F>
void b_pattern(LaurentMatrix& B, int N, const CVec& u, F w) {
    for (int i = 1; i <= N; ++i) B.at(0)(i - 1, i) = -std::exp(u(i) - u(i - 1)) * w(i, i - 1);
    B.at(-1)(N, 0) = -std::exp(u(0) - u(N)) * w(0, N);
}

}  // namespace

LaurentMatrix build_A(int N, const CVec& u, const CVec& du) {
    check_sizes(N, {&u, &du});
    LaurentMatrix A;
    A.n = N + 1;
    A.at(0).diagonal() = du;
    a_pattern(A, N, u, [](int, int) { return cplx(1.0); });
    return A;
}

LaurentMatrix build_B(int N, const CVec& u, const CVec& dbu) {
    check_sizes(N, {&u, &dbu});
    LaurentMatrix B;
    B.n = N + 1;
    B.at(0).diagonal() = -dbu;
    b_pattern(B, N, u, [](int, int) { return cplx(1.0); });
    return B;
}

LaurentMatrix build_dbar_A(int N, const CVec& u, const CVec& dbu, const CVec& ddbu) {
    check_sizes(N, {&u, &dbu, &ddbu});
    LaurentMatrix A;
    A.n = N + 1;
    A.at(0).diagonal() = ddbu;
    a_pattern(A, N, u, [&](int i, int j) { return dbu(i) - dbu(j); });
    return A;
}

LaurentMatrix build_d_B(int N, const CVec& u, const CVec& du, const CVec& ddbu) {
    check_sizes(N, {&u, &du, &ddbu});
    LaurentMatrix B;
    B.n = N + 1;
    B.at(0).diagonal() = -ddbu;
    b_pattern(B, N, u, [&](int i, int j) { return du(i) - du(j); });
    return B;
}

LaurentMatrix build_d_A(int N, const CVec& u, const CVec& du, const CVec& d2u) {
    check_sizes(N, {&u, &du, &d2u});
    LaurentMatrix A;
    A.n = N + 1;
    A.at(0).diagonal() = d2u;
    a_pattern(A, N, u, [&](int i, int j) { return du(i) - du(j); });
    return A;
}

LaurentMatrix gauge_hat(const LaurentMatrix& A, const CVec& u, const CVec& du) {
    LaurentMatrix r;
    r.n = A.n;
    for (auto& [p, M] : A.c) {
        CMat R(A.n, A.n);
        for (int i = 0; i < A.n; ++i)
            for (int j = 0; j < A.n; ++j) R(i, j) = M(i, j) * std::exp(u(j) - u(i));
        r.at(p) += R;
    }
    r.at(0).diagonal() += du;
    return r;
}

SymLaurentMatrix hat_A_symbolic(int N) {
    SymLaurentMatrix r;
    r.n = N + 1;
    for (int k = 0; k <= N; ++k) r.at(0, k, k) = dp_traceless(2 * DiffPoly::jet(k, 1), N);
    for (int k = 1; k <= N; ++k) r.at(0, k, k - 1) = DiffPoly(1);
    r.at(1, 0, N) = DiffPoly(1);
    return r;
}

// ---------- DS recursion ----------

DiagPoly sigma(const DiagPoly& l, int times) {
    const int n = static_cast<int>(l.size());
    DiagPoly r(l.size());
    for (int k = 0; k < n; ++k) r[k] = l[(((k - times) % n) + n) % n];
    return r;
}

namespace {

DiagPoly rhs(const DiagPoly& l, const DiagPoly& A0, int shift, int N) {
    DiagPoly sA = sigma(A0, shift);
    DiagPoly r(l.size());
    for (std::size_t k = 0; k < l.size(); ++k) r[k] = dp_traceless(dp_derive(l[k]) - l[k] * (sA[k] - A0[k]), N);
    return r;
}

DiffPoly trace(const DiagPoly& l) {
    DiffPoly t;
    for (auto& x : l) t += x;
    return t;
}

}  // namespace

std::vector<DiagPoly> ds_recursion(int N, int M) {
    if (N < 1 || M < 0) throw Error(ErrorKind::Validation, "ds_recursion needs N >= 1 and degree >= 0");
    const int n = N + 1;
    DiagPoly A0(n);
    for (int k = 0; k < n; ++k) A0[k] = 2 * DiffPoly::jet(k, 1);
    std::vector<DiagPoly> ls{DiagPoly(n, DiffPoly(1))};
    for (int j = 0; j < M; ++j) {
        DiagPoly r = rhs(ls[j], A0, M - j, N);
        if (!trace(r).is_zero())
            throw Error(ErrorKind::NotExact, "right-hand side not traceless at step " + std::to_string(j));
        DiagPoly nl(n);
        for (int k = 1; k < n; ++k) nl[k] = nl[k - 1] + r[k];
        // scalar: makes the next right-hand side traceless; the last one is ∂l_M itself
        DiffPoly s;
        if (j + 1 < M) {
            DiffPoly t = trace(rhs(nl, A0, M - j - 1, N));
            if (!t.is_zero()) {
                try {
                    s = dp_integrate(Rational(-1, n) * t);
                } catch (const Error& e) {
                    throw Error(ErrorKind::NotExact, "scalar fixing failed at step " + std::to_string(j + 1) +
                                                         ": " + e.what());
                }
            }
        } else {
            s = Rational(-1, n) * trace(nl);
        }
        for (auto& x : nl) x = dp_traceless(x + s, N);
        ls.push_back(std::move(nl));
    }
    return ls;
}

SymLaurentMatrix L_hat(const std::vector<DiagPoly>& l) {
    if (l.empty()) throw Error(ErrorKind::Validation, "empty coefficient list");
    const int n = static_cast<int>(l[0].size());
    const int M = static_cast<int>(l.size()) - 1;
    SymLaurentMatrix r;
    r.n = n;
    for (int p = 0; p <= M; ++p) {
        const int q = p / n, rr = p % n;
        for (int k = 0; k < n; ++k) {
            const DiffPoly& v = l[M - p][k];
            if (v.is_zero()) continue;
            if (k >= rr)
                r.at(q, k, k - rr) += v;
            else
                r.at(q + 1, k, k - rr + n) += v;
        }
    }
    return r;
}

SymLaurentMatrix sym_derive(const SymLaurentMatrix& M) {
    SymLaurentMatrix r = M;
    for (auto& [p, E] : r.c)
        for (auto& row : E)
            for (auto& x : row) x = dp_derive(x);
    return r;
}

std::vector<DiagPoly> su3_reference_coeffs() {
    auto a = [](int i) { return DiffPoly::jet(i, 1); };
    auto b = [](int i) { return DiffPoly::jet(i, 2); };
    auto t = [](int i) { return DiffPoly::jet(i, 3); };
    DiffPoly c2 = a(0) * a(0) + a(1) * a(1) + a(2) * a(2);
    DiffPoly c3 = a(0) * a(0) * a(0) + a(1) * a(1) * a(1) + a(2) * a(2) * a(2);
    DiffPoly dc2 = dp_derive(c2);
    const Rational third(1, 3), two3(2, 3), four3(4, 3);

    DiagPoly l0(3, DiffPoly(1));
    DiagPoly l1{2 * a(0), 2 * a(1), 2 * a(2)};
    DiagPoly l2{two3 * (b(0) - b(1) - c2), two3 * (b(1) - 2 * b(2) - c2), two3 * (2 * b(2) - b(0) - c2)};
    DiffPoly common = -4 * b(0) * (a(1) - a(0)) - four3 * c3;
    DiffPoly d12 = a(2) - a(1), d01 = a(0) - a(1);
    DiagPoly l3{third * (-2 * t(1) - dc2 + common + 4 * a(1) * c2),
                third * (-2 * t(2) - 3 * dc2 + common + 2 * dp_derive(d12 * d12) + 4 * a(2) * c2),
                third * (-2 * t(0) + dc2 + common - 2 * dp_derive(d01 * d01) - 4 * a(0) * c2)};
    DiffPoly X1 = dp_derive(l3[0]) + 2 * (a(0) - a(2)) * l3[0];
    DiffPoly X2 = dp_derive(l3[1]) + 2 * (a(1) - a(0)) * l3[1];
    DiagPoly l4{-third * (X1 - X2), third * (-X1 + 2 * X2), third * (-2 * X1 + X2)};

    std::vector<DiagPoly> out{l0, l1, l2, l3, l4};
    for (auto& l : out)
        for (auto& x : l) x = dp_traceless(x, 2);
    return out;
}

// ---------- su(2) closed forms ----------

std::vector<DiffPoly> su2_calL(int n) {
    if (n < 0) throw Error(ErrorKind::Validation, "calL index must be >= 0");
    DiffPoly E = DiffPoly::expo(0, 1);
    DiffPoly d2E = dp_derive(E, 2), d3E = dp_derive(E, 3);
    std::vector<DiffPoly> L{DiffPoly(1)};
    for (int k = 1; k <= n; ++k) {
        const DiffPoly& p = L.back();
        DiffPoly op = Rational(1, 4) * (dp_derive(p, 3) - 8 * d2E * dp_derive(p) - 4 * d3E * p);
        L.push_back(op.is_zero() ? DiffPoly() : dp_integrate(op));
    }
    return L;
}

DiffPoly su2_calL2_reference() {
    DiffPoly E = DiffPoly::expo(0, 1);
    return Rational(-1, 16) * dp_derive(E, 4) + Rational(9, 8) * dp_derive(E, 2);
}

PQR su2_PQR(int m) {
    if (m < 1) throw Error(ErrorKind::Validation, "su2_PQR needs m >= 1");
    const int M = su2_degree(m);
    auto l = ds_recursion(1, M);
    DiffPoly E = DiffPoly::expo(0, 1), Ei = DiffPoly::expo(0, -1);
    PQR r;
    r.P.assign(m + 1, DiffPoly());
    r.Q.assign(m + 1, DiffPoly());
    r.R.assign(m + 1, DiffPoly());
    for (int k = 0; k < m; ++k) {
        r.P[k] = l[M - 2 * k][0];
        r.Q[k + 1] = E * l[M - 2 * k - 1][0];
        r.R[k] = Ei * l[M - 2 * k - 1][1];
    }
    return r;
}

PQR su2_PQR_reference(int m) {
    if (m < 1) throw Error(ErrorKind::Validation, "su2_PQR needs m >= 1");
    auto Lp = su2_calL(m);
    auto get = [&](int k) { return k >= 0 ? Lp[k] : DiffPoly(); };
    DiffPoly E = DiffPoly::expo(0, 1), Ei = DiffPoly::expo(0, -1), a = DiffPoly::jet(0, 1);
    PQR r;
    for (int i = 0; i <= m; ++i) {
        DiffPoly Lm1 = get(m - i - 1);
        r.P.push_back(2 * a * Lm1 - Rational(1, 2) * dp_derive(Lm1));
        r.Q.push_back(dp_negate_site(get(m - i), 0) * E);
        r.R.push_back(Lm1 * Ei);
    }
    return r;
}

std::vector<DiffPoly> su2_coef_defects(const PQR& pqr) {
    DiffPoly E = DiffPoly::expo(0, 1), Ei = DiffPoly::expo(0, -1), a = DiffPoly::jet(0, 1);
    const int deg = static_cast<int>(std::max({pqr.P.size(), pqr.Q.size(), pqr.R.size()})) + 1;
    auto get = [](const std::vector<DiffPoly>& v, int k) {
        return (k >= 0 && k < static_cast<int>(v.size())) ? v[k] : DiffPoly();
    };
    std::vector<DiffPoly> out;
    for (int k = 0; k < deg; ++k)
        out.push_back(dp_derive(get(pqr.P, k)) - get(pqr.Q, k) * Ei + get(pqr.R, k - 1) * E);
    for (int k = 0; k < deg; ++k)
        out.push_back(dp_derive(get(pqr.Q, k)) - 2 * (get(pqr.P, k - 1) * E - get(pqr.Q, k) * a));
    for (int k = 0; k < deg; ++k)
        out.push_back(dp_derive(get(pqr.R, k)) - 2 * (get(pqr.R, k) * a - get(pqr.P, k) * Ei));
    return out;
}

SymLaurentMatrix su2_L_from_PQR(const PQR& pqr) {
    SymLaurentMatrix L;
    L.n = 2;
    for (std::size_t k = 0; k < pqr.P.size(); ++k)
        if (!pqr.P[k].is_zero()) {
            L.at(static_cast<int>(k), 0, 0) = pqr.P[k];
            L.at(static_cast<int>(k), 1, 1) = -pqr.P[k];
        }
    for (std::size_t k = 0; k < pqr.Q.size(); ++k)
        if (!pqr.Q[k].is_zero()) L.at(static_cast<int>(k), 0, 1) = pqr.Q[k];
    for (std::size_t k = 0; k < pqr.R.size(); ++k)
        if (!pqr.R[k].is_zero()) L.at(static_cast<int>(k), 1, 0) = pqr.R[k];
    return L;
}

// ---------- numeric jets and residuals ----------

JetAssignment SiteJets::assignment() const {
    JetAssignment a;
    for (int s = 0; s < N; ++s) {
        for (std::size_t k = 0; k < d[s].size(); ++k) a.set(s, static_cast<int>(k), d[s][k]);
        a.expo[s] = std::exp(2.0 * d[s][0]);
    }
    return a;
}

CVec SiteJets::order(int k) const {
    CVec v(N + 1);
    for (int s = 0; s <= N; ++s) v(s) = d[s].at(static_cast<std::size_t>(k));
    return v;
}

SiteJets make_site_jets(int N, const std::vector<std::vector<cplx>>& free_sites) {
    if (static_cast<int>(free_sites.size()) != N) throw Error(ErrorKind::Validation, "need jets for N sites");
    SiteJets j;
    j.N = N;
    j.d = free_sites;
    std::size_t K = free_sites[0].size();
    std::vector<cplx> last(K, 0.0);
    for (auto& s : free_sites) {
        if (s.size() != K) throw Error(ErrorKind::Validation, "ragged jet table");
        for (std::size_t k = 0; k < K; ++k) last[k] -= s[k];
    }
    j.d.push_back(last);
    return j;
}

void ungauge(const LaurentMatrix& Lh, const LaurentMatrix& dLh, const CVec& u, const CVec& du,
             LaurentMatrix& L, LaurentMatrix& dL) {
    const int n = Lh.n;
    L = LaurentMatrix{n, {}};
    dL = LaurentMatrix{n, {}};
    for (auto& [p, M] : Lh.c) {
        CMat& Lp = L.at(p);
        CMat& dLp = dL.at(p);
        auto it = dLh.c.find(p);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                cplx g = std::exp(u(i) - u(j));
                cplx dh = it != dLh.c.end() ? it->second(i, j) : cplx(0.0);
                Lp(i, j) = g * M(i, j);
                dLp(i, j) = g * (dh + (du(i) - du(j)) * M(i, j));
            }
    }
}

namespace {

double commutator_residual(const LaurentMatrix& L, const LaurentMatrix& dL, const LaurentMatrix& A,
                           const std::vector<cplx>& lambdas) {
    double worst = 0;
    for (cplx lam : lambdas) {
        CMat Lv = L.eval(lam), Av = A.eval(lam);
        worst = std::max(worst, (dL.eval(lam) - (Lv * Av - Av * Lv)).norm());
    }
    return worst;
}

}  // namespace

double lax_residual_xi(const SymLaurentMatrix& Lh, const SiteJets& jets, const std::vector<cplx>& lambdas) {
    auto a = jets.assignment();
    LaurentMatrix Lhn = Lh.eval(a), dLhn = sym_derive(Lh).eval(a);
    CVec u = jets.order(0), du = jets.order(1);
    LaurentMatrix L, dL;
    ungauge(Lhn, dLhn, u, du, L, dL);
    return commutator_residual(L, dL, build_A(jets.N, u, du), lambdas);
}

double lax_residual_xi_ungauged(const SymLaurentMatrix& L, const SiteJets& jets,
                                const std::vector<cplx>& lambdas) {
    auto a = jets.assignment();
    return commutator_residual(L.eval(a), sym_derive(L).eval(a),
                               build_A(jets.N, jets.order(0), jets.order(1)), lambdas);
}

double make_stationary(const DiagPoly& lM, SiteJets& jets) {
    const int N = jets.N;
    DiagPoly dl;
    int K = -1;
    for (auto& x : lM) {
        dl.push_back(dp_derive(x));
        K = std::max(K, dl.back().max_order());
    }
    if (K < 1) return 0.0;  // ∂l_M vanishes identically
    if (static_cast<int>(jets.d[0].size()) <= K) throw Error(ErrorKind::Validation, "jet table too short");
    auto setx = [&](const CVec& x) {
        cplx sum = 0;
        for (int i = 0; i < N; ++i) {
            jets.d[i][K] = x(i);
            sum += x(i);
        }
        jets.d[N][K] = -sum;
    };
    auto F = [&]() {
        auto a = jets.assignment();
        CVec f(N + 1);
        for (int i = 0; i <= N; ++i) f(i) = dp_eval(dl[i], a);
        return f;
    };
    // ∂l_M is affine in the top jets
    setx(CVec::Zero(N));
    CVec f0 = F();
    CMat J(N, N);
    for (int i = 0; i < N; ++i) {
        CVec e = CVec::Zero(N);
        e(i) = 1.0;
        setx(e);
        J.col(i) = F().head(N) - f0.head(N);
    }
    CVec x = J.fullPivLu().solve(-f0.head(N));
    setx(x);
    return F().cwiseAbs().maxCoeff();
}

double zero_curvature_residual(int N, const CVec& u, const CVec& du, const CVec& dbu, const CVec& ddbu,
                               cplx lambda) {
    CMat A = build_A(N, u, du).eval(lambda), B = build_B(N, u, dbu).eval(lambda);
    CMat dbA = build_dbar_A(N, u, dbu, ddbu).eval(lambda), dB = build_d_B(N, u, du, ddbu).eval(lambda);
    return (dbA - dB - (A * B - B * A)).norm();
}

}  // namespace toda
