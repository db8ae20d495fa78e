#include "toda/theta.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>

namespace toda {

PeriodMatrix::PeriodMatrix(const CMat& P) : g(static_cast<int>(P.rows())), Pi(P) { validate(); }

PeriodMatrix PeriodMatrix::genus1(cplx tau) {
    CMat P(1, 1);
    P(0, 0) = tau;
    return PeriodMatrix(P);
}

void PeriodMatrix::validate() const {
    if (g < 1 || Pi.rows() != g || Pi.cols() != g)
        throw Error(ErrorKind::Validation, "period matrix must be g x g with g >= 1");
    if (!Pi.allFinite()) throw Error(ErrorKind::Validation, "period matrix has non-finite entries");
    double asym = (Pi - Pi.transpose()).cwiseAbs().maxCoeff();
    if (asym >= 1e-12) throw Error(ErrorKind::Validation, "period matrix is not symmetric");
    if (!(lambda_min_imag() > 0.0))
        throw Error(ErrorKind::Validation, "Im(Pi) is not positive definite");
}

double PeriodMatrix::lambda_min_imag() const {
    RMat im = Pi.imag();
    im = 0.5 * (im + im.transpose());
    Eigen::SelfAdjointEigenSolver<RMat> es(im);
    return es.eigenvalues().minCoeff();
}

double theta_tail_bound(const PeriodMatrix& P, int R, double imz_budget,
                        const std::vector<double>& dir_norms, double shift_norm) {
    const double lam = P.lambda_min_imag();
    const double sg = std::sqrt(static_cast<double>(P.g));
    double total = 0.0;
    for (int k = R + 1; k <= R + 400; ++k) {
        // number of lattice points on the shell |n|∞ = k
        double cnt = std::pow(2.0 * k + 1.0, P.g) - std::pow(2.0 * k - 1.0, P.g);
        double lg = std::log(cnt) - kPi * lam * k * k + 2.0 * kPi * imz_budget * sg * k;
        for (double w : dir_norms) lg += std::log(2.0 * kPi * std::max(w, 1e-300) * (shift_norm + sg * k));
        if (lg < -745.0 && k > R + 2) {
            // terms are log-concave in k past the peak; once negligible they stay negligible
            double peak = imz_budget * sg / lam;
            if (k > peak) break;
            continue;
        }
        total += std::exp(lg);
    }
    return total;
}

namespace {

int radius_for(const PeriodMatrix& P, double eps, double imz_budget, const std::vector<double>& dn,
               double shift) {
    if (!(eps >= kMinThetaTolerance))
        throw Error(ErrorKind::Validation,
                    "theta tolerance below the double-precision floor (1e-15) is unreachable");
    for (int R = 1; R <= kMaxThetaRadius; ++R)
        if (theta_tail_bound(P, R - 1, imz_budget, dn, shift) < eps) return R;
    throw Error(ErrorKind::Validation, "theta tolerance unreachable within radius cap");
}

struct Reduced {
    CVec z;        // reduced argument
    Eigen::VectorXi m;  // lattice shift: z = zred + p + Π m
    cplx logscale;
};

Reduced reduce_argument(const CVec& z, const PeriodMatrix& P) {
    const int g = P.g;
    RMat im = P.Pi.imag();
    RVec b = im.ldlt().solve(z.imag());
    Reduced r;
    r.m.resize(g);
    for (int i = 0; i < g; ++i) r.m(i) = static_cast<int>(std::lround(b(i)));
    CVec mc = r.m.cast<double>().cast<cplx>();
    CVec zs = z - P.Pi * mc;
    // Θ(z) = exp(iπ m·Πm − 2πi z·m) Θ(z − Πm)
    r.logscale = kI * kPi * mc.dot(P.Pi * mc) - 2.0 * kPi * kI * z.cwiseProduct(mc).sum();
    // integer shifts of Re z leave every summand unchanged
    for (int i = 0; i < g; ++i) zs(i) -= std::round(zs(i).real());
    r.z = zs;
    return r;
}

}  // namespace

int truncation_radius(const PeriodMatrix& P, double eps, double imz_budget) {
    P.validate();
    return radius_for(P, eps, imz_budget, {}, 0.0);
}

ThetaSubsetJet theta_subset_jet(const CVec& z, const PeriodMatrix& P, const std::vector<CVec>& dirs,
                                const TruncationSpec& t) {
    const int g = P.g;
    if (z.size() != g) throw Error(ErrorKind::Validation, "theta argument dimension mismatch");
    if (!z.allFinite()) throw Error(ErrorKind::Validation, "theta argument not finite");
    const int nd = static_cast<int>(dirs.size());
    if (nd > 12) throw Error(ErrorKind::Validation, "too many derivative directions");
    for (const auto& w : dirs)
        if (w.size() != g) throw Error(ErrorKind::Validation, "direction dimension mismatch");

    Reduced red = reduce_argument(z, P);
    std::vector<double> dn;
    for (const auto& w : dirs) dn.push_back(w.norm());
    const double shift = red.m.cast<double>().norm();
    const int R = t.radius > 0 ? t.radius
                               : radius_for(P, t.target_abs_error, red.z.imag().norm(), dn, shift);

    const int nmask = 1 << nd;
    ThetaSubsetJet out;
    out.d.assign(nmask, cplx(0.0));
    out.logscale = red.logscale;

    std::vector<cplx> prod(nmask);
    std::vector<cplx> fac(nd);
    Eigen::VectorXi k = Eigen::VectorXi::Constant(g, -R);
    CVec kc(g);
    while (true) {
        for (int i = 0; i < g; ++i) kc(i) = static_cast<double>(k(i));
        cplx expo = kI * kPi * kc.dot(P.Pi * kc) - 2.0 * kPi * kI * red.z.cwiseProduct(kc).sum();
        cplx term = std::exp(expo);
        out.max_term = std::max(out.max_term, std::abs(term));
        CVec n = kc + red.m.cast<double>().cast<cplx>();
        for (int j = 0; j < nd; ++j) fac[j] = -2.0 * kPi * kI * dirs[j].cwiseProduct(n).sum();
        prod[0] = term;
        out.d[0] += term;
        for (int mask = 1; mask < nmask; ++mask) {
            int low = __builtin_ctz(static_cast<unsigned>(mask));
            prod[mask] = prod[mask & (mask - 1)] * fac[low];
            out.d[mask] += prod[mask];
        }
        int i = 0;
        while (i < g && k(i) == R) k(i++) = -R;
        if (i == g) break;
        ++k(i);
    }
    return out;
}

cplx theta(const CVec& z, const PeriodMatrix& P, const TruncationSpec& t) {
    auto j = theta_subset_jet(z, P, {}, t);
    return std::exp(j.logscale) * j.d[0];
}

cplx theta(cplx z, cplx tau, const TruncationSpec& t) {
    CVec zz(1);
    zz(0) = z;
    return theta(zz, PeriodMatrix::genus1(tau), t);
}

cplx theta_deriv(const CVec& z, const PeriodMatrix& P, const std::vector<CVec>& dirs,
                 const TruncationSpec& t) {
    if (dirs.empty())
        throw Error(ErrorKind::Validation, "theta_deriv needs at least one direction; use theta");
    auto j = theta_subset_jet(z, P, dirs, t);
    return std::exp(j.logscale) * j.d.back();
}

namespace {

// Σ over set partitions of `mask` of (−1)^{b−1}(b−1)! Π f_B / f^b
cplx log_partition_sum(const std::vector<cplx>& f, int mask) {
    cplx f0 = f[0];
    cplx total = 0.0;
    std::function<void(int, cplx, int)> rec = [&](int rest, cplx acc, int blocks) {
        if (rest == 0) {
            double fact = 1.0;
            for (int i = 2; i < blocks; ++i) fact *= i;
            double sgn = (blocks % 2 == 1) ? 1.0 : -1.0;
            total += sgn * fact * acc / std::pow(f0, blocks);
            return;
        }
        int low = rest & (-rest);
        int others = rest & ~low;
        // enumerate subsets of `others` to join the block containing the lowest element
        for (int sub = others;; sub = (sub - 1) & others) {
            int block = low | sub;
            rec(rest & ~block, acc * f[block], blocks + 1);
            if (sub == 0) break;
        }
    };
    rec(mask, cplx(1.0), 0);
    return total;
}

}  // namespace

cplx log_theta_jet(const CVec& z, const PeriodMatrix& P, const std::vector<CVec>& dirs,
                   const TruncationSpec& t, double zero_guard) {
    auto j = theta_subset_jet(z, P, dirs, t);
    if (std::abs(j.d[0]) < zero_guard * j.max_term)
        throw Error(ErrorKind::NearThetaZero, "theta vanishes at the requested argument");
    if (dirs.empty()) {
        double re = j.logscale.real() + std::log(std::abs(j.d[0]));
        double im = std::arg(std::exp(kI * j.logscale.imag()) * j.d[0]);
        return {re, im};
    }
    // the cocycle factor is exp(linear), handled by the partition formula only through
    // ratios f_B/f0; since all d[] share the same factor it cancels exactly
    return log_partition_sum(j.d, static_cast<int>(j.d.size()) - 1);
}

cplx reduce_tau(cplx tau) {
    if (!(tau.imag() > 0)) throw Error(ErrorKind::Validation, "tau must have positive imaginary part");
    for (int it = 0; it < 1000; ++it) {
        tau -= std::round(tau.real());
        if (std::abs(tau) < 1.0 - 1e-15)
            tau = -1.0 / tau;
        else
            break;
    }
    return tau;
}

cplx j_invariant(cplx tau) {
    cplx t = reduce_tau(tau);
    cplx q = std::exp(2.0 * kPi * kI * t);
    cplx e4 = 1.0, e6 = 1.0, qn = 1.0;
    for (int n = 1; n < 200; ++n) {
        qn *= q;
        double s3 = 0, s5 = 0;
        for (int d = 1; d <= n; ++d)
            if (n % d == 0) {
                s3 += std::pow(d, 3);
                s5 += std::pow(d, 5);
            }
        e4 += 240.0 * s3 * qn;
        e6 -= 504.0 * s5 * qn;
        if (std::abs(qn) * s5 < 1e-18) break;
    }
    cplx e43 = e4 * e4 * e4;
    return 1728.0 * e43 / (e43 - e6 * e6);
}

}  // namespace toda
