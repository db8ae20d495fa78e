#include "toda/diffpoly.hpp"

#include <functional>
#include <set>
#include <sstream>

namespace toda {

namespace {

template <class V>
V merge_add(const V& a, const V& b) {
    V out;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j].first < a[i].first) {
            out.push_back(b[j++]);
        } else {
            int s = a[i].second + b[j].second;
            if (s != 0) out.emplace_back(a[i].first, s);
            ++i;
            ++j;
        }
    }
    return out;
}

Monomial single_jet(int key, int pow) {
    Monomial m;
    if (pow != 0) m.jets.emplace_back(key, pow);
    return m;
}

}  // namespace

Monomial Monomial::operator*(const Monomial& o) const {
    Monomial r;
    r.jets = merge_add(jets, o.jets);
    r.exps = merge_add(exps, o.exps);
    return r;
}

int Monomial::weight() const {
    int w = 0;
    for (auto& [k, p] : jets) w += JetVar::from_key(k).order * p;
    return w;
}

int Monomial::jet_power(int key) const {
    for (auto& [k, p] : jets)
        if (k == key) return p;
    return 0;
}

DiffPoly DiffPoly::jet(int site, int order) {
    DiffPoly p;
    p.terms_[single_jet(JetVar{site, order}.key(), 1)] = 1;
    return p;
}

DiffPoly DiffPoly::expo(int site, int m) {
    DiffPoly p;
    Monomial mo;
    if (m != 0) mo.exps.emplace_back(site, m);
    p.terms_[mo] = 1;
    return p;
}

DiffPoly DiffPoly::monomial(const Monomial& m, const Rational& c) {
    DiffPoly p;
    p.add_term(m, c);
    return p;
}

void DiffPoly::add_term(const Monomial& m, const Rational& c) {
    if (c == 0) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        terms_.emplace(m, c);
    } else {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

DiffPoly DiffPoly::operator+(const DiffPoly& o) const {
    DiffPoly r = *this;
    r += o;
    return r;
}
DiffPoly DiffPoly::operator-(const DiffPoly& o) const {
    DiffPoly r = *this;
    r -= o;
    return r;
}
DiffPoly DiffPoly::operator-() const {
    DiffPoly r;
    for (auto& [m, c] : terms_) r.terms_.emplace(m, -c);
    return r;
}
DiffPoly& DiffPoly::operator+=(const DiffPoly& o) {
    for (auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}
DiffPoly& DiffPoly::operator-=(const DiffPoly& o) {
    for (auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}
DiffPoly DiffPoly::operator*(const DiffPoly& o) const {
    DiffPoly r;
    for (auto& [m1, c1] : terms_)
        for (auto& [m2, c2] : o.terms_) r.add_term(m1 * m2, c1 * c2);
    return r;
}


int DiffPoly::max_order() const {
    int mo = -1;
    for (auto& [m, c] : terms_)
        for (auto& [k, p] : m.jets) mo = std::max(mo, JetVar::from_key(k).order);
    return mo;
}

int DiffPoly::max_site() const {
    int ms = -1;
    for (auto& [m, c] : terms_) {
        for (auto& [k, p] : m.jets) ms = std::max(ms, JetVar::from_key(k).site);
        for (auto& [s, e] : m.exps) ms = std::max(ms, s);
    }
    return ms;
}

std::string DiffPoly::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [m, c] : terms_) {
        Rational a = c < 0 ? Rational(-c) : c;
        if (first)
            os << (c < 0 ? "-" : "");
        else
            os << (c < 0 ? " - " : " + ");
        first = false;
        bool unit = (a == 1);
        if (!unit || m.is_one()) os << a;
        bool need_star = !unit || m.is_one();
        for (auto& [k, p] : m.jets) {
            JetVar v = JetVar::from_key(k);
            if (need_star) os << "*";
            need_star = true;
            if (v.order == 0)
                os << "u" << v.site;
            else if (v.order == 1)
                os << "du" << v.site;
            else
                os << "d" << v.order << "u" << v.site;
            if (p != 1) os << "^" << p;
        }
        for (auto& [s, e] : m.exps) {
            if (need_star) os << "*";
            need_star = true;
            os << "E" << s;
            if (e != 1) os << "^" << e;
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------------------------

namespace {

// ∂ of a single monomial
DiffPoly derive_monomial(const Monomial& m) {
    DiffPoly out;
    for (std::size_t i = 0; i < m.jets.size(); ++i) {
        auto [k, p] = m.jets[i];
        JetVar v = JetVar::from_key(k);
        Monomial rest = m;
        if (p == 1)
            rest.jets.erase(rest.jets.begin() + static_cast<long>(i));
        else
            rest.jets[i].second = p - 1;
        Monomial raised = rest * single_jet(JetVar{v.site, v.order + 1}.key(), 1);
        out += DiffPoly::monomial(raised, Rational(p));
    }
    for (auto& [s, e] : m.exps) {
        Monomial t = m * single_jet(JetVar{s, 1}.key(), 1);
        out += DiffPoly::monomial(t, Rational(2 * e));
    }
    return out;
}

// candidate antiderivative monomials for a monomial of ∂-image
void lowerings(const Monomial& m, std::set<Monomial>& out) {
    for (std::size_t i = 0; i < m.jets.size(); ++i) {
        auto [k, p] = m.jets[i];
        JetVar v = JetVar::from_key(k);
        Monomial rest = m;
        if (p == 1)
            rest.jets.erase(rest.jets.begin() + static_cast<long>(i));
        else
            rest.jets[i].second = p - 1;
        if (v.order >= 1) {
            Monomial low = rest * single_jet(JetVar{v.site, v.order - 1}.key(), 1);
            if (!low.is_one()) out.insert(low);
        }
        // a factor ∂u_s may come from differentiating E_s^e
        if (v.order == 1) {
            for (auto& [s, e] : m.exps)
                if (s == v.site && !rest.is_one()) out.insert(rest);
        }
    }
}

struct SparseRow {
    std::map<int, Rational> a;
    Rational rhs;
};

// exact solve of Σ_j c_j col_j = target; returns false if inconsistent
bool solve_exact(const std::vector<DiffPoly>& cols, const DiffPoly& target, std::vector<Rational>& c) {
    std::map<Monomial, SparseRow> rows;
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (auto& [m, v] : cols[j].terms()) rows[m].a[static_cast<int>(j)] = v;
    for (auto& [m, v] : target.terms()) rows[m].rhs = v;

    std::map<int, SparseRow> pivots;  // pivot column → normalized row
    std::vector<int> order;           // creation order of pivots
    for (auto& [m, row0] : rows) {
        SparseRow row = row0;
        // reduce by existing pivots (pivot rows are kept fully reduced against each other lazily)
        bool changed = true;
        while (changed) {
            changed = false;
            for (auto it = row.a.begin(); it != row.a.end(); ++it) {
                auto pv = pivots.find(it->first);
                if (pv == pivots.end()) continue;
                Rational f = it->second;
                for (auto& [col, val] : pv->second.a) {
                    Rational nv = row.a[col] - f * val;
                    if (nv == 0)
                        row.a.erase(col);
                    else
                        row.a[col] = nv;
                }
                row.rhs -= f * pv->second.rhs;
                changed = true;
                break;
            }
        }
        if (row.a.empty()) {
            if (row.rhs != 0) return false;
            continue;
        }
        int pc = row.a.begin()->first;
        Rational inv = 1 / row.a.begin()->second;
        for (auto& [col, val] : row.a) val *= inv;
        row.rhs *= inv;
        pivots[pc] = row;
        order.push_back(pc);
    }
    // a pivot row only references its own column, free columns and pivots created later,
    // so back substitution runs in reverse creation order; free variables are set to zero
    c.assign(cols.size(), Rational(0));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const SparseRow& r = pivots[*it];
        Rational v = r.rhs;
        for (auto& [col, val] : r.a)
            if (col != *it) v -= val * c[static_cast<std::size_t>(col)];
        c[static_cast<std::size_t>(*it)] = v;
    }
    return true;
}

}  // namespace

DiffPoly dp_derive(const DiffPoly& p) {
    DiffPoly out;
    for (auto& [m, c] : p.terms()) out += c * derive_monomial(m);
    return out;
}

DiffPoly dp_derive(const DiffPoly& p, int times) {
    DiffPoly q = p;
    for (int i = 0; i < times; ++i) q = dp_derive(q);
    return q;
}

DiffPoly dp_integrate(const DiffPoly& p) {
    if (p.is_zero()) return DiffPoly();
    // ∂ preserves the exponential signature and raises weight by one: integrate each graded piece
    std::map<std::pair<std::vector<std::pair<int, int>>, int>, DiffPoly> groups;
    for (auto& [m, c] : p.terms()) groups[{m.exps, m.weight()}] += DiffPoly::monomial(m, c);

    DiffPoly result;
    for (auto& [key, piece] : groups) {
        if (key.second == 0)
            throw Error(ErrorKind::NotExact, "weight-zero term has no antiderivative: " + piece.to_string());
        std::set<Monomial> basis;
        for (auto& [m, c] : piece.terms()) lowerings(m, basis);
        bool solved = false;
        for (int round = 0; round < 4 && !solved; ++round) {
            std::vector<Monomial> bv(basis.begin(), basis.end());
            std::vector<DiffPoly> cols;
            cols.reserve(bv.size());
            for (auto& b : bv) cols.push_back(derive_monomial(b));
            std::vector<Rational> c;
            if (solve_exact(cols, piece, c)) {
                DiffPoly q;
                for (std::size_t j = 0; j < bv.size(); ++j) q += DiffPoly::monomial(bv[j], c[j]);
                if (dp_derive(q) == piece) {
                    result += q;
                    solved = true;
                    break;
                }
            }
            // enlarge the ansatz with lowerings of everything the current basis produces
            std::set<Monomial> more = basis;
            for (auto& col : cols)
                for (auto& [m, v] : col.terms()) lowerings(m, more);
            if (more.size() == basis.size()) break;
            basis.swap(more);
        }
        if (!solved)
            throw Error(ErrorKind::NotExact, "no antiderivative in the ring for " + piece.to_string());
    }
    return result;
}

cplx dp_eval(const DiffPoly& p, const JetAssignment& a) {
    cplx total = 0.0;
    for (auto& [m, c] : p.terms()) {
        cplx v = c.convert_to<double>();
        for (auto& [k, pw] : m.jets) {
            auto it = a.jet.find(k);
            if (it == a.jet.end()) {
                JetVar jv = JetVar::from_key(k);
                throw Error(ErrorKind::Validation, "missing jet d^" + std::to_string(jv.order) + "u" +
                                                       std::to_string(jv.site) + " in assignment");
            }
            v *= std::pow(it->second, pw);
        }
        for (auto& [s, e] : m.exps) {
            auto it = a.expo.find(s);
            if (it == a.expo.end())
                throw Error(ErrorKind::Validation, "missing exponential E" + std::to_string(s) + " in assignment");
            v *= std::pow(it->second, e);
        }
        total += v;
    }
    return total;
}

namespace {

DiffPoly substitute(const DiffPoly& p, const std::function<DiffPoly(int, int)>& jet_map,
                    const std::function<DiffPoly(int, int)>& exp_map) {
    DiffPoly out;
    for (auto& [m, c] : p.terms()) {
        DiffPoly t(c);
        for (auto& [k, pw] : m.jets) {
            JetVar v = JetVar::from_key(k);
            DiffPoly f = jet_map(v.site, v.order);
            for (int i = 0; i < pw; ++i) t *= f;
        }
        for (auto& [s, e] : m.exps) t *= exp_map(s, e);
        out += t;
    }
    return out;
}

}  // namespace

DiffPoly dp_traceless(const DiffPoly& p, int N) {
    return substitute(
        p,
        [N](int s, int k) {
            if (s != N) return DiffPoly::jet(s, k);
            DiffPoly r;
            for (int i = 0; i < N; ++i) r -= DiffPoly::jet(i, k);
            return r;
        },
        [N](int s, int e) {
            if (s != N) return DiffPoly::expo(s, e);
            DiffPoly r(1);
            for (int i = 0; i < N; ++i) r *= DiffPoly::expo(i, -e);
            return r;
        });
}

DiffPoly dp_negate_site(const DiffPoly& p, int site) {
    return substitute(
        p, [site](int s, int k) { return s == site ? -DiffPoly::jet(s, k) : DiffPoly::jet(s, k); },
        [site](int s, int e) { return DiffPoly::expo(s, s == site ? -e : e); });
}

}  // namespace toda
