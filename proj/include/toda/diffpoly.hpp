#pragma once

// Differential polynomials in jet variables ∂^k u_i and exponentials E_i^m = e^{2m u_i},
// with exact rational coefficients, the total derivative ∂ and a formal antiderivative.

#include "toda/common.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace toda {

using Rational = boost::multiprecision::cpp_rational;

// jet variable ∂^order u_site
struct JetVar {
    int site = 0;
    int order = 0;
    int key() const { return site * 64 + order; }
    static JetVar from_key(int k) { return {k / 64, k % 64}; }
};

struct Monomial {
    std::vector<std::pair<int, int>> jets;  // (jet key, power > 0), sorted by key
    std::vector<std::pair<int, int>> exps;  // (site, m != 0), sorted by site

    bool operator<(const Monomial& o) const {
        if (jets != o.jets) return jets < o.jets;
        return exps < o.exps;
    }
    bool operator==(const Monomial& o) const { return jets == o.jets && exps == o.exps; }
    Monomial operator*(const Monomial& o) const;
    int weight() const;          // Σ order·power
    int jet_power(int key) const;
    bool is_one() const { return jets.empty() && exps.empty(); }
};

class DiffPoly {
public:
    DiffPoly() = default;
    DiffPoly(long v) { if (v != 0) terms_[Monomial{}] = Rational(v); }
    DiffPoly(const Rational& v) { if (v != 0) terms_[Monomial{}] = v; }

    static DiffPoly jet(int site, int order);
    static DiffPoly expo(int site, int m);  // e^{2 m u_site}
    static DiffPoly monomial(const Monomial& m, const Rational& c);

    const std::map<Monomial, Rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    DiffPoly operator+(const DiffPoly& o) const;
    DiffPoly operator-(const DiffPoly& o) const;
    DiffPoly operator-() const;
    DiffPoly operator*(const DiffPoly& o) const;
    DiffPoly& operator+=(const DiffPoly& o);
    DiffPoly& operator-=(const DiffPoly& o);
    DiffPoly& operator*=(const DiffPoly& o) { return *this = *this * o; }
    bool operator==(const DiffPoly& o) const { return terms_ == o.terms_; }
    bool operator!=(const DiffPoly& o) const { return !(*this == o); }

    // highest jet order appearing (−1 if none)
    int max_order() const;
    int max_site() const;

    // canonical form is maintained on every operation; normalize() is a no-op kept for the API
    DiffPoly normalize() const { return *this; }

    std::string to_string() const;

    // hidden friend: only found through a DiffPoly operand
    friend DiffPoly operator*(const Rational& c, const DiffPoly& p) { return DiffPoly(c) * p; }

private:
    void add_term(const Monomial& m, const Rational& c);
    std::map<Monomial, Rational> terms_;
};

// total derivative ∂ with ∂E_i^m = 2m(∂u_i)E_i^m
DiffPoly dp_derive(const DiffPoly& p);
DiffPoly dp_derive(const DiffPoly& p, int times);

// q with ∂q = p and no constant term; throws NotExact if no antiderivative exists in the ring
DiffPoly dp_integrate(const DiffPoly& p);

// numeric jet values; expo[site] = e^{2u_site}
struct JetAssignment {
    std::map<int, cplx> jet;   // by JetVar key
    std::map<int, cplx> expo;  // by site
    void set(int site, int order, cplx v) { jet[JetVar{site, order}.key()] = v; }
};
cplx dp_eval(const DiffPoly& p, const JetAssignment& a);

// replace u_N by −Σ_{i<N} u_i (jets and exponentials), enforcing Σ u_i = 0
DiffPoly dp_traceless(const DiffPoly& p, int N);
// u_site → −u_site
DiffPoly dp_negate_site(const DiffPoly& p, int site);

}  // namespace toda
