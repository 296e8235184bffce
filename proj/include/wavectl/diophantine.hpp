// Continued-fraction machinery for the admissible observation points:
// exact Gauss-map expansion for rationals and quadratic surds (with Lagrange
// period detection), certified expansion of decimal inputs, bounded-quotient
// membership verdicts, and the sin^2(n pi xi)-weighted dual norm.
//
// Membership in S (bounded partial quotients) is three-valued: boundedness of
// an infinite sequence cannot be certified from finitely many digits, so the
// API reports exactly what it knows.

#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "wavectl/spectral.hpp"

namespace wavectl {

using BigInt = boost::multiprecision::cpp_int;
using BigFloat = boost::multiprecision::cpp_bin_float_100;

struct Rational {
    BigInt p, q;  // 0 < p/q < 1, gcd(p,q) = 1
    Rational(BigInt p_, BigInt q_) : p(std::move(p_)), q(std::move(q_)) {
        if (q <= 0 || p <= 0 || p >= q) throw std::invalid_argument("rational must lie in (0,1)");
        const BigInt g = boost::multiprecision::gcd(p, q);
        p /= g;
        q /= g;
    }
};

struct QuadraticSurd {
    // (a + b sqrt(d)) / c, value in (0,1), d >= 2 and not a perfect square.
    BigInt a, b, c, d;
};

struct DecimalSpec {
    std::string digits;  // fractional digits of a value in (0,1)
};

using RealSpec = std::variant<Rational, QuadraticSurd, DecimalSpec>;

struct CFExpansion {
    std::vector<BigInt> quotients;  // a_1, a_2, ...
    bool terminated = false;
    // (preperiod length, period length), detected exactly for surds
    std::optional<std::pair<int, int>> periodic;
};

class PrecisionExhausted : public std::runtime_error {
  public:
    PrecisionExhausted(std::string msg, CFExpansion partial)
        : std::runtime_error(std::move(msg)), partial(std::move(partial)) {}
    CFExpansion partial;
};

namespace detail {

inline BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt q = a / b, r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) --q;
    return q;
}

inline BigInt isqrt(const BigInt& n) { return boost::multiprecision::sqrt(n); }

// Exact floor of (P + sqrt(D)) / Q for irrational sqrt(D).
inline BigInt surd_floor(const BigInt& P, const BigInt& Q, const BigInt& D) {
    const BigInt s = isqrt(D);  // floor(sqrt(D)); sqrt(D) in (s, s+1)
    BigInt a = Q > 0 ? floor_div(P + s, Q) : floor_div(P + s + 1, Q);
    // verify a <= x < a+1 exactly; x >= a  <=>  sgn-aware comparison of
    // sqrt(D) with a*Q - P
    auto geq = [&](const BigInt& t) {  // sqrt(D) >= t ?
        if (t <= 0) return true;
        return D >= t * t;
    };
    auto x_ge = [&](const BigInt& m) {  // x >= m ?
        return Q > 0 ? geq(m * Q - P) : !geq(m * Q - P);
    };
    while (!x_ge(a)) --a;
    while (x_ge(a + 1)) ++a;
    return a;
}

inline void validate(const QuadraticSurd& s) {
    if (s.d < 2) throw std::invalid_argument("surd: d must be >= 2");
    const BigInt r = isqrt(s.d);
    if (r * r == s.d) throw std::invalid_argument("surd: d must not be a perfect square");
    if (s.b == 0 || s.c == 0) throw std::invalid_argument("surd: degenerate representation");
}

inline BigFloat pi_hp() { return boost::math::constants::pi<BigFloat>(); }

}  // namespace detail

inline BigFloat to_bigfloat(const RealSpec& x) {
    if (const auto* r = std::get_if<Rational>(&x))
        return BigFloat(r->p) / BigFloat(r->q);
    if (const auto* s = std::get_if<QuadraticSurd>(&x)) {
        detail::validate(*s);
        return (BigFloat(s->a) + BigFloat(s->b) * sqrt(BigFloat(s->d))) / BigFloat(s->c);
    }
    const auto& dec = std::get<DecimalSpec>(x);
    return BigFloat("0." + dec.digits);
}

inline double to_double(const RealSpec& x) { return to_bigfloat(x).convert_to<double>(); }

inline CFExpansion continued_fraction(const RealSpec& x, int max_terms) {
    CFExpansion cf;
    if (const auto* r = std::get_if<Rational>(&x)) {
        // Euclidean algorithm on (q, p)
        BigInt num = r->q, den = r->p;
        while (den != 0 && int(cf.quotients.size()) < max_terms) {
            cf.quotients.push_back(num / den);
            const BigInt rem = num % den;
            num = den;
            den = rem;
        }
        cf.terminated = (den == 0);
        return cf;
    }
    if (const auto* s = std::get_if<QuadraticSurd>(&x)) {
        detail::validate(*s);
        // normalize to (P + sqrt(D)) / Q with Q | D - P^2
        BigInt a = s->a, b = s->b, c = s->c;
        if (b < 0) {
            a = -a;
            b = -b;
            c = -c;
        }
        BigInt P = a, D = b * b * s->d, Q = c;
        if ((D - P * P) % Q != 0) {
            P *= abs(Q);
            D *= Q * Q;
            Q *= abs(Q);
        }
        // x0 in (0,1) so a_0 = 0; expand 1/x: states are (P, Q) pairs
        std::map<std::pair<BigInt, BigInt>, int> seen;
        // first inversion step (subtracting a_0 = 0)
        {
            BigInt P1 = -P;
            Q = (D - P1 * P1) / Q;
            P = P1;
        }
        while (int(cf.quotients.size()) < max_terms && !cf.periodic) {
            auto [it, fresh] = seen.try_emplace({P, Q}, int(cf.quotients.size()));
            if (!fresh) {
                cf.periodic = {it->second, int(cf.quotients.size()) - it->second};
                break;
            }
            const BigInt q = detail::surd_floor(P, Q, D);
            cf.quotients.push_back(q);
            const BigInt Pn = q * Q - P;
            Q = (D - Pn * Pn) / Q;
            P = Pn;
        }
        if (cf.periodic) {
            // trim the recorded quotients to preperiod + one full period
            cf.quotients.resize(cf.periodic->first + cf.periodic->second);
        }
        return cf;
    }
    // Decimal: run the Euclidean algorithm on both endpoints of the certified
    // interval [(p-1)/10^k, (p+1)/10^k]; agreement certifies a quotient.
    const auto& dec = std::get<DecimalSpec>(x);
    for (char ch : dec.digits)
        if (ch < '0' || ch > '9') throw std::invalid_argument("decimal: digits only");
    std::string trimmed = dec.digits;
    trimmed.erase(0, std::min(trimmed.find_first_not_of('0'), trimmed.size() - 1));
    BigInt scale = 1;
    for (size_t i = 0; i < dec.digits.size(); ++i) scale *= 10;
    const BigInt p(trimmed);
    if (p <= 1 || p >= scale - 1) throw std::invalid_argument("decimal must lie in (0,1)");
    // x lies in ((p-1)/scale, (p+1)/scale); a quotient is certified when both
    // endpoints agree on it
    BigInt lo_n = p - 1, lo_d = scale, hi_n = p + 1, hi_d = scale;
    while (int(cf.quotients.size()) < max_terms) {
        if (lo_n <= 0) throw PrecisionExhausted("certified digits exhausted", cf);
        const BigInt a_hi = hi_d / hi_n;  // floor(1/hi)
        const BigInt a_lo = lo_d / lo_n;  // floor(1/lo)
        if (a_hi != a_lo) throw PrecisionExhausted("certified digits exhausted", cf);
        cf.quotients.push_back(a_hi);
        // next interval: 1/x - a for x in (lo, hi)
        BigInt nlo_n = hi_d - a_hi * hi_n, nlo_d = hi_n;
        BigInt nhi_n = lo_d - a_hi * lo_n, nhi_d = lo_n;
        lo_n = nlo_n;
        lo_d = nlo_d;
        hi_n = nhi_n;
        hi_d = nhi_d;
    }
    return cf;
}

enum class MembershipKind { InS_Certified, InS_UpToDepth, NotInS_Rational, Inconclusive };

struct MembershipVerdict {
    MembershipKind kind = MembershipKind::Inconclusive;
    BigInt bound = 0;  // max partial quotient seen / certified
    int depth = 0;     // quotients examined
    std::string reason;
};

inline MembershipVerdict is_in_S(const RealSpec& x, int depth) {
    MembershipVerdict v;
    if (std::holds_alternative<Rational>(x)) {
        const CFExpansion cf = continued_fraction(x, depth);
        v.kind = MembershipKind::NotInS_Rational;
        v.depth = int(cf.quotients.size());
        if (!cf.quotients.empty())
            v.bound = *std::max_element(cf.quotients.begin(), cf.quotients.end());
        v.reason = "expansion terminates; membership requires an infinite bounded expansion";
        return v;
    }
    if (std::holds_alternative<QuadraticSurd>(x)) {
        // iterate until the period closes; Lagrange guarantees it does
        const CFExpansion cf = continued_fraction(x, std::max(depth, 100000));
        if (!cf.periodic) throw std::runtime_error("surd period not found (depth cap hit)");
        v.kind = MembershipKind::InS_Certified;
        v.depth = int(cf.quotients.size());
        v.bound = *std::max_element(cf.quotients.begin(), cf.quotients.end());
        v.reason = "eventually periodic expansion, quotients bounded by the cycle maximum";
        return v;
    }
    try {
        const CFExpansion cf = continued_fraction(x, depth);
        v.kind = MembershipKind::InS_UpToDepth;
        v.depth = int(cf.quotients.size());
        v.bound = *std::max_element(cf.quotients.begin(), cf.quotients.end());
        v.reason = "all certified quotients bounded; no claim beyond this depth";
    } catch (const PrecisionExhausted& e) {
        v.kind = MembershipKind::Inconclusive;
        v.depth = int(e.partial.quotients.size());
        if (!e.partial.quotients.empty())
            v.bound = *std::max_element(e.partial.quotients.begin(), e.partial.quotients.end());
        v.reason = "certified digits exhausted before requested depth";
    }
    return v;
}

// |sin(n pi xi)| in high precision; exact zero detection for rationals.
inline BigFloat abs_sin_n_pi(const RealSpec& xi, long n) {
    if (const auto* r = std::get_if<Rational>(&xi)) {
        if (BigInt(n) % r->q == 0) return BigFloat(0);
    }
    const BigFloat x = to_bigfloat(xi) * n;
    BigFloat frac = x - floor(x);
    if (frac > BigFloat(0.5)) frac = 1 - frac;
    return sin(detail::pi_hp() * frac);
}

struct DualWeightResult {
    bool infinite = false;
    double value = 0.0;
    long offending_mode = 0;  // first n with sin(n pi xi) = 0 and nonzero coefficient
};

// sqrt( sum_{n<=N} (n^2 a_n^2 + b_n^2) / sin^2(n pi xi) ), coefficients in the
// bare-sine convention (see bare_sine_coefficients for the converter).
inline DualWeightResult dual_weight_norm(const std::vector<double>& a,
                                         const std::vector<double>& b, const RealSpec& xi,
                                         const DomainSpec& domain) {
    if (domain.kind != DomainKind::Interval)
        throw std::invalid_argument("dual_weight_norm: interval domains only");
    DualWeightResult res;
    BigFloat acc = 0;
    const size_t n_terms = std::max(a.size(), b.size());
    for (size_t i = 0; i < std::min<size_t>(n_terms, domain.n1); ++i) {
        const long n = long(i) + 1;
        const double an = i < a.size() ? a[i] : 0.0;
        const double bn = i < b.size() ? b[i] : 0.0;
        const double num = double(n) * n * an * an + bn * bn;
        if (num == 0.0) continue;
        const BigFloat s = abs_sin_n_pi(xi, n);
        if (s == 0) {
            res.infinite = true;
            res.offending_mode = n;
            return res;
        }
        acc += BigFloat(num) / (s * s);
    }
    res.value = sqrt(acc).convert_to<double>();
    return res;
}

// Bare-sine coefficients (a_n, b_n) of a state: phi = sum a_n sin(n pi x)
// versus the orthonormal e_n = sqrt(2) sin(n pi x).
inline std::pair<std::vector<double>, std::vector<double>>
bare_sine_coefficients(const ModalState& s) {
    const double r2 = std::sqrt(2.0);
    std::vector<double> a(s.pos.size()), b(s.vel.size());
    for (int i = 0; i < s.pos.size(); ++i) {
        a[i] = r2 * s.pos[i];
        b[i] = r2 * s.vel[i];
    }
    return {a, b};
}

struct SineGapReport {
    double min_value = 0.0;  // min over n <= N of n |sin(n pi xi)|
    long argmin = 0;
};

inline SineGapReport sine_gap_scan(const RealSpec& xi, long n_max) {
    if (n_max < 1) throw std::invalid_argument("sine_gap_scan: N >= 1 required");
    SineGapReport rep;
    BigFloat best = -1;
    for (long n = 1; n <= n_max; ++n) {
        const BigFloat v = abs_sin_n_pi(xi, n) * n;
        if (best < 0 || v < best) {
            best = v;
            rep.argmin = n;
            if (best == 0) break;
        }
    }
    rep.min_value = best.convert_to<double>();
    return rep;
}

// Fold quotients back into a rational p/q (convergent of the expansion).
inline std::pair<BigInt, BigInt> fold_convergent(const std::vector<BigInt>& quotients,
                                                 size_t depth) {
    // p_k / q_k via the standard three-term recurrence for [0; a_1, ..., a_k]
    BigInt p_prev = 1, q_prev = 0;  // [0;] = 0/1 handled by h_{-1}
    BigInt p = 0, q = 1;
    for (size_t i = 0; i < depth && i < quotients.size(); ++i) {
        const BigInt pn = quotients[i] * p + p_prev;
        const BigInt qn = quotients[i] * q + q_prev;
        p_prev = p;
        q_prev = q;
        p = pn;
        q = qn;
    }
    return {p, q};
}

// --- JSON export -----------------------------------------------------------

inline nlohmann::json to_json(const CFExpansion& cf) {
    nlohmann::json j;
    std::vector<std::string> qs;
    for (const BigInt& q : cf.quotients) qs.push_back(q.str());
    j["quotients"] = qs;
    j["terminated"] = cf.terminated;
    if (cf.periodic)
        j["periodic"] = {{"preperiod", cf.periodic->first}, {"period", cf.periodic->second}};
    return j;
}

inline nlohmann::json to_json(const MembershipVerdict& v) {
    static const char* names[] = {"in_S_certified", "in_S_up_to_depth", "not_in_S_rational",
                                  "inconclusive"};
    return {{"verdict", names[int(v.kind)]},
            {"bound", v.bound.str()},
            {"depth", v.depth},
            {"reason", v.reason}};
}

}  // namespace wavectl
