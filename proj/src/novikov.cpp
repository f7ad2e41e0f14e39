#include "mirrorforge/novikov.hpp"

#include "mirrorforge/potential.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace mf {

namespace {

std::optional<Rational> min_cutoff(const std::optional<Rational>& a,
                                   const std::optional<Rational>& b) {
    if (!a) return b;
    if (!b) return a;
    return std::min(*a, *b);
}

}  // namespace

NovikovScalar NovikovScalar::monomial(Rational e, QC c) {
    NovikovScalar s;
    if (!c.is_zero()) s.terms_.push_back({std::move(e), std::move(c)});
    return s;
}

NovikovScalar NovikovScalar::monomial_from_double(double e, double c) {
    return monomial(Rational(e), QC{Rational(c)});
}

void NovikovScalar::normalize() {
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return a.exp < b.exp; });
    std::vector<Term> out;
    for (auto& t : terms_) {
        if (cutoff_ && t.exp >= *cutoff_) continue;
        if (!out.empty() && out.back().exp == t.exp)
            out.back().coeff += t.coeff;
        else
            out.push_back(t);
        if (!out.empty() && out.back().coeff.is_zero()) out.pop_back();
    }
    terms_ = std::move(out);
}

NovikovScalar NovikovScalar::truncated(Rational new_cutoff) const {
    NovikovScalar s = *this;
    s.cutoff_ = min_cutoff(s.cutoff_, new_cutoff);
    s.normalize();
    return s;
}

std::optional<Rational> NovikovScalar::val() const {
    if (terms_.empty()) return std::nullopt;
    return terms_.front().exp;
}

QC NovikovScalar::coeff_at(const Rational& e) const {
    for (const auto& t : terms_)
        if (t.exp == e) return t.coeff;
    return QC{};
}

bool NovikovScalar::in_Lambda0() const {
    auto v = val();
    return !v || *v >= 0;
}

bool NovikovScalar::is_unit() const {
    auto v = val();
    if (!v) {
        if (cutoff_ && *cutoff_ <= 0)
            throw std::domain_error("NovikovScalar: cutoff too coarse to decide unit");
        return false;
    }
    return *v == 0;
}

bool NovikovScalar::in_Lambda_plus() const {
    auto v = val();
    return !v || *v > 0;
}

bool NovikovScalar::in_one_plus_unit() const {
    if (!in_Lambda0()) return false;
    NovikovScalar d = *this - one();
    return d.is_unit();
}

NovikovScalar operator+(const NovikovScalar& a, const NovikovScalar& b) {
    NovikovScalar r;
    r.terms_ = a.terms_;
    r.terms_.insert(r.terms_.end(), b.terms_.begin(), b.terms_.end());
    r.cutoff_ = min_cutoff(a.cutoff_, b.cutoff_);
    r.normalize();
    return r;
}

NovikovScalar operator-(const NovikovScalar& a) {
    NovikovScalar r = a;
    for (auto& t : r.terms_) t.coeff = -t.coeff;
    return r;
}

NovikovScalar operator-(const NovikovScalar& a, const NovikovScalar& b) { return a + (-b); }

std::optional<Rational> mul_cutoff(const NovikovScalar& a, const NovikovScalar& b) {
    // guaranteed prefix of a*b: min(Ea + val b, Eb + val a)
    std::optional<Rational> c;
    if (a.cutoff_) {
        auto vb = b.val();
        if (vb) c = min_cutoff(c, *a.cutoff_ + *vb);
        else if (!b.cutoff_) c = min_cutoff(c, std::nullopt);  // b identically 0
        else c = min_cutoff(c, *a.cutoff_ + *b.cutoff_);
    }
    if (b.cutoff_) {
        auto va = a.val();
        if (va) c = min_cutoff(c, *b.cutoff_ + *va);
        else if (a.cutoff_) c = min_cutoff(c, *b.cutoff_ + *a.cutoff_);
    }
    return c;
}

NovikovScalar operator*(const NovikovScalar& a, const NovikovScalar& b) {
    NovikovScalar r;
    if (a.known_zero() || b.known_zero()) return r;
    r.cutoff_ = mul_cutoff(a, b);
    for (const auto& ta : a.terms_)
        for (const auto& tb : b.terms_) r.terms_.push_back({ta.exp + tb.exp, ta.coeff * tb.coeff});
    r.normalize();
    return r;
}

NovikovScalar NovikovScalar::inverse() const {
    auto v = val();
    if (!v) throw std::domain_error("NovikovScalar::inverse: zero (up to cutoff)");
    // x = c T^a (1 + r), val r > 0; 1/x = c^-1 T^-a sum (-r)^k
    Rational a = *v;
    QC c = terms_.front().coeff;
    NovikovScalar lead = monomial(a, c);
    NovikovScalar r = *this - lead;  // val > a
    // relative remainder r' = r / (c T^a)
    NovikovScalar rp;
    rp.cutoff_ = r.cutoff_ ? std::optional<Rational>(*r.cutoff_ - a) : std::nullopt;
    for (const auto& t : r.terms_) rp.terms_.push_back({t.exp - a, t.coeff / c});
    rp.normalize();

    NovikovScalar geo = one();
    if (!rp.zero_up_to_cutoff()) {
        Rational rho = *rp.val();
        // sum (-r')^k while k*rho is below the budget
        std::optional<Rational> budget = rp.cutoff_;
        NovikovScalar p = one();
        Rational acc = 0;
        while (true) {
            p = p * (-rp);
            acc += rho;
            if (budget && acc >= *budget) break;
            if (p.zero_up_to_cutoff()) break;
            geo = geo + p;
            if (!budget && acc > 4096)
                throw std::domain_error("NovikovScalar::inverse: non-terminating exact inverse");
        }
        if (budget) geo = geo.truncated(*budget);
    } else if (rp.cutoff_) {
        geo.cutoff_ = rp.cutoff_;
        geo.normalize();
    }
    NovikovScalar inv_lead = monomial(-a, QC{1} / c);
    return inv_lead * geo;
}

NovikovScalar NovikovScalar::pow(long e) const {
    if (e < 0) return inverse().pow(-e);
    NovikovScalar out = one();
    NovikovScalar base = *this;
    while (e > 0) {
        if (e & 1) out = out * base;
        base = base * base;
        e >>= 1;
    }
    // preserve the cutoff of the inputs even when e == 0
    if (cutoff_) out = out.truncated(*cutoff_);
    return out;
}

bool agree_up_to_cutoff(const NovikovScalar& a, const NovikovScalar& b) {
    NovikovScalar d = a - b;
    return d.zero_up_to_cutoff();
}

bool operator==(const NovikovScalar& a, const NovikovScalar& b) {
    if (a.cutoff_ != b.cutoff_) return false;
    if (a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i)
        if (a.terms_[i].exp != b.terms_[i].exp || !(a.terms_[i].coeff == b.terms_[i].coeff))
            return false;
    return true;
}

NovikovScalar NovikovScalar::merged_close_exponents(const Rational& eps) const {
    NovikovScalar r;
    r.cutoff_ = cutoff_;
    for (const auto& t : terms_) {
        if (!r.terms_.empty() && t.exp - r.terms_.back().exp < eps)
            r.terms_.back().coeff += t.coeff;
        else
            r.terms_.push_back(t);
    }
    r.terms_.erase(std::remove_if(r.terms_.begin(), r.terms_.end(),
                                  [](const Term& t) { return t.coeff.is_zero(); }),
                   r.terms_.end());
    return r;
}

std::string NovikovScalar::str() const {
    std::ostringstream os;
    if (terms_.empty()) os << "0";
    bool first = true;
    for (const auto& t : terms_) {
        QC c = t.coeff;
        bool neg = c.im == 0 && c.re < 0;
        if (first)
            os << (neg ? "-" : "");
        else
            os << (neg ? " - " : " + ");
        first = false;
        QC mag = neg ? -c : c;
        if (mag.im == 0)
            os << to_string(mag.re);
        else
            os << "(" << to_string(mag) << ")";
        os << "T^" << to_string(t.exp);
    }
    if (cutoff_) os << " [cutoff " << to_string(*cutoff_) << "]";
    return os.str();
}

namespace {

Rational parse_rational_token(const std::string& tok) {
    // integer, fraction p/q, or decimal
    auto slash = tok.find('/');
    if (slash != std::string::npos) {
        Int p(tok.substr(0, slash));
        Int q(tok.substr(slash + 1));
        return Rational(p, q);
    }
    auto dot = tok.find('.');
    if (dot != std::string::npos) {
        std::string ip = tok.substr(0, dot), fp = tok.substr(dot + 1);
        bool neg = !ip.empty() && ip[0] == '-';
        if (neg) ip = ip.substr(1);
        if (ip.empty()) ip = "0";
        Int num(ip);
        Int den = 1;
        for (char ch : fp) {
            if (!std::isdigit(static_cast<unsigned char>(ch)))
                throw std::invalid_argument("bad decimal: " + tok);
            num = num * 10 + (ch - '0');
            den *= 10;
        }
        Rational r(num, den);
        return neg ? -r : r;
    }
    return Rational(Int(tok));
}

}  // namespace

NovikovScalar NovikovScalar::parse(const std::string& text) {
    NovikovScalar out;
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
    while (i < s.size()) {
        auto num_end = i;
        while (num_end < s.size() &&
               (std::isdigit(static_cast<unsigned char>(s[num_end])) || s[num_end] == '.' ||
                s[num_end] == '/'))
            ++num_end;
        Rational coeff = num_end == i ? Rational(1) : parse_rational_token(s.substr(i, num_end - i));
        if (neg) coeff = -coeff;
        i = num_end;
        Rational exp = 0;
        if (i < s.size() && s[i] == 'T') {
            ++i;
            if (i >= s.size() || s[i] != '^') throw std::invalid_argument("expected T^ in series");
            ++i;
            auto e_end = i;
            if (e_end < s.size() && s[e_end] == '-') ++e_end;
            while (e_end < s.size() &&
                   (std::isdigit(static_cast<unsigned char>(s[e_end])) || s[e_end] == '.' ||
                    s[e_end] == '/'))
                ++e_end;
            exp = parse_rational_token(s.substr(i, e_end - i));
            i = e_end;
        }
        out = out + monomial(exp, QC{coeff});
        if (i < s.size()) {
            if (s[i] == '+')
                neg = false;
            else if (s[i] == '-')
                neg = true;
            else
                throw std::invalid_argument("unexpected character in series literal");
            ++i;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Chart transitions
// ---------------------------------------------------------------------------

ChartPair transition_sphere_to_sphere(const NovikovScalar& u, const NovikovScalar& v) {
    if (!u.is_unit()) throw std::domain_error("transition: not in chart overlap (u not a unit)");
    return {u * u * v, u.inverse()};
}

ChartPair transition_sphere_to_sphere_inv(const NovikovScalar& u, const NovikovScalar& v) {
    if (!v.is_unit()) throw std::domain_error("transition: not in chart overlap (v not a unit)");
    return {v.inverse(), u * v * v};
}

ChartPair transition_sphere_to_torus(const NovikovScalar& u1, const NovikovScalar& v1) {
    if (!u1.is_unit())
        throw std::domain_error("transition: not in torus overlap (u1 not a unit)");
    return {u1, u1 * v1 - NovikovScalar::one()};
}

ChartPair transition_torus_to_sphere(const NovikovScalar& w, const NovikovScalar& z) {
    if (!w.is_unit()) throw std::domain_error("transition: w not a unit");
    return {w, (NovikovScalar::one() + z) * w.inverse()};
}

BlowdownImage blowdown(const AnAtlas& atlas, int j, const NovikovScalar& uj,
                       const NovikovScalar& vj) {
    if (j < 1 || j > atlas.n) throw std::invalid_argument("blowdown: bad chart index");
    BlowdownImage out;
    out.ztilde = uj * vj;
    out.u = uj * out.ztilde.pow(j - 1);
    out.v = vj * out.ztilde.pow(atlas.n - j);
    return out;
}

Membership membership(const AnAtlas& atlas, const NovikovScalar& u, const NovikovScalar& v,
                      const NovikovScalar& ztilde) {
    if (!u.in_Lambda0() || !v.in_Lambda0())
        throw std::invalid_argument("membership: u, v must lie in Lambda0");
    Membership m;
    auto vu = u.val(), vv = v.val(), vz = ztilde.val();

    if (!vz) {  // ztilde = 0 (up to cutoff): the skeleton fibre
        if (!vu && !vv) {
            m.exceptional_locus = true;
            for (int j = 1; j <= atlas.n; ++j) m.sphere_charts.push_back(j);
        } else if (!vu) {
            m.sphere_charts.push_back(atlas.n);  // (0, v) in the last chart
        } else if (!vv) {
            m.sphere_charts.push_back(1);  // (u, 0) in the first chart
        } else {
            throw std::invalid_argument("membership: uv = 0 but ztilde^n != 0");
        }
        return m;
    }

    Rational s = *vz;
    if (s == 0) {
        // torus region: val u must be 0 for u1 = u to be a unit
        NovikovScalar zt_minus_1 = ztilde - NovikovScalar::one();
        if (vu && *vu == 0 && zt_minus_1.is_unit()) m.torus_chart = true;
        return m;
    }
    // sphere chart j holds the point iff (j-1)s <= val u <= j s
    Rational valu = vu ? *vu : Rational(atlas.n) * s;  // u = 0 sits at the far end
    for (int j = 1; j <= atlas.n; ++j) {
        if (Rational(j - 1) * s <= valu && valu <= Rational(j) * s) m.sphere_charts.push_back(j);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Sampling and the C^2 decomposition check
// ---------------------------------------------------------------------------

Rational NovikovSampler::small_rational(int max_num, int max_den) {
    std::uniform_int_distribution<int> num(-max_num, max_num), den(1, max_den);
    return Rational(num(rng_), den(rng_));
}

QC NovikovSampler::nonzero_coeff() {
    while (true) {
        QC c{small_rational(), small_rational()};
        if (!c.is_zero()) return c;
    }
}

QC NovikovSampler::coeff() { return {small_rational(), small_rational()}; }

NovikovScalar NovikovSampler::series(const Rational& lo, bool strict, int max_terms,
                                     Rational cutoff) {
    std::uniform_int_distribution<int> count(1, max_terms);
    int k = count(rng_);
    NovikovScalar s;
    for (int i = 0; i < k; ++i) {
        Rational step(std::uniform_int_distribution<int>(strict ? 1 : 0, 8)(rng_),
                      std::uniform_int_distribution<int>(1, 4)(rng_));
        if (strict && step == 0) step = Rational(1, 4);
        Rational e = lo + step;
        s = s + NovikovScalar::monomial(e, nonzero_coeff());
    }
    return s.truncated(std::move(cutoff));
}

NovikovScalar NovikovSampler::unit(Rational cutoff) {
    NovikovScalar s = NovikovScalar::monomial(Rational(0), nonzero_coeff());
    s = s + series(Rational(0), true, 3, cutoff);
    return s.truncated(std::move(cutoff));
}

NovikovScalar NovikovSampler::lambda_plus(Rational cutoff) {
    return series(Rational(0), true, 3, std::move(cutoff));
}

namespace {

// complex part (exponent-0 coefficient) and the Lambda_+ tail
std::pair<QC, NovikovScalar> split_constant(const NovikovScalar& x) {
    QC c = x.coeff_at(Rational(0));
    NovikovScalar tail = x - NovikovScalar::monomial(Rational(0), c);
    return {c, tail};
}

}  // namespace

C2Report verify_C2_decomposition(int samples_per_stratum, std::uint64_t seed) {
    C2Report rep;
    NovikovSampler smp(seed);
    Rational cutoff(10);

    auto check_lhs_membership = [&](const NovikovScalar& u, const NovikovScalar& v,
                                    std::string_view tag) {
        // (u,v) with uv =: zt must satisfy: u,v in Lambda0, zt in 1+Lambda0^x,
        // and decompose as (C^2 - {uv=1}) + Lambda_+^2.
        ++rep.samples;
        NovikovScalar zt = u * v;
        bool lhs = u.in_Lambda0() && v.in_Lambda0() &&
                   (zt.zero_up_to_cutoff() || (zt - NovikovScalar::one()).is_unit());
        auto [u0, utail] = split_constant(u);
        auto [v0, vtail] = split_constant(v);
        bool rhs = utail.in_Lambda_plus() && vtail.in_Lambda_plus() && !(u0 * v0 == QC{1});
        if (lhs != rhs) {
            ++rep.failures;
            rep.witnesses.push_back(std::string(tag) + ": u=" + u.str() + " v=" + v.str());
        }
    };

    for (int i = 0; i < samples_per_stratum; ++i) {
        // stratum 1: val(uv) > 0  <->  u0 v0 = 0
        NovikovScalar u = smp.lambda_plus(cutoff);
        NovikovScalar v = smp.unit(cutoff);
        if (i % 2) std::swap(u, v);
        check_lhs_membership(u, v, "stratum1");

        // stratum 2: val u = val v = 0 with u0 v0 not in {0, 1}
        NovikovScalar u2, v2;
        do {
            u2 = smp.unit(cutoff);
            v2 = smp.unit(cutoff);
        } while (u2.coeff_at(Rational(0)) * v2.coeff_at(Rational(0)) == QC{1});
        check_lhs_membership(u2, v2, "stratum2");

        // excluded locus: u0 v0 = 1 must fail both sides
        NovikovScalar u3 = smp.unit(cutoff);
        NovikovScalar v3 =
            NovikovScalar::monomial(Rational(0), QC{1} / u3.coeff_at(Rational(0))) +
            smp.lambda_plus(cutoff);
        ++rep.samples;
        NovikovScalar zt = u3 * v3;
        bool lhs = (zt - NovikovScalar::one()).is_unit();
        auto [u0, utail] = split_constant(u3);
        auto [v0, vtail] = split_constant(v3);
        bool rhs = utail.in_Lambda_plus() && vtail.in_Lambda_plus() && !(u0 * v0 == QC{1});
        if (lhs || rhs) {
            ++rep.failures;
            rep.witnesses.push_back("excluded: u=" + u3.str() + " v=" + v3.str());
        }
    }
    return rep;
}

bool blowup_incidence(const ChartPair& point, const ChartPair& center, const P1Lambda& line) {
    NovikovScalar lhs = line.b * (point.first - center.first);
    NovikovScalar rhs = line.a * (point.second - center.second);
    return agree_up_to_cutoff(lhs, rhs);
}

Skeleton skeleton_valuation_image(const AnAtlas& atlas, const Rational& s) {
    if (s <= 0) throw std::invalid_argument("skeleton_valuation_image: need val ztilde > 0");
    Skeleton sk;
    sk.s = s;
    sk.n = atlas.n;
    for (int j = 0; j <= atlas.n; ++j)
        sk.chain_vertices.push_back({Rational(j) * s, Rational(atlas.n - j) * s});
    for (int j = 1; j <= atlas.n; ++j)
        sk.chart_segments.push_back(
            {std::pair<Rational, Rational>{Rational(0), s}, {s, Rational(0)}});
    return sk;
}

DelPezzoChartAtlas del_pezzo_chart_atlas(const std::vector<Vec2>& normals) {
    MonotoneFanData fan = MonotoneFanData::of(normals);
    DelPezzoChartAtlas atlas;
    std::size_t p = fan.size();
    for (std::size_t i = 0; i < p; ++i) {
        const Vec2& v = fan.normals[i];
        const Vec2& vn = fan.normals[(i + 1) % p];
        DelPezzoChartAtlas::Corner c;
        c.v = v;
        c.v_next = vn;
        c.multiplicity = corner_multiplicity(v, vn);
        Vec2 xi{-v.y, v.x};       // edge of facet i leaving the corner
        Vec2 eta{vn.y, -vn.x};    // edge of facet i+1 leaving the corner
        Vec2 sum = xi + eta;
        c.holonomy_direction = make_primitive(Vec2{-sum.y, sum.x});
        atlas.sphere_chart_count += c.multiplicity;
        atlas.corners.push_back(std::move(c));
    }
    atlas.total_chart_count = atlas.sphere_chart_count + 1;
    return atlas;
}

}  // namespace mf
