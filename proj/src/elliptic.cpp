#include "mirrorforge/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace mf::elliptic {

namespace {

constexpr double kPi = std::numbers::pi;
const C kI{0.0, 1.0};

C quadratic_roots_sum_prod_one(C sum, int which) {
    // roots of t^2 - sum*t + 1
    C disc = std::sqrt(sum * sum - C(4.0));
    return which == 0 ? (sum - disc) * 0.5 : (sum + disc) * 0.5;
}

double dist_point_segment(C p, C a, C b) {
    C d = b - a;
    double L2 = std::norm(d);
    if (L2 == 0.0) return std::abs(p - a);
    double t = std::clamp(((p - a) * std::conj(d)).real() / L2, 0.0, 1.0);
    return std::abs(p - (a + t * d));
}

bool point_in_triangle(C p, C a, C b, C c) {
    auto side = [](C p, C u, C v) {
        return ((v - u).real() * (p - u).imag() - (v - u).imag() * (p - u).real());
    };
    double s1 = side(p, a, b), s2 = side(p, b, c), s3 = side(p, c, a);
    bool has_neg = (s1 < 0) || (s2 < 0) || (s3 < 0);
    bool has_pos = (s1 > 0) || (s2 > 0) || (s3 > 0);
    return !(has_neg && has_pos);
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod 15(7) on [0,1] for complex integrands.
// ---------------------------------------------------------------------------

const double XGK[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                       0.741531185599394, 0.586087235467691, 0.405845151377397,
                       0.207784955007898, 0.000000000000000};
const double WGK[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                       0.140653259715525, 0.169004726639267, 0.190350578064785,
                       0.204432940075298, 0.209482141084728};
const double WG[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                      0.417959183673469};

template <class F>
void gk15(const F& f, double lo, double hi, C& k15, C& g7, std::size_t& evals) {
    double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    C fc = f(c);
    evals += 1;
    k15 = WGK[7] * fc;
    g7 = WG[3] * fc;
    for (int j = 0; j < 7; ++j) {
        C f1 = f(c - h * XGK[j]);
        C f2 = f(c + h * XGK[j]);
        evals += 2;
        k15 += WGK[j] * (f1 + f2);
        if (j % 2 == 1) g7 += WG[j / 2] * (f1 + f2);
    }
    k15 *= h;
    g7 *= h;
}

struct AdaptResult {
    C value{0.0, 0.0};
    double err = 0.0;
    std::size_t evals = 0;
    bool converged = true;
};

template <class F>
void adapt_rec(const F& f, double lo, double hi, double tol, int depth, AdaptResult& out) {
    C k, g;
    gk15(f, lo, hi, k, g, out.evals);
    double err = std::abs(k - g);
    double floor = 5e-15 * std::abs(k) + 1e-16;
    if (err <= std::max(tol, floor) || depth >= 30) {
        if (std::isfinite(k.real()) && std::isfinite(k.imag())) {
            out.value += k;
            out.err += err;
        } else {
            out.converged = false;
        }
        if (err > std::max(tol, floor) && depth >= 30) out.converged = false;
        return;
    }
    double mid = 0.5 * (lo + hi);
    adapt_rec(f, lo, mid, tol * 0.5, depth + 1, out);
    adapt_rec(f, mid, hi, tol * 0.5, depth + 1, out);
}

template <class F>
AdaptResult adapt(const F& f, double lo, double hi, double tol) {
    AdaptResult out;
    adapt_rec(f, lo, hi, tol, 0, out);
    return out;
}

// tanh-sinh rule on (0,1], for integrands with an endpoint singularity at 0
// (log or inverse-sqrt type).  Nodes never touch the endpoints; the node
// range is truncated at t ~ 1e-12.
template <class F>
AdaptResult tanh_sinh(const F& f, double tol) {
    AdaptResult out;
    auto node = [](double u, double& x, double& w) {
        double s = std::sinh(u);
        double ch = std::cosh(0.5 * kPi * s);
        x = 0.5 * (1.0 + std::tanh(0.5 * kPi * s));
        w = 0.25 * kPi * std::cosh(u) / (ch * ch);
    };
    const double umax = 3.8;  // x(-3.8) ~ 5e-31, truncated below
    C prev{0.0, 0.0};
    double h = 0.5;
    C sum{0.0, 0.0};
    // level 0
    {
        double x, w;
        node(0.0, x, w);
        sum = f(x) * w;
        out.evals += 1;
        for (double u = h; u <= umax; u += h) {
            double xp, wp, xm, wm;
            node(u, xp, wp);
            node(-u, xm, wm);
            if (1.0 - xp > 1e-15) {
                sum += f(xp) * wp;
                ++out.evals;
            }
            if (xm > 1e-12) {
                sum += f(xm) * wm;
                ++out.evals;
            }
        }
        prev = sum * h;
    }
    for (int level = 1; level <= 8; ++level) {
        h *= 0.5;
        for (double u = h; u <= umax; u += 2.0 * h) {
            double xp, wp, xm, wm;
            node(u, xp, wp);
            node(-u, xm, wm);
            if (1.0 - xp > 1e-15) {
                sum += f(xp) * wp;
                ++out.evals;
            }
            if (xm > 1e-12) {
                sum += f(xm) * wm;
                ++out.evals;
            }
        }
        C cur = sum * h;
        out.err = std::abs(cur - prev);
        prev = cur;
        if (level >= 3 && out.err <= std::max(tol, 1e-14 * std::abs(cur))) {
            out.value = cur;
            return out;
        }
    }
    out.value = prev;
    out.converged = out.err <= 10 * tol;
    return out;
}

// ---------------------------------------------------------------------------
// Branch-coherent sqrt(P) along a cycle path: per-factor continued arguments.
// ---------------------------------------------------------------------------

struct SqrtField {
    const Cycle* c = nullptr;
    std::vector<std::array<double, 4>> theta;  // continued arg(pts[k]-roots[j])
    double sigma = 1.0;

    static SqrtField build(const Cycle& cyc);
    // z on segment seg (between pts[seg] and pts[seg+1])
    C eval(int seg, C z) const;
    C eval_end(int seg, C z, int special_j, C delta) const;
    C value_at_vertex(int k) const;
};

SqrtField SqrtField::build(const Cycle& cyc) {
    SqrtField F;
    F.c = &cyc;
    int n = static_cast<int>(cyc.pts.size());
    F.theta.assign(n, {});
    int s = cyc.seed_index;
    for (int j = 0; j < 4; ++j) F.theta[s][j] = std::arg(cyc.pts[s] - cyc.roots[j]);
    auto extend = [&](int from, int to) {
        for (int j = 0; j < 4; ++j) {
            C num = cyc.pts[to] - cyc.roots[j];
            C den = cyc.pts[from] - cyc.roots[j];
            if ((to == 0 && j == cyc.head) || (to == n - 1 && j == cyc.tail)) {
                F.theta[to][j] = F.theta[from][j];  // constant along the end ray
            } else {
                F.theta[to][j] = F.theta[from][j] + std::arg(num / den);
            }
        }
    };
    for (int k = s + 1; k < n; ++k) extend(k - 1, k);
    for (int k = s - 1; k >= 0; --k) extend(k + 1, k);
    // fix sign to match the stored seed
    C v0 = F.value_at_vertex(s);
    F.sigma = (std::abs(v0 - cyc.seed_value) <= std::abs(v0 + cyc.seed_value)) ? 1.0 : -1.0;
    return F;
}

C SqrtField::value_at_vertex(int k) const {
    double mod = 1.0, arg = 0.0;
    for (int j = 0; j < 4; ++j) {
        mod *= std::sqrt(std::abs(c->pts[k] - c->roots[j]));
        arg += theta[k][j];
    }
    return sigma * std::polar(mod, 0.5 * arg);
}

C SqrtField::eval(int seg, C z) const {
    int anchor = (seg == 0) ? 1 : seg;
    double mod = 1.0, arg = 0.0;
    for (int j = 0; j < 4; ++j) {
        C num = z - c->roots[j];
        C den = c->pts[anchor] - c->roots[j];
        mod *= std::sqrt(std::abs(num));
        arg += theta[anchor][j] + std::arg(num / den);
    }
    return sigma * std::polar(mod, 0.5 * arg);
}

// End-segment variant: the difference z - roots[special_j] is supplied
// exactly (it underflows when formed by subtraction near the root).
C SqrtField::eval_end(int seg, C z, int special_j, C delta) const {
    int anchor = (seg == 0) ? 1 : seg;
    double mod = 1.0, arg = 0.0;
    for (int j = 0; j < 4; ++j) {
        C num = (j == special_j) ? delta : z - c->roots[j];
        C den = c->pts[anchor] - c->roots[j];
        mod *= std::sqrt(std::abs(num));
        arg += theta[anchor][j] + std::arg(num / den);
    }
    return sigma * std::polar(mod, 0.5 * arg);
}

C eval_P(const std::array<C, 4>& roots, C z) {
    C p{1.0, 0.0};
    for (const auto& r : roots) p *= (z - r);
    return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// Roots
// ---------------------------------------------------------------------------

Roots ramification_roots(C q) {
    Roots R;
    R.q = q;
    R.r[0] = quadratic_roots_sum_prod_one(q + C(2.0), 0);
    R.r[1] = quadratic_roots_sum_prod_one(q + C(2.0), 1);
    R.r[2] = quadratic_roots_sum_prod_one(q - C(2.0), 0);
    R.r[3] = quadratic_roots_sum_prod_one(q - C(2.0), 1);
    // construction identity: product of factors equals (t^2+1-qt)^2 - 4t^2
    C t{0.37, 0.21};  // arbitrary probe point
    C lhs = eval_P(R.r, t);
    C tt = t * t + C(1.0) - q * t;
    C rhs = tt * tt - 4.0 * t * t;
    double scale = std::pow(1.0 + std::abs(t), 4) * (1.0 + std::abs(q) * std::abs(q));
    if (std::abs(lhs - rhs) > 1e-9 * scale)
        throw std::logic_error("ramification_roots: factorization identity failed");
    return R;
}

RamificationSet ramification_points(C q) {
    Roots R = ramification_roots(q);
    RamificationSet out;
    out.q = q;
    for (int i = 0; i < 4; ++i) out.points.push_back({R.r[i], i < 2 ? 0 : 1});
    std::sort(out.points.begin(), out.points.end(),
              [](const RamificationSet::Point& a, const RamificationSet::Point& b) {
                  if (a.factor != b.factor) return a.factor < b.factor;
                  return std::arg(a.t) < std::arg(b.t);
              });
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (std::abs(out.points[i].t - out.points[j].t) < 1e-9) out.collision = true;
    return out;
}

CriticalValues critical_values() { return {}; }

double Cycle::min_root_separation() const {
    double m = 1e300;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) m = std::min(m, std::abs(roots[i] - roots[j]));
    return m;
}

// ---------------------------------------------------------------------------
// Period derivative quadrature
// ---------------------------------------------------------------------------

namespace {

struct SegmentIntegrals {
    std::vector<C> values;  // per segment, path-oriented
    double err = 0.0;
    std::size_t evals = 0;
    bool converged = true;
};

SegmentIntegrals integrate_segments(const Cycle& c, double tol) {
    SqrtField F = SqrtField::build(c);
    int nseg = static_cast<int>(c.pts.size()) - 1;
    SegmentIntegrals out;
    double tol_seg = tol / std::max(1, nseg);
    for (int seg = 0; seg < nseg; ++seg) {
        AdaptResult r;
        if (seg == 0) {
            C root = c.roots[c.head];
            C D = c.pts[1] - root;
            r = adapt(
                [&](double u) {
                    C delta = u * u * D;
                    return kI * 2.0 * u * D / F.eval_end(0, root + delta, c.head, delta);
                },
                0.0, 1.0, tol_seg);
        } else if (seg == nseg - 1) {
            C root = c.roots[c.tail];
            C D = c.pts[nseg - 1] - root;
            r = adapt(
                [&](double u) {
                    C delta = u * u * D;
                    return kI * 2.0 * u * D / F.eval_end(seg, root + delta, c.tail, delta);
                },
                0.0, 1.0, tol_seg);
            r.value = -r.value;
        } else {
            C A = c.pts[seg], d = c.pts[seg + 1] - c.pts[seg];
            r = adapt([&](double s) { return kI * d / F.eval(seg, A + s * d); }, 0.0, 1.0,
                      tol_seg);
        }
        out.values.push_back(r.value);
        out.err += r.err;
        out.evals += r.evals;
        out.converged = out.converged && r.converged;
    }
    return out;
}

}  // namespace

QuadResult cycle_period_derivative(const Cycle& c, const Tolerances& tol) {
    SegmentIntegrals si = integrate_segments(c, tol.quad_tol);
    QuadResult out;
    for (const C& v : si.values) out.value += v;
    out.value *= 2.0 * static_cast<double>(c.sign);
    out.err = 2.0 * si.err;
    out.evals = si.evals;
    out.converged = si.converged;
    return out;
}

std::vector<C> cycle_period_derivative_pieces(const Cycle& c, const std::vector<int>& breaks,
                                              const Tolerances& tol) {
    SegmentIntegrals si = integrate_segments(c, tol.quad_tol);
    std::vector<C> pieces;
    std::size_t b = 0;
    C acc{0.0, 0.0};
    for (int seg = 0; seg < static_cast<int>(si.values.size()); ++seg) {
        if (b < breaks.size() && seg == breaks[b]) {
            pieces.push_back(acc * 2.0 * static_cast<double>(c.sign));
            acc = C{0.0, 0.0};
            ++b;
        }
        acc += si.values[seg];
    }
    pieces.push_back(acc * 2.0 * static_cast<double>(c.sign));
    return pieces;
}

std::vector<int> sheet_labels(const Cycle& c) {
    SqrtField F = SqrtField::build(c);
    std::vector<int> labels;
    int nseg = static_cast<int>(c.pts.size()) - 1;
    for (int seg = 0; seg < nseg; ++seg) {
        C mid = 0.5 * (c.pts[seg] + c.pts[seg + 1]);
        C cont = F.eval(seg, mid);
        C principal = std::sqrt(eval_P(c.roots, mid));
        labels.push_back(std::abs(cont - principal) <= std::abs(cont + principal) ? 1 : -1);
    }
    return labels;
}

// ---------------------------------------------------------------------------
// Base frame
// ---------------------------------------------------------------------------

namespace {

Cycle make_circle_cycle(C q, const Roots& R, int head, int tail, double ang_from, double ang_to,
                        int samples) {
    Cycle c;
    c.q = q;
    c.roots = R.r;
    c.head = head;
    c.tail = tail;
    c.pts.push_back(R.r[head]);
    for (int k = 1; k < samples; ++k) {
        double a = ang_from + (ang_to - ang_from) * k / samples;
        c.pts.push_back(std::polar(1.0, a));
    }
    c.pts.push_back(R.r[tail]);
    c.seed_index = (samples + 1) / 2;
    c.seed_value = std::sqrt(eval_P(c.roots, c.pts[c.seed_index]));
    return c;
}

}  // namespace

Frame base_frame(double q0, const Tolerances& tol) {
    if (!(q0 > -4.0 && q0 < 0.0))
        throw std::invalid_argument("base_frame: q0 must lie in (-4, 0)");
    C q{q0, 0.0};
    Roots R = ramification_roots(q);
    // factor 0 roots are exp(±i theta0); index of the lower-half one
    int lower = R.r[0].imag() < 0 ? 0 : 1;
    int upper = 1 - lower;
    double theta0 = std::abs(std::arg(R.r[upper]));

    Frame f;
    // a: right crossing, lower -> upper through +1
    f.a = make_circle_cycle(q, R, lower, upper, -theta0, theta0, 10);
    // b: left crossing, lower -> upper through -1 (clockwise down and around)
    f.b = make_circle_cycle(q, R, lower, upper, -theta0, -(2.0 * kPi - theta0), 14);

    // orientation (1): D_a real and negative
    QuadResult da = cycle_period_derivative(f.a, tol);
    if (std::abs(da.value.imag()) > 1e-6 * (1.0 + std::abs(da.value)))
        throw std::logic_error("base_frame: D_a expected real on (-4,0)");
    if (da.value.real() > 0) f.a.sign = -f.a.sign;

    // orientation (2): thimble of b near -4 from the upper half plane has
    // positive real part; equivalently  int_0^rho Im D_b(-4 + i r) dr > 0.
    Cycle bb = f.b;
    const double rho = 0.3;
    march(bb, C(-4.0, rho), tol);
    double acc = 0.0;
    double r_prev = rho;
    C d_prev = cycle_period_derivative(bb, tol).value;
    for (int k = 1; k <= 12; ++k) {
        double r_next = rho * std::pow(0.5, k);
        march(bb, C(-4.0, r_next), tol);
        C d_next = cycle_period_derivative(bb, tol).value;
        acc += 0.5 * (d_prev.imag() + d_next.imag()) * (r_prev - r_next);
        r_prev = r_next;
        d_prev = d_next;
    }
    acc += d_prev.imag() * r_prev;  // sqrt-integrable tail, sign-safe estimate
    if (acc < 0) f.b.sign = -f.b.sign;
    return f;
}

// ---------------------------------------------------------------------------
// Transport
// ---------------------------------------------------------------------------

namespace {

bool match_factor_pair(const C& old0, const C& old1, C n0, C n1, C& out0, C& out1) {
    double direct = std::abs(old0 - n0) + std::abs(old1 - n1);
    double swapped = std::abs(old0 - n1) + std::abs(old1 - n0);
    if (direct <= swapped) {
        out0 = n0;
        out1 = n1;
    } else {
        out0 = n1;
        out1 = n0;
    }
    return true;
}

// keep every non-endpoint root at clearance from the path: displace crowded
// vertices, then insert detour vertices where segments pass too close
bool enforce_clearance(Cycle& c, double delta_eff) {
    double sep = c.min_root_separation();
    double bump_dist = std::min(3.0 * delta_eff, 0.45 * sep);

    auto sweep_safe = [&](C a, C mid_old, C mid_new, C b) {
        for (int m = 0; m < 4; ++m) {
            if (point_in_triangle(c.roots[m], a, mid_old, mid_new)) return false;
            if (point_in_triangle(c.roots[m], mid_old, mid_new, b)) return false;
        }
        return true;
    };

    // vertex displacement pass
    for (std::size_t k = 1; k + 1 < c.pts.size(); ++k) {
        for (int j = 0; j < 4; ++j) {
            if (j == c.head || j == c.tail) continue;
            C root = c.roots[j];
            double d = std::abs(c.pts[k] - root);
            if (d >= 1.2 * delta_eff) continue;
            if (d < 1e-14) return false;
            C moved = root + (c.pts[k] - root) * (bump_dist / d);
            if (!sweep_safe(c.pts[k - 1], c.pts[k], moved, c.pts[k + 1])) return false;
            if (static_cast<int>(k) == c.seed_index) {
                // continue the branch seed along the displacement
                for (int m = 0; m < 4; ++m)
                    c.seed_value *= std::sqrt((moved - c.roots[m]) / (c.pts[k] - c.roots[m]));
            }
            c.pts[k] = moved;
        }
    }

    for (int guard = 0; guard < 12; ++guard) {
        bool edited = false;
        for (int j = 0; j < 4 && !edited; ++j) {
            if (j == c.head || j == c.tail) continue;
            C root = c.roots[j];
            for (std::size_t k = 0; k + 1 < c.pts.size() && !edited; ++k) {
                double d = dist_point_segment(root, c.pts[k], c.pts[k + 1]);
                if (d >= 1.2 * delta_eff) continue;
                if (d < 1e-14) return false;  // root on the path
                C a = c.pts[k], b = c.pts[k + 1];
                C dir = b - a;
                double t = std::clamp(((root - a) * std::conj(dir)).real() / std::norm(dir),
                                      0.05, 0.95);
                C foot = a + t * dir;
                C push = (foot - root) / std::abs(foot - root);
                C bump = root + push * bump_dist;
                // homotopy safety: no root inside the triangle (a, bump, b)
                for (int m = 0; m < 4; ++m)
                    if (point_in_triangle(c.roots[m], a, bump, b)) return false;
                c.pts.insert(c.pts.begin() + static_cast<long>(k) + 1, bump);
                if (c.seed_index > static_cast<int>(k)) ++c.seed_index;
                edited = true;
            }
        }
        if (!edited) return true;
    }
    return false;
}

void simplify_path(Cycle& c, double delta_eff) {
    if (c.pts.size() < 50) return;
    for (std::size_t k = 1; k + 1 < c.pts.size();) {
        if (static_cast<int>(k) == c.seed_index) {
            ++k;
            continue;
        }
        C a = c.pts[k - 1], b = c.pts[k], d = c.pts[k + 1];
        bool ok = true;
        for (int m = 0; m < 4 && ok; ++m) {
            if (point_in_triangle(c.roots[m], a, b, d)) ok = false;
            if (ok && m != c.head && m != c.tail &&
                dist_point_segment(c.roots[m], a, d) < 1.5 * delta_eff)
                ok = false;
        }
        if (ok && std::abs(d - a) < 0.8 * (std::abs(b - a) + std::abs(d - b))) {
            c.pts.erase(c.pts.begin() + static_cast<long>(k));
            if (c.seed_index > static_cast<int>(k)) --c.seed_index;
        } else {
            ++k;
        }
    }
}

}  // namespace

thread_local const char* g_step_fail = "";

bool transport_step(Cycle& c, C q_new, const Tolerances& tol) {
    g_step_fail = "";
    // keep the branch seed on a vertex well away from every root
    {
        auto dmin = [&](int k) {
            double m = 1e300;
            for (const auto& r : c.roots) m = std::min(m, std::abs(c.pts[k] - r));
            return m;
        };
        int best = c.seed_index;
        double bestd = dmin(c.seed_index);
        for (int k = 1; k + 1 < static_cast<int>(c.pts.size()); ++k)
            if (dmin(k) > bestd) {
                best = k;
                bestd = dmin(k);
            }
        if (best != c.seed_index && bestd > 1.5 * dmin(c.seed_index)) {
            SqrtField F = SqrtField::build(c);
            c.seed_value = F.value_at_vertex(best);
            c.seed_index = best;
        }
    }
    Roots Rn = ramification_roots(q_new);
    std::array<C, 4> nr;
    match_factor_pair(c.roots[0], c.roots[1], Rn.r[0], Rn.r[1], nr[0], nr[1]);
    match_factor_pair(c.roots[2], c.roots[3], Rn.r[2], Rn.r[3], nr[2], nr[3]);

    double old_sep = c.min_root_separation();
    for (int j = 0; j < 4; ++j)
        if (std::abs(nr[j] - c.roots[j]) > 0.40 * old_sep) {
            g_step_fail = "root motion";
            return false;
        }

    // One similarity per factor pair.  Vertices follow the cycle's own
    // endpoint pair; the other pair takes over only inside half the
    // pair-to-pair gap, so a path threading a pinching pair travels with it.
    C al[2], be[2];
    for (int f = 0; f < 2; ++f) {
        C r0 = c.roots[2 * f], r1 = c.roots[2 * f + 1];
        C n0 = nr[2 * f], n1 = nr[2 * f + 1];
        al[f] = (n1 - n0) / (r1 - r0);
        be[f] = n0 - al[f] * r0;
    }
    int f_own = c.head < 2 ? 0 : 1;
    int f_oth = 1 - f_own;
    double gap = 1e300;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            gap = std::min(gap, std::abs(c.roots[2 * f_own + i] - c.roots[2 * f_oth + j]));
    double R_oth = 0.5 * gap;
    auto map_vertex = [&](C p) {
        double d_oth = std::min(std::abs(p - c.roots[2 * f_oth]),
                                std::abs(p - c.roots[2 * f_oth + 1]));
        double eta = std::clamp(1.0 - d_oth / R_oth, 0.0, 1.0);
        double lam = eta * eta * (3.0 - 2.0 * eta);
        C m_own = al[f_own] * p + be[f_own];
        C m_oth = al[f_oth] * p + be[f_oth];
        return (1.0 - lam) * m_own + lam * m_oth;
    };

    Cycle trial = c;
    trial.q = q_new;
    trial.roots = nr;
    for (std::size_t k = 0; k < trial.pts.size(); ++k) {
        C p_old = c.pts[k];
        C p_new = map_vertex(p_old);
        // relative-motion guard: must not sweep across any root
        for (int j = 0; j < 4; ++j) {
            C rel = (p_new - nr[j]) - (p_old - c.roots[j]);
            if (std::abs(rel) > 0.6 * std::abs(p_old - c.roots[j])) {
                g_step_fail = "vertex motion";
                return false;
            }
        }
        trial.pts[k] = p_new;
    }
    trial.pts.front() = nr[c.head];
    trial.pts.back() = nr[c.tail];

    // seed continuation by the per-factor ratio product
    C z_old = c.pts[c.seed_index];
    C z_new = trial.pts[c.seed_index];
    C v = c.seed_value;
    for (int j = 0; j < 4; ++j) {
        C ratio = (z_new - nr[j]) / (z_old - c.roots[j]);
        if (std::abs(ratio - 1.0) > 0.8) {
            g_step_fail = "seed ratio";
            return false;
        }
        v *= std::sqrt(ratio);
    }
    C p_check = eval_P(nr, z_new);
    if (std::abs(v * v - p_check) > 1e-6 * (std::abs(p_check) + 1e-300)) {
        g_step_fail = "seed validation";
        return false;
    }
    trial.seed_value = v;

    double delta_eff = std::min(tol.delta_min, 0.25 * trial.min_root_separation());
    if (!enforce_clearance(trial, delta_eff)) {
        g_step_fail = "clearance";
        return false;
    }
    simplify_path(trial, delta_eff);
    c = std::move(trial);
    return true;
}

const char* transport_step_failure() { return g_step_fail; }

void march(Cycle& c, C q_to, const Tolerances& tol) {
    int guard = 0;
    while (std::abs(c.q - q_to) > 0.0) {
        if (++guard > 100000) throw std::runtime_error("march: step count exceeded");
        C dq = q_to - c.q;
        double sep = c.min_root_separation();
        // near a root collision, root speed scales like 1/separation
        double cap = std::min(0.35 * sep, 0.4 * sep * sep);
        bool full = std::abs(dq) <= cap;
        C step = full ? dq : dq * (cap / std::abs(dq));
        bool ok = false;
        for (int h = 0; h < 48; ++h) {
            Cycle trial = c;
            C target = full ? q_to : c.q + step;
            if (transport_step(trial, target, tol)) {
                c = std::move(trial);
                ok = true;
                break;
            }
            step *= 0.5;
            full = false;
            if (std::abs(step) < 1e-13 * (1.0 + std::abs(c.q)))
                throw std::runtime_error("march: step underflow (too close to a critical value)");
        }
        if (!ok) throw std::runtime_error("march: could not advance");
    }
}

void march(Frame& f, C q_to, const Tolerances& tol) {
    march(f.a, q_to, tol);
    march(f.b, q_to, tol);
}

void march_polyline(Frame& f, const std::vector<C>& waypoints, const Tolerances& tol) {
    for (const C& w : waypoints) {
        if (std::abs(w - f.q()) < 1e-15) continue;
        march(f, w, tol);
    }
}

std::vector<C> canonical_route(C q) {
    std::vector<C> route{C(-2.0, 0.0)};
    auto push = [&](C w) {
        if (std::abs(w - route.back()) > 1e-12) route.push_back(w);
    };
    double x = q.real(), y = q.imag();
    if (std::abs(y) < 1e-14 && x > -4.0 && x < 0.0) {
        push(q);
        return route;
    }
    double h = std::clamp(std::abs(y), 0.4, 1.5);
    double sgn = (y < -1e-14) ? -1.0 : 1.0;
    push(C(-2.0, sgn * h));
    push(C(x, sgn * h));
    push(q);
    return route;
}

Frame frame_at(C q, const Tolerances& tol) {
    Frame f = base_frame(-2.0, tol);
    march_polyline(f, canonical_route(q), tol);
    return f;
}

// ---------------------------------------------------------------------------
// Period continuation
// ---------------------------------------------------------------------------

namespace {

// Frames along one straight leg, checkpointed by parameter in [0,1].
class LegMarcher {
  public:
    LegMarcher(C A, C B, Tolerances tol) : A_(A), B_(B), tol_(tol) {}
    void put(double t, Frame f) { cps_.emplace(t, std::move(f)); }
    C at_param(double t) const { return A_ + t * (B_ - A_); }

    const Frame& at(double t) {
        auto it = cps_.find(t);
        if (it != cps_.end()) return it->second;
        auto up = cps_.lower_bound(t);
        double best = -1;
        if (up != cps_.end()) best = up->first;
        if (up != cps_.begin()) {
            auto dn = std::prev(up);
            if (best < 0 || t - dn->first < best - t) best = dn->first;
        }
        if (best < 0) throw std::logic_error("LegMarcher: no checkpoint");
        Frame f = cps_.at(best);
        march(f, at_param(t), tol_);
        auto [ins, ok] = cps_.emplace(t, std::move(f));
        (void)ok;
        return ins->second;
    }

  private:
    C A_, B_;
    Tolerances tol_;
    std::map<double, Frame> cps_;
};

struct ComboIntegrand {
    LegMarcher* leg;
    int ma, mb;
    C dq;  // leg direction B - A
    Tolerances tol;

    C operator()(double t) const {
        const Frame& f = leg->at(t);
        C d{0.0, 0.0};
        if (ma != 0) d += static_cast<double>(ma) * cycle_period_derivative(f.a, tol).value;
        if (mb != 0) d += static_cast<double>(mb) * cycle_period_derivative(f.b, tol).value;
        return d * dq;
    }
};

bool is_critical(C q) {
    for (double c : {-4.0, 0.0, 4.0})
        if (std::abs(q - C(c, 0.0)) < 1e-12) return true;
    return false;
}

// Integrate f over [t0, t1] of a leg; when the leg starts at a critical value
// the integrand can carry a log singularity at t = 0, handled by tanh-sinh.
AdaptResult integrate_leg(const ComboIntegrand& f, double t0, double t1, bool singular_at_zero,
                          double tol) {
    if (t1 <= t0) return {};
    if (singular_at_zero && t0 < 1e-12) {
        double span = t1 - t0;
        return tanh_sinh([&](double s) { return f(t0 + span * s) * span; }, tol);
    }
    return adapt(f, t0, t1, tol);
}

}  // namespace

PeriodRecord continue_period(const std::vector<C>& q_path, int m_a, int m_b,
                             const Tolerances& tol) {
    if (q_path.size() < 2) throw std::invalid_argument("continue_period: need a path");
    PeriodRecord rec;
    rec.q_path = q_path;
    rec.cycle = std::to_string(m_a) + "a+" + std::to_string(m_b) + "b";
    rec.converged = true;

    C acc{0.0, 0.0};
    double err = 0.0;
    std::optional<Frame> carried;
    for (std::size_t leg = 0; leg + 1 < q_path.size(); ++leg) {
        C A = q_path[leg], B = q_path[leg + 1];
        LegMarcher lm(A, B, tol);
        bool singular_start = is_critical(A);
        if (carried) {
            lm.put(0.0, *carried);
        } else if (!singular_start) {
            lm.put(0.0, frame_at(A, tol));
        } else {
            lm.put(1.0, frame_at(B, tol));  // one-sided limit at the start
        }
        ComboIntegrand f{&lm, m_a, m_b, B - A, tol};
        AdaptResult r = integrate_leg(f, 0.0, 1.0, singular_start, tol.path_tol);
        acc += r.value;
        err += r.err;
        rec.converged = rec.converged && r.converged;
        carried = lm.at(1.0);
    }
    rec.value = -acc;  // thimble convention: V = -int D dq
    rec.err = err;
    return rec;
}

std::vector<PeriodRecord> sweep_periods(const std::vector<C>& q_path,
                                        const std::vector<double>& params, int m_a, int m_b,
                                        const Tolerances& tol) {
    // global parameter: arc length fraction over the polyline
    std::vector<double> leg_len;
    double total = 0;
    for (std::size_t i = 0; i + 1 < q_path.size(); ++i) {
        leg_len.push_back(std::abs(q_path[i + 1] - q_path[i]));
        total += leg_len.back();
    }
    struct Loc {
        std::size_t leg;
        double t;
    };
    auto locate = [&](double s) -> Loc {
        double want = s * total;
        for (std::size_t i = 0; i < leg_len.size(); ++i) {
            if (want <= leg_len[i] || i + 1 == leg_len.size())
                return {i, std::clamp(want / leg_len[i], 0.0, 1.0)};
            want -= leg_len[i];
        }
        return {leg_len.size() - 1, 1.0};
    };

    std::vector<PeriodRecord> out;
    C acc{0.0, 0.0};
    double err_acc = 0.0;
    bool conv = true;
    double prev_s = 0.0;
    std::optional<Frame> carried;
    std::optional<std::size_t> carried_leg;
    std::map<std::size_t, std::shared_ptr<LegMarcher>> marchers;

    auto marcher_for = [&](std::size_t leg) {
        auto it = marchers.find(leg);
        if (it != marchers.end()) return it->second;
        auto lm = std::make_shared<LegMarcher>(q_path[leg], q_path[leg + 1], tol);
        C A = q_path[leg];
        if (carried && carried_leg && *carried_leg == leg) {
            lm->put(0.0, *carried);
        } else if (!is_critical(A)) {
            lm->put(0.0, frame_at(A, tol));
        } else {
            lm->put(1.0, frame_at(q_path[leg + 1], tol));
        }
        marchers.emplace(leg, lm);
        return lm;
    };

    for (double s : params) {
        if (s < prev_s) throw std::invalid_argument("sweep_periods: params must be sorted");
        Loc from = locate(prev_s), to = locate(s);
        for (std::size_t leg = from.leg; leg <= to.leg; ++leg) {
            double t0 = (leg == from.leg) ? from.t : 0.0;
            double t1 = (leg == to.leg) ? to.t : 1.0;
            if (t1 <= t0) continue;
            auto lm = marcher_for(leg);
            ComboIntegrand f{lm.get(), m_a, m_b, q_path[leg + 1] - q_path[leg], tol};
            AdaptResult r = integrate_leg(f, t0, t1, is_critical(q_path[leg]), tol.path_tol);
            acc += r.value;
            err_acc += r.err;
            conv = conv && r.converged;
            if (t1 >= 1.0 - 1e-15) {
                carried = lm->at(1.0);
                carried_leg = leg + 1;
            }
        }
        PeriodRecord rec;
        rec.cycle = std::to_string(m_a) + "a+" + std::to_string(m_b) + "b";
        Loc here = locate(s);
        rec.q_path = {q_path.front(),
                      q_path[here.leg] + here.t * (q_path[here.leg + 1] - q_path[here.leg])};
        rec.value = -acc;
        rec.err = err_acc;
        rec.converged = conv;
        out.push_back(std::move(rec));
        prev_s = s;
    }
    return out;
}

std::vector<C> reference_path(C q) {
    // path from the reference point O = 0 through the closed upper half plane
    std::vector<C> path{C(0.0, 0.0)};
    auto push = [&](C w) {
        if (std::abs(w - path.back()) > 1e-12) path.push_back(w);
    };
    if (std::abs(q.imag()) < 1e-14 && q.real() > -4.0 && q.real() < 0.0) {
        push(q);
        return path;
    }
    double h = std::clamp(q.imag(), 0.5, 1.5);
    push(C(0.0, h));
    push(C(q.real(), h));
    push(q);
    return path;
}

AffineSample affine_coordinates(C q, const Tolerances& tol) {
    // x = -Im V_{a-b}, y = -Im V_{a+b}, reference point at the origin,
    // transport through the closed upper half plane.
    std::vector<C> path = reference_path(q);
    PeriodRecord vx = continue_period(path, 1, -1, tol);
    PeriodRecord vy = continue_period(path, 1, 1, tol);
    AffineSample s;
    s.q = q;
    s.x = -vx.value.imag();
    s.y = -vy.value.imag();
    s.converged = vx.converged && vy.converged;
    return s;
}

// ---------------------------------------------------------------------------
// Monodromy
// ---------------------------------------------------------------------------

namespace {

bool solve_basis(C Da, C Db, C target, double& alpha, double& beta, double& residual) {
    double det = Da.real() * Db.imag() - Da.imag() * Db.real();
    double scale = std::max(std::abs(Da), std::abs(Db));
    if (std::abs(det) < 1e-12 * scale * scale) return false;
    alpha = (target.real() * Db.imag() - target.imag() * Db.real()) / det;
    beta = (Da.real() * target.imag() - Da.imag() * target.real()) / det;
    C recon = alpha * Da + beta * Db;
    residual = std::abs(recon - target) / scale;
    return true;
}

}  // namespace

MonodromyResult monodromy_polyline(const std::vector<C>& loop, const Tolerances& tol) {
    if (loop.size() < 3 || std::abs(loop.front() - loop.back()) > 1e-12)
        throw std::invalid_argument("monodromy_polyline: need a closed loop");
    Frame f0 = frame_at(loop.front(), tol);
    Frame f = f0;
    for (std::size_t i = 1; i < loop.size(); ++i) march(f, loop[i], tol);

    C Da = cycle_period_derivative(f0.a, tol).value;
    C Db = cycle_period_derivative(f0.b, tol).value;
    MonodromyResult out;
    double res_max = 0;
    std::array<std::array<double, 2>, 2> m{};
    const Cycle* transported[2] = {&f.a, &f.b};
    for (int col = 0; col < 2; ++col) {
        C target = cycle_period_derivative(*transported[col], tol).value;
        double alpha, beta, res;
        if (!solve_basis(Da, Db, target, alpha, beta, res)) return out;
        m[0][col] = alpha;
        m[1][col] = beta;
        res_max = std::max(res_max, res);
        res_max = std::max({res_max, std::abs(alpha - std::round(alpha)),
                            std::abs(beta - std::round(beta))});
    }
    out.matrix = Mat2::of(Int(std::llround(m[0][0])), Int(std::llround(m[0][1])),
                          Int(std::llround(m[1][0])), Int(std::llround(m[1][1])));
    out.residual = res_max;
    Int d = out.matrix.det();
    out.ok = res_max < 1e-6 && (d == 1 || d == -1);
    return out;
}

MonodromyResult monodromy_circle(C center, double radius, const Tolerances& tol) {
    std::vector<C> loop;
    int n = 24;
    for (int k = 0; k <= n; ++k)
        loop.push_back(center + std::polar(radius, 2.0 * kPi * k / n));
    loop.back() = loop.front();
    return monodromy_polyline(loop, tol);
}

// ---------------------------------------------------------------------------
// Intersection numbers
// ---------------------------------------------------------------------------

namespace {

// Orientation convention of the fibre fixed so that <a,b> = -2 on the
// canonical frame; see the matching unit test.
constexpr double kPairingOrientation = 1.0;

std::optional<C> segment_intersection(C a0, C a1, C b0, C b1) {
    C d1 = a1 - a0, d2 = b1 - b0;
    double den = d1.real() * d2.imag() - d1.imag() * d2.real();
    if (std::abs(den) < 1e-15 * std::abs(d1) * std::abs(d2)) return std::nullopt;
    C w = b0 - a0;
    double t = (w.real() * d2.imag() - w.imag() * d2.real()) / den;
    double u = (w.real() * d1.imag() - w.imag() * d1.real()) / den;
    double eps = 1e-12;
    if (t <= eps || t >= 1 - eps || u <= eps || u >= 1 - eps) return std::nullopt;
    return a0 + t * d1;
}

}  // namespace

int intersection_number(const Cycle& c1, const Cycle& c2) {
    if (std::abs(c1.q - c2.q) > 1e-9)
        throw std::invalid_argument("intersection_number: cycles over different q");
    SqrtField F1 = SqrtField::build(c1);
    SqrtField F2 = SqrtField::build(c2);
    double total = 0.0;

    double sep = std::min(c1.min_root_separation(), c2.min_root_separation());
    double near_root = 0.2 * sep;

    // Oriented tangent direction, in the local double-cover chart u^2 = z - r,
    // of the cycle's trajectory through a ramification endpoint.  The chart
    // fixes one branch of sqrt(Q), Q = P/(z - r), anchored at the root, so the
    // directions of different cycles are comparable.
    auto end_branch = [&](const Cycle& c, const SqrtField& F, bool at_head) -> C {
        int n = static_cast<int>(c.pts.size());
        int root = at_head ? c.head : c.tail;
        int vertex = at_head ? 1 : n - 2;
        C z = c.pts[vertex];
        C r = c.roots[root];
        C z_near = r + 0.1 * (z - r);
        int seg = at_head ? 0 : n - 2;
        C v = F.eval(seg, z_near);  // cycle's continued sqrt(P)
        C q_at_r{1.0, 0.0}, q_rel{1.0, 0.0};
        for (int j = 0; j < 4; ++j) {
            if (j == root) continue;
            q_at_r *= (r - c.roots[j]);
            q_rel *= (z_near - c.roots[j]) / (r - c.roots[j]);
        }
        C q_chart = std::sqrt(q_at_r) * std::sqrt(q_rel);  // branch anchored at r
        C zeta = v / q_chart;  // the cycle's branch of sqrt(z_near - r)
        C w = at_head ? zeta : -zeta;
        w *= static_cast<double>(c.sign);
        return w / std::abs(w);
    };

    // shared ramification endpoints
    for (int e1 = 0; e1 < 2; ++e1) {
        int r1 = e1 == 0 ? c1.head : c1.tail;
        for (int e2 = 0; e2 < 2; ++e2) {
            int r2 = e2 == 0 ? c2.head : c2.tail;
            if (r1 != r2) continue;
            C w1 = end_branch(c1, F1, e1 == 0);
            C w2 = end_branch(c2, F2, e2 == 0);
            double s = (std::conj(w1) * w2).imag();
            total += (s > 0) ? 1.0 : -1.0;
        }
    }

    // interior transverse crossings of the projections
    int n1 = static_cast<int>(c1.pts.size()) - 1;
    int n2 = static_cast<int>(c2.pts.size()) - 1;
    for (int i = 0; i < n1; ++i) {
        for (int j = 0; j < n2; ++j) {
            auto p = segment_intersection(c1.pts[i], c1.pts[i + 1], c2.pts[j], c2.pts[j + 1]);
            if (!p) continue;
            bool skip = false;
            for (int m = 0; m < 4; ++m)
                if (std::abs(*p - c1.roots[m]) < near_root) skip = true;
            if (skip) continue;
            C v1 = F1.eval(i, *p), v2 = F2.eval(j, *p);
            double eps = (std::abs(v1 - v2) <= std::abs(v1 + v2)) ? 1.0 : -1.0;
            C d1 = c1.pts[i + 1] - c1.pts[i], d2 = c2.pts[j + 1] - c2.pts[j];
            double s = (std::conj(d1) * d2).imag() > 0 ? 1.0 : -1.0;
            total += 2.0 * eps * s * c1.sign * c2.sign;
        }
    }
    return static_cast<int>(std::lround(kPairingOrientation * total));
}

// ---------------------------------------------------------------------------
// Local degeneration model xy = t
// ---------------------------------------------------------------------------

double degeneration_area(double t, double eps, const std::function<C(C, C)>& f) {
    if (!(t > 0) || !(eps > 0)) throw std::invalid_argument("degeneration_area: need t, eps > 0");
    double disc = eps * eps - 4.0 * t * t;
    if (disc <= 0) return 0.0;
    double r_hi = std::sqrt((eps + std::sqrt(disc)) * 0.5);
    double r_lo = std::sqrt((eps - std::sqrt(disc)) * 0.5);
    if (!f) return 2.0 * kPi * std::log(r_hi / r_lo);
    const int ntheta = 64;
    auto radial = [&](double r) {
        double s = 0;
        for (int k = 0; k < ntheta; ++k) {
            double th = 2.0 * kPi * k / ntheta;
            C x = std::polar(r, th);
            C y = t / x;
            s += std::norm(f(x, y));
        }
        return C(s * (2.0 * kPi / ntheta) / r, 0.0);
    };
    // integrate on a log grid for the 1/r weight
    AdaptResult res = adapt(
        [&](double u) {
            double r = r_lo * std::exp(u * std::log(r_hi / r_lo));
            return radial(r) * r * std::log(r_hi / r_lo);
        },
        0.0, 1.0, 1e-9);
    return res.value.real();
}

C vanishing_cycle_period(double t, const std::function<C(C, C)>& f) {
    if (!(t > 0)) throw std::invalid_argument("vanishing_cycle_period: need t > 0");
    double x0 = std::sqrt(t);
    const int n = 256;
    C acc{0.0, 0.0};
    for (int k = 0; k < n; ++k) {
        double th = 2.0 * kPi * k / n;
        acc += f(std::polar(x0, th), std::polar(x0, -th));
    }
    return acc * (2.0 * kPi / n);
}

// ---------------------------------------------------------------------------
// Large-|q| decomposition on the imaginary axis
// ---------------------------------------------------------------------------

LargeQDecomposition large_q_a_cycle(double x) {
    if (!(x > 0)) throw std::invalid_argument("large_q_a_cycle: need x > 0");
    C q{0.0, x};
    Roots R = ramification_roots(q);
    // factor-0 roots: p1 with |p1| > 1, p2 = 1/p1
    int i1 = std::abs(R.r[0]) > std::abs(R.r[1]) ? 0 : 1;
    int i2 = 1 - i1;
    C p1 = R.r[i1], p2 = R.r[i2];
    double Rr = std::abs(p1), er = std::abs(p2);
    double theta0 = std::arg(p1);

    LargeQDecomposition out;
    Cycle& c = out.cycle;
    c.q = q;
    c.roots = R.r;
    c.head = i2;
    c.tail = i1;
    c.pts.push_back(p2);
    // arc of radius eps from angle -theta0 to 0
    int m1 = std::max(3, static_cast<int>(std::ceil(theta0 / 0.2)));
    for (int k = 1; k <= m1; ++k)
        c.pts.push_back(std::polar(er, -theta0 + theta0 * k / m1));
    out.breaks.push_back(static_cast<int>(c.pts.size()) - 1);
    // real segment [eps, R] with a midpoint
    c.pts.push_back(C(std::sqrt(er * Rr), 0.0));
    c.pts.push_back(C(Rr, 0.0));
    out.breaks.push_back(static_cast<int>(c.pts.size()) - 1);
    // arc of radius R from angle 0 to theta0
    for (int k = 1; k < m1; ++k) c.pts.push_back(std::polar(Rr, theta0 * k / m1));
    c.pts.push_back(p1);
    // seed on the real axis
    c.seed_index = out.breaks[0] + 1;
    c.seed_value = std::sqrt(eval_P(c.roots, c.pts[c.seed_index]));
    return out;
}

}  // namespace mf::elliptic
