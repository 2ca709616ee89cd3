#include "szegolab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace szegolab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 15-point Kronrod / 7-point Gauss pair on [-1,1] (QUADPACK dqk15 constants).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PathParam {
    // z(t), z'(t) on t in [0,1]
    std::function<complex(double)> point;
    std::function<complex(double)> dpoint;
};

PathParam parametrize(const ContourSegment& seg) {
    using Kind = ContourSegment::Kind;
    if (seg.kind == Kind::finite) {
        complex a = seg.a, d = seg.b - seg.a;
        return {[a, d](double t) { return a + t * d; },
                [d](double) { return d; }};
    }
    if (seg.kind == Kind::arc) {
        complex c = seg.center;
        double r = seg.radius, th0 = seg.theta0, dth = seg.theta1 - seg.theta0;
        return {[c, r, th0, dth](double t) { return c + std::polar(r, th0 + t * dth); },
                [r, th0, dth](double t) {
                    return complex(0.0, 1.0) * std::polar(r, th0 + t * dth) * dth;
                }};
    }
    throw std::invalid_argument("parametrize: ray has no finite parametrization");
}

struct GKOut {
    complex value;
    double err;
};

// One G7K15 panel of g(t) on [lo,hi]; g must be finite at interior nodes.
GKOut gk15(const std::function<complex(double)>& g, double lo, double hi, long& evals) {
    double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    complex fc = g(c);
    ++evals;
    complex k = fc * kWgk[7];
    complex q = fc * kWg[3];
    for (int i = 0; i < 7; ++i) {
        complex f1 = g(c - h * kXgk[i]);
        complex f2 = g(c + h * kXgk[i]);
        evals += 2;
        k += (f1 + f2) * kWgk[i];
        if (i % 2 == 1) q += (f1 + f2) * kWg[i / 2];
    }
    k *= h;
    q *= h;
    double diff = std::abs(k - q);
    // QUADPACK-style error sharpening
    double err = diff;
    if (diff > 0.0) err = diff * std::min(1.0, std::pow(200.0 * diff / std::max(std::abs(k), 1e-300), 1.5));
    return {k, err};
}

void check_finite(complex v, double t, const char* where) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        std::ostringstream os;
        os << where << ": non-finite integrand value at parameter t=" << t;
        throw std::runtime_error(os.str());
    }
}

QuadResult adaptive_gk(const std::function<complex(double)>& g, double lo, double hi,
                       const QuadSpec& spec) {
    struct Panel {
        double lo, hi, err;
        complex val;
        bool operator<(const Panel& o) const { return err < o.err; }
    };
    long evals = 0;
    auto gchk = [&](double t) {
        complex v = g(t);
        check_finite(v, t, "integrate_segment");
        return v;
    };
    GKOut first = gk15(gchk, lo, hi, evals);
    std::priority_queue<Panel> heap;
    heap.push({lo, hi, first.err, first.value});
    complex total = first.value;
    double toterr = first.err;
    while (toterr > spec.tol_for(std::abs(total)) && evals + 30 <= spec.max_evals) {
        Panel p = heap.top();
        if (p.err <= 1e-4 * spec.tol_for(std::abs(total)) / std::max<size_t>(heap.size(), 1)) break;
        heap.pop();
        double mid = 0.5 * (p.lo + p.hi);
        if (mid <= p.lo || mid >= p.hi) {  // interval exhausted by rounding
            heap.push(p);
            break;
        }
        GKOut l = gk15(gchk, p.lo, mid, evals);
        GKOut r = gk15(gchk, mid, p.hi, evals);
        total += l.value + r.value - p.val;
        toterr += l.err + r.err - p.err;
        heap.push({p.lo, mid, l.err, l.value});
        heap.push({mid, p.hi, r.err, r.value});
    }
    // recompute error from the heap to undo cancellation in the running sum
    double err = 0.0;
    while (!heap.empty()) {
        err += heap.top().err;
        heap.pop();
    }
    QuadResult res;
    res.value = total;
    res.err_est = err;
    res.evals = evals;
    res.converged = err <= spec.tol_for(std::abs(total));
    return res;
}

// tanh-sinh rule for g(t) on [0,1]; integrable endpoint singularities allowed.
// dist_scale: callers get the node as (t, distance-to-nearest-endpoint) so the
// endpoint offset is computed in full precision.
QuadResult tanh_sinh_01(const std::function<complex(double, double)>& g, const QuadSpec& spec) {
    long evals = 0;
    auto node_sum = [&](double h, int parity) {
        // parity 0: all k; 1: odd k only (refinement step)
        ComplexCompensatedSum s;
        // center node at k=0 only for the initial full pass
        if (parity == 0) {
            s.add(g(0.5, 0.5) * (0.25 * kPi));
            ++evals;
        }
        for (int side = -1; side <= 1; side += 2) {
            int k = (parity == 0) ? 1 : 1;
            for (; ; k += (parity == 0 ? 1 : 2)) {
                double t = k * h * side;
                double u = 0.5 * kPi * std::sinh(t);
                if (std::abs(u) > 690.0) break;
                double ch = std::cosh(u);
                double w = 0.25 * kPi * std::cosh(t) / (ch * ch);
                // distance of node to the near endpoint: d = 1/(2(1+e^{2|u|}))*2 ...
                double eu = std::exp(-2.0 * std::abs(u));
                double d = 0.5 * eu / (1.0 + eu) * 2.0;  // = (1 - |tanh(u)|)/2
                double x = (side * u >= 0.0) ? 1.0 - d : d;  // position in (0,1)
                // pass (x, distance to nearest endpoint)
                complex fv = g(x, d);
                ++evals;
                if (!std::isfinite(fv.real()) || !std::isfinite(fv.imag()))
                    throw std::runtime_error("integrate_segment(tanh_sinh): non-finite integrand value");
                s.add(fv * w);
                if (std::abs(fv) * w < spec.abs_tol * 1e-3 && k * h > 3.0) break;
                if (evals > spec.max_evals) break;
            }
        }
        return s.value();
    };
    double h = 0.5;
    complex prev = node_sum(h, 0) * h;
    complex cur = prev;
    double err = std::abs(prev);
    for (int level = 1; level < 12; ++level) {
        h *= 0.5;
        complex odd = node_sum(h, 1);
        cur = 0.5 * prev + h * odd;
        err = std::abs(cur - prev);
        prev = cur;
        if (err <= 0.5 * spec.tol_for(std::abs(cur)) && level >= 3) break;
        if (evals > spec.max_evals) break;
    }
    QuadResult res;
    res.value = cur;
    res.err_est = err;
    res.evals = evals;
    res.converged = err <= spec.tol_for(std::abs(cur));
    return res;
}

}  // namespace

ContourSegment ContourSegment::ray(complex start, complex dir) {
    double n = std::abs(dir);
    if (!(n > 0.0)) throw std::invalid_argument("ContourSegment::ray: zero direction");
    if (std::abs(n - 1.0) > 1e-12) dir /= n;
    ContourSegment s;
    s.kind = Kind::ray;
    s.start = start;
    s.direction = dir;
    return s;
}

ContourSegment ContourSegment::arc(complex center, double r, double th0, double th1) {
    if (!(r > 0.0)) throw std::invalid_argument("ContourSegment::arc: radius must be > 0");
    ContourSegment s;
    s.kind = Kind::arc;
    s.center = center;
    s.radius = r;
    s.theta0 = th0;
    s.theta1 = th1;
    return s;
}

QuadResult integrate_segment(const Integrand& f, const ContourSegment& seg,
                             const QuadSpec& spec, SegmentRule rule) {
    spec.validate();
    if (seg.kind == ContourSegment::Kind::ray)
        throw std::invalid_argument("integrate_segment: use integrate_decaying_halfline for rays");
    PathParam pp = parametrize(seg);
    if (rule == SegmentRule::gauss_kronrod) {
        auto g = [&](double t) { return f(pp.point(t)) * pp.dpoint(t); };
        return adaptive_gk(g, 0.0, 1.0, spec);
    }
    // tanh-sinh: build the node from the endpoint distance when near an end
    if (seg.kind == ContourSegment::Kind::finite) {
        complex a = seg.a, d = seg.b - seg.a;
        auto g = [&](double x, double dist) {
            complex z = (x < 0.5) ? a + dist * d : seg.b - dist * d;
            return f(z) * d;
        };
        return tanh_sinh_01(g, spec);
    }
    auto g = [&](double x, double) { return f(pp.point(x)) * pp.dpoint(x); };
    return tanh_sinh_01(g, spec);
}

QuadResult integrate_decaying_halfline(const Integrand& f, const ContourSegment& ray,
                                       const QuadSpec& spec) {
    spec.validate();
    if (ray.kind != ContourSegment::Kind::ray)
        throw std::invalid_argument("integrate_decaying_halfline: segment is not a ray");
    const complex z0 = ray.start, dir = ray.direction;
    auto fs = [&](double s) { return f(z0 + s * dir) * dir; };

    // decay scan over doubled arclength
    {
        double mx = 0.0, prev1 = -1.0, prev2 = -1.0;
        int grow = 0;
        double s = 1.0;
        for (int n = 0; n < 44; ++n, s *= 2.0) {
            double a = std::abs(fs(s));
            mx = std::max(mx, a);
            if (prev1 >= 0.0 && a > prev1 && prev1 > prev2 && a > 1e-6 * mx + spec.abs_tol)
                ++grow;
            else
                grow = 0;
            if (grow >= 5)
                throw DivergenceError("integrate_decaying_halfline: integrand not decaying along the ray");
            prev2 = prev1;
            prev1 = a;
            if (a == 0.0 && n > 8) break;
        }
        double tail1 = std::abs(fs(s)), tail2 = std::abs(fs(2.0 * s));
        if (tail2 > std::max(tail1, 1e-8 * mx) && tail1 > 1e-8 * mx)
            throw DivergenceError("integrate_decaying_halfline: tail not decaying");
    }

    // exp-sinh: s = exp((pi/2) sinh t), trapezoid in t with level halving
    long evals = 0;
    auto level_sum = [&](double h, int parity) {
        ComplexCompensatedSum acc;
        if (parity == 0) {
            acc.add(fs(1.0) * (0.5 * kPi));  // t = 0 node: s=1, w = (pi/2) cosh(0) * 1
            ++evals;
        }
        for (int side = -1; side <= 1; side += 2) {
            int consec = 0;
            for (int k = 1;; k += (parity == 0 ? 1 : 2)) {
                double t = side * k * h;
                double ls = 0.5 * kPi * std::sinh(t);
                if (ls > 690.0 || ls < -690.0) break;
                double s = std::exp(ls);
                double w = 0.5 * kPi * std::cosh(t) * s;
                complex v = fs(s);
                ++evals;
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                    std::ostringstream os;
                    os << "integrate_decaying_halfline: non-finite integrand at arclength s=" << s;
                    throw std::runtime_error(os.str());
                }
                double term = std::abs(v) * w;
                acc.add(v * w);
                if (term < 0.25 * spec.abs_tol) {
                    if (++consec >= 3) break;
                } else {
                    consec = 0;
                }
                if (evals > spec.max_evals) break;
            }
        }
        return acc.value();
    };

    double h = 0.5;
    complex prev = level_sum(h, 0) * h;
    complex cur = prev;
    double err = std::abs(prev);
    for (int level = 1; level < 11; ++level) {
        h *= 0.5;
        cur = 0.5 * prev + h * level_sum(h, 1);
        err = std::abs(cur - prev);
        prev = cur;
        if (err <= 0.5 * spec.tol_for(std::abs(cur)) && level >= 3) break;
        if (evals > spec.max_evals) break;
    }
    QuadResult res;
    res.value = cur;
    res.err_est = err + 0.5 * spec.abs_tol;  // includes truncated-tail allowance
    res.evals = evals;
    res.converged = err <= spec.tol_for(std::abs(cur));
    return res;
}

QuadResult integrate_oscillatory_halfline(const Integrand& envelope, double phase_freq,
                                          const ContourSegment& ray, const QuadSpec& spec) {
    spec.validate();
    if (ray.kind != ContourSegment::Kind::ray)
        throw std::invalid_argument("integrate_oscillatory_halfline: segment is not a ray");
    if (phase_freq == 0.0) return integrate_decaying_halfline(envelope, ray, spec);

    const complex z0 = ray.start, dir = ray.direction;
    const double w = std::abs(phase_freq), sgn = phase_freq > 0 ? 1.0 : -1.0;
    auto g = [&](double s) {
        return envelope(z0 + s * dir) * std::polar(1.0, sgn * w * s) * dir;
    };
    const double L = kPi / w;  // half period

    long evals = 0;
    QuadSpec chunk_spec = spec;
    chunk_spec.abs_tol = std::max(spec.abs_tol * 0.05, 1e-300);
    chunk_spec.max_evals = std::max<long>(spec.max_evals / 64, 3000);

    auto chunk = [&](double lo, double hi, bool singular_lo) {
        if (singular_lo) {
            // first chunk may carry endpoint kinks (fractional powers at 0)
            auto gg = [&](complex zt) {
                double s = zt.real();
                return g(s);
            };
            QuadResult r = integrate_segment(gg, ContourSegment::finite(lo, hi), chunk_spec,
                                             SegmentRule::tanh_sinh);
            evals += r.evals;
            return r.value;
        }
        QuadResult r = adaptive_gk([&](double s) { return g(s); }, lo, hi, chunk_spec);
        evals += r.evals;
        return r.value;
    };

    std::vector<complex> partial;
    partial.reserve(256);
    ComplexCompensatedSum run;
    run.add(chunk(0.0, L, true));
    partial.push_back(run.value());

    const int max_chunks = 4000;
    complex best = partial.back();
    double err = std::abs(best);
    int stable = 0, tiny = 0;
    for (int n = 1; n < max_chunks; ++n) {
        complex in = chunk(n * L, (n + 1) * L, false);
        run.add(in);
        partial.push_back(run.value());
        if (std::abs(in) < 0.25 * spec.abs_tol) {
            if (++tiny >= 3) {  // plain convergence, no acceleration needed
                best = partial.back();
                err = std::abs(in) + 0.5 * spec.abs_tol;
                stable = 2;
                break;
            }
        } else {
            tiny = 0;
        }
        if (partial.size() >= 8) {
            size_t tail_len = std::min<size_t>(partial.size(), 24);
            std::vector<complex> tail(partial.end() - tail_len, partial.end());
            double aerr = 0.0;
            complex acc = detail::accelerate_alternating(tail, aerr);
            if (aerr <= spec.tol_for(std::abs(acc))) {
                if (++stable >= 2) {
                    best = acc;
                    err = aerr;
                    break;
                }
            } else {
                stable = 0;
            }
            best = acc;
            err = aerr;
        }
        if (evals > spec.max_evals)
            throw NonConvergenceError(
                "integrate_oscillatory_halfline: chunk series not Cauchy within max_evals");
    }
    if (stable < 2)
        throw NonConvergenceError(
            "integrate_oscillatory_halfline: chunk series not Cauchy within max_evals");

    QuadResult res;
    res.value = best;
    res.err_est = err;
    res.evals = evals;
    res.converged = true;
    return res;
}

namespace detail {

complex accelerate_alternating(const std::vector<complex>& partial, double& err) {
    std::vector<complex> row = partial;
    complex prev_apex = row.back();
    err = std::numeric_limits<double>::infinity();
    complex best = prev_apex;
    while (row.size() > 1) {
        for (size_t i = 0; i + 1 < row.size(); ++i) row[i] = 0.5 * (row[i] + row[i + 1]);
        row.pop_back();
        double d = std::abs(row.back() - prev_apex);
        if (d < err) {
            err = d;
            best = row.back();
        }
        prev_apex = row.back();
    }
    return best;
}

static const double kLanczosG = 7.0;
static const double kLanczosC[9] = {
    0.99999999999980993, 676.5203681218851,     -1259.1392167224028,
    771.32342877765313,  -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

complex log_gamma_complex(complex z) {
    // Re z > 0 assumed by callers; shift once if slightly left of 1/2.
    if (z.real() < 0.5) {
        // ln Gamma(z) = ln pi - ln sin(pi z) - ln Gamma(1-z)
        complex s = std::sin(kPi * z);
        return std::log(kPi) - std::log(s) - log_gamma_complex(1.0 - z);
    }
    complex zz = z - 1.0;
    complex x = kLanczosC[0];
    for (int i = 1; i < 9; ++i) x += kLanczosC[i] / (zz + static_cast<double>(i));
    complex t = zz + kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * kPi) + (zz + 0.5) * std::log(t) - t + std::log(x);
}

}  // namespace detail

double log_gamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be > 0");
    return detail::log_gamma_complex(complex(x, 0.0)).real();
}

}  // namespace szegolab
