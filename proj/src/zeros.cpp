#include "szegolab/zeros.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "szegolab/phi.hpp"

namespace szegolab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSeriesMaxA = 2.0;  // below this the alternating series is benign

// exponent of the defining integrand at the saddle: Re G on the deformed
// contour peaks at -c1 sin(theta0) a^gamma
double saddle_exponent(const ModelOrder& o, double a) {
    return -o.c1 * std::sin(o.theta0) * std::pow(a, o.gamma);
}

struct AxisEval {
    double psi;        // scaled
    double dpsi;       // scaled, d/da
    double log_scale;  // common scale
    double im_diag;    // imaginary residue of the contour (should vanish)
};

// phi(ia) and d/da phi(ia) by deforming R onto the steepest-descent polyline
// through the saddles R e^{i theta0}, R e^{i(pi - theta0)}.
AxisEval axis_contour(const ModelOrder& o, double a, const QuadSpec& spec) {
    const int m = o.m;
    const double R = std::pow(a / (2.0 * m), 1.0 / (2.0 * m - 1.0));
    const double S0 = saddle_exponent(o, a);
    const complex wR = std::polar(R, o.theta0);
    auto G = [&](complex w) { return -2.0 * std::pow(w, 2 * m) + 2.0 * complex(0.0, a) * w; };
    auto f = [&](complex w) { return std::exp(G(w) - S0); };
    auto fd = [&](complex w) { return 2.0 * complex(0.0, 1.0) * w * std::exp(G(w) - S0); };

    auto ray = ContourSegment::ray(wR, {1.0, 0.0});
    QuadResult r3 = integrate_decaying_halfline(f, ray, spec);
    QuadResult r3d = integrate_decaying_halfline(fd, ray, spec);

    AxisEval out;
    out.log_scale = S0;
    if (2 * m - 1 == 1) {
        // m = 1: both saddles coincide at iR; no arc
        out.psi = 2.0 * r3.value.real();
        out.dpsi = 2.0 * r3d.value.real();
        out.im_diag = 0.0;
        return out;
    }
    auto arc = ContourSegment::arc({0.0, 0.0}, R, o.theta0, kPi - o.theta0);
    QuadResult r2 = integrate_segment(f, arc, spec);
    QuadResult r2d = integrate_segment(fd, arc, spec);
    // contour orientation traverses the arc from pi - theta0 down to theta0
    out.psi = 2.0 * r3.value.real() - r2.value.real();
    out.dpsi = 2.0 * r3d.value.real() - r2d.value.real();
    out.im_diag = std::abs(r2.value.imag());
    return out;
}

AxisEval axis_series(const ModelOrder& o, double a) {
    complex ia(0.0, a);
    complex v = phi(o, ia, PhiMethod::series).value;
    complex d = phi_derivative(o, ia, 1);
    AxisEval out;
    out.psi = v.real();
    out.dpsi = (complex(0.0, 1.0) * d).real();
    out.log_scale = 0.0;
    out.im_diag = std::max(std::abs(v.imag()), std::abs((complex(0.0, 1.0) * d).imag()));
    return out;
}

AxisEval axis_eval(const ModelOrder& o, double a, const QuadSpec& spec) {
    AxisEval out = (a <= kSeriesMaxA) ? axis_series(o, a) : axis_contour(o, a, spec);
    double scale = std::max(1.0, std::abs(out.psi));
    if (out.im_diag > 1e-10 * scale)
        throw std::runtime_error("psi: imaginary part exceeds 1e-10 of scale (internal consistency)");
    return out;
}

double asymptotic_spacing(const ModelOrder& o, double a) {
    // Delta(c2 a^gamma) = 1 between zeros
    return 1.0 / (o.c2 * o.gamma * std::pow(std::max(a, 0.3), o.gamma - 1.0));
}

}  // namespace

double psi(const ModelOrder& order, double a) {
    if (a < 0.0) throw std::domain_error("psi: a must be >= 0");
    if (a == 0.0) return phi(order, complex(0.0, 0.0)).value.real();
    AxisEval e = axis_eval(order, a, {});
    return e.psi * std::exp(e.log_scale);
}

ScaledReal psi_scaled(const ModelOrder& order, double a) {
    if (a < 0.0) throw std::domain_error("psi: a must be >= 0");
    AxisEval e = axis_eval(order, a, {});
    return {e.psi, e.log_scale};
}

ScaledReal psi_derivative_scaled(const ModelOrder& order, double a) {
    if (a < 0.0) throw std::domain_error("psi: a must be >= 0");
    AxisEval e = axis_eval(order, a, {});
    return {e.dpsi, e.log_scale};
}

const ZeroRecord& ZeroTable::record(int j) const {
    if (j < 1 || j > static_cast<int>(records.size()))
        throw std::out_of_range("ZeroTable: record index out of range");
    return records[static_cast<std::size_t>(j - 1)];
}

ZeroTable locate_zeros(const ModelOrder& order, int j_max, const QuadSpec& spec,
                       LocateReport* report) {
    if (order.m < 2) throw std::domain_error("locate_zeros: no zeros exist for m = 1");
    if (j_max < 1) throw std::domain_error("locate_zeros: j_max must be >= 1");
    spec.validate();
    QuadSpec tight = spec;
    tight.rel_tol = std::min(spec.rel_tol, 1e-11);
    tight.abs_tol = std::min(spec.abs_tol, 1e-14);

    auto eval = [&](double a) { return axis_eval(order, a, tight); };

    struct Bracket {
        double lo, hi;
        double flo, fhi;
    };

    // refine one bracket: bisection, then secant on the scaled value
    auto refine = [&](Bracket b, double* out_a, AxisEval* out_e) {
        for (int it = 0; it < 18; ++it) {
            double mid = 0.5 * (b.lo + b.hi);
            double fm = eval(mid).psi;
            if ((fm < 0.0) == (b.flo < 0.0)) {
                b.lo = mid;
                b.flo = fm;
            } else {
                b.hi = mid;
                b.fhi = fm;
            }
        }
        double x0 = b.lo, x1 = b.hi, f0 = b.flo, f1 = b.fhi;
        for (int it = 0; it < 40; ++it) {
            if (f1 == f0) break;
            double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
            if (!(x2 > b.lo - 1.0 && x2 < b.hi + 1.0)) break;
            x0 = x1;
            f0 = f1;
            x1 = x2;
            f1 = eval(x1).psi;
            if (std::abs(x1 - x0) <= 1e-14 * std::max(1.0, std::abs(x1)) || f1 == 0.0) break;
        }
        *out_a = x1;
        *out_e = eval(x1);
    };

    ZeroTable table{order, spec, {}, {}};
    LocateReport rep;

    std::vector<double> roots;
    std::vector<AxisEval> root_evals;
    double a = 1e-3;
    AxisEval prev = eval(a);
    const double a_overflow = std::pow(680.0 / (order.c1 * std::sin(order.theta0)),
                                       1.0 / order.gamma);
    while (static_cast<int>(roots.size()) < j_max) {
        if (a > a_overflow) {
            rep.complete = false;
            std::ostringstream os;
            os << "locate_zeros: only " << roots.size() << " of " << j_max
               << " zeros found below the overflow-safe bound a = " << a_overflow;
            rep.warning = os.str();
            break;
        }
        double step = std::min(0.25 * asymptotic_spacing(order, a), 0.25);
        double a2 = a + step;
        AxisEval cur = eval(a2);
        if ((cur.psi < 0.0) != (prev.psi < 0.0)) {
            double root;
            AxisEval re_;
            refine({a, a2, prev.psi, cur.psi}, &root, &re_);
            roots.push_back(root);
            root_evals.push_back(re_);
        }
        a = a2;
        prev = cur;
    }

    // counting-law gap check with dense fallback rescan
    for (std::size_t j = 0; j + 1 < roots.size(); ++j) {
        double dX = order.c2 * (std::pow(roots[j + 1], order.gamma) - std::pow(roots[j], order.gamma));
        if (std::abs(dX - 1.0) > 0.3) {
            double lo = roots[j], hi = roots[j + 1];
            double step = std::min(0.05, asymptotic_spacing(order, lo) / 8.0);
            double x = lo + step;
            AxisEval pe = eval(x);
            for (double x2 = x + step; x2 < hi - 0.5 * step; x2 += step) {
                AxisEval ce = eval(x2);
                if ((ce.psi < 0.0) != (pe.psi < 0.0)) {
                    double root;
                    AxisEval re_;
                    refine({x2 - step, x2, pe.psi, ce.psi}, &root, &re_);
                    roots.push_back(root);
                    root_evals.push_back(re_);
                }
                pe = ce;
            }
        }
    }
    // keep sorted, truncate to j_max
    {
        std::vector<std::size_t> idx(roots.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t k) { return roots[i] < roots[k]; });
        std::vector<double> r2;
        std::vector<AxisEval> e2;
        for (std::size_t i : idx) {
            r2.push_back(roots[i]);
            e2.push_back(root_evals[i]);
        }
        roots.swap(r2);
        root_evals.swap(e2);
        if (static_cast<int>(roots.size()) > j_max) {
            roots.resize(j_max);
            root_evals.resize(j_max);
        }
    }

    table.records.reserve(roots.size());
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const double aj = roots[i];
        const AxisEval& e = root_evals[i];
        ZeroRecord rec;
        rec.j = static_cast<int>(i) + 1;
        rec.a = aj;
        // phi'(i a_j) = -i * (d/da) phi(ia)|_{a_j}
        double dpsi = e.dpsi * std::exp(e.log_scale);  // may underflow for huge j
        rec.phi_prime = complex(0.0, -dpsi);
        rec.f = order.c2 * std::pow(aj, order.gamma) - 0.25;
        // simplicity check against the local slope envelope
        double env = 2.0 * order.c0 * std::pow(aj, (1.0 - order.m) / (2.0 * order.m - 1.0)) *
                     kPi * order.c2 * order.gamma * std::pow(aj, order.gamma - 1.0);
        if (std::abs(e.dpsi) < 1e-8 * env) table.multiplicity_flags.push_back(rec.j);
        double log_abs_dpsi = std::log(std::abs(e.dpsi)) + e.log_scale;
        rec.c_log_mag = -log_abs_dpsi - log_gamma(rec.f + 1.0);
        rec.c_phase = (e.dpsi > 0.0) ? kPi * 0.5 : -kPi * 0.5;
        table.records.push_back(rec);
    }
    if (report) *report = rep;
    if (!rep.complete && !report)
        throw NonConvergenceError(rep.warning);
    return table;
}

ZeroLawFit zero_law_fit(const ZeroTable& table) {
    const auto& rec = table.records;
    if (rec.size() < 15) throw std::domain_error("zero_law_fit: need at least 15 records");
    const ModelOrder& o = table.order;
    const std::size_t n = rec.size(), half = n / 2;

    // least-squares j ~ c2_hat * a_j^gamma + b over the upper half
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    for (std::size_t i = half; i < n; ++i) {
        double X = std::pow(rec[i].a, o.gamma), Y = rec[i].j;
        sx += X;
        sy += Y;
        sxx += X * X;
        sxy += X * Y;
        ++cnt;
    }
    ZeroLawFit fit;
    fit.c2_hat = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);

    double off = 0.0;
    for (std::size_t i = half; i < n; ++i)
        off += (o.c2 * std::pow(rec[i].a, o.gamma) - 0.25) - rec[i].j;
    fit.j0_raw = off / cnt;
    fit.j0_hat = static_cast<int>(std::lround(fit.j0_raw));
    fit.anomaly = std::abs(fit.j0_raw - fit.j0_hat) > 0.2;

    fit.residuals.resize(n);
    fit.residuals_empirical.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double X = o.c2 * std::pow(rec[i].a, o.gamma) - 0.25;
        fit.residuals[i] = rec[i].j - (X - fit.j0_hat);
        fit.residuals_empirical[i] = rec[i].j - (X - fit.j0_raw);
    }
    for (std::size_t i = half; i < n; ++i) {
        fit.max_residual_upper = std::max(fit.max_residual_upper, std::abs(fit.residuals[i]));
        fit.max_residual_empirical_upper =
            std::max(fit.max_residual_empirical_upper, std::abs(fit.residuals_empirical[i]));
        fit.max_rj_times_j =
            std::max(fit.max_rj_times_j, std::abs(fit.residuals_empirical[i]) * rec[i].j);
    }
    return fit;
}

ResidueWeight residue_weight(const ModelOrder& order, const ZeroTable& table, int j) {
    const ZeroRecord& rec = table.record(j);
    for (int flagged : table.multiplicity_flags)
        if (flagged == j)
            throw std::domain_error("residue_weight: record is multiplicity-flagged");
    ResidueWeight w;
    double ap = std::abs(rec.phi_prime);
    if (ap > 0.0 && std::isfinite(ap)) {
        w.log_mag = -std::log(ap) - log_gamma(rec.f + 1.0);
        w.phase = -std::arg(rec.phi_prime);
    } else {
        w.log_mag = rec.c_log_mag;
        w.phase = rec.c_phase;
    }
    return w;
}

// ---------------------------------------------------------------------------
// persistence

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void save_zero_table(const std::filesystem::path& path, const ZeroTable& table) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"schema_version\": 1,\n";
    os << "  \"m\": " << table.order.m << ",\n";
    os << "  \"c0\": " << fmt17(table.order.c0) << ",\n";
    os << "  \"c1\": " << fmt17(table.order.c1) << ",\n";
    os << "  \"c2\": " << fmt17(table.order.c2) << ",\n";
    os << "  \"quad_tols\": {\"rel_tol\": " << fmt17(table.quad_tols.rel_tol)
       << ", \"abs_tol\": " << fmt17(table.quad_tols.abs_tol)
       << ", \"max_evals\": " << table.quad_tols.max_evals << "},\n";
    os << "  \"records\": [\n";
    for (std::size_t i = 0; i < table.records.size(); ++i) {
        const ZeroRecord& r = table.records[i];
        os << "    {\"j\": " << r.j << ", \"a\": " << fmt17(r.a)
           << ", \"phi_prime_re\": " << fmt17(r.phi_prime.real())
           << ", \"phi_prime_im\": " << fmt17(r.phi_prime.imag())
           << ", \"f\": " << fmt17(r.f) << ", \"c_log_mag\": " << fmt17(r.c_log_mag)
           << ", \"c_phase\": " << fmt17(r.c_phase) << "}"
           << (i + 1 < table.records.size() ? "," : "") << "\n";
    }
    os << "  ],\n";
    os << "  \"multiplicity_flags\": [";
    for (std::size_t i = 0; i < table.multiplicity_flags.size(); ++i)
        os << (i ? ", " : "") << table.multiplicity_flags[i];
    os << "]\n}\n";

    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("save_zero_table: cannot open " + tmp.string());
        f << os.str();
        if (!f.good()) throw std::runtime_error("save_zero_table: write failed");
    }
    std::filesystem::rename(tmp, path);
}

ZeroTable load_zero_table(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_zero_table: cannot open " + path.string());
    nlohmann::json j;
    f >> j;
    if (j.at("schema_version").get<int>() != 1)
        throw std::runtime_error("load_zero_table: unsupported schema_version");
    ModelOrder order(j.at("m").get<int>());
    QuadSpec tols;
    tols.rel_tol = j.at("quad_tols").at("rel_tol").get<double>();
    tols.abs_tol = j.at("quad_tols").at("abs_tol").get<double>();
    tols.max_evals = j.at("quad_tols").at("max_evals").get<long>();
    ZeroTable table{order, tols, {}, {}};
    for (const auto& rj : j.at("records")) {
        ZeroRecord r;
        r.j = rj.at("j").get<int>();
        r.a = rj.at("a").get<double>();
        r.phi_prime = complex(rj.at("phi_prime_re").get<double>(), rj.at("phi_prime_im").get<double>());
        r.f = rj.at("f").get<double>();
        r.c_log_mag = rj.at("c_log_mag").get<double>();
        r.c_phase = rj.at("c_phase").get<double>();
        table.records.push_back(r);
    }
    for (const auto& mf : j.at("multiplicity_flags")) table.multiplicity_flags.push_back(mf.get<int>());
    // invariants
    for (std::size_t i = 0; i + 1 < table.records.size(); ++i)
        if (!(table.records[i].a < table.records[i + 1].a))
            throw std::runtime_error("load_zero_table: a_j not strictly increasing");
    return table;
}

}  // namespace szegolab
