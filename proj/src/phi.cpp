#include "szegolab/phi.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace szegolab {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr std::size_t kRatioCache = 8192;
constexpr int kMaxSeriesTerms = 10000;
}  // namespace

ModelOrder::ModelOrder(int m_) : m(m_) {
    if (m < 1) throw std::domain_error("ModelOrder: m must be >= 1");
    const double tm = 1.0 / (2.0 * m);
    const double e1 = 1.0 / (2.0 * m - 1.0);
    c1 = 2.0 * (std::pow(tm, e1) - std::pow(tm, 2.0 * m * e1));
    theta0 = kPi * 0.5 * e1;
    c2 = c1 / kPi * std::cos(theta0);
    c0 = std::sqrt(kPi) * std::pow(2.0 * m - 1.0, -0.5) * std::pow(2.0 * m, -1.0 / (4.0 * m - 2.0));
    gamma = 2.0 * m * e1;

    coeff0_ = (1.0 / m) * std::pow(2.0, -tm) * std::exp(log_gamma(tm));
    ratio_.resize(kRatioCache);
    const double p = std::pow(2.0, -1.0 / m) * 4.0;
    for (std::size_t k = 0; k < kRatioCache; ++k) {
        double g1 = log_gamma((2.0 * k + 1.0) * tm);
        double g2 = log_gamma((2.0 * k + 3.0) * tm);
        ratio_[k] = p * std::exp(g2 - g1) / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
    }
}

double ModelOrder::series_ratio(std::size_t k) const {
    if (k >= ratio_.size())
        throw NonConvergenceError("phi series: term budget exceeds the ratio cache");
    return ratio_[k];
}

bool EvalPoint::in_sector(const ModelOrder& order) const {
    int s = sigma();
    if (s == 0) return false;
    double arg = std::atan2(y, x);
    double d = arg - s * kPi * 0.5;
    return std::abs(d) < order.theta0;
}

namespace {

struct SeriesOut {
    complex value;
    double err;
    double max_term;  // cancellation diagnostic
};

// phi^{(deriv)}(x) by term-wise differentiation. deriv = 0 gives phi itself.
SeriesOut phi_series_impl(const ModelOrder& order, complex x, int deriv) {
    const complex x2 = x * x;
    const double ax2 = std::abs(x2);
    // first contributing index j0 = ceil(deriv/2)
    const int j0 = (deriv + 1) / 2;
    // T_{j0} = coeff_{j0} * (2 j0)(2 j0 - 1)...(2 j0 - deriv + 1) * x^{2 j0 - deriv}
    double c = order.series_coeff0();
    for (int j = 0; j < j0; ++j) c *= order.series_ratio(j);
    double fall = 1.0;
    for (int i = 0; i < deriv; ++i) fall *= (2.0 * j0 - i);
    const int pow0 = 2 * j0 - deriv;
    complex T = c * fall * (pow0 == 0 ? complex(1.0) : std::pow(x, pow0));
    ComplexCompensatedSum sum;
    sum.add(T);
    double max_term = std::abs(T);
    int small_run = 0;
    for (int j = j0;; ++j) {
        if (j - j0 >= kMaxSeriesTerms)
            throw NonConvergenceError("phi series did not terminate within 10^4 terms");
        double r = order.series_ratio(j);
        if (deriv > 0) {
            double num = (2.0 * j + 1.0) * (2.0 * j + 2.0);
            double den = (2.0 * j + 1.0 - deriv) * (2.0 * j + 2.0 - deriv);
            r *= num / den;
        }
        T *= x2 * r;
        sum.add(T);
        double at = std::abs(T);
        max_term = std::max(max_term, at);
        double s = std::abs(sum.value());
        if (!std::isfinite(s) || !std::isfinite(at)) {
            // out of double range; callers treat inf as "beyond overflow"
            return {sum.value(), std::numeric_limits<double>::infinity(), max_term};
        }
        if (at < 1e-17 * s + 1e-300) {
            if (++small_run >= 5) {
                // ratio-test tail certificate: ratios decrease in k
                double rho = ax2 * order.series_ratio(j + 1);
                double tail = (rho < 1.0) ? at * rho / (1.0 - rho) : at;
                return {sum.value(), tail + 1e-16 * max_term, max_term};
            }
        } else {
            small_run = 0;
        }
    }
}

// quadrature over the real w line (both half-lines)
QuadResult phi_quadrature(const ModelOrder& order, complex x, const QuadSpec& spec) {
    const int m = order.m;
    auto right = [&](complex w) {
        double s = w.real();
        return std::exp(-2.0 * std::pow(s, 2 * m) + 2.0 * x * s);
    };
    auto left = [&](complex w) {
        double s = w.real();
        return std::exp(-2.0 * std::pow(s, 2 * m) - 2.0 * x * s);
    };
    auto r1 = integrate_decaying_halfline(right, ContourSegment::ray({0.0, 0.0}, {1.0, 0.0}), spec);
    auto r2 = integrate_decaying_halfline(left, ContourSegment::ray({0.0, 0.0}, {1.0, 0.0}), spec);
    QuadResult res;
    res.value = r1.value + r2.value;
    res.err_est = r1.err_est + r2.err_est;
    res.evals = r1.evals + r2.evals;
    res.converged = r1.converged && r2.converged;
    return res;
}

// arg on the sector branch (-pi/2, 3*pi/2]
double arg_sector(complex x) {
    double a = std::arg(x);
    if (a <= -kPi * 0.5) a += 2.0 * kPi;
    return a;
}

}  // namespace

complex log_asymptotic_A(const ModelOrder& order, double log_abs_x, double theta) {
    complex lx(log_abs_x, theta);
    double nu = (1.0 - order.m) / (2.0 * order.m - 1.0);
    return std::log(order.c0) + nu * lx + order.c1 * std::exp(order.gamma * lx);
}

complex log_asymptotic_pair(const ModelOrder& order, complex x) {
    double r = std::abs(x);
    if (!(r > 0.0)) throw std::domain_error("log_asymptotic_pair: x = 0");
    double th = arg_sector(x);
    complex l1 = log_asymptotic_A(order, std::log(r), th);
    complex l2 = log_asymptotic_A(order, std::log(r), th - kPi);
    if (l2.real() > l1.real()) std::swap(l1, l2);
    return l1 + std::log(1.0 + std::exp(l2 - l1));
}

double asymptotic_threshold(const ModelOrder& order) {
    return std::pow(10.0 / order.c1, (2.0 * order.m - 1.0) / (2.0 * order.m));
}

PhiEval phi(const ModelOrder& order, complex x, PhiMethod method, const QuadSpec& spec) {
    PhiEval out;
    out.method = method;
    switch (method) {
        case PhiMethod::series: {
            auto s = phi_series_impl(order, x, 0);
            out.value = s.value;
            out.err_est = s.err + 1e-16 * s.max_term;
            break;
        }
        case PhiMethod::quadrature: {
            auto q = phi_quadrature(order, x, spec);
            out.value = q.value;
            out.err_est = q.err_est;
            break;
        }
        case PhiMethod::asymptotic: {
            if (std::abs(x) < asymptotic_threshold(order))
                throw std::domain_error("phi: outside asymptotic regime");
            double th = arg_sector(x);
            if (th <= -kPi * 0.5 + 1e-9 || th >= 1.5 * kPi - 1e-9)
                throw std::domain_error("phi: outside asymptotic sector");
            complex lp = log_asymptotic_pair(order, x);
            out.value = std::exp(lp);
            out.err_est = std::abs(out.value) * 0.1;  // empirical; see asymptotic_agreement
            break;
        }
    }
    return out;
}

complex phi_derivative(const ModelOrder& order, complex x, int k) {
    if (k < 0 || k > 2 * order.m)
        throw std::domain_error("phi_derivative: require 0 <= k <= 2m");
    return phi_series_impl(order, x, k).value;
}

double ode_residual(const ModelOrder& order, complex x) {
    const int m = order.m;
    complex y = phi_series_impl(order, x, 0).value;
    complex d = phi_series_impl(order, x, 2 * m - 1).value;
    double coef = std::pow(2.0, 2 * m - 2) / m;
    return std::abs(d - coef * x * y) / (1.0 + std::abs(y));
}

complex log_phi(const ModelOrder& order, complex x, const QuadSpec& spec) {
    const int m = order.m;
    if (x.imag() == 0.0 && x.real() >= 0.0) {
        double xr = x.real();
        // factor out the peak exponent c1 x^gamma (exact maximum of the
        // integrand exponent over real w)
        double M = order.c1 * std::pow(xr, order.gamma);
        auto f = [&](complex w) {
            double s = w.real();
            return std::exp(-2.0 * std::pow(s, 2 * m) + 2.0 * xr * s - M);
        };
        auto fneg = [&](complex w) {
            double s = w.real();
            return std::exp(-2.0 * std::pow(s, 2 * m) - 2.0 * xr * s - M);
        };
        auto r1 = integrate_decaying_halfline(f, ContourSegment::ray({0.0, 0.0}, {1.0, 0.0}), spec);
        auto r2 = integrate_decaying_halfline(fneg, ContourSegment::ray({0.0, 0.0}, {1.0, 0.0}), spec);
        return M + std::log(r1.value + r2.value);
    }
    auto s = phi_series_impl(order, x, 0);
    if (!std::isfinite(std::abs(s.value)))
        throw std::domain_error("log_phi: series value out of double range off the real axis");
    return std::log(s.value);
}

std::vector<double> asymptotic_agreement(const ModelOrder& order,
                                         const std::vector<complex>& x_grid,
                                         const QuadSpec& spec) {
    std::vector<double> out;
    out.reserve(x_grid.size());
    for (complex x : x_grid) {
        complex lphi = log_phi(order, x, spec);
        complex lasym = log_asymptotic_pair(order, x);
        out.push_back(std::abs(std::exp(lphi - lasym) - 1.0));
    }
    return out;
}

}  // namespace szegolab
