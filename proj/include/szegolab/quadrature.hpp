#ifndef SZEGOLAB_QUADRATURE_HPP
#define SZEGOLAB_QUADRATURE_HPP

// Numeric substrate: adaptive quadrature on segments/arcs/rays of the complex
// plane, semi-infinite decaying and oscillatory integrals, log-gamma, and
// compensated summation. All routines are pure functions of their arguments
// and safe to call concurrently.

#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace szegolab {

using complex = std::complex<double>;

struct QuadSpec {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    long max_evals = 2'000'000;
    std::optional<double> oscillation_hint{};

    void validate() const {
        if (!(rel_tol > 0.0)) throw std::invalid_argument("QuadSpec: rel_tol must be > 0");
        if (!(abs_tol >= 0.0)) throw std::invalid_argument("QuadSpec: abs_tol must be >= 0");
        if (max_evals < 21) throw std::invalid_argument("QuadSpec: max_evals must be >= 21");
    }
    double tol_for(double magnitude) const {
        return std::max(abs_tol, rel_tol * magnitude);
    }
};

struct QuadResult {
    complex value{};
    double err_est = 0.0;
    long evals = 0;
    bool converged = false;
};

// A finite segment, a half-line, or a circular arc in the complex plane.
struct ContourSegment {
    enum class Kind { finite, ray, arc };
    Kind kind = Kind::finite;
    complex a{}, b{};        // finite: endpoints
    complex start{};         // ray: base point
    complex direction{1.0};  // ray: unit direction
    complex center{};        // arc
    double radius = 0.0, theta0 = 0.0, theta1 = 0.0;  // arc: z = center + r e^{i theta}

    static ContourSegment finite(complex a, complex b) {
        ContourSegment s; s.kind = Kind::finite; s.a = a; s.b = b; return s;
    }
    static ContourSegment ray(complex start, complex dir);
    static ContourSegment arc(complex center, double r, double th0, double th1);
};

struct NonConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Integrand = std::function<complex(complex)>;

enum class SegmentRule { gauss_kronrod, tanh_sinh };

// Path integral of f over a finite segment or arc (value includes dz).
// tanh_sinh handles integrable endpoint singularities.
QuadResult integrate_segment(const Integrand& f, const ContourSegment& seg,
                             const QuadSpec& spec = {},
                             SegmentRule rule = SegmentRule::gauss_kronrod);

// Improper integral of f along a half-line; |f| must eventually decay at least
// exponentially in a fractional power of arclength. Throws DivergenceError
// when the tail scan finds no decay.
QuadResult integrate_decaying_halfline(const Integrand& f, const ContourSegment& ray,
                                       const QuadSpec& spec = {});

// Improper integral of envelope(z) * e^{i phase_freq s} (s = arclength) along a
// half-line, by half-period chunking and repeated averaging of the partial-sum
// tail. phase_freq == 0 falls back to the decaying path.
QuadResult integrate_oscillatory_halfline(const Integrand& envelope, double phase_freq,
                                          const ContourSegment& ray,
                                          const QuadSpec& spec = {});

// ln Gamma(x), x > 0. Lanczos; >= 12 significant digits.
double log_gamma(double x);

namespace detail {
// ln Gamma(z) for Re z > 0 (same Lanczos kernel, complex arithmetic).
complex log_gamma_complex(complex z);

// Repeated-averaging acceleration of a quasi-alternating sequence of partial
// sums. Returns the best extrapolant; err receives the last-correction size.
complex accelerate_alternating(const std::vector<complex>& partial, double& err);
}  // namespace detail

// Error-free-transform accumulator (two-term compensated sum).
struct CompensatedSum {
    double hi = 0.0, lo = 0.0;
    void add(double x) {
        double t1 = hi + x;
        double z = t1 - hi;
        double t2 = (hi - (t1 - z)) + (x - z);
        t2 += lo;
        hi = t1 + t2;
        lo = t2 - (hi - t1);
    }
    double value() const { return hi + lo; }
};

struct ComplexCompensatedSum {
    CompensatedSum re, im;
    void add(complex z) { re.add(z.real()); im.add(z.imag()); }
    complex value() const { return {re.value(), im.value()}; }
};

}  // namespace szegolab

#endif
