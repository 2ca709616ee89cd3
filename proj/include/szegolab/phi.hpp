#ifndef SZEGOLAB_PHI_HPP
#define SZEGOLAB_PHI_HPP

// The entire function phi(x) = Int_R exp(-2(w^{2m} - x w)) dw attached to the
// model of order m: evaluation by power series, by quadrature over the real
// line, and by its large-x two-term exponential asymptotics; term-wise series
// derivatives; and the residual of the defining ODE
//   y^{(2m-1)} = (2^{2m-2}/m) x y.

#include "szegolab/model.hpp"
#include "szegolab/quadrature.hpp"

namespace szegolab {

enum class PhiMethod { series, quadrature, asymptotic };

struct PhiEval {
    complex value{};
    PhiMethod method = PhiMethod::series;
    double err_est = 0.0;
};

PhiEval phi(const ModelOrder& order, complex x, PhiMethod method = PhiMethod::series,
            const QuadSpec& spec = {});

// k-th derivative via term-wise differentiation of the series, 0 <= k <= 2m.
complex phi_derivative(const ModelOrder& order, complex x, int k);

// |phi^{(2m-1)}(x) - (2^{2m-2}/m) x phi(x)| / (1 + |phi(x)|), series route.
double ode_residual(const ModelOrder& order, complex x);

// ln phi(x) with the branch continuous along the evaluation route. Handles
// magnitudes far beyond double range for real x >= 0 (peak-factored
// quadrature); elsewhere requires the series value to be representable.
complex log_phi(const ModelOrder& order, complex x, const QuadSpec& spec = {});

// A(x) = c0 x^{(1-m)/(2m-1)} exp(c1 x^{2m/(2m-1)}) evaluated on the branch
// arg x = theta (the caller fixes the angle; powers use exp(alpha(ln r + i theta))).
complex log_asymptotic_A(const ModelOrder& order, double log_abs_x, double theta);

// ln(A(x) + A(x e^{-i pi})) on the sector branch arg x in (-pi/2, 3pi/2).
complex log_asymptotic_pair(const ModelOrder& order, complex x);

// |x| threshold for PhiMethod::asymptotic: exponential factor exceeds e^{10}.
double asymptotic_threshold(const ModelOrder& order);

// Per-point |phi/asymptotic - 1| on a grid (log-domain ratio).
std::vector<double> asymptotic_agreement(const ModelOrder& order,
                                         const std::vector<complex>& x_grid,
                                         const QuadSpec& spec = {});

}  // namespace szegolab

#endif
