#ifndef SZEGOLAB_MODEL_HPP
#define SZEGOLAB_MODEL_HPP

// Model order m for the hypersurface Im z2 = (Re z1)^{2m} and the constants
// attached to it. Immutable after construction; shareable across threads.

#include <stdexcept>
#include <vector>

#include "szegolab/quadrature.hpp"

namespace szegolab {

struct ModelOrder {
    int m;
    double c0;      // sqrt(pi) (2m-1)^{-1/2} (2m)^{-1/(4m-2)}
    double c1;      // 2[(1/2m)^{1/(2m-1)} - (1/2m)^{2m/(2m-1)}]
    double c2;      // (c1/pi) cos(theta0)
    double theta0;  // pi / (2(2m-1))
    double gamma;   // 2m / (2m-1), the exponential order of phi

    explicit ModelOrder(int m);

    // Power-series data for phi(x) = sum_k coeff_k x^{2k}:
    //   coeff_k = (1/m) 2^{-(2k+1)/(2m)} Gamma((2k+1)/(2m)) 4^k / (2k)!
    double series_coeff0() const { return coeff0_; }
    // term ratio coeff_{k+1}/coeff_k for k = 0..cache-1
    double series_ratio(std::size_t k) const;
    std::size_t series_ratio_count() const { return ratio_.size(); }

  private:
    double coeff0_;
    std::vector<double> ratio_;
};

// Point (z = x + iy, t) on the model manifold.
struct EvalPoint {
    double x = 0.0, y = 0.0, t = 0.0;
    int sigma() const { return y > 0.0 ? 1 : (y < 0.0 ? -1 : 0); }
    // true iff |arg z - sigma*pi/2| < theta0 (the representation sector)
    bool in_sector(const ModelOrder& order) const;
};

}  // namespace szegolab

#endif
