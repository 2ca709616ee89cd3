#ifndef SZEGOLAB_ZEROS_HPP
#define SZEGOLAB_ZEROS_HPP

// Zeros +/- i a_j of phi on the imaginary axis: restriction psi(a) = phi(ia),
// zero location and refinement, the counting-law fit, residue weights
// c_j = 1/(phi'(i a_j) Gamma(f_j + 1)), and the JSON table format.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "szegolab/model.hpp"

namespace szegolab {

// value * exp(log_scale); the scale keeps exponentially small magnitudes
// representable (|phi(ia)| ~ exp(-c1 sin(theta0) a^gamma)).
struct ScaledReal {
    double value = 0.0;
    double log_scale = 0.0;
    double to_double() const { return value * std::exp(log_scale); }
};

// phi(i a) as a real number (Im asserted below 1e-10 of the contour scale).
double psi(const ModelOrder& order, double a);
ScaledReal psi_scaled(const ModelOrder& order, double a);
// d/da of phi(i a); equals i phi'(ia), real.
ScaledReal psi_derivative_scaled(const ModelOrder& order, double a);

struct ZeroRecord {
    int j = 0;                 // 1-based index
    double a = 0.0;            // zero ordinate, increasing in j
    complex phi_prime{};       // phi'(i a_j) (purely imaginary)
    double f = 0.0;            // c2 a_j^gamma - 1/4
    double c_log_mag = 0.0;    // log |c_j|, c_j = 1/(phi'(ia_j) Gamma(f_j+1))
    double c_phase = 0.0;      // arg c_j (= -arg phi'(ia_j), i.e. +-pi/2)
};

struct ZeroTable {
    ModelOrder order;
    QuadSpec quad_tols;
    std::vector<ZeroRecord> records;
    std::vector<int> multiplicity_flags;  // indices failing the simplicity check

    const ZeroRecord& record(int j) const;
};

// Locate the first J_max zeros (m >= 2). Bracketing on a grid at <= 1/4 of the
// asymptotic spacing, bisection then secant refinement, simplicity check, gap
// check against the counting law with a dense fallback rescan.
struct LocateReport {
    bool complete = true;
    std::string warning;
};
ZeroTable locate_zeros(const ModelOrder& order, int j_max, const QuadSpec& spec = {},
                       LocateReport* report = nullptr);

struct ZeroLawFit {
    double c2_hat = 0.0;       // slope of j against a_j^gamma
    double j0_raw = 0.0;       // mean of (c2 a_j^gamma - 1/4) - j, upper half
    int j0_hat = 0;            // rounded
    bool anomaly = false;      // |j0_raw - j0_hat| > 0.2
    std::vector<double> residuals;            // r_j = j - (X_j - j0_hat)
    std::vector<double> residuals_empirical;  // r_j about the unrounded offset
    double max_residual_upper = 0.0;           // max |r_j|, spec formula, upper half
    double max_residual_empirical_upper = 0.0;
    double max_rj_times_j = 0.0;               // sup of |r_j^emp| * j over upper half
};
ZeroLawFit zero_law_fit(const ZeroTable& table);

struct ResidueWeight {
    double log_mag = 0.0;
    double phase = 0.0;
    complex value() const { return std::polar(std::exp(log_mag), phase); }
};
// Refuses records listed in multiplicity_flags.
ResidueWeight residue_weight(const ModelOrder& order, const ZeroTable& table, int j);

// JSON persistence (schema_version 1; 17 significant digits; atomic write).
void save_zero_table(const std::filesystem::path& path, const ZeroTable& table);
ZeroTable load_zero_table(const std::filesystem::path& path);

}  // namespace szegolab

#endif
