#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace potpot {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// All library failures surface as this exception type; the message is the
/// diagnostic shown by the CLI.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Default relative eigenvalue cut-off for the pseudoinverse path.
inline constexpr double kEigenTolerance = 1e-9;

/// Symmetric inverse square root of a PSD matrix.
///
/// `root` equals Q diag(λ⁺^{-1/2}) Qᵀ where eigenvalues at or below
/// tol·λ_max are dropped. `log_det` is the log of the product of the
/// retained eigenvalues, i.e. the log pseudo-determinant.
struct InverseRoot {
    Matrix root;
    int rank = 0;
    double log_det = 0.0;
};

/// Affine map x ↦ root_inv·(x − center) that spheres a sample.
struct SpheringTransform {
    Vector center;
    Matrix root_inv;
    int rank = 0;
    double log_det = 0.0;  ///< log pseudo-determinant of the covariance

    Vector apply(const Vector& x) const;
    /// Applies the transform to every row.
    Matrix apply_rows(const Matrix& rows) const;
};

/// Rows are observations. Divisor n−1.
Matrix covariance_of(const Matrix& points);
Vector mean_of(const Matrix& points);

InverseRoot inv_sqrt_psd(const Matrix& m, double tol = kEigenTolerance);

/// Sphering transform of a sample: center on its mean, whiten by its
/// covariance (pseudoinverse when rank deficient).
SpheringTransform sphering_of(const Matrix& points, double tol = kEigenTolerance);
SpheringTransform sphering_from(const Vector& center, const Matrix& covariance,
                                double tol = kEigenTolerance);

double normal_cdf(double x);

/// Ordinary least squares y = a + b·x. Returns (a, b).
std::pair<double, double> fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

/// Least squares y = a + b·x + c·x². Returns {a, b, c}.
std::vector<double> fit_quadratic(const std::vector<double>& xs, const std::vector<double>& ys);

/// log(Σ exp(v_i)) without overflow; −inf for an empty or all −inf input.
double log_sum_exp(const double* values, std::size_t count);

}  // namespace potpot
