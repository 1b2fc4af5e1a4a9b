#include "potpot/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace potpot {

// Plain loops so a single point and a batch go through identical arithmetic.
Matrix SpheringTransform::apply_rows(const Matrix& rows) const {
    const Eigen::Index d = center.size();
    if (rows.cols() != d) throw Error("sphering: dimension mismatch");
    Matrix out(rows.rows(), d);
    Vector centered(d);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        for (Eigen::Index c = 0; c < d; ++c) centered(c) = rows(i, c) - center(c);
        for (Eigen::Index k = 0; k < d; ++k) {
            double acc = 0.0;
            for (Eigen::Index c = 0; c < d; ++c) acc += root_inv(k, c) * centered(c);
            out(i, k) = acc;
        }
    }
    return out;
}

Vector SpheringTransform::apply(const Vector& x) const { return apply_rows(x.transpose()).row(0).transpose(); }

Vector mean_of(const Matrix& points) {
    if (points.rows() == 0) throw Error("degenerate sample: no points");
    return points.colwise().mean().transpose();
}

Matrix covariance_of(const Matrix& points) {
    if (points.rows() < 2) throw Error("degenerate sample: covariance needs at least 2 points");
    const Vector mu = mean_of(points);
    const Matrix centered = points.rowwise() - mu.transpose();
    Matrix cov = (centered.transpose() * centered) / static_cast<double>(points.rows() - 1);
    // Exact symmetry so downstream eigen-solvers see a symmetric input.
    return 0.5 * (cov + cov.transpose());
}

InverseRoot inv_sqrt_psd(const Matrix& m, double tol) {
    if (m.rows() != m.cols() || m.rows() == 0) throw Error("inv_sqrt_psd: matrix must be square and non-empty");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    if (eig.info() != Eigen::Success) throw Error("inv_sqrt_psd: eigendecomposition failed");
    const Vector& lambda = eig.eigenvalues();
    const double lambda_max = lambda.maxCoeff();
    if (!(lambda_max > 0.0)) throw Error("zero matrix: no eigenvalue above tolerance");
    const double cut = tol * lambda_max;

    const Eigen::Index d = m.rows();
    Vector scale = Vector::Zero(d);
    InverseRoot out;
    for (Eigen::Index i = 0; i < d; ++i) {
        if (lambda(i) > cut) {
            scale(i) = 1.0 / std::sqrt(lambda(i));
            out.log_det += std::log(lambda(i));
            ++out.rank;
        }
    }
    const Matrix& q = eig.eigenvectors();
    out.root = q * scale.asDiagonal() * q.transpose();
    return out;
}

SpheringTransform sphering_from(const Vector& center, const Matrix& covariance, double tol) {
    InverseRoot r = inv_sqrt_psd(covariance, tol);
    return SpheringTransform{center, std::move(r.root), r.rank, r.log_det};
}

SpheringTransform sphering_of(const Matrix& points, double tol) {
    return sphering_from(mean_of(points), covariance_of(points), tol);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::pair<double, double> fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw Error("fit_line: need at least 2 paired points");
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 0.0) throw Error("vertical fit: all x values are equal");
    const double b = sxy / sxx;
    return {my - b * mx, b};
}

std::vector<double> fit_quadratic(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 3) throw Error("fit_quadratic: need at least 3 paired points");
    const auto n = static_cast<Eigen::Index>(xs.size());
    Matrix design(n, 3);
    Vector rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = xs[static_cast<std::size_t>(i)];
        design(i, 0) = 1.0;
        design(i, 1) = x;
        design(i, 2) = x * x;
        rhs(i) = ys[static_cast<std::size_t>(i)];
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (qr.rank() < 3) throw Error("fit_quadratic: fewer than 3 distinct x values");
    const Vector c = qr.solve(rhs);
    return {c(0), c(1), c(2)};
}

double log_sum_exp(const double* values, std::size_t count) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < count; ++i) hi = std::max(hi, values[i]);
    if (!std::isfinite(hi)) return hi;
    double acc = 0.0;
    for (std::size_t i = 0; i < count; ++i) acc += std::exp(values[i] - hi);
    return hi + std::log(acc);
}

}  // namespace potpot
