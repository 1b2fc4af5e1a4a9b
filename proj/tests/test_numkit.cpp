#include <doctest.h>

#include <cmath>
#include <random>

#include "potpot/numkit.hpp"

using namespace potpot;

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
    Matrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : r) {
        Eigen::Index j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

// Textbook two-pass covariance, divisor n-1.
Matrix naive_cov(const Matrix& x) {
    const auto n = x.rows(), d = x.cols();
    Vector mu = Vector::Zero(d);
    for (Eigen::Index i = 0; i < n; ++i) mu += x.row(i).transpose();
    mu /= static_cast<double>(n);
    Matrix c = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index a = 0; a < d; ++a)
            for (Eigen::Index b = 0; b < d; ++b) c(a, b) += (x(i, a) - mu(a)) * (x(i, b) - mu(b));
    return c / static_cast<double>(n - 1);
}

}  // namespace

TEST_CASE("covariance of small samples") {
    CHECK(covariance_of(rows({{1}, {3}}))(0, 0) == doctest::Approx(2.0));
    const Matrix c = covariance_of(rows({{0, 0}, {1, 1}, {1, 0}, {0, 1}}));
    CHECK(c(0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(c(0, 1) == doctest::Approx(0.0));
    const Matrix tri = covariance_of(rows({{1, 0}, {-1, 0}, {0, 1}, {0, -1}}));
    CHECK(tri(0, 0) == doctest::Approx(2.0 / 3.0));
    CHECK(tri(1, 1) == doctest::Approx(2.0 / 3.0));
    CHECK(tri(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("covariance matches a two-pass oracle and transforms affinely") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    Matrix x(50, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    const Matrix c = covariance_of(x);
    CHECK((c - naive_cov(x)).cwiseAbs().maxCoeff() < 1e-12);

    Matrix shifted = x;
    shifted.rowwise() += Eigen::RowVector3d(5, -2, 100);
    CHECK((covariance_of(shifted) - c).cwiseAbs().maxCoeff() < 1e-9);

    Matrix a(3, 3);
    a << 2, 1, 0, 0, 1, 3, -1, 0, 1;
    const Matrix mapped = x * a.transpose();
    CHECK((covariance_of(mapped) - a * c * a.transpose()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("Monte Carlo covariance of diag(1,5)") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    Matrix x(20000, 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        x(i, 0) = g(rng);
        x(i, 1) = std::sqrt(5.0) * g(rng);
    }
    const Matrix c = covariance_of(x);
    CHECK(c(0, 0) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(c(1, 1) == doctest::Approx(5.0).epsilon(0.05));
    CHECK(std::abs(c(0, 1)) < 0.1);
}

TEST_CASE("inverse square root") {
    const InverseRoot id = inv_sqrt_psd(Matrix::Identity(3, 3));
    CHECK((id.root - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(id.rank == 3);
    CHECK(id.log_det == doctest::Approx(0.0));

    const InverseRoot deg = inv_sqrt_psd(rows({{4, 0}, {0, 0}}));
    CHECK(deg.rank == 1);
    CHECK(deg.root(0, 0) == doctest::Approx(0.5));
    CHECK(std::abs(deg.root(1, 1)) < 1e-12);
    CHECK(std::abs(deg.root(0, 1)) < 1e-12);
    CHECK(deg.log_det == doctest::Approx(std::log(4.0)));

    const Matrix m = rows({{2, 1}, {1, 2}});
    const InverseRoot r = inv_sqrt_psd(m);
    CHECK(r.rank == 2);
    CHECK((r.root - r.root.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((r.root * m * r.root - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.log_det == doctest::Approx(std::log(3.0)));
}

TEST_CASE("degenerate inputs are rejected") {
    CHECK_THROWS_WITH_AS(inv_sqrt_psd(Matrix::Zero(2, 2)), doctest::Contains("zero matrix"), Error);
    CHECK_THROWS_WITH_AS(covariance_of(rows({{1, 2}})), doctest::Contains("degenerate sample"), Error);
    CHECK_THROWS_WITH_AS(sphering_of(rows({{1, 2}, {1, 2}, {1, 2}})), doctest::Contains("zero matrix"), Error);
}

TEST_CASE("sphering whitens the sample") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    Matrix x(200, 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        x(i, 0) = 3 + 2 * g(rng);
        x(i, 1) = x(i, 0) + g(rng);
    }
    const SpheringTransform t = sphering_of(x);
    const Matrix y = t.apply_rows(x);
    CHECK(mean_of(y).norm() < 1e-10);
    CHECK((covariance_of(y) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((t.apply(x.row(5).transpose()) - y.row(5).transpose()).norm() < 1e-12);
}

TEST_CASE("normal cdf") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(-1.5) == doctest::Approx(0.0668072).epsilon(1e-6));
    CHECK(normal_cdf(-2.0) == doctest::Approx(0.0227501).epsilon(1e-6));
    for (double x : {0.1, 0.7, 1.3, 2.9}) CHECK(normal_cdf(x) + normal_cdf(-x) == doctest::Approx(1.0));
}

TEST_CASE("least squares line") {
    auto [a, b] = fit_line({0, 1, 2}, {1, 3, 5});
    CHECK(a == doctest::Approx(1.0));
    CHECK(b == doctest::Approx(2.0));

    // Closed-form normal equations.
    const std::vector<double> xs{-1, 0, 1, 2}, ys{-1, 1, 2, 3};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double n = static_cast<double>(xs.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    auto [a2, b2] = fit_line(xs, ys);
    CHECK(b2 == doctest::Approx(slope));
    CHECK(a2 == doctest::Approx((sy - slope * sx) / n));

    CHECK_THROWS_WITH_AS(fit_line({2, 2, 2}, {1, 2, 3}), doctest::Contains("vertical fit"), Error);
}

TEST_CASE("least squares quadratic recovers an exact parabola") {
    const std::vector<double> xs{-2, -1, 0, 1, 2, 3};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(0.5 - 1.5 * x + 0.25 * x * x);
    const auto c = fit_quadratic(xs, ys);
    CHECK(c[0] == doctest::Approx(0.5));
    CHECK(c[1] == doctest::Approx(-1.5));
    CHECK(c[2] == doctest::Approx(0.25));
}

TEST_CASE("log-sum-exp") {
    const double v[] = {1000.0, 1000.0};
    CHECK(log_sum_exp(v, 2) == doctest::Approx(1000.0 + std::log(2.0)));
    const double w[] = {0.1, -0.4, 2.0};
    CHECK(log_sum_exp(w, 3) == doctest::Approx(std::log(std::exp(0.1) + std::exp(-0.4) + std::exp(2.0))));
    CHECK(std::isinf(log_sum_exp(v, 0)));
}
