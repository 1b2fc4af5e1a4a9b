#include <doctest.h>

#include <cmath>
#include <random>

#include "potpot/baselines.hpp"
#include "potpot/datagen.hpp"

using namespace potpot;

namespace {

Matrix normal_sample(std::mt19937_64& rng, int n, const Vector& mean, const Matrix& root) {
    std::normal_distribution<double> g;
    Matrix x(n, mean.size());
    for (int i = 0; i < n; ++i) {
        Vector z(mean.size());
        for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = g(rng);
        x.row(i) = (mean + root * z).transpose();
    }
    return x;
}

LabeledDataset two_class(const Matrix& a, const Matrix& b) {
    Matrix x(a.rows() + b.rows(), a.cols());
    x << a, b;
    std::vector<int> labels(static_cast<std::size_t>(a.rows()), 1);
    labels.resize(static_cast<std::size_t>(x.rows()), 2);
    return LabeledDataset(x, labels);
}

Vector v2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

// Direct spatial depth: sphere with an explicit inverse root, average unit vectors.
double spatial_oracle(const Vector& x, const Matrix& ref) {
    const Vector mu = ref.colwise().mean().transpose();
    const Matrix c = (ref.rowwise() - mu.transpose()).transpose() * (ref.rowwise() - mu.transpose()) / double(ref.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> es(c);
    const Matrix root = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    Vector acc = Vector::Zero(x.size());
    for (Eigen::Index i = 0; i < ref.rows(); ++i) {
        const Vector d = root * (x - ref.row(i).transpose());
        if (d.norm() > 0) acc += d / d.norm();
    }
    return 1.0 - (acc / static_cast<double>(ref.rows())).norm();
}

}  // namespace

TEST_CASE("LDA boundary between unit-covariance classes") {
    std::mt19937_64 rng(1);
    const auto data = two_class(normal_sample(rng, 3000, v2(0, 0), Matrix::Identity(2, 2)),
                                normal_sample(rng, 3000, v2(3, 0), Matrix::Identity(2, 2)));
    const auto lda = train_baseline(BaselineKind::parse("lda"), data);
    for (double y : {-2.0, 0.0, 1.5}) {
        CHECK(lda->classify(v2(1.3, y)) == 1);
        CHECK(lda->classify(v2(1.7, y)) == 2);
    }
}

TEST_CASE("QDA agrees with LDA on equal covariances and both are affine invariant") {
    std::mt19937_64 rng(2);
    Matrix root(2, 2);
    root << 1.0, 0.0, 0.5, 0.8;
    const auto data = two_class(normal_sample(rng, 4000, v2(0, 0), root), normal_sample(rng, 4000, v2(2, 1), root));
    const auto lda = train_baseline(BaselineKind::parse("lda"), data);
    const auto qda = train_baseline(BaselineKind::parse("qda"), data);
    const Matrix probe = normal_sample(rng, 400, v2(1, 0.5), 1.5 * Matrix::Identity(2, 2));
    const auto pl = lda->classify_rows(probe), pq = qda->classify_rows(probe);
    int agree = 0;
    for (std::size_t i = 0; i < pl.size(); ++i) agree += pl[i] == pq[i];
    CHECK(agree >= 392);  // sampling noise in the two covariance estimates

    Matrix a(2, 2);
    a << 2.0, -1.0, 0.3, 0.7;
    const Vector b = v2(-4, 9);
    const LabeledDataset moved(((data.points * a.transpose()).rowwise() + b.transpose()).eval(), data.labels);
    const Matrix probe2 = (probe * a.transpose()).rowwise() + b.transpose();
    for (const char* kind : {"lda", "qda"}) {
        const auto c1 = train_baseline(BaselineKind::parse(kind), data);
        const auto c2 = train_baseline(BaselineKind::parse(kind), moved);
        CHECK(c1->classify_rows(probe) == c2->classify_rows(probe2));
    }
}

TEST_CASE("Mahalanobis depth") {
    std::mt19937_64 rng(3);
    Matrix root(2, 2);
    root << 2.0, 0.0, 1.0, 1.0;
    const Matrix ref = normal_sample(rng, 50, v2(1, -1), root);
    const DepthReference r(ref);
    const Vector mu = mean_of(ref);
    CHECK(mahalanobis_depth(mu, r) == doctest::Approx(1.0));
    // Unit Mahalanobis distance: any point mapped to the unit circle by the sphering.
    Eigen::LLT<Matrix> llt(covariance_of(ref));
    const Vector unit = mu + Matrix(llt.matrixL()) * v2(0.6, 0.8);
    CHECK(mahalanobis_depth(unit, r) == doctest::Approx(0.5));

    Matrix a(2, 2);
    a << 0.5, 3.0, -1.0, 1.0;
    const Vector b = v2(7, 2);
    const Matrix moved = (ref * a.transpose()).rowwise() + b.transpose();
    for (int t = 0; t < 10; ++t) {
        const Vector x = normal_sample(rng, 1, v2(0, 0), 3 * Matrix::Identity(2, 2)).row(0).transpose();
        CHECK(mahalanobis_depth(a * x + b, moved) == doctest::Approx(mahalanobis_depth(x, ref)).epsilon(1e-8));
        const double s = spatial_depth(x, ref);
        CHECK(spatial_depth(a * x + b, moved) == doctest::Approx(s).epsilon(1e-8));
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("spatial depth") {
    std::mt19937_64 rng(4);
    const Matrix ref = normal_sample(rng, 20, v2(0, 0), Matrix::Identity(2, 2));
    for (int t = 0; t < 20; ++t) {
        const Vector x = normal_sample(rng, 1, v2(0, 0), Matrix::Identity(2, 2)).row(0).transpose();
        CHECK(std::abs(spatial_depth(x, ref) - spatial_oracle(x, ref)) < 1e-12);
    }
    // Includes x itself (zero distance) and symmetric pairs.
    Matrix sym(5, 2);
    sym << 0, 0, 1, 0, -1, 0, 0, 2, 0, -2;
    CHECK(spatial_depth(v2(0, 0), sym) == doctest::Approx(1.0));
    CHECK(spatial_depth(v2(1e6, 0), ref) < 1e-3);
}

TEST_CASE("DD-plot with the diagonal separator is the maximum-depth rule") {
    std::mt19937_64 rng(5);
    const auto data = two_class(normal_sample(rng, 60, v2(0, 0), Matrix::Identity(2, 2)),
                                normal_sample(rng, 40, v2(2, 0), 1.5 * Matrix::Identity(2, 2)));
    const Matrix probe = normal_sample(rng, 300, v2(1, 0), 2 * Matrix::Identity(2, 2));
    for (DepthKind depth : {DepthKind::Mahalanobis, DepthKind::Spatial}) {
        const auto dd = dd_plot_classify(depth, SeparatorKind::Diagonal, data);
        const Matrix c1 = data.class_points(1), c2 = data.class_points(2);
        for (Eigen::Index i = 0; i < probe.rows(); ++i) {
            const Vector x = probe.row(i).transpose();
            const double d1 = depth == DepthKind::Mahalanobis ? mahalanobis_depth(x, c1) : spatial_depth(x, c1);
            const double d2 = depth == DepthKind::Mahalanobis ? mahalanobis_depth(x, c2) : spatial_depth(x, c2);
            const int direct = d1 > d2 ? 1 : d2 > d1 ? 2 : 1;  // tie: larger prior (class 1 here)
            CHECK(dd->classify(x) == direct);
        }
    }
}

TEST_CASE("maximum Mahalanobis depth matches QDA under equal priors and generalized variances") {
    std::mt19937_64 rng(6);
    const Matrix c1 = normal_sample(rng, 80, v2(0, 0), Matrix::Identity(2, 2));
    // Class 2: a determinant-one image of class 1, so both covariance estimates have the same determinant.
    Matrix a(2, 2);
    a << 2.0, 0.5, 0.0, 0.5;
    const Matrix c2 = (c1 * a.transpose()).rowwise() + v2(3, 1).transpose();
    const auto data = two_class(c1, c2);
    const auto qda = train_baseline(BaselineKind::parse("qda"), data);
    const auto dd = dd_plot_classify(DepthKind::Mahalanobis, SeparatorKind::Diagonal, data);
    const Matrix probe = normal_sample(rng, 300, v2(1.5, 0.5), 2 * Matrix::Identity(2, 2));
    CHECK(qda->classify_rows(probe) == dd->classify_rows(probe));
}

TEST_CASE("efficiency index") {
    CHECK(efficiency_index(0.10, 0.10).value == doctest::Approx(1.0));
    CHECK(efficiency_index(0.069, 0.069).value == doctest::Approx(1.0));
    CHECK(efficiency_index(0.069, 0.067).value == doctest::Approx(1.03).epsilon(0.01));
    CHECK(efficiency_index(0.0, 0.05).value == 0.0);
    CHECK(efficiency_index(0.0, 0.0).value == 1.0);
    const auto u = efficiency_index(0.02, 0.0);
    CHECK(u.undefined);
    CHECK(std::isnan(u.value));
}

TEST_CASE("baseline names round-trip") {
    for (const char* n : {"bayes", "lda", "qda", "knn", "dd-mah-alpha", "dd-spat-knn", "dd-mah-diagonal"})
        CHECK(BaselineKind::parse(n).name() == n);
    CHECK_THROWS_AS(BaselineKind::parse("svm"), Error);
}

TEST_CASE("Bayes rule on 1dist3 is close to the analytic error") {
    double total = 0;
    for (int r = 0; r < 40; ++r) {
        const auto g = generate_by_name("1dist3", derive_seed(1, static_cast<std::uint64_t>(r)));
        const auto bayes = train_baseline(BaselineKind::parse("bayes"), g.train, g.true_density, g.priors);
        total += error_rate(bayes->classify_rows(g.test.points), g.test.labels);
    }
    CHECK(std::abs(100 * total / 40 - 6.7) < 1.5);
    CHECK(std::abs(100 * total / 40 - 100 * normal_cdf(-1.5)) < 1.5);
}

TEST_CASE("k-NN in the original space separates distant classes") {
    std::mt19937_64 rng(8);
    const auto data = two_class(normal_sample(rng, 40, v2(0, 0), Matrix::Identity(2, 2)),
                                normal_sample(rng, 40, v2(10, 10), Matrix::Identity(2, 2)));
    const auto knn = train_baseline(BaselineKind::parse("knn"), data);
    CHECK(error_rate(knn->classify_rows(data.points), data.labels) == 0.0);
}
