#include <doctest.h>

#include <cmath>

#include "potpot/baselines.hpp"
#include "potpot/datagen.hpp"

using namespace potpot;

TEST_CASE("normal family parameters") {
    const auto loc = normal_family_specs(NormalFamily::Location, 3);
    CHECK(loc[0].mean.norm() == 0.0);
    CHECK(loc[0].covariance.isIdentity());
    CHECK(loc[1].mean(0) == 3.0);
    CHECK(loc[1].mean(1) == 0.0);
    CHECK(loc[1].covariance.isIdentity());

    const auto sc = normal_family_specs(NormalFamily::Scale, 2);
    CHECK(sc[1].mean(0) == 3.0);
    CHECK(sc[1].covariance(0, 0) == 1.0);
    CHECK(sc[1].covariance(1, 1) == 2.0);
    CHECK(sc[1].covariance(0, 1) == 0.0);

    const auto star = normal_family_specs(NormalFamily::ScaleStar, 4);
    CHECK(star[1].covariance(0, 0) == 4.0);
    CHECK(star[1].covariance(1, 1) == 1.0);

    // Rotations preserve the spectrum of diag(1,5).
    for (int k = 1; k <= 9; ++k)
        for (const auto& s : normal_family_specs(NormalFamily::Rotation, k)) {
            CHECK(s.covariance.trace() == doctest::Approx(6.0));
            CHECK(s.covariance.determinant() == doctest::Approx(5.0));
        }
    CHECK_THROWS_AS(normal_family_specs(NormalFamily::Location, 5), Error);
    CHECK_THROWS_AS(normal_family_specs(NormalFamily::Rotation, 10), Error);
}

TEST_CASE("series sizes and names") {
    const auto a = generate_by_name("1dist3", 1);
    CHECK(a.name == "1dist3");
    CHECK(a.train.class_counts() == std::vector<int>{100, 100});
    CHECK(a.test.class_counts() == std::vector<int>{300, 300});
    const auto b = generate_by_name("2scale2", 1);
    CHECK(b.train.class_counts() == std::vector<int>{1000, 300});
    CHECK(b.test.class_counts() == std::vector<int>{1000, 300});
    CHECK_THROWS_AS(generate_by_name("3dist1", 1), Error);
    CHECK_THROWS_AS(generate_by_name("nonsense", 1), Error);
}

TEST_CASE("location sample mean") {
    const auto g = gen_normal_series(1, NormalFamily::Location, 4, 5);
    const Vector m = mean_of(g.train.class_points(2));
    CHECK(std::abs(m(0) - 4.0) < 0.3);
    CHECK(std::abs(m(1)) < 0.3);
}

TEST_CASE("disks") {
    const auto g = gen_disks(1000, 1000, 3);
    const Matrix c1 = g.train.class_points(1), c2 = g.train.class_points(2);
    int inner = 0;
    for (Eigen::Index i = 0; i < c1.rows(); ++i) {
        const double r = c1.row(i).norm();
        inner += r < 1;
        CHECK(((r > 0 && r < 1) || (r > 2 && r < 3)));
    }
    CHECK(std::abs(inner / 1000.0 - 1.0 / 6.0) < 0.05);
    for (Eigen::Index i = 0; i < c2.rows(); ++i) {
        const double r = c2.row(i).norm();
        CHECK(((r > 1 && r < 2) || (r > 3 && r < 4)));
    }
    const auto small = generate_by_name("disks_80x120", 2);
    CHECK(small.train.class_counts() == std::vector<int>{80, 120});
    CHECK(small.test.class_counts() == std::vector<int>{240, 360});
}

TEST_CASE("hyperspheres") {
    CHECK(hypersphere_class1_probability(2) == doctest::Approx(0.375));
    CHECK(hypersphere_class1_probability(10) == doctest::Approx(58026.0 / 1048576.0));
    for (int d : {2, 3, 5}) {
        const auto h = gen_hyperspheres(d, 1000, 7);
        const double p = hypersphere_class1_probability(d);
        CHECK(std::abs(h.raw_fraction - p) < 3 * std::sqrt(p * (1 - p) / 1000));
        CHECK(std::abs(h.balance - 0.5) < 0.05);
        for (Eigen::Index i = 0; i < h.train.size(); ++i) CHECK(h.train.points.row(i).norm() < 4.0);
    }
}

TEST_CASE("generators are reproducible") {
    for (const char* name : {"1dist2", "2rotate7", "disks_100x100", "hypersphere_d3_n250"}) {
        const auto a = generate_by_name(name, 42), b = generate_by_name(name, 42), c = generate_by_name(name, 43);
        CHECK(a.train.points == b.train.points);
        CHECK(a.train.labels == b.train.labels);
        CHECK(a.test.points == b.test.points);
        CHECK(a.train.points != c.train.points);
    }
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("replicate") {
    const auto flat = replicate(5, 1, [](std::uint64_t) { return 3.0; });
    CHECK(flat.mean == 3.0);
    CHECK(flat.sd == 0.0);
    auto stat = [](std::uint64_t s) { return static_cast<double>(s % 1000); };
    const auto a = replicate(10, 9, stat), b = replicate(10, 9, stat, 2);
    CHECK(a.mean == b.mean);
    CHECK(a.sd == b.sd);
    CHECK(a.sd > 0.0);
}

TEST_CASE("true densities integrate to one") {
    for (const char* name : {"1dist2", "1scale4", "1rotate3", "disks_100x100"}) {
        const auto g = generate_by_name(name, 1);
        const double lo = -12, hi = 15, step = 0.05;
        for (int j = 1; j <= 2; ++j) {
            double mass = 0;
            for (double x = lo + step / 2; x < hi; x += step)
                for (double y = lo + step / 2; y < hi; y += step) mass += g.true_density(j, (Vector(2) << x, y).finished());
            CHECK(mass * step * step == doctest::Approx(1.0).epsilon(1e-2));
        }
    }
}

TEST_CASE("Bayes error on 1dist2") {
    const auto s = replicate(40, 1, [](std::uint64_t seed) {
        const auto g = generate_by_name("1dist2", seed);
        const auto bayes = train_baseline(BaselineKind::parse("bayes"), g.train, g.true_density, g.priors);
        return 100 * error_rate(bayes->classify_rows(g.test.points), g.test.labels);
    });
    CHECK(std::abs(s.mean - 15.8) < 1.5);
    CHECK(s.sd > s.mean / 12);
    CHECK(s.sd < s.mean / 4);
}
