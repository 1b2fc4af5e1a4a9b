#include "potpot/datagen.hpp"

#include <cmath>
#include <numbers>
#include <regex>

#include "potpot/parallel.hpp"

namespace potpot {

namespace {

Matrix rotation(double a) {
    Matrix r(2, 2);
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return r;
}

NormalSpec normal2(double mx, double my, double vx, double vy) {
    NormalSpec s;
    s.mean = Vector(2);
    s.mean << mx, my;
    s.covariance = Matrix::Zero(2, 2);
    s.covariance(0, 0) = vx;
    s.covariance(1, 1) = vy;
    return s;
}

Matrix sample_normal(const NormalSpec& spec, int n, Rng& rng) {
    const Matrix lower = Eigen::LLT<Matrix>(spec.covariance).matrixL();
    std::normal_distribution<double> gauss;
    const Eigen::Index d = spec.mean.size();
    Matrix out(n, d);
    Vector z(d);
    for (int i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < d; ++c) z(c) = gauss(rng);
        out.row(i) = (spec.mean + lower * z).transpose();
    }
    return out;
}

LabeledDataset stack_classes(const std::vector<Matrix>& classes) {
    Eigen::Index n = 0;
    for (const auto& c : classes) n += c.rows();
    Matrix pts(n, classes.front().cols());
    std::vector<int> labels;
    Eigen::Index r = 0;
    for (std::size_t j = 0; j < classes.size(); ++j) {
        pts.middleRows(r, classes[j].rows()) = classes[j];
        r += classes[j].rows();
        labels.insert(labels.end(), static_cast<std::size_t>(classes[j].rows()), static_cast<int>(j) + 1);
    }
    return LabeledDataset(std::move(pts), std::move(labels));
}

// Uniform direction on the unit sphere in ℝᵈ.
Vector random_direction(int d, Rng& rng) {
    std::normal_distribution<double> gauss;
    Vector v(d);
    do {
        for (int c = 0; c < d; ++c) v(c) = gauss(rng);
    } while (v.norm() == 0.0);
    return v / v.norm();
}

double unit_ball_volume(int d) {
    return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

// Point uniform in the shell r1 < ‖x‖ < r2 via the radius inverse CDF.
Vector sample_shell(int d, double r1, double r2, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double r;
    do {
        const double u = unif(rng);
        r = std::pow(std::pow(r1, d) + u * (std::pow(r2, d) - std::pow(r1, d)), 1.0 / d);
    } while (!(r > r1 && r < r2));
    return r * random_direction(d, rng);
}

struct Ring {
    double inner;
    double outer;
};

const std::array<std::array<Ring, 2>, 2> kDiskRings{{{{{0, 1}, {2, 3}}}, {{{1, 2}, {3, 4}}}}};

double shell_volume(int d, Ring r) { return std::pow(r.outer, d) - std::pow(r.inner, d); }

Matrix sample_disk_class(int cls, int n, int d, Rng& rng) {
    const auto& rings = kDiskRings[static_cast<std::size_t>(cls - 1)];
    const double w0 = shell_volume(d, rings[0]);
    const double w1 = shell_volume(d, rings[1]);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix out(n, d);
    for (int i = 0; i < n; ++i) {
        const Ring& r = unif(rng) * (w0 + w1) < w0 ? rings[0] : rings[1];
        out.row(i) = sample_shell(d, r.inner, r.outer, rng).transpose();
    }
    return out;
}

int hypersphere_label(const Vector& x) {
    const double r = x.norm();
    const bool raw1 = (r > 0 && r < 1) || (r > 2 && r < 3);
    const bool flip = x(0) > 0;
    return (raw1 != flip) ? 1 : 2;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double normal_density(const Vector& x, const NormalSpec& spec) {
    const Eigen::LLT<Matrix> llt(spec.covariance);
    const Vector diff = x - spec.mean;
    const Vector w = llt.matrixL().solve(diff);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double d = static_cast<double>(x.size());
    return std::exp(-0.5 * w.squaredNorm() - 0.5 * log_det - 0.5 * d * std::log(2.0 * std::numbers::pi));
}

std::array<NormalSpec, 2> normal_family_specs(NormalFamily family, int index) {
    auto bad = [&] { return Error("invalid family index " + std::to_string(index)); };
    switch (family) {
        case NormalFamily::Location:
            if (index < 1 || index > 4) throw bad();
            return {normal2(0, 0, 1, 1), normal2(index, 0, 1, 1)};
        case NormalFamily::Scale:
            if (index < 1 || index > 5) throw bad();
            return {normal2(0, 0, 1, 1), normal2(3, 0, 1, index)};
        case NormalFamily::ScaleStar:
            if (index < 1 || index > 5) throw bad();
            return {normal2(0, 0, 1, 1), normal2(3, 0, index, 1)};
        case NormalFamily::Rotation: {
            if (index < 1 || index > 9) throw bad();
            // Sets 1–5 turn C₂ through 0..π/2; sets 6–9 keep C₂ at π/2 and turn C₁.
            const double step = std::numbers::pi / 8;
            const double a2 = step * std::min(index - 1, 4);
            const double a1 = step * std::max(index - 5, 0);
            NormalSpec c1 = normal2(0, 0, 1, 5), c2 = normal2(3, 0, 1, 5);
            c1.covariance = rotation(a1) * c1.covariance * rotation(a1).transpose();
            c2.covariance = rotation(a2) * c2.covariance * rotation(a2).transpose();
            return {c1, c2};
        }
    }
    throw bad();
}

GeneratedSet gen_normal_series(int series, NormalFamily family, int index, std::uint64_t seed) {
    if (series != 1 && series != 2) throw Error("normal series must be 1 or 2");
    const auto specs = normal_family_specs(family, index);
    const int n1 = series == 1 ? 100 : 1000, n2 = series == 1 ? 100 : 300;
    const int t1 = series == 1 ? 300 : 1000, t2 = series == 1 ? 300 : 300;

    Rng train_rng(derive_seed(seed, 1)), test_rng(derive_seed(seed, 2));
    GeneratedSet out;
    static const char* names[] = {"dist", "scale", "scale*", "rotate"};
    out.name = std::to_string(series) + names[static_cast<int>(family)] + std::to_string(index);
    out.train = stack_classes({sample_normal(specs[0], n1, train_rng), sample_normal(specs[1], n2, train_rng)});
    out.test = stack_classes({sample_normal(specs[0], t1, test_rng), sample_normal(specs[1], t2, test_rng)});
    out.priors = {static_cast<double>(n1) / (n1 + n2), static_cast<double>(n2) / (n1 + n2)};
    out.true_density = [specs](int cls, const Vector& x) { return normal_density(x, specs.at(static_cast<std::size_t>(cls - 1))); };
    return out;
}

GeneratedSet gen_disks(int n1, int n2, std::uint64_t seed, int dim) {
    if (n1 < 1 || n2 < 1 || dim < 1) throw Error("disks: sizes and dimension must be positive");
    Rng train_rng(derive_seed(seed, 1)), test_rng(derive_seed(seed, 2));
    GeneratedSet out;
    out.name = "disks_" + std::to_string(n1) + "x" + std::to_string(n2);
    out.train = stack_classes({sample_disk_class(1, n1, dim, train_rng), sample_disk_class(2, n2, dim, train_rng)});
    out.test = stack_classes({sample_disk_class(1, 3 * n1, dim, test_rng), sample_disk_class(2, 3 * n2, dim, test_rng)});
    out.priors = {static_cast<double>(n1) / (n1 + n2), static_cast<double>(n2) / (n1 + n2)};
    out.true_density = [dim](int cls, const Vector& x) {
        const auto& rings = kDiskRings.at(static_cast<std::size_t>(cls - 1));
        const double r = x.norm();
        double vol = 0.0;
        bool inside = false;
        for (const Ring& ring : rings) {
            vol += shell_volume(dim, ring);
            inside = inside || (r > ring.inner && r < ring.outer);
        }
        return inside ? 1.0 / (vol * unit_ball_volume(dim)) : 0.0;
    };
    return out;
}

double hypersphere_class1_probability(int d) {
    return (1.0 + std::pow(3.0, d) - std::pow(2.0, d)) / std::pow(4.0, d);
}

HypersphereSet gen_hyperspheres(int d, int n, std::uint64_t seed) {
    if (d < 1 || n < 2) throw Error("hyperspheres: need d >= 1 and n >= 2");
    auto draw = [&](Rng& rng, int count, double* raw_fraction) {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Matrix pts(count, d);
        std::vector<int> labels;
        int raw1 = 0;
        for (int i = 0; i < count; ++i) {
            const Vector x = 4.0 * std::pow(unif(rng), 1.0 / d) * random_direction(d, rng);
            pts.row(i) = x.transpose();
            const double r = x.norm();
            raw1 += (r < 1) || (r > 2 && r < 3);
            labels.push_back(hypersphere_label(x));
        }
        if (raw_fraction) *raw_fraction = static_cast<double>(raw1) / count;
        return std::pair{std::move(pts), std::move(labels)};
    };
    HypersphereSet out;
    out.name = "hypersphere_d" + std::to_string(d) + "_n" + std::to_string(n);
    Rng train_rng(derive_seed(seed, 1)), test_rng(derive_seed(seed, 2));
    auto [tp, tl] = draw(train_rng, n, &out.raw_fraction);
    int ones = 0;
    for (int l : tl) ones += l == 1;
    out.balance = static_cast<double>(ones) / n;
    // The dataset contract needs both classes present; a tiny n may miss one.
    out.train.points = std::move(tp);
    out.train.labels = std::move(tl);
    out.train.classes = 2;
    auto [sp, sl] = draw(test_rng, n, nullptr);
    out.test.points = std::move(sp);
    out.test.labels = std::move(sl);
    out.test.classes = 2;
    out.raw_probability = hypersphere_class1_probability(d);
    out.priors = {0.5, 0.5};
    out.true_density = [d](int cls, const Vector& x) {
        if (x.norm() >= 4.0) return 0.0;
        // p_j f_j = 1/vol(ball) on the class region; p_j = 1/2.
        return hypersphere_label(x) == cls ? 2.0 / (unit_ball_volume(d) * std::pow(4.0, d)) : 0.0;
    };
    return out;
}

GeneratedSet generate_by_name(const std::string& name, std::uint64_t seed) {
    std::smatch m;
    static const std::regex normal_re(R"(([12])(dist|location|scale\*|scalestar|scale|rotate|rotation)(\d+))");
    static const std::regex disks_re(R"(disks_(\d+)x(\d+))");
    static const std::regex sphere_re(R"(hypersphere_d(\d+)_n(\d+))");
    if (std::regex_match(name, m, normal_re)) {
        const std::string fam = m[2];
        NormalFamily family = NormalFamily::Location;
        if (fam == "scale") family = NormalFamily::Scale;
        else if (fam == "scale*" || fam == "scalestar") family = NormalFamily::ScaleStar;
        else if (fam == "rotate" || fam == "rotation") family = NormalFamily::Rotation;
        return gen_normal_series(std::stoi(m[1]), family, std::stoi(m[3]), seed);
    }
    if (std::regex_match(name, m, disks_re)) return gen_disks(std::stoi(m[1]), std::stoi(m[2]), seed);
    if (std::regex_match(name, m, sphere_re)) return gen_hyperspheres(std::stoi(m[1]), std::stoi(m[2]), seed);
    throw Error("unknown generator '" + name + "'");
}

Summary replicate(int count, std::uint64_t master_seed, const std::function<double(std::uint64_t)>& stat,
                  unsigned threads) {
    if (count < 2) throw Error("replicate: need at least 2 replications");
    std::vector<double> values(static_cast<std::size_t>(count));
    parallel_for(values.size(), threads, [&](std::size_t r) { values[r] = stat(derive_seed(master_seed, r)); });
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= count;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (count - 1))};
}

}  // namespace potpot
