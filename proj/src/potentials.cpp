#include "potpot/potentials.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace potpot {

namespace {

double gaussian_log_profile(double t) { return -0.5 * t; }
double gaussian_log_constant(int dim) { return -0.5 * dim * std::log(2.0 * std::numbers::pi); }

Matrix estimate_scatter(const Matrix& points, const FitOptions& options) {
    return options.covariance ? options.covariance(points) : covariance_of(points);
}

double log_scale_of(const SphericalKernel& kernel, Eigen::Index total, int rank, double log_det, double h2) {
    return -std::log(static_cast<double>(total)) - 0.5 * rank * std::log(h2) - 0.5 * log_det +
           kernel.log_constant(rank);
}

// log Σ_i exp(log_profile(d_i / h²)) over one column of squared distances.
double log_kernel_sum(const SphericalKernel& kernel, const double* sq, Eigen::Index count, double h2,
                      std::vector<double>& scratch) {
    scratch.resize(static_cast<std::size_t>(count));
    for (Eigen::Index i = 0; i < count; ++i) scratch[static_cast<std::size_t>(i)] = kernel.log_profile(sq[i] / h2);
    return log_sum_exp(scratch.data(), scratch.size());
}

}  // namespace

const char* to_string(ScalingMode mode) { return mode == ScalingMode::Joint ? "joint" : "separate"; }

ScalingMode scaling_mode_from(const std::string& name) {
    if (name == "joint") return ScalingMode::Joint;
    if (name == "separate") return ScalingMode::Separate;
    throw Error("unknown scaling mode '" + name + "' (expected joint|separate)");
}

void BandwidthConfig::validate(int classes) const {
    const std::size_t want = mode == ScalingMode::Joint ? 1 : static_cast<std::size_t>(classes);
    if (h2.size() != want)
        throw Error(std::string("bandwidth config: ") + to_string(mode) + " mode needs " + std::to_string(want) +
                    " value(s), got " + std::to_string(h2.size()));
    for (double v : h2) {
        if (!(v >= kMinH2 * (1 - 1e-12) && v <= kMaxH2 * (1 + 1e-12)))
            throw Error("bandwidth h2=" + std::to_string(v) + " outside [1e-3, 1e3]");
    }
}

SphericalKernel gaussian() { return {&gaussian_log_profile, &gaussian_log_constant}; }

double gaussian_kernel(const Vector& u) {
    return std::exp(gaussian_log_constant(static_cast<int>(u.size())) + gaussian_log_profile(u.squaredNorm()));
}

std::vector<double> PotentialModel::priors() const {
    std::vector<double> p;
    p.reserve(kernels.size());
    for (const auto& k : kernels) p.push_back(k.prior);
    return p;
}

double PotentialModel::log_scale(int j, double h2) const {
    const auto& k = kernels.at(static_cast<std::size_t>(j - 1));
    return log_scale_of(kernel, total, k.transform.rank, k.transform.log_det, h2);
}

double PotentialModel::log_potential(const Vector& x, int j) const {
    if (j < 1 || j > classes()) throw Error("class index " + std::to_string(j) + " out of range");
    if (x.size() != dim) throw Error("dimension mismatch: model d=" + std::to_string(dim) + ", point d=" + std::to_string(x.size()));
    // Same arithmetic path as the batch transform so single-point and batch
    // potentials agree bit for bit.
    const DistanceCache cache(*this, x.transpose());
    return cache.log_potentials(j, kernels[static_cast<std::size_t>(j - 1)].h2)(0);
}

void PotentialModel::set_bandwidth(const BandwidthConfig& cfg) {
    cfg.validate(classes());
    if (cfg.mode != mode) throw Error("bandwidth config mode does not match the fitted scaling mode");
    for (int j = 1; j <= classes(); ++j) kernels[static_cast<std::size_t>(j - 1)].h2 = cfg.for_class(j);
}

PotentialModel fit_sphering(const LabeledDataset& data, ScalingMode mode, const FitOptions& options) {
    data.validate();
    PotentialModel model;
    model.mode = mode;
    model.total = data.size();
    model.dim = data.dim();
    model.kernel = options.kernel;
    const auto priors = data.priors();

    SpheringTransform pooled;
    if (mode == ScalingMode::Joint) {
        pooled = sphering_from(mean_of(data.points), estimate_scatter(data.points, options), options.eigen_tol);
        if (pooled.rank < data.dim())
            model.warnings.push_back("pooled covariance singular (rank " + std::to_string(pooled.rank) + " of " +
                                     std::to_string(data.dim()) + "); using pseudoinverse");
    }
    for (int j = 1; j <= data.classes; ++j) {
        const Matrix pts = data.class_points(j);
        ClassKernel k;
        k.prior = priors[static_cast<std::size_t>(j - 1)];
        if (mode == ScalingMode::Joint) {
            k.transform = pooled;
        } else {
            k.transform = sphering_from(mean_of(pts), estimate_scatter(pts, options), options.eigen_tol);
            if (k.transform.rank < data.dim())
                model.warnings.push_back("class " + std::to_string(j) + " covariance singular (rank " +
                                         std::to_string(k.transform.rank) + " of " + std::to_string(data.dim()) +
                                         "); using pseudoinverse");
        }
        k.sphered = k.transform.apply_rows(pts);
        model.kernels.push_back(std::move(k));
    }
    return model;
}

PotentialModel fit_potential_model(const LabeledDataset& data, const BandwidthConfig& cfg, const FitOptions& options) {
    cfg.validate(data.classes);
    PotentialModel model = fit_sphering(data, cfg.mode, options);
    model.set_bandwidth(cfg);
    return model;
}

double potential_at(const PotentialModel& model, const Vector& x, int j) {
    return std::exp(model.log_potential(x, j));
}

PotPotPlot PotPotPlot::pair(int a, int b) const {
    PotPotPlot out;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < size(); ++i) {
        const int l = labels[static_cast<std::size_t>(i)];
        if (l == a || l == b) rows.push_back(i);
    }
    out.z.resize(static_cast<Eigen::Index>(rows.size()), 2);
    std::size_t na = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.z(static_cast<Eigen::Index>(r), 0) = z(rows[r], a - 1);
        out.z(static_cast<Eigen::Index>(r), 1) = z(rows[r], b - 1);
        const bool is_a = labels[static_cast<std::size_t>(rows[r])] == a;
        out.labels.push_back(is_a ? 1 : 2);
        na += is_a;
    }
    const double n = static_cast<double>(rows.size());
    out.priors = {static_cast<double>(na) / n, static_cast<double>(rows.size() - na) / n};
    return out;
}

Matrix pot_pot_transform(const PotentialModel& model, const Matrix& points) {
    if (points.cols() != model.dim)
        throw Error("dimension mismatch: model d=" + std::to_string(model.dim) + ", points d=" + std::to_string(points.cols()));
    DistanceCache cache(model, points);
    Matrix z(points.rows(), model.classes());
    for (int j = 1; j <= model.classes(); ++j)
        z.col(j - 1) = cache.potentials(j, model.kernels[static_cast<std::size_t>(j - 1)].h2);
    return z;
}

PotPotPlot pot_pot_plot(const PotentialModel& model, const LabeledDataset& data) {
    return PotPotPlot{pot_pot_transform(model, data.points), data.labels, model.priors()};
}

DistanceCache::DistanceCache(const PotentialModel& sphering, const Matrix& queries)
    : kernel_(sphering.kernel), total_(sphering.total), n_queries_(queries.rows()) {
    if (queries.cols() != sphering.dim)
        throw Error("dimension mismatch: model d=" + std::to_string(sphering.dim) + ", points d=" +
                    std::to_string(queries.cols()));
    const SpheringTransform* last = nullptr;
    Matrix sphered_queries;
    for (const auto& k : sphering.kernels) {
        rank_.push_back(k.transform.rank);
        log_det_.push_back(k.transform.log_det);
        // Joint mode shares one transform; sphere the queries once.
        if (last == nullptr || sphering.mode == ScalingMode::Separate) sphered_queries = k.transform.apply_rows(queries);
        last = &k.transform;
        const Eigen::Index d = queries.cols();
        const Eigen::Index nj = k.sphered.rows();
        const Matrix class_t = k.sphered.transpose();
        const Matrix query_t = sphered_queries.transpose();
        Matrix dist(nj, n_queries_);
        for (Eigen::Index q = 0; q < n_queries_; ++q) {
            const double* qp = query_t.col(q).data();
            for (Eigen::Index i = 0; i < nj; ++i) {
                const double* cp = class_t.col(i).data();
                double acc = 0.0;
                for (Eigen::Index c = 0; c < d; ++c) {
                    const double diff = cp[c] - qp[c];
                    acc += diff * diff;
                }
                dist(i, q) = acc;
            }
        }
        sq_dist_.push_back(std::move(dist));
    }
}

Vector DistanceCache::log_potentials(int j, double h2) const {
    const auto idx = static_cast<std::size_t>(j - 1);
    const Matrix& d = sq_dist_.at(idx);
    const double scale = log_scale_of(kernel_, total_, rank_[idx], log_det_[idx], h2);
    Vector out(n_queries_);
    std::vector<double> scratch;
    for (Eigen::Index q = 0; q < n_queries_; ++q)
        out(q) = scale + log_kernel_sum(kernel_, d.col(q).data(), d.rows(), h2, scratch);
    return out;
}

Vector DistanceCache::potentials(int j, double h2) const {
    // Scalar std::exp, not Eigen's vectorized exp: batch values must match potential_at bitwise.
    Vector out = log_potentials(j, h2);
    for (Eigen::Index q = 0; q < out.size(); ++q) out(q) = std::exp(out(q));
    return out;
}

}  // namespace potpot
