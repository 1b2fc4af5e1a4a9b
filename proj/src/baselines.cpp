#include "potpot/baselines.hpp"

#include <cmath>
#include <limits>

namespace potpot {

namespace {

std::vector<double> row_span(const Vector& x) { return {x.data(), x.data() + x.size()}; }

std::vector<double> log_priors(const std::vector<double>& priors) {
    std::vector<double> out;
    for (double p : priors) out.push_back(p > 0 ? std::log(p) : -std::numeric_limits<double>::infinity());
    return out;
}

class BayesClassifier final : public Classifier {
public:
    BayesClassifier(DensityFn density, std::vector<double> priors) : density_(std::move(density)), priors_(std::move(priors)) {}
    int classify(const Vector& x) const override {
        std::vector<double> scores(priors_.size());
        for (std::size_t j = 0; j < priors_.size(); ++j) scores[j] = priors_[j] * density_(static_cast<int>(j) + 1, x);
        return argmax_with_ties(scores, priors_);
    }
    std::string name() const override { return "bayes"; }

private:
    DensityFn density_;
    std::vector<double> priors_;
};

// Gaussian discriminant: δ_j = −½‖R_j(x − μ_j)‖² − ½ log det_j + log p_j.
// LDA shares one R (pooled covariance, divisor n − q) and drops the determinant.
class GaussianDiscriminant final : public Classifier {
public:
    GaussianDiscriminant(const LabeledDataset& data, bool quadratic) : quadratic_(quadratic), dim_(data.dim()) {
        data.validate();
        priors_ = data.priors();
        log_priors_ = log_priors(priors_);
        const auto counts = data.class_counts();
        std::vector<Vector> means;
        for (int j = 1; j <= data.classes; ++j) {
            if (counts[static_cast<std::size_t>(j - 1)] < 2)
                throw Error(std::string(quadratic ? "qda" : "lda") + ": class " + std::to_string(j) + " has fewer than 2 points");
            means.push_back(mean_of(data.class_points(j)));
        }
        if (quadratic) {
            for (int j = 1; j <= data.classes; ++j) {
                transforms_.push_back(sphering_of(data.class_points(j)));
                if (transforms_.back().rank < dim_)
                    warnings.push_back("qda: class " + std::to_string(j) + " covariance is singular; using the pseudoinverse");
            }
        } else {
            if (data.size() <= data.classes) throw Error("lda: need more points than classes");
            Matrix pooled = Matrix::Zero(dim_, dim_);
            for (int j = 1; j <= data.classes; ++j)
                pooled += static_cast<double>(counts[static_cast<std::size_t>(j - 1)] - 1) * covariance_of(data.class_points(j));
            pooled /= static_cast<double>(data.size() - data.classes);
            for (int j = 1; j <= data.classes; ++j) transforms_.push_back(sphering_from(means[static_cast<std::size_t>(j - 1)], pooled));
            if (transforms_.front().rank < dim_) warnings.push_back("lda: pooled covariance is singular; using the pseudoinverse");
        }
    }

    int classify(const Vector& x) const override {
        if (x.size() != dim_) throw Error("dimension mismatch");
        std::vector<double> scores(transforms_.size());
        for (std::size_t j = 0; j < transforms_.size(); ++j) {
            const auto& t = transforms_[j];
            scores[j] = -0.5 * t.apply(x).squaredNorm() + log_priors_[j];
            if (quadratic_) scores[j] -= 0.5 * t.log_det;
        }
        return argmax_with_ties(scores, priors_);
    }
    std::string name() const override { return quadratic_ ? "qda" : "lda"; }

private:
    bool quadratic_;
    Eigen::Index dim_;
    std::vector<double> priors_;
    std::vector<double> log_priors_;
    std::vector<SpheringTransform> transforms_;
};

// k-NN with Euclidean distance on jointly sphered data, k by leave-one-out.
class KnnOriginalClassifier final : public Classifier {
public:
    KnnOriginalClassifier(const LabeledDataset& data, int k_max) : data_dim_(data.dim()) {
        data.validate();
        sphering_ = sphering_of(data.points);
        const PotPotPlot plot{sphering_.apply_rows(data.points), data.labels, data.priors()};
        const auto n = static_cast<int>(data.size());
        if (n < 2) throw Error("knn: need at least 2 points");
        k_max = k_max > 0 ? std::min(k_max, n - 1) : std::max(1, std::min(n / 2, n - 1));
        sep_ = train_knn_plot(plot, k_max);
    }
    int classify(const Vector& x) const override {
        if (x.size() != data_dim_) throw Error("dimension mismatch");
        return classify_knn_plot(sep_, row_span(sphering_.apply(x)));
    }
    std::vector<int> classify_rows(const Matrix& points) const override {
        if (points.cols() != data_dim_) throw Error("dimension mismatch");
        const Matrix s = sphering_.apply_rows(points);
        std::vector<int> out;
        for (Eigen::Index i = 0; i < s.rows(); ++i) out.push_back(classify_knn_plot(sep_, row_span(s.row(i).transpose())));
        return out;
    }
    std::string name() const override { return "knn"; }
    int k() const { return sep_.k; }

private:
    Eigen::Index data_dim_;
    SpheringTransform sphering_;
    KnnSeparator sep_;
};

const char* depth_name(DepthKind d) { return d == DepthKind::Mahalanobis ? "mah" : "spat"; }

double depth_of(DepthKind kind, const Vector& x, const DepthReference& ref) {
    return kind == DepthKind::Mahalanobis ? mahalanobis_depth(x, ref) : spatial_depth(x, ref);
}

}  // namespace

std::vector<int> Classifier::classify_rows(const Matrix& points) const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(points.rows()));
    for (Eigen::Index i = 0; i < points.rows(); ++i) out.push_back(classify(points.row(i).transpose()));
    return out;
}

// ------------------------------------------------------------- pot-pot

PotPotClassifier::PotPotClassifier(const LabeledDataset& data, const BandwidthConfig& cfg, SeparatorKind kind,
                                   const SeparatorOptions& options, const FitOptions& fit)
    : model_(fit_potential_model(data, cfg, fit)), config_(cfg), kind_(kind) {
    warnings = model_.warnings;
    separator_ = train_separator(kind, pot_pot_plot(model_, data), options);
}

int PotPotClassifier::classify(const Vector& x) const {
    const Matrix z = pot_pot_transform(model_, x.transpose());
    return potpot::classify(separator_, row_span(z.row(0).transpose()));
}

std::vector<int> PotPotClassifier::classify_rows(const Matrix& points) const {
    return potpot::classify_rows(separator_, pot_pot_transform(model_, points));
}

std::string PotPotClassifier::name() const {
    return std::string("potpot-") + to_string(config_.mode) + "-" + to_string(kind_);
}

// ------------------------------------------------------------- depths

DepthReference::DepthReference(const Matrix& sample, double tol) {
    if (sample.rows() < 2) throw Error("depth: reference sample needs at least 2 points");
    transform = sphering_of(sample, tol);
    sphered = transform.apply_rows(sample);
}

double mahalanobis_depth(const Vector& x, const DepthReference& ref) {
    return 1.0 / (1.0 + ref.transform.apply(x).squaredNorm());
}

double mahalanobis_depth(const Vector& x, const Matrix& reference) { return mahalanobis_depth(x, DepthReference(reference)); }

double spatial_depth(const Vector& x, const DepthReference& ref) {
    const Vector xs = ref.transform.apply(x);
    Vector sum = Vector::Zero(xs.size());
    for (Eigen::Index i = 0; i < ref.sphered.rows(); ++i) {
        const Vector diff = xs - ref.sphered.row(i).transpose();
        const double norm = diff.norm();
        if (norm > 0.0) sum += diff / norm;
    }
    return 1.0 - (sum / static_cast<double>(ref.sphered.rows())).norm();
}

double spatial_depth(const Vector& x, const Matrix& reference) { return spatial_depth(x, DepthReference(reference)); }

Matrix dd_transform(DepthKind depth, const std::vector<DepthReference>& refs, const Matrix& points) {
    Matrix z(points.rows(), static_cast<Eigen::Index>(refs.size()));
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const Vector x = points.row(i).transpose();
        for (std::size_t j = 0; j < refs.size(); ++j) z(i, static_cast<Eigen::Index>(j)) = depth_of(depth, x, refs[j]);
    }
    return z;
}

DDPlotClassifier::DDPlotClassifier(DepthKind depth, SeparatorKind kind, const LabeledDataset& data,
                                   const SeparatorOptions& options)
    : depth_(depth), kind_(kind) {
    data.validate();
    for (int j = 1; j <= data.classes; ++j) {
        refs_.emplace_back(data.class_points(j));
        if (refs_.back().transform.rank < data.dim())
            warnings.push_back("dd-plot: class " + std::to_string(j) + " covariance is singular; using the pseudoinverse");
    }
    plot_ = PotPotPlot{dd_transform(depth, refs_, data.points), data.labels, data.priors()};
    separator_ = train_separator(kind, plot_, options);
}

int DDPlotClassifier::classify(const Vector& x) const {
    std::vector<double> z;
    for (const auto& r : refs_) z.push_back(depth_of(depth_, x, r));
    return potpot::classify(separator_, z);
}

std::vector<int> DDPlotClassifier::classify_rows(const Matrix& points) const {
    return potpot::classify_rows(separator_, dd_transform(depth_, refs_, points));
}

std::string DDPlotClassifier::name() const { return std::string("dd-") + depth_name(depth_) + "-" + to_string(kind_); }

std::unique_ptr<Classifier> dd_plot_classify(DepthKind depth, SeparatorKind kind, const LabeledDataset& data,
                                             const SeparatorOptions& options) {
    return std::make_unique<DDPlotClassifier>(depth, kind, data, options);
}

// ------------------------------------------------------------- dispatch

BaselineKind BaselineKind::parse(const std::string& name) {
    BaselineKind k;
    if (name == "bayes") k.type = BaselineType::Bayes;
    else if (name == "lda") k.type = BaselineType::Lda;
    else if (name == "qda") k.type = BaselineType::Qda;
    else if (name == "knn") k.type = BaselineType::KnnOriginal;
    else if (name.rfind("dd-", 0) == 0) {
        k.type = BaselineType::DDPlot;
        const auto dash = name.find('-', 3);
        const std::string depth = name.substr(3, dash == std::string::npos ? std::string::npos : dash - 3);
        if (depth == "mah") k.depth = DepthKind::Mahalanobis;
        else if (depth == "spat") k.depth = DepthKind::Spatial;
        else throw Error("unknown depth '" + depth + "' (expected mah|spat)");
        if (dash != std::string::npos) k.separator = separator_kind_from(name.substr(dash + 1));
    } else {
        throw Error("unknown baseline '" + name + "'");
    }
    return k;
}

std::string BaselineKind::name() const {
    switch (type) {
        case BaselineType::Bayes: return "bayes";
        case BaselineType::Lda: return "lda";
        case BaselineType::Qda: return "qda";
        case BaselineType::KnnOriginal: return "knn";
        case BaselineType::DDPlot: return std::string("dd-") + depth_name(depth) + "-" + to_string(separator);
    }
    return "?";
}

std::unique_ptr<Classifier> train_baseline(const BaselineKind& kind, const LabeledDataset& data,
                                           const DensityFn& densities, std::vector<double> priors) {
    switch (kind.type) {
        case BaselineType::Bayes:
            if (!densities) throw Error("bayes: needs the true class densities (generated data only)");
            if (priors.empty()) priors = data.priors();
            return std::make_unique<BayesClassifier>(densities, std::move(priors));
        case BaselineType::Lda: return std::make_unique<GaussianDiscriminant>(data, false);
        case BaselineType::Qda: return std::make_unique<GaussianDiscriminant>(data, true);
        case BaselineType::KnnOriginal: return std::make_unique<KnnOriginalClassifier>(data, kind.k_max);
        case BaselineType::DDPlot: return dd_plot_classify(kind.depth, kind.separator, data);
    }
    throw Error("unknown baseline kind");
}

EfficiencyIndex efficiency_index(double err, double ref_err) {
    if (err < 0 || ref_err < 0) throw Error("efficiency index: negative error rate");
    if (ref_err == 0.0) return err == 0.0 ? EfficiencyIndex{1.0, false} : EfficiencyIndex{std::numeric_limits<double>::quiet_NaN(), true};
    return {err / ref_err, false};
}

}  // namespace potpot
