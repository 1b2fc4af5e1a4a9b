#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "potpot/dataset.hpp"
#include "potpot/potentials.hpp"
#include "potpot/separators.hpp"

namespace potpot {

/// Trained, immutable decision rule. classify() is thread-safe.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual int classify(const Vector& x) const = 0;
    virtual std::vector<int> classify_rows(const Matrix& points) const;
    virtual std::string name() const = 0;

    std::vector<std::string> warnings;
};

/// Kernel potentials plus a separator on the plot.
class PotPotClassifier final : public Classifier {
public:
    PotPotClassifier(const LabeledDataset& data, const BandwidthConfig& cfg, SeparatorKind kind,
                     const SeparatorOptions& options = {}, const FitOptions& fit = {});
    int classify(const Vector& x) const override;
    std::vector<int> classify_rows(const Matrix& points) const override;
    std::string name() const override;

    const PotentialModel& model() const { return model_; }
    const Separator& separator() const { return separator_; }
    const BandwidthConfig& bandwidth() const { return config_; }

private:
    PotentialModel model_;
    BandwidthConfig config_;
    SeparatorKind kind_;
    Separator separator_;
};

enum class BaselineType { Bayes, Lda, Qda, KnnOriginal, DDPlot };
enum class DepthKind { Mahalanobis, Spatial };

struct BaselineKind {
    BaselineType type = BaselineType::Lda;
    DepthKind depth = DepthKind::Mahalanobis;   ///< DDPlot only
    SeparatorKind separator = SeparatorKind::Alpha;  ///< DDPlot only
    int k_max = 0;                               ///< KnnOriginal; 0 = ⌊n/2⌋

    /// bayes, lda, qda, knn, dd-mah-alpha, dd-spat-knn, ...
    static BaselineKind parse(const std::string& name);
    std::string name() const;
};

/// Bayes needs the generator's densities and population priors; the other kinds ignore them.
std::unique_ptr<Classifier> train_baseline(const BaselineKind& kind, const LabeledDataset& data,
                                           const DensityFn& densities = {}, std::vector<double> priors = {});

/// Depth reference: a class sample and its sphering.
struct DepthReference {
    SpheringTransform transform;
    Matrix sphered;

    explicit DepthReference(const Matrix& sample, double tol = kEigenTolerance);
};

/// 1 / (1 + (x−μ̂)ᵀ Σ̂⁻¹ (x−μ̂)); pseudoinverse for a singular Σ̂.
double mahalanobis_depth(const Vector& x, const DepthReference& ref);
double mahalanobis_depth(const Vector& x, const Matrix& reference);

/// 1 − ‖mean of unit vectors from the reference points to x‖, in sphered coordinates.
double spatial_depth(const Vector& x, const DepthReference& ref);
double spatial_depth(const Vector& x, const Matrix& reference);

/// Maps points to their depth with respect to each class (n × q).
Matrix dd_transform(DepthKind depth, const std::vector<DepthReference>& refs, const Matrix& points);

class DDPlotClassifier final : public Classifier {
public:
    DDPlotClassifier(DepthKind depth, SeparatorKind kind, const LabeledDataset& data,
                     const SeparatorOptions& options = {});
    int classify(const Vector& x) const override;
    std::vector<int> classify_rows(const Matrix& points) const override;
    std::string name() const override;

    const PotPotPlot& plot() const { return plot_; }
    const Separator& separator() const { return separator_; }

private:
    DepthKind depth_;
    SeparatorKind kind_;
    std::vector<DepthReference> refs_;
    PotPotPlot plot_;
    Separator separator_;
};

std::unique_ptr<Classifier> dd_plot_classify(DepthKind depth, SeparatorKind kind, const LabeledDataset& data,
                                             const SeparatorOptions& options = {});

struct EfficiencyIndex {
    double value = 1.0;
    bool undefined = false;  ///< reference error 0 while the classifier errs
};

/// err / ref_err; both zero → 1; ref_err zero and err positive → undefined.
EfficiencyIndex efficiency_index(double err, double ref_err);

}  // namespace potpot
