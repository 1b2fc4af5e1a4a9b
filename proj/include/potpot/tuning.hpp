#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "potpot/dataset.hpp"
#include "potpot/potentials.hpp"
#include "potpot/separators.hpp"

namespace potpot {

/// Repeated hold-out protocol: at most `max_iterations` folds of m = ⌈n/max_iterations⌉ points.
struct CvProtocol {
    int max_iterations = 200;
    std::uint64_t fold_seed = 1;

    Eigen::Index holdout_size(Eigen::Index n) const;
    Eigen::Index folds(Eigen::Index n) const;
};

/// Log-spaced h² grid: value_i = 10^(lo + (hi − lo)·i/(count − 1)).
struct GridSpec {
    double log10_min = -3.0;
    double log10_max = 3.0;
    int count = 60;

    double log10_value(int i) const;
    double value(int i) const;
};

enum class TuneStrategy { Joint, Separate, RegressiveSeparate, RuleOfThumb, Extreme };
const char* to_string(TuneStrategy s);

/// Shape of g in the regressive search.
enum class BandwidthRegression { Linear, Quadratic, QuadraticInverted };

struct Evaluation {
    BandwidthConfig config;
    double error = 0.0;
};

struct TuneReport {
    TuneStrategy strategy = TuneStrategy::Joint;
    std::vector<Evaluation> evaluations;
    BandwidthConfig best;
    double best_error = 1.0;
    /// Regressive search only: class whose bandwidth is the regressor (the larger class)
    /// and the fitted coefficients of g.
    int primary_class = 1;
    std::vector<double> regression_coefficients;
};

/// Estimates misclassification rates for a batch of bandwidth configurations.
/// Implementations evaluate a batch exactly as they would one config at a time.
class ErrorEstimator {
public:
    virtual ~ErrorEstimator() = default;
    virtual std::vector<double> evaluate(std::span<const BandwidthConfig> configs) = 0;
    /// The sample whose sizes drive the regressive search and the rule of thumb.
    virtual const LabeledDataset& training() const = 0;
    /// Total configurations evaluated so far.
    std::size_t evaluations() const { return evaluated_; }

protected:
    std::size_t evaluated_ = 0;
};

/// Stratified folds: classes are shuffled separately (fold_seed) and dealt
/// round-robin so no training remainder loses a class of ≥2 points.
std::vector<std::vector<Eigen::Index>> make_folds(const LabeledDataset& data, const CvProtocol& protocol);

class CrossValidationEstimator final : public ErrorEstimator {
public:
    CrossValidationEstimator(LabeledDataset data, SeparatorKind kind, CvProtocol protocol,
                             SeparatorOptions options = {}, FitOptions fit = {}, unsigned threads = 1);
    std::vector<double> evaluate(std::span<const BandwidthConfig> configs) override;
    const LabeledDataset& training() const override { return data_; }

private:
    LabeledDataset data_;
    SeparatorKind kind_;
    CvProtocol protocol_;
    SeparatorOptions options_;
    FitOptions fit_;
    unsigned threads_;
    std::vector<std::vector<Eigen::Index>> folds_;
};

/// Train on one sample, count errors on an independent test sample.
class HoldoutEstimator final : public ErrorEstimator {
public:
    HoldoutEstimator(LabeledDataset train, LabeledDataset test, SeparatorKind kind, SeparatorOptions options = {},
                     FitOptions fit = {});
    std::vector<double> evaluate(std::span<const BandwidthConfig> configs) override;
    const LabeledDataset& training() const override { return train_; }

private:
    LabeledDataset train_;
    LabeledDataset test_;
    SeparatorKind kind_;
    SeparatorOptions options_;
    FitOptions fit_;
};

/// Cross-validated misclassification rate of one configuration.
double cv_error(const LabeledDataset& data, const BandwidthConfig& cfg, SeparatorKind kind,
                const CvProtocol& protocol, const SeparatorOptions& options = {});

TuneReport tune_joint(ErrorEstimator& estimator, const GridSpec& grid = {});
TuneReport tune_separate(ErrorEstimator& estimator, const GridSpec& grid = {});
TuneReport tune_regressive_separate(ErrorEstimator& estimator, const GridSpec& grid = {},
                                    BandwidthRegression shape = BandwidthRegression::Linear);
/// Generalized Scott's rule h² = n^{−2/(d+4)} (n = n_j per class under Separate).
BandwidthConfig rot_bandwidth(const LabeledDataset& data, ScalingMode mode);
TuneReport tune_rule_of_thumb(ErrorEstimator& estimator, ScalingMode mode);
/// Better of h² = 10⁻³ and h² = 10³ (same value for every class); ties go to 10⁻³.
TuneReport extreme_bandwidth(ErrorEstimator& estimator, ScalingMode mode = ScalingMode::Joint);

/// The 25 probe points (log₁₀h₁², log₁₀h₂²) of the regressive search, in evaluation order.
std::vector<std::pair<double, double>> regressive_probe_points();

}  // namespace potpot
