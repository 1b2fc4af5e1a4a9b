#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "potpot/potentials.hpp"

namespace potpot {

enum class SeparatorKind { Diagonal, Knn, Alpha };

/// How binary separators are combined when q > 2.
enum class Aggregation { OneVsOne, OneVsAll };
const char* to_string(Aggregation a);
Aggregation aggregation_from(const std::string& name);

const char* to_string(SeparatorKind kind);
SeparatorKind separator_kind_from(const std::string& name);

struct SeparatorOptions {
    int k_max = 0;       ///< 0 selects ⌊n/2⌋ capped at n−1
    int max_degree = 3;  ///< α-procedure degree candidates 1..max_degree
    int alpha_folds = 10;
    Aggregation aggregation = Aggregation::OneVsOne;  ///< α with q > 2
};

/// Maximum-potential rule. Only the priors (for ties) are stored.
struct DiagonalSeparator {
    std::vector<double> priors;
};

struct KnnSeparator {
    int k = 1;
    double scale = 1.0;  ///< reference coordinates are stored divided by this
    Matrix reference;
    std::vector<int> labels;
    std::vector<double> priors;
    std::vector<double> loo_error;  ///< leave-one-out rate for k = 1..k_max
};

/// Weighted monomial (z₁/s)^a (z₂/s)^b of the scaled plot coordinates.
struct Monomial {
    int a = 0;
    int b = 0;
    double weight = 0.0;
};

struct AlphaSeparator {
    int degree = 1;
    double scale = 1.0;  ///< plot coordinates are divided by this before evaluation
    std::vector<Monomial> discriminant;
    std::vector<double> priors;
    double training_error = 0.0;
    std::vector<double> error_path;  ///< training error after each iteration
    std::vector<double> degree_cv_error;

    double evaluate(std::span<const double> z) const;
};

using BinarySeparator = std::variant<DiagonalSeparator, AlphaSeparator>;

/// q > 2 built from binary separators. OneVsOne: one per pair (a, b), trained
/// on that pair's two plot columns. OneVsAll: one per class j on the plot
/// (φ_j, Σ_{k≠j} φ_k), with j labeled 1.
struct MulticlassSeparator {
    Aggregation aggregation = Aggregation::OneVsOne;
    std::vector<std::pair<int, int>> pairs;  ///< OneVsAll stores (j, 0)
    std::vector<BinarySeparator> binary;
    std::vector<double> priors;
};

using Separator = std::variant<DiagonalSeparator, KnnSeparator, AlphaSeparator, MulticlassSeparator>;

/// argmax of the potentials; ties go to the larger prior, then the smaller index.
int classify_diagonal(std::span<const double> z, std::span<const double> priors);

/// Selects k ∈ 1..k_max minimizing the leave-one-out error on the plot (smallest k on ties).
KnnSeparator train_knn_plot(const PotPotPlot& plot, int k_max);
int classify_knn_plot(const KnnSeparator& sep, std::span<const double> z);

struct LabeledPoint2 {
    double x = 0.0;
    double y = 0.0;
    int label = 1;  ///< 1 or 2
};

struct LineSearchResult {
    double theta = 0.0;  ///< direction (cos θ, sin θ); positive projection means class 1
    int errors = 0;
};

/// Exact minimum-misclassification line through the origin. Points at the
/// origin are charged to `zero_class`. Sweeps the 2n critical angles and
/// returns the midpoint of the best angular gap (widest among ties).
LineSearchResult exact_origin_line_search(std::span<const LabeledPoint2> points, int zero_class = 1);

/// α-procedure at a fixed polynomial degree, trained on a binary plot.
AlphaSeparator train_alpha_degree(const PotPotPlot& plot, int degree);
/// α-procedure with the degree chosen by k-fold cross-validation on the plot.
AlphaSeparator train_alpha(const PotPotPlot& plot, int max_degree, int folds = 10);
int classify_alpha(const AlphaSeparator& sep, std::span<const double> z);

MulticlassSeparator train_multiclass(SeparatorKind kind, const PotPotPlot& plot, Aggregation aggregation,
                                     const SeparatorOptions& options = {});
/// OneVsOne: majority vote, ties by prior then index. OneVsAll: among classes
/// whose separator claims the point, the largest φ_j − Σ_{k≠j} φ_k (all
/// classes compete when none claims it).
int classify_multiclass(const MulticlassSeparator& sep, std::span<const double> z);

/// α on q > 2 plots is aggregated per `options.aggregation`.
Separator train_separator(SeparatorKind kind, const PotPotPlot& plot, const SeparatorOptions& options = {});
int classify(const Separator& sep, std::span<const double> z);
std::vector<int> classify_rows(const Separator& sep, const Matrix& z);

}  // namespace potpot
