#pragma once

#include <functional>
#include <span>
#include <vector>

#include "potpot/numkit.hpp"

namespace potpot {

/// n points in ℝᵈ (one per row) with labels in 1..q.
struct LabeledDataset {
    Matrix points;
    std::vector<int> labels;
    int classes = 0;

    LabeledDataset() = default;
    /// Infers q as the largest label and validates.
    LabeledDataset(Matrix pts, std::vector<int> lbl);

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index dim() const { return points.cols(); }

    /// Throws Error unless every class 1..q is present, labels are in range
    /// and all coordinates are finite.
    void validate() const;

    std::vector<int> class_counts() const;
    std::vector<double> priors() const;
    /// Rows of class j (1-based) as a matrix.
    Matrix class_points(int j) const;
    LabeledDataset subset(std::span<const Eigen::Index> rows) const;
    /// Relabels the two given classes to 1 and 2 and drops the rest.
    LabeledDataset pair(int a, int b) const;
};

/// Class-conditional density f_j(x), j 1-based.
using DensityFn = std::function<double(int cls, const Vector& x)>;

/// Tie rule shared by all decision rules: larger prior, then smaller index.
/// `scores` and `priors` are indexed 0..q-1; returns a 1-based class.
int argmax_with_ties(std::span<const double> scores, std::span<const double> priors);

/// Misclassification rate of predictions against truth.
double error_rate(std::span<const int> predicted, std::span<const int> truth);

}  // namespace potpot
