#include "potpot/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace potpot {

LabeledDataset::LabeledDataset(Matrix pts, std::vector<int> lbl)
    : points(std::move(pts)), labels(std::move(lbl)) {
    classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
    validate();
}

void LabeledDataset::validate() const {
    if (static_cast<std::size_t>(points.rows()) != labels.size())
        throw Error("dataset: " + std::to_string(points.rows()) + " points but " + std::to_string(labels.size()) +
                    " labels");
    if (labels.empty()) throw Error("dataset: empty");
    if (!points.allFinite()) throw Error("dataset: non-finite coordinate");
    std::vector<int> counts(static_cast<std::size_t>(std::max(classes, 0)), 0);
    for (int l : labels) {
        if (l < 1 || l > classes) throw Error("dataset: label " + std::to_string(l) + " outside 1.." + std::to_string(classes));
        ++counts[static_cast<std::size_t>(l - 1)];
    }
    for (std::size_t j = 0; j < counts.size(); ++j)
        if (counts[j] == 0) throw Error("labels not contiguous: class " + std::to_string(j + 1) + " has no points");
}

std::vector<int> LabeledDataset::class_counts() const {
    std::vector<int> counts(static_cast<std::size_t>(classes), 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l - 1)];
    return counts;
}

std::vector<double> LabeledDataset::priors() const {
    const auto counts = class_counts();
    std::vector<double> p(counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j) p[j] = static_cast<double>(counts[j]) / static_cast<double>(labels.size());
    return p;
}

Matrix LabeledDataset::class_points(int j) const {
    const auto counts = class_counts();
    Matrix out(counts.at(static_cast<std::size_t>(j - 1)), points.cols());
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        if (labels[static_cast<std::size_t>(i)] == j) out.row(r++) = points.row(i);
    return out;
}

LabeledDataset LabeledDataset::subset(std::span<const Eigen::Index> rows) const {
    LabeledDataset out;
    out.points.resize(static_cast<Eigen::Index>(rows.size()), points.cols());
    out.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.points.row(static_cast<Eigen::Index>(i)) = points.row(rows[i]);
        out.labels[i] = labels[static_cast<std::size_t>(rows[i])];
    }
    out.classes = classes;
    return out;
}

LabeledDataset LabeledDataset::pair(int a, int b) const {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const int l = labels[static_cast<std::size_t>(i)];
        if (l == a || l == b) rows.push_back(i);
    }
    LabeledDataset out = subset(rows);
    for (int& l : out.labels) l = (l == a) ? 1 : 2;
    out.classes = 2;
    out.validate();
    return out;
}

int argmax_with_ties(std::span<const double> scores, std::span<const double> priors) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < scores.size(); ++j) {
        if (scores[j] > scores[best] || (scores[j] == scores[best] && priors[j] > priors[best])) best = j;
    }
    return static_cast<int>(best) + 1;
}

double error_rate(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size() || truth.empty()) throw Error("error_rate: size mismatch");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
    return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

}  // namespace potpot
