#include "potpot/tuning.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <random>

#include "potpot/parallel.hpp"

namespace potpot {

namespace {

// Misclassification counts on `test` for every config, training on `train`.
// Sphering is fitted once per scaling mode; each (class, h²) column of the
// plot is computed once and shared by all configs that use it.
std::vector<int> count_errors(const LabeledDataset& train, const Matrix& test_points, std::span<const int> test_labels,
                              std::span<const BandwidthConfig> configs, SeparatorKind kind,
                              const SeparatorOptions& options, const FitOptions& fit) {
    const Eigen::Index nt = train.size();
    const Eigen::Index nq = test_points.rows();
    Matrix stacked(nt + nq, train.dim());
    stacked.topRows(nt) = train.points;
    stacked.bottomRows(nq) = test_points;

    struct ModeState {
        std::optional<PotentialModel> sphering;
        std::optional<DistanceCache> cache;
        std::map<std::pair<int, double>, Vector> columns;
    };
    std::array<ModeState, 2> modes;
    const auto priors = train.priors();
    const int q = train.classes;

    std::vector<int> errors(configs.size(), 0);
    Matrix z(nt + nq, q);
    for (std::size_t c = 0; c < configs.size(); ++c) {
        const BandwidthConfig& cfg = configs[c];
        cfg.validate(q);
        ModeState& state = modes[cfg.mode == ScalingMode::Joint ? 0 : 1];
        if (!state.sphering) {
            state.sphering = fit_sphering(train, cfg.mode, fit);
            state.cache.emplace(*state.sphering, stacked);
        }
        for (int j = 1; j <= q; ++j) {
            const double h2 = cfg.for_class(j);
            auto it = state.columns.find({j, h2});
            if (it == state.columns.end()) it = state.columns.emplace(std::pair{j, h2}, state.cache->potentials(j, h2)).first;
            z.col(j - 1) = it->second;
        }
        PotPotPlot plot{z.topRows(nt), train.labels, priors};
        int wrong = 0;
        try {
            const Separator sep = train_separator(kind, plot, options);
            const std::vector<int> pred = classify_rows(sep, z.bottomRows(nq));
            for (Eigen::Index i = 0; i < nq; ++i) wrong += pred[static_cast<std::size_t>(i)] != test_labels[static_cast<std::size_t>(i)];
        } catch (const Error&) {
            // A plot the separator cannot be trained on classifies nothing.
            wrong = static_cast<int>(nq);
        }
        errors[c] = wrong;
    }
    return errors;
}

std::size_t argmin_first(const std::vector<Evaluation>& evals, std::size_t begin, std::size_t end) {
    std::size_t best = begin;
    for (std::size_t i = begin + 1; i < end; ++i)
        if (evals[i].error < evals[best].error) best = i;
    return best;
}

TuneReport finish(TuneStrategy strategy, std::vector<BandwidthConfig> configs, ErrorEstimator& estimator) {
    const auto errors = estimator.evaluate(configs);
    TuneReport report;
    report.strategy = strategy;
    for (std::size_t i = 0; i < configs.size(); ++i) report.evaluations.push_back({std::move(configs[i]), errors[i]});
    const std::size_t best = argmin_first(report.evaluations, 0, report.evaluations.size());
    report.best = report.evaluations[best].config;
    report.best_error = report.evaluations[best].error;
    return report;
}

double clamp_log10(double v) { return std::clamp(v, std::log10(kMinH2), std::log10(kMaxH2)); }

}  // namespace

const char* to_string(TuneStrategy s) {
    switch (s) {
        case TuneStrategy::Joint: return "joint";
        case TuneStrategy::Separate: return "separate";
        case TuneStrategy::RegressiveSeparate: return "regressive";
        case TuneStrategy::RuleOfThumb: return "rot";
        case TuneStrategy::Extreme: return "mm";
    }
    return "?";
}

Eigen::Index CvProtocol::holdout_size(Eigen::Index n) const {
    if (max_iterations < 1) throw Error("cv protocol: max_iterations must be positive");
    return (n + max_iterations - 1) / max_iterations;
}

Eigen::Index CvProtocol::folds(Eigen::Index n) const {
    const Eigen::Index m = holdout_size(n);
    return (n + m - 1) / m;
}

double GridSpec::log10_value(int i) const {
    if (count < 2) return log10_min;
    return log10_min + (log10_max - log10_min) * static_cast<double>(i) / static_cast<double>(count - 1);
}

double GridSpec::value(int i) const { return std::pow(10.0, log10_value(i)); }

std::vector<std::vector<Eigen::Index>> make_folds(const LabeledDataset& data, const CvProtocol& protocol) {
    const Eigen::Index n = data.size();
    const Eigen::Index k = protocol.folds(n);
    if (k < 2) throw Error("cross-validation: need at least 2 folds");
    std::mt19937_64 rng(protocol.fold_seed);
    std::vector<Eigen::Index> order;
    order.reserve(static_cast<std::size_t>(n));
    const auto counts = data.class_counts();
    for (int j = 1; j <= data.classes; ++j) {
        if (counts[static_cast<std::size_t>(j - 1)] < 2)
            throw Error("cross-validation: class " + std::to_string(j) + " has fewer than 2 points");
        std::vector<Eigen::Index> members;
        for (Eigen::Index i = 0; i < n; ++i)
            if (data.labels[static_cast<std::size_t>(i)] == j) members.push_back(i);
        std::shuffle(members.begin(), members.end(), rng);
        order.insert(order.end(), members.begin(), members.end());
    }
    std::vector<std::vector<Eigen::Index>> folds(static_cast<std::size_t>(k));
    for (std::size_t p = 0; p < order.size(); ++p) folds[p % static_cast<std::size_t>(k)].push_back(order[p]);
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

CrossValidationEstimator::CrossValidationEstimator(LabeledDataset data, SeparatorKind kind, CvProtocol protocol,
                                                   SeparatorOptions options, FitOptions fit, unsigned threads)
    : data_(std::move(data)), kind_(kind), protocol_(protocol), options_(options), fit_(std::move(fit)), threads_(threads) {
    data_.validate();
    folds_ = make_folds(data_, protocol_);
}

std::vector<double> CrossValidationEstimator::evaluate(std::span<const BandwidthConfig> configs) {
    const Eigen::Index n = data_.size();
    std::vector<std::vector<int>> per_fold(folds_.size());
    parallel_for(folds_.size(), threads_, [&](std::size_t f) {
        const auto& held = folds_[f];
        std::vector<Eigen::Index> keep;
        keep.reserve(static_cast<std::size_t>(n) - held.size());
        std::size_t h = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (h < held.size() && held[h] == i) {
                ++h;
                continue;
            }
            keep.push_back(i);
        }
        const LabeledDataset train = data_.subset(keep);
        const LabeledDataset test = data_.subset(held);
        per_fold[f] = count_errors(train, test.points, test.labels, configs, kind_, options_, fit_);
    });
    std::vector<double> rates(configs.size(), 0.0);
    for (std::size_t c = 0; c < configs.size(); ++c) {
        long total = 0;
        for (const auto& f : per_fold) total += f[c];
        rates[c] = static_cast<double>(total) / static_cast<double>(n);
    }
    evaluated_ += configs.size();
    return rates;
}

HoldoutEstimator::HoldoutEstimator(LabeledDataset train, LabeledDataset test, SeparatorKind kind,
                                   SeparatorOptions options, FitOptions fit)
    : train_(std::move(train)), test_(std::move(test)), kind_(kind), options_(options), fit_(std::move(fit)) {
    train_.validate();
    if (test_.dim() != train_.dim()) throw Error("holdout: train and test dimensions differ");
}

std::vector<double> HoldoutEstimator::evaluate(std::span<const BandwidthConfig> configs) {
    const auto errors = count_errors(train_, test_.points, test_.labels, configs, kind_, options_, fit_);
    std::vector<double> rates(errors.size());
    for (std::size_t c = 0; c < errors.size(); ++c)
        rates[c] = static_cast<double>(errors[c]) / static_cast<double>(test_.size());
    evaluated_ += configs.size();
    return rates;
}

double cv_error(const LabeledDataset& data, const BandwidthConfig& cfg, SeparatorKind kind, const CvProtocol& protocol,
                const SeparatorOptions& options) {
    CrossValidationEstimator est(data, kind, protocol, options);
    return est.evaluate(std::span(&cfg, 1)).front();
}

TuneReport tune_joint(ErrorEstimator& estimator, const GridSpec& grid) {
    std::vector<BandwidthConfig> configs;
    for (int i = 0; i < grid.count; ++i) configs.push_back(BandwidthConfig::joint(grid.value(i)));
    return finish(TuneStrategy::Joint, std::move(configs), estimator);
}

TuneReport tune_separate(ErrorEstimator& estimator, const GridSpec& grid) {
    if (estimator.training().classes != 2) throw Error("separate grid tuning requires exactly 2 classes");
    std::vector<BandwidthConfig> configs;
    for (int i = 0; i < grid.count; ++i)
        for (int j = 0; j < grid.count; ++j) configs.push_back(BandwidthConfig::separate({grid.value(i), grid.value(j)}));
    return finish(TuneStrategy::Separate, std::move(configs), estimator);
}

std::vector<std::pair<double, double>> regressive_probe_points() {
    std::vector<std::pair<double, double>> pts;
    for (int c = -2; c <= 2; ++c)
        for (double delta : {-1.0, -0.5, 0.0, 0.5, 1.0}) pts.emplace_back(c + delta, c - delta);
    return pts;
}

TuneReport tune_regressive_separate(ErrorEstimator& estimator, const GridSpec& grid, BandwidthRegression shape) {
    const LabeledDataset& data = estimator.training();
    if (data.classes != 2) throw Error("regressive separate tuning requires exactly 2 classes");
    const auto counts = data.class_counts();
    const int primary = counts[1] > counts[0] ? 2 : 1;  // the larger class carries the regressor
    auto make = [&](double log_primary, double log_other) {
        std::vector<double> h2(2);
        h2[static_cast<std::size_t>(primary - 1)] = std::pow(10.0, log_primary);
        h2[static_cast<std::size_t>(2 - primary)] = std::pow(10.0, log_other);
        return BandwidthConfig::separate(std::move(h2));
    };

    // Stage 1: five sets of five probes orthogonal to the diagonal.
    const auto probes = regressive_probe_points();
    std::vector<BandwidthConfig> stage1;
    for (const auto& [x, y] : probes) stage1.push_back(make(x, y));
    const auto err1 = estimator.evaluate(stage1);

    // Stage 2: per-set minimum (ties prefer the probe nearest the diagonal), then regress.
    static constexpr int kPreference[] = {2, 1, 3, 0, 4};
    std::vector<double> xs, ys;
    for (std::size_t set = 0; set < 5; ++set) {
        std::size_t best = set * 5 + kPreference[0];
        for (int p : kPreference)
            if (err1[set * 5 + static_cast<std::size_t>(p)] < err1[best]) best = set * 5 + static_cast<std::size_t>(p);
        xs.push_back(probes[best].first);
        ys.push_back(probes[best].second);
    }
    std::vector<double> coef;
    if (shape == BandwidthRegression::Linear) {
        const auto [a, b] = fit_line(xs, ys);
        coef = {a, b};
    } else {
        try {
            coef = shape == BandwidthRegression::Quadratic ? fit_quadratic(xs, ys) : fit_quadratic(ys, xs);
        } catch (const Error&) {
            // Too few distinct abscissae for a parabola: fall back to a line.
            const auto [a, b] = shape == BandwidthRegression::Quadratic ? fit_line(xs, ys) : fit_line(ys, xs);
            coef = {a, b, 0.0};
        }
    }
    auto g = [&](double t) {
        double v = 0.0, p = 1.0;
        for (double c : coef) {
            v += c * p;
            p *= t;
        }
        return clamp_log10(v);
    };

    // Stage 3: one-parameter search along the fitted curve.
    std::vector<BandwidthConfig> stage3;
    for (int i = 0; i < grid.count; ++i) {
        const double t = grid.log10_value(i);
        stage3.push_back(shape == BandwidthRegression::QuadraticInverted ? make(g(t), t) : make(t, g(t)));
    }
    const auto err3 = estimator.evaluate(stage3);

    TuneReport report;
    report.strategy = TuneStrategy::RegressiveSeparate;
    report.primary_class = primary;
    report.regression_coefficients = coef;
    for (std::size_t i = 0; i < stage1.size(); ++i) report.evaluations.push_back({stage1[i], err1[i]});
    for (std::size_t i = 0; i < stage3.size(); ++i) report.evaluations.push_back({stage3[i], err3[i]});
    const std::size_t best = argmin_first(report.evaluations, 0, report.evaluations.size());
    report.best = report.evaluations[best].config;
    report.best_error = report.evaluations[best].error;
    return report;
}

BandwidthConfig rot_bandwidth(const LabeledDataset& data, ScalingMode mode) {
    const double d = static_cast<double>(data.dim());
    auto scott = [&](double n) { return std::clamp(std::pow(n, -2.0 / (d + 4.0)), kMinH2, kMaxH2); };
    if (mode == ScalingMode::Joint) return BandwidthConfig::joint(scott(static_cast<double>(data.size())));
    std::vector<double> h2;
    for (int c : data.class_counts()) h2.push_back(scott(static_cast<double>(c)));
    return BandwidthConfig::separate(std::move(h2));
}

TuneReport tune_rule_of_thumb(ErrorEstimator& estimator, ScalingMode mode) {
    return finish(TuneStrategy::RuleOfThumb, {rot_bandwidth(estimator.training(), mode)}, estimator);
}

TuneReport extreme_bandwidth(ErrorEstimator& estimator, ScalingMode mode) {
    const auto q = static_cast<std::size_t>(estimator.training().classes);
    auto uniform = [&](double h2) {
        return mode == ScalingMode::Joint ? BandwidthConfig::joint(h2)
                                          : BandwidthConfig::separate(std::vector<double>(q, h2));
    };
    return finish(TuneStrategy::Extreme, {uniform(kMinH2), uniform(kMaxH2)}, estimator);
}

}  // namespace potpot
