#include "potpot/separators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace potpot {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double normalize_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
    if (a >= kTwoPi) a = 0.0;
    return a;
}

double max_abs_entry(const Matrix& z) { return z.size() == 0 ? 0.0 : z.cwiseAbs().maxCoeff(); }

void require_binary(const PotPotPlot& plot, const char* who) {
    if (plot.classes() != 2) throw Error(std::string(who) + ": binary plots only (q = 2)");
    std::array<int, 2> counts{0, 0};
    for (int l : plot.labels) {
        if (l != 1 && l != 2) throw Error(std::string(who) + ": labels must be 1 or 2");
        ++counts[static_cast<std::size_t>(l - 1)];
    }
    if (counts[0] < 2 || counts[1] < 2) throw Error(std::string(who) + ": need at least 2 points per class");
}

// Squared distance between two rows of q coordinates.
double sq_dist(const double* a, const double* b, Eigen::Index q) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < q; ++c) {
        const double d = a[c] - b[c];
        acc += d * d;
    }
    return acc;
}

struct Neighbor {
    double dist;
    Eigen::Index index;
    bool operator<(const Neighbor& o) const { return dist < o.dist || (dist == o.dist && index < o.index); }
};

int vote(std::span<const int> counts, std::span<const double> priors) {
    std::vector<double> scores(counts.begin(), counts.end());
    return argmax_with_ties(scores, priors);
}

std::vector<std::pair<int, int>> monomials_up_to(int degree) {
    std::vector<std::pair<int, int>> out;
    for (int t = 1; t <= degree; ++t)
        for (int a = t; a >= 0; --a) out.emplace_back(a, t - a);
    return out;
}

}  // namespace

const char* to_string(SeparatorKind kind) {
    switch (kind) {
        case SeparatorKind::Diagonal: return "diagonal";
        case SeparatorKind::Knn: return "knn";
        case SeparatorKind::Alpha: return "alpha";
    }
    return "?";
}

const char* to_string(Aggregation a) { return a == Aggregation::OneVsOne ? "ovo" : "ova"; }

Aggregation aggregation_from(const std::string& name) {
    if (name == "ovo" || name == "one-vs-one") return Aggregation::OneVsOne;
    if (name == "ova" || name == "one-vs-all") return Aggregation::OneVsAll;
    throw Error("unknown aggregation '" + name + "' (expected ovo|ova)");
}

SeparatorKind separator_kind_from(const std::string& name) {
    if (name == "diagonal" || name == "diag") return SeparatorKind::Diagonal;
    if (name == "knn" || name == "k-nn") return SeparatorKind::Knn;
    if (name == "alpha") return SeparatorKind::Alpha;
    throw Error("unknown separator '" + name + "' (expected diagonal|knn|alpha)");
}

int classify_diagonal(std::span<const double> z, std::span<const double> priors) {
    return argmax_with_ties(z, priors);
}

// ---------------------------------------------------------------- k-NN

KnnSeparator train_knn_plot(const PotPotPlot& plot, int k_max) {
    const Eigen::Index n = plot.size();
    if (n == 0) throw Error("knn: empty plot");
    if (k_max < 1 || k_max >= n) throw Error("knn: k_max must lie in 1..n-1 (n=" + std::to_string(n) + ")");
    const Eigen::Index dim = plot.z.cols();
    const auto q = plot.priors.size();

    KnnSeparator sep;
    sep.scale = max_abs_entry(plot.z);
    if (!(sep.scale > 0.0)) sep.scale = 1.0;
    // Row-major copy: each reference row is contiguous.
    sep.reference = (plot.z / sep.scale).transpose();
    sep.labels = plot.labels;
    sep.priors = plot.priors;

    std::vector<int> wrong(static_cast<std::size_t>(k_max), 0);
    std::vector<Neighbor> nb;
    std::vector<int> counts(q);
    for (Eigen::Index i = 0; i < n; ++i) {
        nb.clear();
        const double* zi = sep.reference.col(i).data();
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) nb.push_back({sq_dist(zi, sep.reference.col(j).data(), dim), j});
        std::partial_sort(nb.begin(), nb.begin() + k_max, nb.end());
        std::fill(counts.begin(), counts.end(), 0);
        const int truth = plot.labels[static_cast<std::size_t>(i)];
        for (int k = 1; k <= k_max; ++k) {
            ++counts[static_cast<std::size_t>(plot.labels[static_cast<std::size_t>(nb[static_cast<std::size_t>(k - 1)].index)] - 1)];
            wrong[static_cast<std::size_t>(k - 1)] += vote(counts, sep.priors) != truth;
        }
    }
    sep.loo_error.resize(wrong.size());
    int best = 0;
    for (std::size_t k = 0; k < wrong.size(); ++k) {
        sep.loo_error[k] = static_cast<double>(wrong[k]) / static_cast<double>(n);
        if (wrong[k] < wrong[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
    }
    sep.k = best + 1;
    return sep;
}

int classify_knn_plot(const KnnSeparator& sep, std::span<const double> z) {
    const Eigen::Index dim = sep.reference.rows();
    if (static_cast<Eigen::Index>(z.size()) != dim) throw Error("knn: plot dimension mismatch");
    std::vector<double> scaled(z.begin(), z.end());
    for (double& v : scaled) v /= sep.scale;
    std::vector<Neighbor> nb;
    nb.reserve(static_cast<std::size_t>(sep.reference.cols()));
    for (Eigen::Index j = 0; j < sep.reference.cols(); ++j)
        nb.push_back({sq_dist(scaled.data(), sep.reference.col(j).data(), dim), j});
    std::partial_sort(nb.begin(), nb.begin() + sep.k, nb.end());
    std::vector<int> counts(sep.priors.size(), 0);
    for (int k = 0; k < sep.k; ++k)
        ++counts[static_cast<std::size_t>(sep.labels[static_cast<std::size_t>(nb[static_cast<std::size_t>(k)].index)] - 1)];
    return vote(counts, sep.priors);
}

// ---------------------------------------------------------- line search

LineSearchResult exact_origin_line_search(std::span<const LabeledPoint2> points, int zero_class) {
    struct Event {
        double angle;
        int delta;  // change in error count when the sweep crosses this angle
    };
    std::vector<Event> events;
    events.reserve(points.size() * 2);
    // Arc (enter, leave) of directions θ for which the point projects positively.
    std::vector<std::pair<double, double>> arcs;
    std::vector<int> labels;
    int fixed_errors = 0;
    for (const auto& p : points) {
        if (p.x == 0.0 && p.y == 0.0) {
            fixed_errors += p.label != zero_class;
            continue;
        }
        const double phi = std::atan2(p.y, p.x);
        const double enter = normalize_angle(phi - std::numbers::pi / 2);
        const double leave = normalize_angle(enter + std::numbers::pi);
        arcs.emplace_back(enter, leave);
        labels.push_back(p.label);
        // Entering the positive side fixes a class-1 point and breaks a class-2 point.
        const int sign = p.label == 1 ? -1 : 1;
        events.push_back({enter, sign});
        events.push_back({leave, -sign});
    }
    if (arcs.empty()) throw Error("line search: all points at the origin");

    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.angle < b.angle; });
    std::vector<double> group_angle;
    std::vector<int> group_delta;
    for (const auto& e : events) {
        if (group_angle.empty() || e.angle != group_angle.back()) {
            group_angle.push_back(e.angle);
            group_delta.push_back(0);
        }
        group_delta.back() += e.delta;
    }
    const std::size_t m = group_angle.size();
    auto gap_end = [&](std::size_t g) { return g + 1 < m ? group_angle[g + 1] : group_angle[0] + kTwoPi; };

    // Errors inside gap 0, decided from the arc endpoints rather than from
    // floating-point projections.
    const double probe = 0.5 * (group_angle[0] + gap_end(0));
    const double probe_n = normalize_angle(probe);
    int errors = 0;
    for (std::size_t i = 0; i < arcs.size(); ++i) {
        const auto [enter, leave] = arcs[i];
        const bool positive = enter < leave ? (probe_n > enter && probe_n < leave) : (probe_n > enter || probe_n < leave);
        errors += positive != (labels[i] == 1);
    }

    std::size_t best_gap = 0;
    int best_errors = errors;
    double best_width = gap_end(0) - group_angle[0];
    for (std::size_t g = 1; g < m; ++g) {
        errors += group_delta[g];
        const double width = gap_end(g) - group_angle[g];
        if (errors < best_errors || (errors == best_errors && width > best_width)) {
            best_errors = errors;
            best_gap = g;
            best_width = width;
        }
    }
    return {normalize_angle(0.5 * (group_angle[best_gap] + gap_end(best_gap))), best_errors + fixed_errors};
}

// ------------------------------------------------------------- α-procedure

double AlphaSeparator::evaluate(std::span<const double> z) const {
    if (z.size() != 2) throw Error("alpha: binary plot coordinates expected");
    const double z1 = z[0] / scale;
    const double z2 = z[1] / scale;
    double r = 0.0;
    for (const auto& m : discriminant) r += m.weight * std::pow(z1, m.a) * std::pow(z2, m.b);
    return r;
}

int classify_alpha(const AlphaSeparator& sep, std::span<const double> z) {
    const double r = sep.evaluate(z);
    if (r > 0) return 1;
    if (r < 0) return 2;
    return classify_diagonal(std::array<double, 2>{0.0, 0.0}, sep.priors);
}

namespace {

AlphaSeparator fit_alpha(const Matrix& z, const std::vector<int>& labels, const std::vector<double>& priors,
                         int degree) {
    const auto n = static_cast<std::size_t>(z.rows());
    const int zero_class = classify_diagonal(std::array<double, 2>{0.0, 0.0}, priors);

    AlphaSeparator sep;
    sep.degree = degree;
    sep.priors = priors;
    sep.scale = max_abs_entry(z);
    bool identical = true;
    for (Eigen::Index i = 1; i < z.rows() && identical; ++i) identical = z.row(i) == z.row(0);
    if (identical || !(sep.scale > 0.0)) throw Error("degenerate plot: all points identical");

    const auto monos = monomials_up_to(degree);
    const std::size_t nf = monos.size();
    std::vector<std::vector<double>> feat(nf, std::vector<double>(n));
    std::vector<double> feat_scale(nf, 1.0);
    for (std::size_t f = 0; f < nf; ++f) {
        double mx = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = std::pow(z(static_cast<Eigen::Index>(i), 0) / sep.scale, monos[f].first) *
                             std::pow(z(static_cast<Eigen::Index>(i), 1) / sep.scale, monos[f].second);
            feat[f][i] = v;
            mx = std::max(mx, std::abs(v));
        }
        if (mx > 0.0) {
            feat_scale[f] = mx;
            for (double& v : feat[f]) v /= mx;
        }
    }

    std::vector<LabeledPoint2> pts(n);
    auto search = [&](const std::vector<double>& f, const std::vector<double>& g) {
        for (std::size_t i = 0; i < n; ++i) pts[i] = {f[i], g[i], labels[i]};
        return exact_origin_line_search(pts, zero_class);
    };

    // First step: best pair of original features.
    std::size_t bf = 0, bg = 1;
    LineSearchResult best{0.0, static_cast<int>(n) + 1};
    for (std::size_t f = 0; f < nf; ++f)
        for (std::size_t g = f + 1; g < nf; ++g) {
            const auto res = search(feat[f], feat[g]);
            if (res.errors < best.errors) {
                best = res;
                bf = f;
                bg = g;
            }
        }

    std::vector<double> weight(nf, 0.0);
    std::vector<double> r(n);
    std::vector<bool> used(nf, false);
    auto absorb = [&](double c, double s, std::size_t g, bool first_pair, std::size_t f) {
        for (double& w : weight) w *= c;
        if (first_pair) weight[f] = c / feat_scale[f];
        weight[g] += s / feat_scale[g];
        double mx = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = (first_pair ? c * feat[f][i] : c * r[i]) + s * feat[g][i];
            mx = std::max(mx, std::abs(r[i]));
        }
        if (mx > 0.0) {
            for (double& v : r) v /= mx;
            for (double& w : weight) w /= mx;
        }
        used[g] = true;
        if (first_pair) used[f] = true;
    };
    absorb(std::cos(best.theta), std::sin(best.theta), bg, true, bf);
    int current = best.errors;
    sep.error_path.push_back(static_cast<double>(current) / static_cast<double>(n));

    // Later steps: pair the current discriminant with each unused feature.
    while (true) {
        LineSearchResult step{0.0, current};
        std::size_t pick = nf;
        for (std::size_t g = 0; g < nf; ++g) {
            if (used[g]) continue;
            const auto res = search(r, feat[g]);
            if (res.errors < step.errors) {
                step = res;
                pick = g;
            }
        }
        if (pick == nf) break;
        absorb(std::cos(step.theta), std::sin(step.theta), pick, false, 0);
        current = step.errors;
        sep.error_path.push_back(static_cast<double>(current) / static_cast<double>(n));
    }

    for (std::size_t f = 0; f < nf; ++f)
        if (weight[f] != 0.0) sep.discriminant.push_back({monos[f].first, monos[f].second, weight[f]});
    if (sep.discriminant.empty()) throw Error("degenerate plot: empty discriminant");

    int wrong = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::array<double, 2> zi{z(static_cast<Eigen::Index>(i), 0), z(static_cast<Eigen::Index>(i), 1)};
        wrong += classify_alpha(sep, zi) != labels[i];
    }
    sep.training_error = static_cast<double>(wrong) / static_cast<double>(n);
    return sep;
}

}  // namespace

AlphaSeparator train_alpha_degree(const PotPotPlot& plot, int degree) {
    require_binary(plot, "alpha");
    if (degree < 1 || degree > 3) throw Error("alpha: degree must lie in 1..3");
    return fit_alpha(plot.z, plot.labels, plot.priors, degree);
}

AlphaSeparator train_alpha(const PotPotPlot& plot, int max_degree, int folds) {
    require_binary(plot, "alpha");
    if (max_degree < 1 || max_degree > 3) throw Error("alpha: max_degree must lie in 1..3");
    const auto n = plot.size();
    const int k = static_cast<int>(std::min<Eigen::Index>(std::max(folds, 2), n));

    std::vector<double> cv(static_cast<std::size_t>(max_degree), 0.0);
    if (max_degree > 1) {
        // Deterministic interleaved folds: point i belongs to fold i mod k.
        for (int f = 0; f < k; ++f) {
            std::vector<Eigen::Index> train_rows, test_rows;
            for (Eigen::Index i = 0; i < n; ++i) (i % k == f ? test_rows : train_rows).push_back(i);
            Matrix zt(static_cast<Eigen::Index>(train_rows.size()), 2);
            std::vector<int> lt;
            for (std::size_t r = 0; r < train_rows.size(); ++r) {
                zt.row(static_cast<Eigen::Index>(r)) = plot.z.row(train_rows[r]);
                lt.push_back(plot.labels[static_cast<std::size_t>(train_rows[r])]);
            }
            for (int p = 1; p <= max_degree; ++p) {
                int wrong = 0;
                try {
                    const AlphaSeparator sep = fit_alpha(zt, lt, plot.priors, p);
                    for (Eigen::Index i : test_rows) {
                        const std::array<double, 2> zi{plot.z(i, 0), plot.z(i, 1)};
                        wrong += classify_alpha(sep, zi) != plot.labels[static_cast<std::size_t>(i)];
                    }
                } catch (const Error&) {
                    wrong = static_cast<int>(test_rows.size());
                }
                cv[static_cast<std::size_t>(p - 1)] += wrong;
            }
        }
        for (double& c : cv) c /= static_cast<double>(n);
    }
    int chosen = 1;
    for (int p = 2; p <= max_degree; ++p)
        if (cv[static_cast<std::size_t>(p - 1)] < cv[static_cast<std::size_t>(chosen - 1)]) chosen = p;
    AlphaSeparator sep = fit_alpha(plot.z, plot.labels, plot.priors, chosen);
    sep.degree_cv_error = std::move(cv);
    return sep;
}

// ---------------------------------------------------------------- dispatch

Separator train_separator(SeparatorKind kind, const PotPotPlot& plot, const SeparatorOptions& options) {
    switch (kind) {
        case SeparatorKind::Diagonal: return DiagonalSeparator{plot.priors};
        case SeparatorKind::Knn: {
            const auto n = static_cast<int>(plot.size());
            const int k_max = options.k_max > 0 ? std::min(options.k_max, n - 1) : std::max(1, std::min(n / 2, n - 1));
            return train_knn_plot(plot, k_max);
        }
        case SeparatorKind::Alpha:
            if (plot.classes() > 2) return train_multiclass(kind, plot, options.aggregation, options);
            return train_alpha(plot, options.max_degree, options.alpha_folds);
    }
    throw Error("unknown separator kind");
}

namespace {

PotPotPlot one_vs_all_plot(const PotPotPlot& plot, int j) {
    PotPotPlot out;
    out.z.resize(plot.size(), 2);
    out.z.col(0) = plot.z.col(j - 1);
    out.z.col(1) = plot.z.rowwise().sum() - plot.z.col(j - 1);
    out.labels.reserve(plot.labels.size());
    for (int l : plot.labels) out.labels.push_back(l == j ? 1 : 2);
    const double p = plot.priors.at(static_cast<std::size_t>(j - 1));
    out.priors = {p, 1.0 - p};
    return out;
}

int classify_binary(const BinarySeparator& sep, std::span<const double> z) {
    if (const auto* a = std::get_if<AlphaSeparator>(&sep)) return classify_alpha(*a, z);
    return classify_diagonal(z, std::get<DiagonalSeparator>(sep).priors);
}

}  // namespace

MulticlassSeparator train_multiclass(SeparatorKind kind, const PotPotPlot& plot, Aggregation aggregation,
                                     const SeparatorOptions& options) {
    if (plot.classes() <= 2) throw Error("multiclass aggregation needs q > 2");
    if (kind == SeparatorKind::Knn) throw Error("k-NN classifies q classes directly; no aggregation");
    auto train_binary = [&](const PotPotPlot& p) -> BinarySeparator {
        if (kind == SeparatorKind::Diagonal) return DiagonalSeparator{p.priors};
        return train_alpha(p, options.max_degree, options.alpha_folds);
    };
    MulticlassSeparator sep;
    sep.aggregation = aggregation;
    sep.priors = plot.priors;
    const int q = plot.classes();
    if (aggregation == Aggregation::OneVsOne) {
        for (int a = 1; a <= q; ++a)
            for (int b = a + 1; b <= q; ++b) {
                sep.pairs.emplace_back(a, b);
                sep.binary.push_back(train_binary(plot.pair(a, b)));
            }
    } else {
        for (int j = 1; j <= q; ++j) {
            sep.pairs.emplace_back(j, 0);
            sep.binary.push_back(train_binary(one_vs_all_plot(plot, j)));
        }
    }
    return sep;
}

int classify_multiclass(const MulticlassSeparator& sep, std::span<const double> z) {
    const std::size_t q = sep.priors.size();
    if (z.size() != q) throw Error("multiclass: plot dimension mismatch");
    if (sep.aggregation == Aggregation::OneVsOne) {
        std::vector<double> votes(q, 0.0);
        for (std::size_t i = 0; i < sep.pairs.size(); ++i) {
            const auto [a, b] = sep.pairs[i];
            const std::array<double, 2> zz{z[static_cast<std::size_t>(a - 1)], z[static_cast<std::size_t>(b - 1)]};
            votes[static_cast<std::size_t>(classify_binary(sep.binary[i], zz) == 1 ? a - 1 : b - 1)] += 1.0;
        }
        return argmax_with_ties(votes, sep.priors);
    }
    const double total = std::accumulate(z.begin(), z.end(), 0.0);
    std::vector<double> margin(q);
    std::vector<bool> claims(q);
    bool any = false;
    for (std::size_t j = 0; j < q; ++j) {
        const std::array<double, 2> zz{z[j], total - z[j]};
        margin[j] = zz[0] - zz[1];
        claims[j] = classify_binary(sep.binary[j], zz) == 1;
        any = any || claims[j];
    }
    std::vector<double> scores(q);
    for (std::size_t j = 0; j < q; ++j)
        scores[j] = (!any || claims[j]) ? margin[j] : -std::numeric_limits<double>::infinity();
    return argmax_with_ties(scores, sep.priors);
}

int classify(const Separator& sep, std::span<const double> z) {
    return std::visit(
        [&](const auto& s) -> int {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, DiagonalSeparator>) return classify_diagonal(z, s.priors);
            else if constexpr (std::is_same_v<T, KnnSeparator>) return classify_knn_plot(s, z);
            else if constexpr (std::is_same_v<T, AlphaSeparator>) return classify_alpha(s, z);
            else return classify_multiclass(s, z);
        },
        sep);
}

std::vector<int> classify_rows(const Separator& sep, const Matrix& z) {
    std::vector<int> out(static_cast<std::size_t>(z.rows()));
    std::vector<double> row(static_cast<std::size_t>(z.cols()));
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        for (Eigen::Index c = 0; c < z.cols(); ++c) row[static_cast<std::size_t>(c)] = z(i, c);
        out[static_cast<std::size_t>(i)] = classify(sep, row);
    }
    return out;
}

}  // namespace potpot
