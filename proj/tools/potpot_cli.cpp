// potpot: generate data, tune and apply pot-pot classifiers, run experiment tables.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "potpot/bench.hpp"
#include "potpot/datagen.hpp"
#include "potpot/selftest.hpp"

using namespace potpot;

namespace {

std::string describe(const BandwidthConfig& cfg) {
    std::ostringstream s;
    s << to_string(cfg.mode) << " h2 =";
    for (double h : cfg.h2) s << " " << std::setprecision(6) << h;
    return s.str();
}

int cmd_generate(const std::string& family, std::uint64_t seed, const std::string& out, const std::string& test_out) {
    const GeneratedSet g = generate_by_name(family, seed);
    write_csv(g.train, out);
    if (!test_out.empty()) write_csv(g.test, test_out);
    std::cout << g.name << ": " << g.train.size() << " training points";
    if (!test_out.empty()) std::cout << ", " << g.test.size() << " test points";
    std::cout << "\n";
    return 0;
}

struct TuneArgs {
    std::string data, test, strategy = "separate", separator = "alpha", surface, model, aggregation = "ovo";
    int max_iterations = 200, k_max = 0, max_degree = 3;
    std::uint64_t fold_seed = 1;
    unsigned threads = 1;
};

int cmd_tune(const TuneArgs& a) {
    const LabeledDataset data = load_csv(a.data);
    ClassifierSpec col = ClassifierSpec::parse("pp-" + a.strategy + "-" + a.separator);
    SeparatorOptions options;
    options.k_max = a.k_max;
    options.max_degree = a.max_degree;
    options.aggregation = aggregation_from(a.aggregation);
    CvProtocol protocol;
    protocol.max_iterations = a.max_iterations;
    protocol.fold_seed = a.fold_seed;

    std::unique_ptr<ErrorEstimator> est;
    if (a.test.empty())
        est = std::make_unique<CrossValidationEstimator>(data, col.separator, protocol, options, FitOptions{}, a.threads);
    else
        est = std::make_unique<HoldoutEstimator>(data, load_csv(a.test), col.separator, options);
    const TuneReport report = tune_for(col, *est);

    std::cout << "strategy " << to_string(report.strategy) << ", separator " << to_string(col.separator) << ", "
              << report.evaluations.size() << " evaluations\n";
    std::cout << "best " << describe(report.best) << ", error " << std::fixed << std::setprecision(2)
              << 100.0 * report.best_error << "%\n";
    if (!a.surface.empty()) export_surface(report, a.surface);
    if (!a.model.empty()) save_model(SavedModel{data, report.best, col.separator, options}, a.model);
    return 0;
}

int cmd_classify(const std::string& model_path, const std::string& data_path, const std::string& out_path) {
    const SavedModel saved = load_model(model_path);
    const auto clf = build_classifier(saved);
    for (const auto& w : clf->warnings) std::cerr << "warning: " << w << "\n";
    const Matrix raw = load_matrix_csv(data_path);
    const Eigen::Index d = saved.data.dim();
    if (raw.cols() != d && raw.cols() != d + 1)
        throw Error(data_path + ": expected " + std::to_string(d) + " coordinates (optionally plus a label), found " +
                    std::to_string(raw.cols()) + " columns");
    const std::vector<int> pred = clf->classify_rows(raw.leftCols(d));

    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::binary);
        if (!file) throw Error("cannot write " + out_path);
    }
    std::ostream& out = out_path.empty() ? std::cout : file;
    out << "predicted\n";
    for (int p : pred) out << p << "\n";
    if (raw.cols() == d + 1) {
        int wrong = 0;
        for (Eigen::Index i = 0; i < raw.rows(); ++i) wrong += pred[static_cast<std::size_t>(i)] != static_cast<int>(raw(i, d));
        std::cerr << "error " << std::fixed << std::setprecision(2) << 100.0 * wrong / static_cast<double>(raw.rows())
                  << "% (" << wrong << "/" << raw.rows() << ")\n";
    }
    return 0;
}

int cmd_bench(const std::string& spec_path, const std::string& out, int threads) {
    ExperimentSpec spec = load_experiment_spec(spec_path);
    if (!out.empty()) spec.output = out;
    if (threads > 0) spec.threads = static_cast<unsigned>(threads);
    const ErrorTable table = run_experiment(spec);
    table.write(std::cout);
    int failed = 0;
    for (const auto& row : table.cells)
        for (const auto& c : row) failed += !c.error;
    if (failed) std::cerr << failed << " cell(s) failed; see diagnostics in the table\n";
    return failed ? 2 : 0;
}

int cmd_selftest(const std::vector<int>& only, unsigned threads) {
    SelftestOptions opt;
    opt.only.insert(only.begin(), only.end());
    opt.threads = threads;
    const auto results = run_selftest(opt, std::cout);
    int failed = 0;
    for (const auto& r : results) failed += !r.pass;
    std::cout << results.size() - static_cast<std::size_t>(failed) << "/" << results.size() << " criteria passed\n";
    return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pot-pot plot classification"};
    app.require_subcommand(1);

    std::string family, out, test_out;
    std::uint64_t seed = 1;
    auto* gen = app.add_subcommand("generate", "draw a simulated data set and write it as CSV");
    gen->add_option("family", family, "1dist3, 2scale2, 1scale*4, 1rotate5, disks_100x100, hypersphere_d3_n250")->required();
    gen->add_option("--seed", seed, "master seed");
    gen->add_option("-o,--out", out, "training CSV")->required();
    gen->add_option("--test-out", test_out, "test CSV");

    TuneArgs ta;
    auto* tune = app.add_subcommand("tune", "select bandwidths by cross-validation or a test set");
    tune->add_option("data", ta.data, "training CSV")->required();
    tune->add_option("--test", ta.test, "score on this CSV instead of cross-validating");
    tune->add_option("--strategy", ta.strategy, "joint|separate|regressive|rot-joint|rot-separate|mm-joint|mm-separate");
    tune->add_option("--separator", ta.separator, "diagonal|knn|alpha");
    tune->add_option("--aggregation", ta.aggregation, "ovo|ova (alpha with more than 2 classes)");
    tune->add_option("--max-iterations", ta.max_iterations, "cross-validation folds cap");
    tune->add_option("--fold-seed", ta.fold_seed, "fold shuffling seed");
    tune->add_option("--k-max", ta.k_max, "largest k for k-NN (0: n/2)");
    tune->add_option("--max-degree", ta.max_degree, "largest alpha-procedure degree");
    tune->add_option("--threads", ta.threads, "worker threads over folds");
    tune->add_option("--surface", ta.surface, "write the error surface CSV");
    tune->add_option("--model", ta.model, "write the tuned model (JSON)");

    std::string model_in, data_in, pred_out;
    auto* cls = app.add_subcommand("classify", "apply a tuned model");
    cls->add_option("model", model_in, "model JSON from tune")->required();
    cls->add_option("data", data_in, "points CSV, label column optional")->required();
    cls->add_option("-o,--out", pred_out, "predictions CSV (default stdout)");

    std::string spec_path, table_out;
    int bench_threads = 0;
    auto* bench = app.add_subcommand("bench", "run an experiment spec and print the error table");
    bench->add_option("spec", spec_path, "key = value spec file")->required();
    bench->add_option("-o,--out", table_out, "also write the table here");
    bench->add_option("--threads", bench_threads, "override the spec's thread count");

    std::vector<int> only;
    unsigned st_threads = 1;
    auto* self = app.add_subcommand("selftest", "run the acceptance criteria");
    self->add_option("--only", only, "criterion ids")->delimiter(',');
    self->add_option("--threads", st_threads, "worker threads");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*gen) return cmd_generate(family, seed, out, test_out);
        if (*tune) return cmd_tune(ta);
        if (*cls) return cmd_classify(model_in, data_in, pred_out);
        if (*bench) return cmd_bench(spec_path, table_out, bench_threads);
        if (*self) return cmd_selftest(only, st_threads);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
