#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "potpot/bench.hpp"
#include "potpot/datagen.hpp"

using namespace potpot;
namespace fs = std::filesystem;

namespace {

LabeledDataset csv(const std::string& text) {
    std::istringstream in(text);
    return parse_csv(in, "t.csv");
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "potpot_bench_test";
    fs::create_directories(dir);
    return dir / name;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

ExperimentSpec spec_from(const std::string& text) {
    std::istringstream in(text);
    return parse_experiment_spec(in);
}

std::string table_text(const ErrorTable& t) {
    std::ostringstream out;
    t.write(out);
    return out.str();
}

}  // namespace

TEST_CASE("CSV loading") {
    const auto d = csv("1.0,2.0,1\n2.0,1.0,2\n0.0,0.0,1\n");
    CHECK(d.size() == 3);
    CHECK(d.dim() == 2);
    CHECK(d.classes == 2);
    CHECK(d.points(1, 0) == 2.0);

    const auto h = csv("x1,x2,label\n1,2,1\n3,4,2\n");
    CHECK(h.size() == 2);
    CHECK(csv("\"a\",\"b\",\"y\"\r\n1,2,1\r\n3,4,2\r\n").size() == 2);

    CHECK_THROWS_WITH_AS(csv("1,2,1\n3,4,3\n"), doctest::Contains("labels not contiguous"), Error);
    CHECK_THROWS_WITH_AS(csv("1,2,1\n3,4\n"), doctest::Contains("t.csv:2"), Error);
    CHECK_THROWS_WITH_AS(csv("1,2,1\n3,nan,2\n"), doctest::Contains("t.csv:2"), Error);
    CHECK_THROWS_WITH_AS(csv("1,2,1\n3,abc,2\n"), doctest::Contains("non-numeric"), Error);
    CHECK_THROWS_AS(csv("1,2,1.5\n3,4,2\n"), Error);
    CHECK_THROWS_AS(csv("x,y,label\n"), Error);
}

TEST_CASE("CSV round trip keeps potentials") {
    const auto g = generate_by_name("1scale3", 4);
    const fs::path p = scratch("round.csv");
    write_csv(g.train, p);
    const auto back = load_csv(p);
    CHECK(back.points == g.train.points);
    CHECK(back.labels == g.train.labels);
    const auto cfg = BandwidthConfig::separate({0.2, 0.7});
    const Matrix a = pot_pot_transform(fit_potential_model(g.train, cfg), g.test.points);
    const Matrix b = pot_pot_transform(fit_potential_model(back, cfg), g.test.points);
    CHECK(((a - b).array().abs() / a.array().abs().max(1e-300)).maxCoeff() <= 1e-12);
}

TEST_CASE("surface export row counts") {
    const auto g = generate_by_name("1dist3", 2);
    HoldoutEstimator est(g.train, g.test, SeparatorKind::Diagonal);
    for (auto [report, rows] : {std::pair{tune_joint(est), 60u}, std::pair{tune_separate(est), 3600u},
                                std::pair{tune_regressive_separate(est), 85u}}) {
        std::ostringstream out;
        write_surface(report, out);
        const std::string s = out.str();
        CHECK(s.rfind("log10_h1,log10_h2,error\n", 0) == 0);
        CHECK(lines(s) == rows + 1);
        if (report.strategy == TuneStrategy::RegressiveSeparate) {
            // First data rows follow the probe pattern (primary class in column 1 here, equal sizes).
            std::istringstream in(s);
            std::string line;
            std::getline(in, line);
            std::getline(in, line);
            CHECK(line.rfind("-3,-1,", 0) == 0);
        }
        if (report.strategy == TuneStrategy::Joint) CHECK(s.find("\n-3,-3,") != std::string::npos);
    }
    const fs::path p = scratch("surface.csv");
    export_surface(tune_joint(est), p);
    CHECK(fs::file_size(p) > 0);
}

TEST_CASE("experiment spec parsing and validation") {
    const auto s = spec_from("# comment\ndataset = 1dist3\ndataset = disks_80x120\nclassifiers = bayes, pp-separate-alpha\n"
                             "replications = 3\nseed = 9\nreference = bayes\nmax_iterations = 50\naggregation = ova\n");
    CHECK(s.datasets.size() == 2);
    CHECK_FALSE(s.datasets[1].csv.has_value());
    CHECK(s.classifiers.size() == 2);
    CHECK_FALSE(s.classifiers[0].potpot);
    CHECK(s.classifiers[1].strategy == TuneStrategy::Separate);
    CHECK(s.replications == 3);
    CHECK(s.seed == 9);
    CHECK(s.protocol.max_iterations == 50);
    CHECK(s.separator.aggregation == Aggregation::OneVsAll);
    CHECK_NOTHROW(s.validate());
    CHECK_THROWS_WITH_AS(spec_from("dataset = csv:/nonexistent.csv\nclassifiers = lda\n"), doctest::Contains("not found"), Error);

    CHECK_THROWS_WITH_AS(spec_from("dataset = 1dist3\n").validate(), doctest::Contains("no classifiers"), Error);
    CHECK_THROWS_WITH_AS(spec_from("dataset = 1dist3\nclassifiers = lda\nreference = qda\n").validate(),
                         doctest::Contains("reference"), Error);
    CHECK_THROWS_AS(spec_from("colour = blue\n"), Error);
    CHECK_THROWS_AS(spec_from("replications = 2.5\n"), Error);
    CHECK_THROWS_AS(ClassifierSpec::parse("pp-sideways-alpha"), Error);
    CHECK(ClassifierSpec::parse("pp-rot-joint-knn").mode == ScalingMode::Joint);
}

TEST_CASE("experiments are deterministic and failures stay in their cell") {
    ExperimentSpec gone = spec_from("dataset = 1dist1\nclassifiers = lda\n");
    gone.datasets.push_back(DatasetSpec::parse("csv:" + scratch("missing.csv").string()));
    fs::remove(scratch("missing.csv"));
    CHECK_THROWS_AS(run_experiment(gone), Error);

    const auto ok = spec_from("dataset = 1dist1\nclassifiers = lda, qda, pp-rot-separate-alpha, pp-mm-joint-diagonal\n"
                              "replications = 3\nreference = lda\nthreads = 2\n");
    const std::string a = table_text(run_experiment(ok));
    CHECK(a == table_text(run_experiment(ok)));
    CHECK(a.rfind("dataset,lda,qda,pp-rot-separate-alpha,pp-mm-joint-diagonal,eff:lda,", 0) == 0);

    // Separate-grid tuning is two-class only: that cell fails, the LDA cell still runs.
    const fs::path three = scratch("three.csv");
    {
        std::ofstream f(three);
        for (int i = 0; i < 30; ++i) f << i * 0.1 << "," << (i % 7) * 0.3 << "," << 1 + i % 3 << "\n";
    }
    auto mixed = spec_from("dataset = csv:" + three.string() + "\nclassifiers = pp-separate-diagonal, lda\nmax_iterations = 5\n");
    const ErrorTable t = run_experiment(mixed);
    CHECK_FALSE(t.cells[0][0].error.has_value());
    CHECK_FALSE(t.cells[0][0].diagnostic.empty());
    CHECK(t.cells[0][1].error.has_value());
    CHECK(table_text(t).find("error: ") != std::string::npos);
}

TEST_CASE("diagonal column equals a direct max-potential rule") {
    const auto s = spec_from("dataset = 1dist2\nclassifiers = pp-joint-diagonal\nreplications = 2\nseed = 5\n");
    const ErrorTable t = run_experiment(s);
    const GridSpec grid;
    double best = 1.0;
    for (int i = 0; i < grid.count; ++i) {
        double mean = 0;
        for (int r = 0; r < 2; ++r) {
            const auto g = generate_by_name("1dist2", derive_seed(5, static_cast<std::uint64_t>(r)));
            const auto model = fit_potential_model(g.train, BandwidthConfig::joint(grid.value(i)));
            const auto priors = g.train.priors();
            int wrong = 0;
            for (Eigen::Index k = 0; k < g.test.size(); ++k) {
                const Vector x = g.test.points.row(k).transpose();
                const double z1 = potential_at(model, x, 1), z2 = potential_at(model, x, 2);
                const int pred = z1 > z2 ? 1 : z2 > z1 ? 2 : (priors[1] > priors[0] ? 2 : 1);
                wrong += pred != g.test.labels[static_cast<std::size_t>(k)];
            }
            mean += wrong / static_cast<double>(g.test.size()) / 2.0;
        }
        best = std::min(best, mean);
    }
    REQUIRE(t.cells[0][0].error.has_value());
    CHECK(*t.cells[0][0].error == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("saved models reproduce their predictions") {
    const auto g = generate_by_name("1dist3", 6);
    SavedModel m{g.train, BandwidthConfig::separate({0.3, 0.5}), SeparatorKind::Alpha, {}};
    const fs::path p = scratch("model.json");
    save_model(m, p);
    const SavedModel back = load_model(p);
    CHECK(back.bandwidth == m.bandwidth);
    CHECK(back.data.points == m.data.points);
    CHECK(build_classifier(back)->classify_rows(g.test.points) == build_classifier(m)->classify_rows(g.test.points));
    {
        std::ofstream f(scratch("bad.json"));
        f << "{\"format\": \"other\"}";
    }
    CHECK_THROWS_AS(load_model(scratch("bad.json")), Error);
}

TEST_CASE("three-class pot-pot classification through pairwise votes") {
    Matrix x(90, 2);
    std::vector<int> labels;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    for (int i = 0; i < 90; ++i) {
        const int c = i % 3;
        x(i, 0) = n01(rng) * 0.5 + 6 * (c == 1);
        x(i, 1) = n01(rng) * 0.5 + 6 * (c == 2);
        labels.push_back(c + 1);
    }
    const LabeledDataset data(x, labels);
    const auto model = fit_potential_model(data, BandwidthConfig::joint(0.5));
    const Separator sep = train_separator(SeparatorKind::Alpha, pot_pot_plot(model, data));
    const auto& mc = std::get<MulticlassSeparator>(sep);
    int wrong = 0;
    for (Eigen::Index i = 0; i < 90; ++i) wrong += classify_multiclass(model, mc, x.row(i).transpose()) != labels[static_cast<std::size_t>(i)];
    CHECK(wrong == 0);
}
