#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "potpot/baselines.hpp"
#include "potpot/dataset.hpp"
#include "potpot/tuning.hpp"

namespace potpot {

/// Numeric CSV; last column is the label 1..q. A non-numeric first row is a header.
/// Errors carry the file name and line number.
LabeledDataset load_csv(const std::filesystem::path& path);
LabeledDataset parse_csv(std::istream& in, const std::string& source = "<stream>");

/// Every column as a coordinate (no label column); same header and value rules.
Matrix load_matrix_csv(const std::filesystem::path& path);

/// Writes x1..xd,label with full round-trip precision.
void write_csv(const LabeledDataset& data, const std::filesystem::path& path);

/// log10_h1,log10_h2,error per evaluation, in evaluation order, 6 significant digits.
void export_surface(const TuneReport& report, const std::filesystem::path& path);
void write_surface(const TuneReport& report, std::ostream& out);

/// A column of the experiment table. Pot-pot columns are named
/// pp-<strategy>-<separator>, strategy one of joint, separate, regressive,
/// rot-joint, rot-separate, mm-joint, mm-separate. Everything else is a baseline.
struct ClassifierSpec {
    bool potpot = true;
    TuneStrategy strategy = TuneStrategy::Separate;
    ScalingMode mode = ScalingMode::Separate;  ///< rot/mm only
    SeparatorKind separator = SeparatorKind::Alpha;
    BaselineKind baseline;
    std::string label;

    static ClassifierSpec parse(const std::string& name);
};

/// Generator name (see generate_by_name) or "csv:<path>".
struct DatasetSpec {
    std::string name;
    std::optional<std::filesystem::path> csv;

    static DatasetSpec parse(const std::string& text);
};

struct ExperimentSpec {
    std::vector<DatasetSpec> datasets;
    std::vector<ClassifierSpec> classifiers;
    CvProtocol protocol;
    SeparatorOptions separator;
    int replications = 40;
    std::uint64_t seed = 1;
    std::optional<std::string> reference;  ///< column used for efficiency indices
    unsigned threads = 1;
    std::optional<std::filesystem::path> output;
    std::optional<std::filesystem::path> surface_dir;  ///< per-cell mean error surfaces

    /// Throws unless there is at least one dataset and classifier, the reference
    /// names a column, and every CSV file exists.
    void validate() const;
};

/// Flat `key = value` lines; `#` starts a comment. Keys: dataset (repeatable),
/// classifiers (comma list, repeatable), replications, seed, reference, threads,
/// output, surface_dir, max_iterations, fold_seed, k_max, max_degree, alpha_folds, aggregation.
ExperimentSpec parse_experiment_spec(std::istream& in, const std::string& source = "<spec>");
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

struct Cell {
    std::optional<double> error;  ///< rate in [0,1]
    double sd = 0.0;              ///< across replications (simulated data)
    std::string diagnostic;       ///< set when the cell failed
    std::optional<TuneReport> surface;  ///< replication-mean errors per evaluation slot
};

struct ErrorTable {
    std::vector<std::string> rows;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> cells;  ///< [row][column]
    std::optional<std::size_t> reference;

    /// CSV: dataset, one column per classifier (percent, 1 decimal), then
    /// eff:<classifier> columns when a reference is configured.
    void write(std::ostream& out) const;
};

/// Simulated data: every replication draws a fresh train/test pair; a pot-pot
/// cell is the smallest replication-mean test error over its evaluation slots,
/// a baseline cell the mean test error. CSV data: cross-validation per the protocol.
ErrorTable run_experiment(const ExperimentSpec& spec);

/// Runs a pot-pot column's tuning strategy against an estimator.
TuneReport tune_for(const ClassifierSpec& spec, ErrorEstimator& estimator);

/// Pot-pot model kept as the training sample plus its settings; the potentials
/// and separator are refit on load.
struct SavedModel {
    LabeledDataset data;
    BandwidthConfig bandwidth;
    SeparatorKind separator = SeparatorKind::Alpha;
    SeparatorOptions options;
};

void save_model(const SavedModel& model, const std::filesystem::path& path);
SavedModel load_model(const std::filesystem::path& path);
std::unique_ptr<PotPotClassifier> build_classifier(const SavedModel& model);

/// Classifies x with a pot-pot model whose α or diagonal separator is combined
/// over class pairs (OneVsOne) or class-vs-rest (OneVsAll).
int classify_multiclass(const PotentialModel& model, const MulticlassSeparator& sep, const Vector& x);

}  // namespace potpot
