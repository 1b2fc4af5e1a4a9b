#include "potpot/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "potpot/datagen.hpp"
#include "potpot/parallel.hpp"

namespace potpot {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

// One CSV record with double-quote escaping. Embedded newlines are not supported.
std::vector<std::string> split_record(const std::string& line, const std::string& where) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false, was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"' && trim(field).empty()) {
            quoted = was_quoted = true;
            field.clear();
        } else if (c == ',') {
            out.push_back(was_quoted ? field : trim(field));
            field.clear();
            was_quoted = false;
        } else {
            field += c;
        }
    }
    if (quoted) throw Error(where + ": unterminated quoted field");
    out.push_back(was_quoted ? field : trim(field));
    return out;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* begin = s.data();
    if (*begin == '+') ++begin;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string quote_csv(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

std::string log10_cell(double h2) {
    std::ostringstream s;
    s << std::setprecision(6) << std::log10(h2);
    return s.str();
}

std::string percent(double rate) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(1) << 100.0 * rate;
    return s.str();
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
    return s;
}

double cv_baseline_error(const BaselineKind& kind, const LabeledDataset& data, const CvProtocol& protocol) {
    const auto folds = make_folds(data, protocol);
    std::vector<Eigen::Index> in_fold(static_cast<std::size_t>(data.size()), -1);
    for (std::size_t f = 0; f < folds.size(); ++f)
        for (auto i : folds[f]) in_fold[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(f);
    int wrong = 0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<Eigen::Index> train_rows;
        for (Eigen::Index i = 0; i < data.size(); ++i)
            if (in_fold[static_cast<std::size_t>(i)] != static_cast<Eigen::Index>(f)) train_rows.push_back(i);
        const LabeledDataset train = data.subset(train_rows);
        const LabeledDataset test = data.subset(folds[f]);
        const auto clf = train_baseline(kind, train);
        const auto pred = clf->classify_rows(test.points);
        for (std::size_t i = 0; i < pred.size(); ++i) wrong += pred[i] != test.labels[i];
    }
    return static_cast<double>(wrong) / static_cast<double>(data.size());
}

Cell simulated_cell(const ExperimentSpec& spec, const std::string& name, const ClassifierSpec& col) {
    Cell cell;
    const int reps = spec.replications;
    std::vector<std::vector<double>> slot_errors;  // [slot][rep]
    std::vector<double> errors;
    TuneReport first;
    for (int r = 0; r < reps; ++r) {
        const GeneratedSet g = generate_by_name(name, derive_seed(spec.seed, static_cast<std::uint64_t>(r)));
        g.train.validate();
        g.test.validate();
        if (col.potpot) {
            HoldoutEstimator est(g.train, g.test, col.separator, spec.separator);
            TuneReport rep = tune_for(col, est);
            if (r == 0) {
                first = rep;
                slot_errors.assign(rep.evaluations.size(), {});
            }
            if (rep.evaluations.size() != slot_errors.size()) throw Error("evaluation count changed between replications");
            for (std::size_t s = 0; s < slot_errors.size(); ++s) slot_errors[s].push_back(rep.evaluations[s].error);
        } else {
            const auto clf = train_baseline(col.baseline, g.train, g.true_density, g.priors);
            errors.push_back(error_rate(clf->classify_rows(g.test.points), g.test.labels));
        }
    }
    auto mean = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        return m / static_cast<double>(v.size());
    };
    auto sd = [&](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        const double m = mean(v);
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        return std::sqrt(ss / static_cast<double>(v.size() - 1));
    };
    if (col.potpot) {
        // Surface keeps the first replication's configs with mean errors per slot.
        TuneReport surface = first;
        std::size_t best = 0;
        for (std::size_t s = 0; s < slot_errors.size(); ++s) {
            surface.evaluations[s].error = mean(slot_errors[s]);
            if (surface.evaluations[s].error < surface.evaluations[best].error) best = s;
        }
        surface.best = surface.evaluations[best].config;
        surface.best_error = surface.evaluations[best].error;
        cell.error = surface.best_error;
        cell.sd = sd(slot_errors[best]);
        cell.surface = std::move(surface);
    } else {
        cell.error = mean(errors);
        cell.sd = sd(errors);
    }
    return cell;
}

Cell csv_cell(const ExperimentSpec& spec, const LabeledDataset& data, const ClassifierSpec& col) {
    Cell cell;
    if (col.potpot) {
        CrossValidationEstimator est(data, col.separator, spec.protocol, spec.separator);
        TuneReport rep = tune_for(col, est);
        cell.error = rep.best_error;
        cell.surface = std::move(rep);
    } else {
        cell.error = cv_baseline_error(col.baseline, data, spec.protocol);
    }
    return cell;
}

}  // namespace

// ------------------------------------------------------------------ CSV

namespace {

struct NumericRows {
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> lines;
    std::vector<std::string> last_field;
    std::size_t width = 0;
};

// Numeric records; a non-numeric first record is taken as the header.
NumericRows read_numeric(std::istream& in, const std::string& source) {
    NumericRows out;
    std::string line;
    std::size_t line_no = 0;
    bool seen_first = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::string where = source + ":" + std::to_string(line_no);
        const auto fields = split_record(line, where);
        std::vector<double> values;
        std::optional<std::size_t> bad;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto v = parse_number(fields[c]);
            if (!v) {
                if (!bad) bad = c;
                continue;
            }
            values.push_back(*v);
        }
        if (!seen_first) {
            seen_first = true;
            out.width = fields.size();
            if (bad) continue;
        }
        if (fields.size() != out.width)
            throw Error(where + ": expected " + std::to_string(out.width) + " columns, found " + std::to_string(fields.size()));
        if (bad) throw Error(where + ": column " + std::to_string(*bad + 1) + ": non-numeric value '" + fields[*bad] + "'");
        for (std::size_t c = 0; c < values.size(); ++c)
            if (!std::isfinite(values[c])) throw Error(where + ": column " + std::to_string(c + 1) + ": non-finite value");
        out.rows.push_back(std::move(values));
        out.lines.push_back(line_no);
        out.last_field.push_back(fields.back());
    }
    if (out.rows.empty()) throw Error(source + ": no data rows");
    return out;
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows, std::size_t cols) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    return m;
}

}  // namespace

LabeledDataset parse_csv(std::istream& in, const std::string& source) {
    const NumericRows t = read_numeric(in, source);
    if (t.width < 2) throw Error(source + ": need at least one coordinate and a label");
    std::vector<int> labels;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double lab = t.rows[i].back();
        if (lab != std::floor(lab) || lab < 1 || lab > 1e6)
            throw Error(source + ":" + std::to_string(t.lines[i]) + ": label must be a positive integer, found '" +
                        t.last_field[i] + "'");
        labels.push_back(static_cast<int>(lab));
    }
    std::set<int> distinct(labels.begin(), labels.end());
    if (*distinct.rbegin() != static_cast<int>(distinct.size())) {
        std::string got;
        for (int l : distinct) got += (got.empty() ? "" : ",") + std::to_string(l);
        throw Error(source + ": labels not contiguous from 1 (found {" + got + "})");
    }
    return LabeledDataset(to_matrix(t.rows, t.width - 1), std::move(labels));
}

Matrix load_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    const NumericRows t = read_numeric(in, path.string());
    return to_matrix(t.rows, t.width);
}

LabeledDataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return parse_csv(in, path.string());
}

void write_csv(const LabeledDataset& data, const std::filesystem::path& path) {
    auto out = open_out(path);
    for (Eigen::Index c = 0; c < data.dim(); ++c) out << "x" << c + 1 << ",";
    out << "label\n";
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        for (Eigen::Index c = 0; c < data.dim(); ++c) out << data.points(i, c) << ",";
        out << data.labels[static_cast<std::size_t>(i)] << "\n";
    }
    if (!out) throw Error("write failed: " + path.string());
}

void write_surface(const TuneReport& report, std::ostream& out) {
    if (report.evaluations.empty()) throw Error("surface: empty report");
    const std::size_t q = report.evaluations.front().config.mode == ScalingMode::Joint
                              ? 2
                              : std::max<std::size_t>(2, report.evaluations.front().config.h2.size());
    for (std::size_t j = 1; j <= q; ++j) out << "log10_h" << j << ",";
    out << "error\n";
    for (const auto& e : report.evaluations) {
        // Joint mode writes the shared value into every column.
        for (std::size_t j = 1; j <= q; ++j) out << log10_cell(e.config.for_class(static_cast<int>(j))) << ",";
        std::ostringstream err;
        err << std::setprecision(6) << e.error;
        out << err.str() << "\n";
    }
}

void export_surface(const TuneReport& report, const std::filesystem::path& path) {
    if (report.evaluations.empty()) throw Error("surface: empty report");
    auto out = open_out(path);
    write_surface(report, out);
    if (!out) throw Error("write failed: " + path.string());
}

// ------------------------------------------------------------ spec file

ClassifierSpec ClassifierSpec::parse(const std::string& raw) {
    const std::string name = trim(raw);
    ClassifierSpec spec;
    spec.label = name;
    if (name.rfind("pp-", 0) != 0) {
        spec.potpot = false;
        spec.baseline = BaselineKind::parse(name);
        return spec;
    }
    const auto last = name.rfind('-');
    const std::string strategy = name.substr(3, last - 3);
    spec.separator = separator_kind_from(name.substr(last + 1));
    if (strategy == "joint") spec.strategy = TuneStrategy::Joint;
    else if (strategy == "separate") spec.strategy = TuneStrategy::Separate;
    else if (strategy == "regressive") spec.strategy = TuneStrategy::RegressiveSeparate;
    else if (strategy.rfind("rot-", 0) == 0) {
        spec.strategy = TuneStrategy::RuleOfThumb;
        spec.mode = scaling_mode_from(strategy.substr(4));
    } else if (strategy.rfind("mm-", 0) == 0) {
        spec.strategy = TuneStrategy::Extreme;
        spec.mode = scaling_mode_from(strategy.substr(3));
    } else {
        throw Error("unknown pot-pot strategy '" + strategy +
                    "' (expected joint|separate|regressive|rot-joint|rot-separate|mm-joint|mm-separate)");
    }
    return spec;
}

DatasetSpec DatasetSpec::parse(const std::string& raw) {
    const std::string text = trim(raw);
    DatasetSpec d;
    if (text.rfind("csv:", 0) == 0) {
        d.csv = std::filesystem::path(text.substr(4));
        d.name = d.csv->stem().string();
    } else {
        d.name = text;
    }
    if (d.name.empty()) throw Error("empty dataset name");
    return d;
}

void ExperimentSpec::validate() const {
    if (datasets.empty()) throw Error("experiment: no datasets");
    if (classifiers.empty()) throw Error("experiment: no classifiers");
    if (replications < 1) throw Error("experiment: replications must be positive");
    for (const auto& d : datasets)
        if (d.csv && !std::filesystem::exists(*d.csv)) throw Error("experiment: file not found: " + d.csv->string());
    if (reference) {
        const bool found = std::any_of(classifiers.begin(), classifiers.end(), [&](const auto& c) { return c.label == *reference; });
        if (!found) throw Error("experiment: reference '" + *reference + "' is not a classifier column");
    }
}

ExperimentSpec parse_experiment_spec(std::istream& in, const std::string& source) {
    ExperimentSpec spec;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(line_no);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto as_int = [&]() {
            const auto v = parse_number(value);
            if (!v || *v != std::floor(*v)) throw Error(where + ": '" + key + "' needs an integer");
            return static_cast<long long>(*v);
        };
        try {
            if (key == "dataset") spec.datasets.push_back(DatasetSpec::parse(value));
            else if (key == "classifiers" || key == "classifier") {
                std::stringstream list(value);
                std::string item;
                while (std::getline(list, item, ','))
                    if (!trim(item).empty()) spec.classifiers.push_back(ClassifierSpec::parse(item));
            } else if (key == "replications") spec.replications = static_cast<int>(as_int());
            else if (key == "seed") spec.seed = static_cast<std::uint64_t>(as_int());
            else if (key == "reference") spec.reference = value;
            else if (key == "threads") spec.threads = static_cast<unsigned>(as_int());
            else if (key == "output") spec.output = std::filesystem::path(value);
            else if (key == "surface_dir") spec.surface_dir = std::filesystem::path(value);
            else if (key == "max_iterations") spec.protocol.max_iterations = static_cast<int>(as_int());
            else if (key == "fold_seed") spec.protocol.fold_seed = static_cast<std::uint64_t>(as_int());
            else if (key == "k_max") spec.separator.k_max = static_cast<int>(as_int());
            else if (key == "max_degree") spec.separator.max_degree = static_cast<int>(as_int());
            else if (key == "alpha_folds") spec.separator.alpha_folds = static_cast<int>(as_int());
            else if (key == "aggregation") spec.separator.aggregation = aggregation_from(value);
            else throw Error("unknown key '" + key + "'");
        } catch (const Error& e) {
            const std::string msg = e.what();
            throw Error(msg.rfind(where, 0) == 0 ? msg : where + ": " + msg);
        }
    }
    spec.validate();
    return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return parse_experiment_spec(in, path.string());
}

// ----------------------------------------------------------- experiment

TuneReport tune_for(const ClassifierSpec& spec, ErrorEstimator& estimator) {
    if (!spec.potpot) throw Error("tune_for: '" + spec.label + "' is not a pot-pot column");
    switch (spec.strategy) {
        case TuneStrategy::Joint: return tune_joint(estimator);
        case TuneStrategy::Separate: return tune_separate(estimator);
        case TuneStrategy::RegressiveSeparate: return tune_regressive_separate(estimator);
        case TuneStrategy::RuleOfThumb: return tune_rule_of_thumb(estimator, spec.mode);
        case TuneStrategy::Extreme: return extreme_bandwidth(estimator, spec.mode);
    }
    throw Error("unknown strategy");
}

ErrorTable run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    ErrorTable table;
    for (const auto& d : spec.datasets) table.rows.push_back(d.name);
    for (const auto& c : spec.classifiers) table.columns.push_back(c.label);
    if (spec.reference)
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            if (table.columns[c] == *spec.reference) table.reference = c;

    // CSV sets are loaded up front; a load failure marks the whole row.
    std::vector<std::optional<LabeledDataset>> loaded(spec.datasets.size());
    std::vector<std::string> load_error(spec.datasets.size());
    for (std::size_t r = 0; r < spec.datasets.size(); ++r) {
        if (!spec.datasets[r].csv) continue;
        try {
            loaded[r] = load_csv(*spec.datasets[r].csv);
        } catch (const std::exception& e) {
            load_error[r] = e.what();
        }
    }

    const std::size_t nc = spec.classifiers.size();
    table.cells.assign(spec.datasets.size(), std::vector<Cell>(nc));
    parallel_for(spec.datasets.size() * nc, spec.threads, [&](std::size_t task) {
        const std::size_t r = task / nc, c = task % nc;
        Cell& cell = table.cells[r][c];
        try {
            if (!load_error[r].empty()) throw Error(load_error[r]);
            cell = spec.datasets[r].csv ? csv_cell(spec, *loaded[r], spec.classifiers[c])
                                        : simulated_cell(spec, spec.datasets[r].name, spec.classifiers[c]);
        } catch (const std::exception& e) {
            cell = Cell{};
            cell.diagnostic = e.what();
        }
    });

    if (spec.surface_dir) {
        std::filesystem::create_directories(*spec.surface_dir);
        for (std::size_t r = 0; r < table.rows.size(); ++r)
            for (std::size_t c = 0; c < nc; ++c)
                if (table.cells[r][c].surface)
                    export_surface(*table.cells[r][c].surface,
                                   *spec.surface_dir / (sanitize(table.rows[r]) + "__" + sanitize(table.columns[c]) + ".csv"));
    }
    if (spec.output) {
        auto out = open_out(*spec.output);
        table.write(out);
    }
    return table;
}

void ErrorTable::write(std::ostream& out) const {
    out << "dataset";
    for (const auto& c : columns) out << "," << quote_csv(c);
    if (reference)
        for (const auto& c : columns) out << "," << quote_csv("eff:" + c);
    out << "\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out << quote_csv(rows[r]);
        for (const Cell& cell : cells[r]) out << "," << (cell.error ? percent(*cell.error) : quote_csv("error: " + cell.diagnostic));
        if (reference) {
            const Cell& ref = cells[r][*reference];
            for (const Cell& cell : cells[r]) {
                out << ",";
                if (!cell.error || !ref.error) {
                    out << "NA";
                    continue;
                }
                const EfficiencyIndex eff = efficiency_index(*cell.error, *ref.error);
                if (eff.undefined) {
                    out << "undefined";
                } else {
                    std::ostringstream s;
                    s << std::fixed << std::setprecision(3) << eff.value;
                    out << s.str();
                }
            }
        }
        out << "\n";
    }
}

// --------------------------------------------------------------- models

void save_model(const SavedModel& model, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = "potpot-model";
    j["version"] = 1;
    j["bandwidth"] = {{"mode", to_string(model.bandwidth.mode)}, {"h2", model.bandwidth.h2}};
    j["separator"] = to_string(model.separator);
    j["options"] = {{"k_max", model.options.k_max},
                    {"max_degree", model.options.max_degree},
                    {"alpha_folds", model.options.alpha_folds},
                    {"aggregation", to_string(model.options.aggregation)}};
    nlohmann::json points = nlohmann::json::array();
    for (Eigen::Index i = 0; i < model.data.size(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(model.data.dim()));
        for (Eigen::Index c = 0; c < model.data.dim(); ++c) row[static_cast<std::size_t>(c)] = model.data.points(i, c);
        points.push_back(row);
    }
    j["data"] = {{"points", points}, {"labels", model.data.labels}};
    auto out = open_out(path);
    out << j.dump(1) << "\n";
    if (!out) throw Error("write failed: " + path.string());
}

SavedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
        const nlohmann::json j = nlohmann::json::parse(in);
        if (j.at("format") != "potpot-model") throw Error("not a pot-pot model file");
        SavedModel m;
        m.bandwidth.mode = scaling_mode_from(j.at("bandwidth").at("mode").get<std::string>());
        m.bandwidth.h2 = j.at("bandwidth").at("h2").get<std::vector<double>>();
        m.separator = separator_kind_from(j.at("separator").get<std::string>());
        const auto& o = j.at("options");
        m.options.k_max = o.at("k_max").get<int>();
        m.options.max_degree = o.at("max_degree").get<int>();
        m.options.alpha_folds = o.at("alpha_folds").get<int>();
        m.options.aggregation = aggregation_from(o.at("aggregation").get<std::string>());
        const auto rows = j.at("data").at("points").get<std::vector<std::vector<double>>>();
        auto labels = j.at("data").at("labels").get<std::vector<int>>();
        if (rows.empty() || rows.size() != labels.size()) throw Error("points and labels disagree");
        Matrix pts(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.front().size()) throw Error("ragged point rows");
            for (std::size_t c = 0; c < rows[i].size(); ++c) pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
        }
        m.data = LabeledDataset(std::move(pts), std::move(labels));
        m.bandwidth.validate(m.data.classes);
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(path.string() + ": malformed model: " + e.what());
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::unique_ptr<PotPotClassifier> build_classifier(const SavedModel& model) {
    return std::make_unique<PotPotClassifier>(model.data, model.bandwidth, model.separator, model.options);
}

int classify_multiclass(const PotentialModel& model, const MulticlassSeparator& sep, const Vector& x) {
    const Matrix z = pot_pot_transform(model, x.transpose());
    const std::vector<double> row(z.data(), z.data() + z.cols());
    return classify_multiclass(sep, row);
}

}  // namespace potpot
