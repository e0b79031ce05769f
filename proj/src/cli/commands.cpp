#include "kspod/cli/commands.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "kspod/binary_io.hpp"
#include "kspod/cli/report.hpp"
#include "kspod/cli/run_config.hpp"
#include "kspod/design_kit.hpp"
#include "kspod/errors.hpp"
#include "kspod/kspod_emulator.hpp"
#include "kspod/snapshot_store.hpp"
#include "kspod/synth.hpp"

namespace kspod::cli {

namespace fs = std::filesystem;

namespace {

struct Flags {
    std::string config;
    std::string workdir;
    std::optional<int> dims, slices, per_slice;
    std::optional<std::uint64_t> seed;
    std::string out, design_csv, data_dir, model;
    std::vector<double> design;
    std::vector<std::size_t> times;
    std::vector<std::string> sim, emu;
    std::string access_log;
};

RunConfig base_config(const Flags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
    if (f.seed) c.seed = *f.seed;
    if (f.dims) {
        c.design.dims = *f.dims;
        // Flag-only runs with another dimension get unit ranges.
        if (c.design.ranges.dims() != static_cast<std::size_t>(*f.dims) && *f.dims > 0) {
            std::vector<Range> unit;
            for (int k = 0; k < *f.dims; ++k) unit.push_back({0.0, 1.0, "x" + std::to_string(k + 1), ""});
            c.design.ranges = DesignRanges(std::move(unit));
        }
    }
    if (f.slices) c.design.slices = *f.slices;
    if (f.per_slice) c.design.per_slice = *f.per_slice;
    if (!f.design.empty()) c.predict.design = f.design;
    if (!f.times.empty()) c.predict.time_indices = f.times;
    validate(c);
    return c;
}

fs::path resolve(const Flags& f, const fs::path& p) {
    if (p.is_absolute() || f.workdir.empty()) return p;
    return fs::path(f.workdir) / p;
}

void ensure_parent(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_text(const fs::path& path, const std::string& text) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw FormatError(FormatErrc::Io, "cannot write " + path.string());
}

std::string case_name(const std::string& prefix, std::size_t i, std::size_t count) {
    std::ostringstream s;
    s << prefix << '_' << std::setw(std::max<int>(3, static_cast<int>(std::to_string(count).size())))
      << std::setfill('0') << i + 1;
    return s.str();
}

SynthRecipe recipe_for(const RunConfig& c) {
    SynthRecipe recipe = desk_recipe();
    if (c.design.ranges.dims() != recipe.ranges.dims()) {
        throw UsageError("the synthetic oracle needs " + std::to_string(recipe.ranges.dims()) +
                         " design dimensions, config has " + std::to_string(c.design.ranges.dims()));
    }
    recipe.ranges = c.design.ranges;
    return recipe;
}

std::vector<fs::path> synthesize(const Eigen::MatrixXd& physical, const RunConfig& c, const fs::path& dir,
                                 const std::string& prefix) {
    const SynthRecipe recipe = recipe_for(c);
    const Eigen::MatrixXd grid = c.sampling.grid();
    const Eigen::VectorXd times = c.sampling.times();
    fs::create_directories(dir);
    std::vector<fs::path> paths;
    const auto n = static_cast<std::size_t>(physical.rows());
    for (std::size_t i = 0; i < n; ++i) {
        SnapshotSet set =
            synth_flowfield(physical.row(static_cast<Eigen::Index>(i)).transpose(), grid, times, recipe);
        set.case_id = case_name(prefix, i, n);
        const fs::path path = dir / (set.case_id + ".kspd");
        write_dataset(set, path);
        paths.push_back(path);
    }
    return paths;
}

EmulatorModel train_on(const std::vector<fs::path>& paths, const RunConfig& c) {
    if (paths.empty()) throw UsageError("no training datasets found");
    std::vector<SnapshotSet> cases;
    for (const auto& p : paths) cases.push_back(read_dataset(p));
    return train(cases, c.train_options());
}

SnapshotSet predict_at(const EmulatorModel& model, const Eigen::VectorXd& x, const std::vector<std::size_t>& idx) {
    if (idx.empty()) return predict_snapshots(model, x);
    for (std::size_t q : idx) {
        if (q >= model.snapshots()) throw UsageError("time index " + std::to_string(q) + " is out of range");
    }
    SnapshotSet set;
    set.case_id = prediction_case_id(x);
    set.design = x;
    set.grid = model.grid();
    set.field = predict_field(model, x, idx);
    set.times.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) set.times[static_cast<Eigen::Index>(k)] = model.times()[static_cast<Eigen::Index>(idx[k])];
    try {
        validate(set);
    } catch (const std::invalid_argument&) {
        throw UsageError("time indices must be strictly increasing and evenly spaced");
    }
    return set;
}

EmulatorModel load_model(const fs::path& path) {
    if (!fs::exists(path)) throw UsageError("model not found: " + path.string());
    return read_emulator(path);
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Unit-cube held-out points: a Latin hypercube from seed + 1 shrunk into
// [margin, 1 - margin] so every point is interior to the training box.
Eigen::MatrixXd holdout_points(const RunConfig& c) {
    const DesignMatrix lhs = generate_slhd(1, c.holdout.count, c.design.dims, c.seed + 1);
    return (c.holdout.margin + (1.0 - 2.0 * c.holdout.margin) * lhs.points.array()).matrix();
}

class AccessLog {
public:
    explicit AccessLog(const std::string& path) {
        if (path.empty()) return;
        ensure_parent(path);
        out_.open(path, std::ios::trunc);
        if (!out_) throw UsageError("cannot open access log " + path);
        io::set_read_observer([this](const fs::path& p) {
            std::lock_guard lock(mutex_);
            out_ << "read " << fs::absolute(p).lexically_normal().string() << '\n';
        });
    }
    ~AccessLog() {
        if (out_.is_open()) io::set_read_observer(nullptr);
    }
    AccessLog(const AccessLog&) = delete;
    AccessLog& operator=(const AccessLog&) = delete;

    void phase(const std::string& name) {
        if (!out_.is_open()) return;
        std::lock_guard lock(mutex_);
        out_ << "phase " << name << '\n';
        out_.flush();
    }

private:
    std::ofstream out_;
    std::mutex mutex_;
};

int cmd_design(const Flags& f, std::ostream& out) {
    RunConfig c = base_config(f);
    const fs::path path = f.out.empty() ? resolve(f, c.paths.design_csv) : fs::path(f.out);
    const DesignMatrix d = generate_slhd(c.design.slices, c.design.per_slice, c.design.dims, c.seed);
    ensure_parent(path);
    write_design_csv(d, path);
    out << "wrote " << d.n() << " design points to " << path.string() << '\n';
    return 0;
}

int cmd_synth(const Flags& f, std::ostream& out) {
    RunConfig c = base_config(f);
    const fs::path csv = f.design_csv.empty() ? resolve(f, c.paths.design_csv) : fs::path(f.design_csv);
    if (!fs::exists(csv)) throw UsageError("design not found: " + csv.string());
    const fs::path dir = f.out.empty() ? resolve(f, c.paths.dataset_dir) : fs::path(f.out);
    const DesignMatrix d = read_design_csv(csv);
    if (d.dims() != static_cast<std::size_t>(c.design.dims)) throw UsageError("design CSV dimension does not match the config");
    const auto paths = synthesize(scale_design(d, c.design.ranges), c, dir, "case");
    out << "wrote " << paths.size() << " datasets to " << dir.string() << '\n';
    return 0;
}

int cmd_train(const Flags& f, std::ostream& out) {
    RunConfig c = base_config(f);
    const fs::path dir = f.data_dir.empty() ? resolve(f, c.paths.dataset_dir) : fs::path(f.data_dir);
    if (!fs::is_directory(dir)) throw UsageError("dataset directory not found: " + dir.string());
    const fs::path path = f.out.empty() ? resolve(f, c.paths.model) : fs::path(f.out);
    const EmulatorModel model = train_on(list_datasets(dir), c);
    ensure_parent(path);
    write_emulator(model, path);
    out << "trained on " << model.cases() << " cases, rank " << model.rank() << "; wrote " << path.string() << '\n';
    return 0;
}

int cmd_predict(const Flags& f, std::ostream& out) {
    RunConfig c = base_config(f);
    const fs::path model_path = f.model.empty() ? resolve(f, c.paths.model) : fs::path(f.model);
    const EmulatorModel model = load_model(model_path);
    if (c.predict.design.size() != model.dims()) {
        throw UsageError("prediction design needs " + std::to_string(model.dims()) + " values");
    }
    if (f.out.empty()) throw UsageError("predict needs --out");
    const SnapshotSet set = predict_at(model, to_vector(c.predict.design), c.predict.time_indices);
    ensure_parent(f.out);
    write_dataset(set, f.out);
    out << "wrote " << set.case_id << " (" << set.snapshots() << " snapshots) to " << f.out << '\n';
    return 0;
}

int cmd_eval(const Flags& f, std::ostream& out) {
    RunConfig c = base_config(f);
    if (f.sim.size() != f.emu.size() || f.sim.empty()) {
        throw UsageError("eval needs matching --sim and --emu lists");
    }
    nlohmann::json cases = nlohmann::json::array();
    for (std::size_t i = 0; i < f.sim.size(); ++i) {
        for (const auto& p : {f.sim[i], f.emu[i]}) {
            if (!fs::exists(p)) throw UsageError("dataset not found: " + p);
        }
        cases.push_back(case_report(read_dataset(f.sim[i]), read_dataset(f.emu[i]), c.metrics));
    }
    const fs::path path = f.out.empty() ? resolve(f, c.paths.report) : fs::path(f.out);
    write_text(path, report_text(assemble_report(std::move(cases))));
    out << "wrote report for " << f.sim.size() << " cases to " << path.string() << '\n';
    return 0;
}

int cmd_pipeline(const Flags& f, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    RunConfig c = base_config(f);
    AccessLog log(f.access_log);

    log.phase("design");
    const DesignMatrix design = generate_slhd(c.design.slices, c.design.per_slice, c.design.dims, c.seed);
    const fs::path csv = resolve(f, c.paths.design_csv);
    ensure_parent(csv);
    write_design_csv(design, csv);
    const Eigen::MatrixXd heldout_physical = scale_design(holdout_points(c), c.design.ranges);

    log.phase("synth");
    const auto training = synthesize(scale_design(design, c.design.ranges), c, resolve(f, c.paths.dataset_dir), "case");
    const auto heldout = synthesize(heldout_physical, c, resolve(f, c.paths.heldout_dir), "holdout");

    log.phase("train");
    const fs::path model_path = resolve(f, c.paths.model);
    {
        const EmulatorModel model = train_on(training, c);
        ensure_parent(model_path);
        write_emulator(model, model_path);
        out << "trained on " << model.cases() << " cases, rank " << model.rank() << '\n';
    }

    log.phase("predict");
    const fs::path pred_dir = resolve(f, c.paths.predictions_dir);
    fs::create_directories(pred_dir);
    std::vector<fs::path> predictions;
    {
        const EmulatorModel model = read_emulator(model_path);
        for (Eigen::Index i = 0; i < heldout_physical.rows(); ++i) {
            const SnapshotSet set = predict_at(model, heldout_physical.row(i).transpose(), c.predict.time_indices);
            predictions.push_back(pred_dir / heldout[static_cast<std::size_t>(i)].filename());
            write_dataset(set, predictions.back());
        }
    }

    log.phase("evaluate");
    nlohmann::json cases = nlohmann::json::array();
    for (std::size_t i = 0; i < heldout.size(); ++i) {
        SnapshotSet sim = read_dataset(heldout[i]);
        const SnapshotSet emu = read_dataset(predictions[i]);
        if (!c.predict.time_indices.empty()) {
            // Compare on the predicted instants only.
            Eigen::MatrixXd field(sim.field.rows(), emu.field.cols());
            for (std::size_t k = 0; k < c.predict.time_indices.size(); ++k) {
                field.col(static_cast<Eigen::Index>(k)) = sim.field.col(static_cast<Eigen::Index>(c.predict.time_indices[k]));
            }
            sim.field = std::move(field);
            sim.times = emu.times;
        }
        nlohmann::json entry = case_report(sim, emu, c.metrics);
        out << entry.at("case_id").get<std::string>() << ": eps_mean " << entry.at("eps_mean").dump()
            << " %, field relative L2 " << entry.at("field_rel_l2").get<double>() * 100.0 << " %\n";
        cases.push_back(std::move(entry));
    }
    const fs::path report_path = resolve(f, c.paths.report);
    write_text(report_path, report_text(assemble_report(std::move(cases))));
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << "wrote " << report_path.string() << " in " << std::fixed << std::setprecision(1) << seconds << " s\n";
    return 0;
}

void add_config(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON run configuration");
    sub->add_option("--workdir", f.workdir, "Base directory for relative paths from the config");
    sub->add_option("--seed", f.seed, "Seed for every random draw");
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Kernel-smoothed POD emulator toolkit", "kspod"};
    app.require_subcommand(1);
    Flags f;

    auto* design = app.add_subcommand("design", "Generate a sliced Latin hypercube design (CSV)");
    add_config(design, f);
    design->add_option("--dims", f.dims, "Design dimensions");
    design->add_option("--slices", f.slices, "Number of slices");
    design->add_option("--per-slice", f.per_slice, "Points per slice");
    design->add_option("--out", f.out, "Output CSV");

    auto* synth = app.add_subcommand("synth", "Write one synthetic KSPD1 dataset per design point");
    add_config(synth, f);
    synth->add_option("--design", f.design_csv, "Design CSV (unit coordinates)");
    synth->add_option("--out", f.out, "Output directory");

    auto* trn = app.add_subcommand("train", "Train an emulator from a dataset directory");
    add_config(trn, f);
    trn->add_option("--data", f.data_dir, "Directory of .kspd training datasets");
    trn->add_option("--out", f.out, "Output KSEM1 model");

    auto* predict = app.add_subcommand("predict", "Predict a field at a physical design point");
    add_config(predict, f);
    predict->add_option("--model", f.model, "KSEM1 model");
    predict->add_option("--design", f.design, "Physical design values")->delimiter(',');
    predict->add_option("--times", f.times, "Time-step indices (default: all)")->delimiter(',');
    predict->add_option("--out", f.out, "Output KSPD1 dataset");

    auto* eval = app.add_subcommand("eval", "Compare simulated and emulated datasets (JSON report)");
    add_config(eval, f);
    eval->add_option("--sim", f.sim, "Simulated datasets")->delimiter(',');
    eval->add_option("--emu", f.emu, "Emulated datasets, same order")->delimiter(',');
    eval->add_option("--out", f.out, "Output JSON report");

    auto* pipeline = app.add_subcommand("pipeline", "Design, synthesize, train, predict held-out points, evaluate");
    add_config(pipeline, f);
    pipeline->add_option("--access-log", f.access_log, "Record every dataset/model read, by phase");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "kspod: " << e.what() << '\n';
        return 2;
    }

    if (const char* env = std::getenv("KSPOD_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v <= 0) {
            err << "kspod: KSPOD_THREADS must be a positive integer\n";
            return 2;
        }
    }

    try {
        if (design->parsed()) return cmd_design(f, out);
        if (synth->parsed()) return cmd_synth(f, out);
        if (trn->parsed()) return cmd_train(f, out);
        if (predict->parsed()) return cmd_predict(f, out);
        if (eval->parsed()) return cmd_eval(f, out);
        if (pipeline->parsed()) {
            if (f.config.empty()) throw UsageError("pipeline needs --config");
            return cmd_pipeline(f, out);
        }
    } catch (const UsageError& e) {
        err << "kspod: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "kspod: invalid argument: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "kspod: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "kspod: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace kspod::cli
