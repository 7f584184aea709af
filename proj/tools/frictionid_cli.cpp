/**
 * @file frictionid_cli.cpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 *
 * Command-line front end: simulate, preprocess, fit, train, sweep, eval,
 * report and run-all over one experiment configuration.
 */

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <frictionid/config.hpp>
#include <frictionid/io.hpp>
#include <frictionid/stages.hpp>

namespace fs = std::filesystem;
using namespace frictionid;

namespace
{

struct CommonOptions
{
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> fixture;
    std::string in_dir;
};

/// Stage failure, reported with exit code 1.
struct StageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

std::string indexName(const std::string& prefix, std::size_t k)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%03zu.csv", prefix.c_str(), k);
    return buf;
}

std::string defaultRunDir(std::uint64_t seed)
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
    return "runs/" + std::string(buf) + "_seed" + std::to_string(seed);
}

nlohmann::json provenanceJson(const io::Provenance& p)
{
    return nlohmann::json{{"config_hash", p.configHash}, {"seed", p.seed}};
}

void writeStamped(const fs::path& path, nlohmann::json j, const io::Provenance& p)
{
    j["provenance"] = provenanceJson(p);
    io::writeJson(path, j);
}

std::vector<fs::path> listCsv(const fs::path& dir, const std::string& prefix)
{
    if (!fs::is_directory(dir))
        throw StageError("input directory '" + dir.string() + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
    {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.rfind(prefix, 0) == 0 && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw StageError("no " + prefix + "_*.csv files in '" + dir.string() + "'");
    return files;
}

class Runner
{
public:
    Runner(config::ExperimentConfig cfg, fs::path out)
        : m_cfg(std::move(cfg))
        , m_out(std::move(out))
        , m_prov(config::provenance(m_cfg))
    {
        fs::create_directories(m_out);
        writeStamped(m_out / "config.json", config::toJson(m_cfg), m_prov);
    }

    fs::path simulate()
    {
        const fs::path dir = m_out / "raw";
        fs::create_directories(dir);
        const auto specs = stages::manifest(m_cfg);
        const auto logs = stages::simulate(m_cfg);
        nlohmann::json index = nlohmann::json::array();
        for (std::size_t k = 0; k < logs.size(); ++k)
        {
            io::writeCsv(dir / indexName("log", k), logs[k].toTable(), m_prov);
            nlohmann::json entry = specs[k];
            entry["file"] = indexName("log", k);
            entry["samples"] = logs[k].size();
            entry["hit_limit"] = logs[k].hit_limit;
            index.push_back(entry);
        }
        writeStamped(dir / "manifest.json", nlohmann::json{{"trajectories", index}}, m_prov);
        std::cout << "simulate: " << logs.size() << " logs -> " << dir.string() << "\n";
        return dir;
    }

    fs::path preprocess(const fs::path& rawDir)
    {
        std::vector<sim::RawLog> logs;
        for (const auto& f : listCsv(rawDir, "log"))
            logs.push_back(sim::RawLog::fromTable(io::readCsv(f), m_cfg.simulation.log_rate));
        const auto segments = stages::preprocess(logs, m_cfg);
        if (segments.empty())
            throw StageError("preprocess: every log is shorter than min_log_samples");
        const fs::path dir = m_out / "dataset";
        fs::create_directories(dir);
        for (std::size_t k = 0; k < segments.size(); ++k)
            io::writeCsv(dir / indexName("segment", k), segments[k].toTable(), m_prov);
        std::cout << "preprocess: " << segments.size() << " segments -> " << dir.string() << "\n";
        return dir;
    }

    pinn::TrainValSplit loadSplit(const fs::path& datasetDir) const
    {
        std::vector<sigproc::Dataset> segments;
        for (const auto& f : listCsv(datasetDir, "segment"))
            segments.push_back(sigproc::Dataset::fromTable(io::readCsv(f)));
        auto split = pinn::splitSegments(segments);
        if (split.train.empty() || split.validation.empty())
            throw StageError("dataset too short for a train/validation split");
        return split;
    }

    fs::path fit(const fs::path& datasetDir, const std::string& kind)
    {
        const auto split = loadSplit(datasetDir);
        std::string hashInput;
        for (const auto& d : split.train)
            hashInput += io::toCsv(d.toTable());
        const std::string dataHash = io::fnv1aHex(hashInput);

        const fs::path dir = m_out / "fit";
        fs::create_directories(dir);
        std::vector<double> velocity;
        std::vector<double> friction;
        stages::collectSamples(split.train, m_cfg.fit.decimation, velocity, friction);
        for (const std::string k : {"cv", "scv"})
        {
            if (kind != "both" && kind != k)
                continue;
            const auto modelKind = k == "cv" ? friction::ModelKind::Cv : friction::ModelKind::Scv;
            const auto result = fitting::fitStaticModel(modelKind, velocity, friction, m_cfg.fit.adam);
            auto j = fitting::fitResultToJson(result, m_cfg.fit.adam, dataHash);
            j["validation_mse"] = stages::windowedMse(result.params, split.validation, m_cfg);
            writeStamped(dir / (k + ".json"), j, m_prov);
            io::writeCsv(dir / (k + "_loss.csv"), fitting::lossCurveTable(result), m_prov);
            std::cout << "fit " << k << ": " << friction::paramsToJson(result.params).dump()
                      << " mse=" << result.final_mse << "\n";
        }
        return dir;
    }

    friction::ScvParams physicsParams() const
    {
        const fs::path scvPath = m_out / "fit" / "scv.json";
        if (fs::exists(scvPath))
            return std::get<friction::ScvParams>(fitting::fitResultFromJson(io::readJson(scvPath)).params);
        return m_cfg.pinn.physics_params;
    }

    fs::path train(const fs::path& datasetDir)
    {
        const auto split = loadSplit(datasetDir);
        const auto result = stages::trainPinn(split, m_cfg, physicsParams());
        const fs::path dir = m_out / "pinn";
        fs::create_directories(dir);
        auto j = pinn::modelToJson(result.model);
        j["best_epoch"] = result.best_epoch;
        j["best_val_loss"] = result.best_val_loss;
        writeStamped(dir / "model.json", j, m_prov);
        io::writeCsv(dir / "curves.csv", pinn::curvesTable(result), m_prov);
        std::cout << "train: best epoch " << result.best_epoch << ", validation data MSE " << result.best_val_loss
                  << "\n";
        return dir;
    }

    fs::path sweep(const fs::path& datasetDir)
    {
        const auto split = loadSplit(datasetDir);
        const auto result = pinn::randomSearch(split.train,
                                               split.validation,
                                               m_cfg.joint,
                                               m_cfg.sweep.space,
                                               m_cfg.pinn,
                                               m_cfg.sweep.trials,
                                               m_cfg.seed);
        const fs::path dir = m_out / "sweep";
        fs::create_directories(dir);
        io::writeCsv(dir / "trials.csv", result.trials, m_prov);
        writeStamped(dir / "best.json", nlohmann::json{{"pinn", result.best}, {"val_loss", result.best_val_loss}}, m_prov);
        std::cout << "sweep: best validation loss " << result.best_val_loss << "\n";
        return dir;
    }

    fs::path evaluate(const fs::path& modelDir)
    {
        const fs::path cvPath = modelDir / "fit" / "cv.json";
        const fs::path scvPath = modelDir / "fit" / "scv.json";
        const fs::path pinnPath = modelDir / "pinn" / "model.json";
        for (const auto& p : {cvPath, scvPath, pinnPath})
        {
            if (!fs::exists(p))
                throw StageError("eval: missing model file '" + p.string() + "'");
        }
        stages::Models models;
        models.cv = std::get<friction::CvParams>(fitting::fitResultFromJson(io::readJson(cvPath)).params);
        models.scv = std::get<friction::ScvParams>(fitting::fitResultFromJson(io::readJson(scvPath)).params);
        models.pinn = std::make_shared<const pinn::PinnModel>(pinn::modelFromJson(io::readJson(pinnPath)));

        auto result = stages::evaluate(models, m_cfg);
        const fs::path dir = m_out / "eval";
        fs::create_directories(dir);
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t k = 0; k < result.models.size(); ++k)
        {
            const auto& m = result.models[k];
            auto& report = result.reports[k];
            const std::string name = control::toString(m.kind);
            report.trace_path = "tracking_" + name + ".csv";
            if (m.tracking.size() > 0)
                io::writeCsv(dir / report.trace_path, m.tracking.toTable(), m_prov);
            io::writeCsv(dir / ("disturbance_" + name + ".csv"), m.disturbance.trace.toTable(), m_prov);
            io::Table grid;
            grid.header = {"kp", "rmse"};
            grid.columns = {result.grid, m.search.grid_rmse};
            io::writeCsv(dir / ("kp_grid_" + name + ".csv"), grid, m_prov);
            rows.push_back({{"model", report.model_kind},
                            {"kp", m.search.kp ? nlohmann::json(*m.search.kp) : nlohmann::json(nullptr)},
                            {"kd", report.kd},
                            {"tracking_rmse", report.tracking_rmse},
                            {"recovery_rmse", report.recovery_rmse},
                            {"recovery_kp", report.recovery_kp},
                            {"disturbance_moment", report.disturbance_moment},
                            {"energy_proxy", report.energy_proxy},
                            {"energy_kp", report.energy_kp},
                            {"trace", report.trace_path}});
        }
        writeStamped(dir / "evaluation.json",
                     nlohmann::json{{"reports", rows},
                                    {"disturbance_kp", result.disturbance_kp},
                                    {"energy_kp", result.energy_kp},
                                    {"rmse_threshold", m_cfg.eval.rmse_threshold}},
                     m_prov);
        std::cout << "eval: " << rows.size() << " models -> " << dir.string() << "\n";
        return dir;
    }

    fs::path report(const fs::path& evalDir)
    {
        const fs::path path = evalDir / "evaluation.json";
        if (!fs::exists(path))
            throw StageError("report: missing '" + path.string() + "'");
        const auto j = io::readJson(path);
        std::vector<eval::ExperimentReport> reports;
        for (const auto& row : j.at("reports"))
        {
            eval::ExperimentReport r;
            r.model_kind = row.at("model").get<std::string>();
            r.kp = row.at("kp").is_null() ? std::numeric_limits<double>::quiet_NaN() : row.at("kp").get<double>();
            r.kd = row.at("kd").get<double>();
            r.tracking_rmse = row.at("tracking_rmse").get<double>();
            r.recovery_rmse = row.at("recovery_rmse").get<double>();
            r.recovery_kp = row.at("recovery_kp").get<double>();
            r.disturbance_moment = row.at("disturbance_moment").get<double>();
            r.energy_proxy = row.at("energy_proxy").get<double>();
            r.energy_kp = row.at("energy_kp").get<double>();
            r.trace_path = row.at("trace").get<std::string>();
            reports.push_back(r);
        }
        const fs::path dir = m_out / "report";
        eval::emitReport(dir, reports, "Friction compensation, " + m_cfg.fixture + " fixture", m_prov);
        std::cout << "report: " << (dir / "report.md").string() << "\n";
        return dir;
    }

    const fs::path& out() const
    {
        return m_out;
    }

private:
    config::ExperimentConfig m_cfg;
    fs::path m_out;
    io::Provenance m_prov;
};

void addCommon(CLI::App* cmd, CommonOptions& opts, bool withInput, const std::string& inputHelp)
{
    cmd->add_option("--config", opts.config_path, "Experiment configuration (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out_dir, "Output directory (default runs/<timestamp>_seed<N>)");
    cmd->add_option("--seed", opts.seed, "Experiment seed; overrides the configuration");
    cmd->add_option("--fixture", opts.fixture, "Joint fixture; overrides the configuration")
        ->check(CLI::IsMember({"ankle", "knee"}));
    if (withInput)
        cmd->add_option("--in", opts.in_dir, inputHelp);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Joint friction identification and compensation experiments"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    CommonOptions opts;
    std::string fitKind = "both";

    auto* simulateCmd = app.add_subcommand("simulate", "Simulate the excitation batch and write raw logs");
    addCommon(simulateCmd, opts, false, "");
    auto* preprocessCmd = app.add_subcommand("preprocess", "Filter, differentiate and reconstruct friction");
    addCommon(preprocessCmd, opts, true, "Raw log directory (default <out>/raw)");
    auto* fitCmd = app.add_subcommand("fit", "Fit the CV and SCV models");
    addCommon(fitCmd, opts, true, "Dataset directory (default <out>/dataset)");
    fitCmd->add_option("--kind", fitKind, "Model to fit")->check(CLI::IsMember({"cv", "scv", "both"}));
    auto* trainCmd = app.add_subcommand("train", "Train the PINN estimator");
    addCommon(trainCmd, opts, true, "Dataset directory (default <out>/dataset)");
    auto* sweepCmd = app.add_subcommand("sweep", "Random hyperparameter search");
    addCommon(sweepCmd, opts, true, "Dataset directory (default <out>/dataset)");
    auto* evalCmd = app.add_subcommand("eval", "Closed-loop evaluation of all compensators");
    addCommon(evalCmd, opts, true, "Run directory holding fit/ and pinn/ (default <out>)");
    auto* reportCmd = app.add_subcommand("report", "Render the evaluation tables");
    addCommon(reportCmd, opts, true, "Evaluation directory (default <out>/eval)");
    auto* runAllCmd = app.add_subcommand("run-all", "simulate, preprocess, fit, train, eval and report");
    addCommon(runAllCmd, opts, false, "");

    try
    {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    config::ExperimentConfig cfg;
    try
    {
        cfg = config::load(opts.config_path, opts.fixture, opts.seed);
    } catch (const config::ConfigError& e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    const fs::path out = opts.out_dir.empty() ? fs::path(defaultRunDir(cfg.seed)) : fs::path(opts.out_dir);
    auto input = [&](const fs::path& fallback) { return opts.in_dir.empty() ? fallback : fs::path(opts.in_dir); };

    try
    {
        Runner runner(cfg, out);
        if (simulateCmd->parsed())
            runner.simulate();
        else if (preprocessCmd->parsed())
            runner.preprocess(input(out / "raw"));
        else if (fitCmd->parsed())
            runner.fit(input(out / "dataset"), fitKind);
        else if (trainCmd->parsed())
            runner.train(input(out / "dataset"));
        else if (sweepCmd->parsed())
            runner.sweep(input(out / "dataset"));
        else if (evalCmd->parsed())
            runner.evaluate(input(out));
        else if (reportCmd->parsed())
            runner.report(input(out / "eval"));
        else if (runAllCmd->parsed())
        {
            const auto raw = runner.simulate();
            const auto dataset = runner.preprocess(raw);
            runner.fit(dataset, "both");
            runner.train(dataset);
            runner.report(runner.evaluate(runner.out()));
        }
    } catch (const std::exception& e)
    {
        std::cerr << "stage failed: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
