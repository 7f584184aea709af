/**
 * @file stages.cpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 */

#include <frictionid/stages.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <frictionid/excitation.hpp>

namespace frictionid::stages
{

void parallelFor(std::size_t n, const std::function<void(std::size_t)>& body, unsigned workers)
{
    if (workers == 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex errorMutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
    {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++)
            {
                try
                {
                    body(i);
                } catch (...)
                {
                    const std::lock_guard lock(errorMutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

std::vector<excitation::TrajectorySpec> manifest(const config::ExperimentConfig& cfg)
{
    if (!cfg.simulation.manifest.empty())
        return cfg.simulation.manifest;
    return excitation::defaultBatch(cfg.fixture, cfg.joint);
}

std::uint64_t trajectorySeed(std::uint64_t seed, std::size_t index)
{
    std::uint64_t x = seed * 0x100000001B3ULL + index + 1;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::vector<sim::RawLog> simulate(const config::ExperimentConfig& cfg)
{
    const auto specs = manifest(cfg);
    std::vector<sim::RawLog> logs(specs.size());
    parallelFor(specs.size(), [&](std::size_t k) {
        const auto commands = excitation::sampleCommands(specs[k], cfg.simulation.command_rate);
        sim::TrajectoryOptions options;
        options.log_rate = cfg.simulation.log_rate;
        options.initial_position = specs[k].initial_joint_position;
        options.noise = cfg.simulation.noise;
        options.seed = trajectorySeed(cfg.seed, k);
        logs[k] = sim::runTrajectory(cfg.joint, cfg.friction, commands, options);
    });
    return logs;
}

std::vector<sigproc::Dataset> preprocess(std::span<const sim::RawLog> logs, const config::ExperimentConfig& cfg)
{
    std::vector<const sim::RawLog*> usable;
    for (const auto& log : logs)
    {
        if (log.size() >= cfg.simulation.min_log_samples)
            usable.push_back(&log);
    }
    std::vector<sigproc::Dataset> out(usable.size());
    parallelFor(usable.size(), [&](std::size_t k) { out[k] = sigproc::runPipeline(*usable[k], cfg.joint, cfg.pipeline); });
    return out;
}

void collectSamples(std::span<const sigproc::Dataset> segments,
                    int decimation,
                    std::vector<double>& velocity,
                    std::vector<double>& friction)
{
    const auto step = static_cast<std::size_t>(std::max(1, decimation));
    for (const auto& d : segments)
    {
        for (std::size_t i = 0; i < d.size(); i += step)
        {
            velocity.push_back(d.s_dot[i]);
            friction.push_back(d.tau_F_true[i]);
        }
    }
}

StaticFits fitStatic(std::span<const sigproc::Dataset> trainSegments, const config::ExperimentConfig& cfg)
{
    std::vector<double> velocity;
    std::vector<double> friction;
    collectSamples(trainSegments, cfg.fit.decimation, velocity, friction);
    if (velocity.empty())
        throw std::runtime_error("fit: no training samples");
    StaticFits fits;
    parallelFor(2, [&](std::size_t k) {
        const auto kind = k == 0 ? friction::ModelKind::Cv : friction::ModelKind::Scv;
        (k == 0 ? fits.cv : fits.scv) = fitting::fitStaticModel(kind, velocity, friction, cfg.fit.adam);
    });
    return fits;
}

pinn::TrainResult trainPinn(const pinn::TrainValSplit& split,
                            const config::ExperimentConfig& cfg,
                            const friction::ScvParams& physics)
{
    pinn::PinnConfig pc = cfg.pinn;
    pc.physics_params = physics;
    const auto train = pinn::featurize(split.train, cfg.joint, pc.history_length);
    const auto val = pinn::featurize(split.validation, cfg.joint, pc.history_length);
    if (train.size() == 0 || val.size() == 0)
        throw std::runtime_error("train: empty training or validation features");
    return pinn::train(train, val, pc);
}

double windowedMse(const friction::StaticParams& params,
                   std::span<const sigproc::Dataset> segments,
                   const config::ExperimentConfig& cfg)
{
    const auto features = pinn::featurize(segments, cfg.joint, cfg.pinn.history_length);
    if (features.size() == 0)
        throw std::invalid_argument("windowedMse: no windows");
    double acc = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i)
    {
        const double e = friction::evaluate(params, features.s_dot[i]) - features.target[i];
        acc += e * e;
    }
    return acc / static_cast<double>(features.size());
}

nlohmann::json modelsToJson(const Models& models)
{
    nlohmann::json j{{"cv", friction::paramsToJson(models.cv)}, {"scv", friction::paramsToJson(models.scv)}};
    if (models.pinn)
        j["pinn"] = pinn::modelToJson(*models.pinn);
    return j;
}

Models modelsFromJson(const nlohmann::json& j)
{
    Models m;
    m.cv = std::get<friction::CvParams>(friction::paramsFromJson(j.at("cv")));
    m.scv = std::get<friction::ScvParams>(friction::paramsFromJson(j.at("scv")));
    if (j.contains("pinn"))
        m.pinn = std::make_shared<const pinn::PinnModel>(pinn::modelFromJson(j.at("pinn")));
    return m;
}

namespace
{

std::string reportName(control::CompensatorKind kind)
{
    std::string name = control::toString(kind);
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
    return name;
}

} // namespace

Evaluation evaluate(const Models& models, const config::ExperimentConfig& cfg)
{
    if (!models.pinn)
        throw std::invalid_argument("evaluate: PINN model missing");
    const eval::Fixture fixture = cfg.evalFixture();

    Evaluation out;
    out.grid = eval::logGrid(cfg.eval.kp_min, cfg.eval.kp_max, cfg.eval.kp_per_decade);
    const std::vector<control::Compensator> compensators{control::Compensator::none(),
                                                         control::Compensator::fromStatic(models.cv),
                                                         control::Compensator::fromStatic(models.scv),
                                                         control::Compensator::fromPinn(models.pinn)};
    out.models.resize(compensators.size());

    auto closedLoop = [&](const control::Compensator& c, double kp) {
        return control::runClosedLoop(fixture.tracking_reference,
                                      control::ControllerGains{kp, fixture.kd},
                                      c,
                                      fixture.params,
                                      fixture.ground_truth,
                                      fixture.tracking_options);
    };

    parallelFor(compensators.size(), [&](std::size_t k) {
        auto& m = out.models[k];
        m.kind = compensators[k].kind();
        m.search = eval::minKpSearch(compensators[k], out.grid, fixture);
    });

    const auto& pinnSearch = out.models[3].search;
    out.disturbance_kp = cfg.eval.disturbance_kp.value_or(pinnSearch.kp.value_or(out.grid.back()));
    out.energy_kp = out.models[0].search.kp.value_or(out.grid.back());

    parallelFor(compensators.size(), [&](std::size_t k) {
        auto& m = out.models[k];
        const double kp = m.search.kp.value_or(out.grid.back());
        try
        {
            m.tracking = closedLoop(compensators[k], kp);
        } catch (const std::runtime_error&)
        {
            m.tracking = {}; // diverged at this gain; the search already recorded it
        }
        m.disturbance = eval::disturbanceRecovery(compensators[k],
                                                  control::ControllerGains{out.disturbance_kp, fixture.kd},
                                                  fixture);
        m.energy_equal_gain = eval::energyProxy(closedLoop(compensators[k], out.energy_kp));
    });

    for (const auto& m : out.models)
    {
        eval::ExperimentReport r;
        r.model_kind = reportName(m.kind);
        r.kp = m.search.kp.value_or(std::numeric_limits<double>::quiet_NaN());
        r.kd = fixture.kd;
        r.tracking_rmse = m.search.rmse;
        r.recovery_rmse = m.disturbance.recovery_rmse;
        r.recovery_kp = out.disturbance_kp;
        r.energy_kp = out.energy_kp;
        r.disturbance_moment = m.disturbance.peak_moment;
        r.energy_proxy = m.energy_equal_gain;
        out.reports.push_back(r);
    }
    return out;
}

} // namespace frictionid::stages
