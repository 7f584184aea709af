/**
 * @file stages.hpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 *
 * Pipeline stages shared by the command-line tool and the acceptance suite:
 * simulate, preprocess, fit, train, sweep and evaluate.
 */

#ifndef FRICTIONID_STAGES_HPP
#define FRICTIONID_STAGES_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <frictionid/config.hpp>
#include <frictionid/control.hpp>
#include <frictionid/eval.hpp>
#include <frictionid/fitting.hpp>
#include <frictionid/pinn.hpp>
#include <frictionid/sigproc.hpp>

namespace frictionid::stages
{

/// Runs body(0..n-1) on up to @p workers threads; results must be written by index.
void parallelFor(std::size_t n, const std::function<void(std::size_t)>& body, unsigned workers = 0);

/// Explicit manifest of the config, or the fixture's default batch.
std::vector<excitation::TrajectorySpec> manifest(const config::ExperimentConfig& cfg);

/// Seed of trajectory @p index, derived from the experiment seed.
std::uint64_t trajectorySeed(std::uint64_t seed, std::size_t index);

/// One RawLog per manifest entry, in manifest order.
std::vector<sim::RawLog> simulate(const config::ExperimentConfig& cfg);

/// Pipeline on every log with at least min_log_samples samples.
std::vector<sigproc::Dataset> preprocess(std::span<const sim::RawLog> logs, const config::ExperimentConfig& cfg);

struct StaticFits
{
    fitting::FitResult cv;
    fitting::FitResult scv;
};

/// Velocity/friction pairs of @p segments, keeping every @p decimation-th sample.
void collectSamples(std::span<const sigproc::Dataset> segments,
                    int decimation,
                    std::vector<double>& velocity,
                    std::vector<double>& friction);

StaticFits fitStatic(std::span<const sigproc::Dataset> trainSegments, const config::ExperimentConfig& cfg);

/// Trains with cfg.pinn; the physics term uses @p physics.
pinn::TrainResult trainPinn(const pinn::TrainValSplit& split,
                            const config::ExperimentConfig& cfg,
                            const friction::ScvParams& physics);

/// Static-model data MSE on the same windows the network is validated on.
double windowedMse(const friction::StaticParams& params,
                   std::span<const sigproc::Dataset> segments,
                   const config::ExperimentConfig& cfg);

struct Models
{
    friction::CvParams cv;
    friction::ScvParams scv;
    std::shared_ptr<const pinn::PinnModel> pinn;
};

nlohmann::json modelsToJson(const Models& models);
Models modelsFromJson(const nlohmann::json& j);

struct ModelEvaluation
{
    control::CompensatorKind kind{control::CompensatorKind::None};
    eval::KpSearchResult search;
    control::ExperimentTrace tracking; ///< at the minimum K_p (or the grid maximum)
    eval::DisturbanceResult disturbance;
    double energy_equal_gain{0.0}; ///< energy proxy at the common comparison gain
};

struct Evaluation
{
    std::vector<double> grid;
    double disturbance_kp{0.0};
    double energy_kp{0.0};
    std::vector<ModelEvaluation> models; ///< NONE, CV, SCV, PINN
    std::vector<eval::ExperimentReport> reports;
};

/**
 * Minimum-K_p search for every compensator, then the disturbance experiment
 * at a common gain (configured, else the PINN's minimum K_p) and the energy
 * proxy at the NONE compensator's minimum K_p, where every model tracks.
 */
Evaluation evaluate(const Models& models, const config::ExperimentConfig& cfg);

} // namespace frictionid::stages

#endif // FRICTIONID_STAGES_HPP
