/**
 * @file excitation.hpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 *
 * Open-loop motor-current excitation families used for friction data
 * acquisition: sine grids, ramps to the current limit and held steps.
 */

#ifndef FRICTIONID_EXCITATION_HPP
#define FRICTIONID_EXCITATION_HPP

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include <frictionid/jointsim.hpp>

namespace frictionid::excitation
{

enum class TrajectoryKind
{
    Sine,
    Ramp,
    Step
};

struct TrajectorySpec
{
    TrajectoryKind kind{TrajectoryKind::Sine};
    double amplitude{0.0};    ///< [A]; for STEP the signed level
    double frequency{0.0};    ///< [Hz], SINE only
    double slope{0.0};        ///< [A/s], RAMP only
    double hold_time{0.0};    ///< [s], STEP only
    double duration_max{0.0}; ///< [s]
    double initial_joint_position{0.0};

    void validate(double currentLimit) const;
};

/// Default sine dwell per grid cell [s].
inline constexpr double kDefaultSineDwell = 10.0;

/// Amplitude-major, frequency-minor Cartesian grid.
std::vector<TrajectorySpec> sineGrid(std::span<const double> amps,
                                     std::span<const double> freqs,
                                     double duration);

/// One ramp per slope, each ending when the command reaches i_max.
std::vector<TrajectorySpec> rampFamily(std::span<const double> slopes, double currentLimit);

std::vector<TrajectorySpec> stepFamily(std::span<const double> levels, double hold);

/// Cartesian product with initial positions (spec-major); rejects positions
/// outside [positionMin, positionMax].
std::vector<TrajectorySpec> withInitialConfigurations(std::span<const TrajectorySpec> specs,
                                                      std::span<const double> initialPositions,
                                                      double positionMin,
                                                      double positionMax);

/// Commanded current at time t (pure function of t).
double commandAt(const TrajectorySpec& spec, double t);

/// Samples [0, duration_max) at @p rate.
std::vector<sim::CurrentSample> sampleCommands(const TrajectorySpec& spec, double rate);

/// Default identification batch for a joint fixture ("ankle" or "knee").
std::vector<TrajectorySpec> defaultBatch(const std::string& fixture, const sim::JointParams& params);

std::string toString(TrajectoryKind kind);
TrajectoryKind trajectoryKindFromString(const std::string& name);

void to_json(nlohmann::json& j, const TrajectorySpec& spec);
void from_json(const nlohmann::json& j, TrajectorySpec& spec);

nlohmann::json manifestToJson(std::span<const TrajectorySpec> specs);
std::vector<TrajectorySpec> manifestFromJson(const nlohmann::json& j);

} // namespace frictionid::excitation

#endif // FRICTIONID_EXCITATION_HPP
