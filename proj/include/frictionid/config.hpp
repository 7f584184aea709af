/**
 * @file config.hpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 *
 * Hierarchical experiment configuration: fixture defaults, overridden by a
 * JSON file, overridden by command-line flags.
 */

#ifndef FRICTIONID_CONFIG_HPP
#define FRICTIONID_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <frictionid/control.hpp>
#include <frictionid/eval.hpp>
#include <frictionid/excitation.hpp>
#include <frictionid/fitting.hpp>
#include <frictionid/jointsim.hpp>
#include <frictionid/pinn.hpp>
#include <frictionid/sigproc.hpp>

namespace frictionid::config
{

/// Invalid configuration; @c field is a JSON pointer such as "/pinn/hidden1".
class ConfigError : public std::runtime_error
{
public:
    ConfigError(std::string field, const std::string& message);

    const std::string& field() const
    {
        return m_field;
    }

private:
    std::string m_field;
};

struct SimulationSettings
{
    double command_rate{20000.0}; ///< current command sampling [Hz]
    double log_rate{500.0};
    sim::NoiseSettings noise{};
    /// Explicit trajectories; empty selects the fixture's default batch.
    std::vector<excitation::TrajectorySpec> manifest;
    /// Logs shorter than this many samples are dropped before preprocessing.
    std::size_t min_log_samples{20};
};

struct FitSettings
{
    fitting::AdamSettings adam{};
    /// Every n-th training sample is used for the static fits.
    int decimation{10};
};

struct SweepSettings
{
    pinn::SearchSpace space{};
    int trials{8};
};

struct EvalSettings
{
    double kp_min{1.0};
    double kp_max{2e4};
    int kp_per_decade{16};
    double kd{4.0};
    double rmse_threshold{0.05};
    double tracking_duration{8.0};
    double tracking_settle{2.0};
    control::Reference reference{};
    control::DisturbancePulse pulse{1.0, 1.0, 8.0};
    double recovery_window{2.0};
    double hold_position{0.0};
    /// Online Kalman jerk PSD of the closed loop.
    double kalman_q{1e6};
    /// Low-pass cutoff on the friction estimate [Hz]; 0 disables it.
    double compensation_cutoff{20.0};
    /// Gain of the disturbance experiment; empty uses the PINN's minimum K_p.
    std::optional<double> disturbance_kp;
};

struct ExperimentConfig
{
    std::string fixture{"ankle"};
    std::uint64_t seed{1};
    sim::JointParams joint{};
    sim::FrictionGroundTruth friction{};
    SimulationSettings simulation{};
    sigproc::PipelineSettings pipeline{};
    FitSettings fit{};
    pinn::PinnConfig pinn{};
    SweepSettings sweep{};
    EvalSettings eval{};

    static ExperimentConfig defaults(const std::string& fixture);

    /// Throws ConfigError naming the offending section.
    void validate() const;

    /// Closed-loop fixture assembled from the joint, friction and eval sections.
    eval::Fixture evalFixture() const;
};

nlohmann::json toJson(const ExperimentConfig& config);

/**
 * Merges @p overrides onto the defaults of the selected fixture. Unknown keys
 * and type mismatches raise ConfigError with the JSON pointer of the field.
 */
ExperimentConfig fromJson(const nlohmann::json& overrides,
                          const std::optional<std::string>& fixtureFlag = std::nullopt,
                          const std::optional<std::uint64_t>& seedFlag = std::nullopt);

/// Precedence flag > file > default; an empty path means defaults only.
ExperimentConfig load(const std::filesystem::path& path,
                      const std::optional<std::string>& fixtureFlag = std::nullopt,
                      const std::optional<std::uint64_t>& seedFlag = std::nullopt);

/// FNV-1a of the canonical JSON dump.
std::string configHash(const ExperimentConfig& config);

io::Provenance provenance(const ExperimentConfig& config);

} // namespace frictionid::config

#endif // FRICTIONID_CONFIG_HPP
