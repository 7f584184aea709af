/**
 * @file eval.hpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 *
 * Evaluation protocols: minimum proportional gain for accurate tracking,
 * recovery after an external disturbance, applied joint-axis moment from a
 * force/torque wrench, and report emission.
 */

#ifndef FRICTIONID_EVAL_HPP
#define FRICTIONID_EVAL_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <frictionid/control.hpp>
#include <frictionid/io.hpp>

namespace frictionid::eval
{

struct Wrench
{
    Eigen::Vector3d force{Eigen::Vector3d::Zero()};
    Eigen::Vector3d moment{Eigen::Vector3d::Zero()};
    std::string frame;
};

/// Pose of a source frame expressed in a target frame.
struct Pose
{
    Eigen::Matrix3d rotation{Eigen::Matrix3d::Identity()};
    Eigen::Vector3d translation{Eigen::Vector3d::Zero()};

    /// (this * other) maps other's source frame into this pose's target frame.
    Pose compose(const Pose& other) const;
};

/// Throws std::invalid_argument unless R^T R = I and det R = 1 within 1e-9.
void requireRotation(const Eigen::Matrix3d& rotation);

/// f' = R f, mu' = p x (R f) + R mu.
Wrench wrenchTransform(const Wrench& w, const Pose& pose, const std::string& targetFrame = {});

/// x-component of the moment after transforming into the joint frame.
double jointAxisMoment(const Wrench& w, const Pose& jointFromSensor);

/// RMS of s_des - s over samples with t >= tStart.
double trackingRmse(const control::ExperimentTrace& trace, double tStart);
/// RMS of s_des - s over tStart <= t < tEnd.
double trackingRmse(const control::ExperimentTrace& trace, double tStart, double tEnd);

/// Sum of i_ref^2 dt over the trace [A^2 s].
double energyProxy(const control::ExperimentTrace& trace);

/// Log grid with @p perDecade points per decade from lo up to hi (inclusive if on grid).
std::vector<double> logGrid(double lo, double hi, int perDecade);
std::vector<double> defaultKpGrid();

/// Everything a closed-loop experiment needs besides the gains.
struct Fixture
{
    sim::JointParams params;
    sim::FrictionGroundTruth ground_truth;
    control::Reference tracking_reference{};
    control::ClosedLoopOptions tracking_options{};
    /// RMSE is measured from this time on, after the start-up transient.
    double tracking_settle{2.0};
    double kd{4.0};
    double rmse_threshold{0.05};
    control::DisturbancePulse pulse{1.0, 1.0, 8.0};
    double recovery_window{2.0};
    double hold_position{0.0};
    /// Force/torque sensor pose in the joint frame.
    Pose sensor_pose{};

    static Fixture standard(const std::string& name);
};

struct KpSearchResult
{
    std::optional<double> kp; ///< empty when no grid point meets the threshold
    double rmse{0.0};         ///< at the returned kp (or at the last grid point)
    std::vector<double> grid_rmse; ///< filled by the linear scan only; NaN where skipped
};

double trackingRmseAt(const control::Compensator& compensator, double kp, const Fixture& fixture);

/// Smallest grid K_p whose tracking RMSE is at or below the threshold.
KpSearchResult minKpSearch(const control::Compensator& compensator,
                           std::span<const double> kpGrid,
                           const Fixture& fixture);

/// Binary search over the grid; assumes RMSE decreases with K_p.
KpSearchResult minKpBinarySearch(const control::Compensator& compensator,
                                 std::span<const double> kpGrid,
                                 const Fixture& fixture);

struct DisturbanceResult
{
    double recovery_rmse{0.0};
    double peak_moment{0.0}; ///< joint-axis moment read through the sensor wrench
    control::ExperimentTrace trace;
};

/// Hold experiment with the fixture pulse; RMSE over the window after it ends.
DisturbanceResult disturbanceRecovery(const control::Compensator& compensator,
                                      const control::ControllerGains& gains,
                                      const Fixture& fixture);

/// Sensor-frame wrench whose joint-axis moment equals @p jointTorque.
Wrench synthesizeSensorWrench(double jointTorque, const Pose& jointFromSensor);

struct ExperimentReport
{
    std::string model_kind;
    double kp{0.0};
    double kd{0.0};
    double tracking_rmse{0.0};
    double recovery_rmse{0.0};
    double recovery_kp{0.0}; ///< common gain of the disturbance experiment
    double disturbance_moment{0.0};
    double energy_proxy{0.0};
    double energy_kp{0.0}; ///< common gain of the energy comparison
    std::string trace_path;
};

/**
 * Markdown with a tracking table (columns model,rmse,moment,kp,kd; rmse is the
 * tracking RMSE at kp) followed by a disturbance-recovery and energy table.
 */
std::string reportMarkdown(std::span<const ExperimentReport> reports, const std::string& title);
/// CSV with every report field, leading with model,rmse,moment,kp,kd.
std::string reportCsv(std::span<const ExperimentReport> reports, const io::Provenance& provenance);

void emitReport(const std::filesystem::path& dir,
                std::span<const ExperimentReport> reports,
                const std::string& title,
                const io::Provenance& provenance);

} // namespace frictionid::eval

#endif // FRICTIONID_EVAL_HPP
