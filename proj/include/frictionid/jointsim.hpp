/**
 * @file jointsim.hpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 *
 * Fixed-step simulator of one electric motor driving a link through a
 * compliant harmonic-drive transmission (two-mass model) with nonlinear
 * friction and Karnopp stick-slip handling.
 */

#ifndef FRICTIONID_JOINTSIM_HPP
#define FRICTIONID_JOINTSIM_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include <frictionid/friction_models.hpp>
#include <frictionid/io.hpp>

namespace frictionid::sim
{

/// Internal integration step (20 kHz).
inline constexpr double kDefaultDt = 5e-5;

/// Karnopp dead band, expressed as motor-shaft speed [rad/s].
inline constexpr double kStickBandMotor = 1e-3;

struct JointParams
{
    double reduction_ratio{100.0};         ///< r
    double torque_constant{0.111};         ///< k_t [N m/A]
    double motor_inertia{1e-6};            ///< J_m [kg m^2], motor side
    double load_inertia{0.05};             ///< I_l [kg m^2], joint side
    double gravity_amplitude{0.0};         ///< g_amp [N m], tau_g = g_amp sin(s)
    double transmission_stiffness{1e4};    ///< K_hd [N m/rad]
    double transmission_damping{5.0};      ///< D_hd [N m s/rad]
    double position_min{-0.5};             ///< s_min [rad]
    double position_max{0.5};              ///< s_max [rad]
    double current_limit{2.0};             ///< i_max [A]
    double current_time_constant{0.0};     ///< tau_i [s], 0 = ideal current loop

    void validate() const;

    static JointParams ankle();
    static JointParams knee();
    static JointParams fixture(const std::string& name);
};

struct SimState
{
    double s{0.0};         ///< joint position [rad]
    double s_dot{0.0};     ///< [rad/s]
    double theta{0.0};     ///< motor position [rad]
    double theta_dot{0.0}; ///< [rad/s]
    double i_m{0.0};       ///< actual motor current [A]
    double t{0.0};         ///< [s]

    double friction_lag{0.0}; ///< first-order lag state of the hysteresis fixture [N m]
    double friction{0.0};     ///< friction torque applied in the last step, joint side [N m]
    bool stuck{false};        ///< Karnopp stick flag of the last step
    bool at_limit{false};     ///< a position stop was hit in the last step

    /// Rest state at joint position s0 with an unloaded transmission.
    static SimState atRest(double s0, const JointParams& params);
};

enum class FrictionKind
{
    Cv,
    Scv,
    ScvPlusHysteresis
};

/// Which body of the two-mass model the friction torque acts on.
enum class FrictionSide
{
    Motor, ///< motor shaft, reflected through r
    Joint  ///< link side of the compliant transmission
};

struct FrictionGroundTruth
{
    FrictionKind kind{FrictionKind::Scv};
    friction::StaticParams params{friction::ScvParams{}};
    double hysteresis_gain{0.0};           ///< h_g [N m]
    double hysteresis_timeconstant{0.02};  ///< h_tc [s]
    FrictionSide side{FrictionSide::Joint};

    void validate() const;

    /// Stiction level at zero velocity: k_s for the SCV kinds, k_c for CV.
    double breakaway() const;

    /// All coefficients zero; used for energy checks.
    static FrictionGroundTruth frictionless();
    static FrictionGroundTruth fixture(const std::string& name);
};

std::string toString(FrictionKind kind);
FrictionKind frictionKindFromString(const std::string& name);
std::string toString(FrictionSide side);
FrictionSide frictionSideFromString(const std::string& name);

/**
 * Sliding friction at joint-side velocity @p jointVelocity. For the CV/SCV
 * kinds this is exactly the corresponding static model; the hysteresis kind
 * returns the lag state plus a smoothed-sign asymmetry term that vanishes once
 * the lag has settled.
 */
double frictionGroundTruthTorque(double jointVelocity, double lagState, const FrictionGroundTruth& gt);

/// Exact first-order-lag update of the hysteresis state over @p dt.
double advanceFrictionLag(double lagState, double jointVelocity, const FrictionGroundTruth& gt, double dt);

/**
 * One semi-implicit Euler step. @p iCmd is clamped to +/- i_max; an optional
 * external torque acts on the link. Throws std::runtime_error naming the
 * first non-finite state field.
 */
SimState step(const SimState& state,
              double iCmd,
              const JointParams& params,
              const FrictionGroundTruth& gt,
              double dt,
              double externalTorque = 0.0);

/// Kinetic + elastic + gravitational energy of the two-mass model.
double mechanicalEnergy(const SimState& state, const JointParams& params);

struct CurrentSample
{
    double t{0.0};
    double i{0.0};
};

struct NoiseSettings
{
    bool enabled{true};
    double sigma_s{5e-5};     ///< joint encoder [rad]
    double sigma_theta{5e-5}; ///< motor encoder [rad]
    double sigma_i{5e-3};     ///< current sensor [A]
};

struct TrajectoryOptions
{
    double log_rate{500.0};
    double dt{kDefaultDt};
    double initial_position{0.0};
    NoiseSettings noise{};
    std::uint64_t seed{0};
    bool stop_at_limit{true};
};

/**
 * Logged signals of one trajectory. The noisy channels are what the
 * identification pipeline sees; the shadow channels are exact simulator
 * state kept for oracle checks.
 */
struct RawLog
{
    double rate{500.0};
    std::vector<double> t;
    std::vector<double> s;
    std::vector<double> theta;
    std::vector<double> i_m;
    std::vector<double> s_shadow;
    std::vector<double> theta_shadow;

    // in-memory only
    std::vector<double> s_dot_shadow;
    std::vector<double> i_m_shadow;
    std::vector<double> friction_shadow;
    bool hit_limit{false};

    std::size_t size() const
    {
        return t.size();
    }

    /// Columns t,s,theta,i_m,s_shadow,theta_shadow.
    io::Table toTable() const;
    static RawLog fromTable(const io::Table& table, double rate);
};

/**
 * Plays a zero-order-hold current sequence through the simulator and logs at
 * @p options.log_rate. The sequence covers [t_0, t_last + spacing). The log
 * stops at the first position-limit contact when stop_at_limit is set.
 */
RawLog runTrajectory(const JointParams& params,
                     const FrictionGroundTruth& gt,
                     std::span<const CurrentSample> currents,
                     const TrajectoryOptions& options);

void to_json(nlohmann::json& j, const JointParams& p);
void from_json(const nlohmann::json& j, JointParams& p);
void to_json(nlohmann::json& j, const FrictionGroundTruth& gt);
void from_json(const nlohmann::json& j, FrictionGroundTruth& gt);

} // namespace frictionid::sim

#endif // FRICTIONID_JOINTSIM_HPP
