/**
 * @file control.hpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 *
 * Two-layer joint controller: a PD-plus-feedforward acceleration task mapped
 * to a desired torque, and a feedforward current command that adds the
 * estimated friction. The loop runs at 1 kHz over the simulator.
 */

#ifndef FRICTIONID_CONTROL_HPP
#define FRICTIONID_CONTROL_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <frictionid/friction_models.hpp>
#include <frictionid/io.hpp>
#include <frictionid/jointsim.hpp>
#include <frictionid/pinn.hpp>

namespace frictionid::control
{

struct ControllerGains
{
    double kp{0.0};
    double kd{4.0};

    void validate() const;
};

enum class CompensatorKind
{
    None,
    Cv,
    Scv,
    Pinn
};

std::string toString(CompensatorKind kind);
CompensatorKind compensatorKindFromString(const std::string& name);

/// Friction estimator plugged into the low-level controller.
class Compensator
{
public:
    static Compensator none();
    /// CV or SCV, chosen from the parameter type.
    static Compensator fromStatic(const friction::StaticParams& params);
    static Compensator fromPinn(std::shared_ptr<const pinn::PinnModel> model);

    CompensatorKind kind() const
    {
        return m_kind;
    }
    const std::optional<friction::StaticParams>& staticParams() const
    {
        return m_static;
    }
    const std::shared_ptr<const pinn::PinnModel>& pinnModel() const
    {
        return m_pinn;
    }

private:
    CompensatorKind m_kind{CompensatorKind::None};
    std::optional<friction::StaticParams> m_static;
    std::shared_ptr<const pinn::PinnModel> m_pinn;
};

/// s_ddot* = s_ddot_des + K_d (s_dot_des - s_dot) + K_p (s_des - s).
double highLevelAccel(double sDes,
                      double sDotDes,
                      double sDdotDes,
                      double s,
                      double sDot,
                      const ControllerGains& gains);

/// tau_des = I_l s_ddot* + g_amp sin(s).
double highLevelTorque(double accel, double s, const sim::JointParams& params);

struct CurrentCommand
{
    double i_ref{0.0};
    bool saturated{false};
};

/// i_ref = (tau_des + tau_F_hat) / (r k_t), clamped to +/- i_max.
CurrentCommand lowLevelCurrent(double tauDes, double tauFHat, const sim::JointParams& params);

enum class ReferenceKind
{
    Hold,
    Sine
};

struct ReferenceSample
{
    double position{0.0};
    double velocity{0.0};
    double acceleration{0.0};
};

/// offset + amplitude sin(2 pi f t) for Sine; offset for Hold.
struct Reference
{
    ReferenceKind kind{ReferenceKind::Sine};
    double offset{0.0};
    double amplitude{0.2};
    double frequency{0.5};

    ReferenceSample sample(double t) const;
};

void to_json(nlohmann::json& j, const Reference& r);
void from_json(const nlohmann::json& j, Reference& r);

/// Rectangular link-side torque pulse on [start, start + duration).
struct DisturbancePulse
{
    double start{1.0};
    double duration{1.0};
    double amplitude{0.0};

    double torque(double t) const;
    double end() const
    {
        return start + duration;
    }
};

void to_json(nlohmann::json& j, const DisturbancePulse& d);
void from_json(const nlohmann::json& j, DisturbancePulse& d);

struct ClosedLoopOptions
{
    double duration{10.0};
    double control_rate{1000.0};
    int substeps{20};
    sim::NoiseSettings noise{};
    std::uint64_t seed{0};
    /// Jerk PSD of the online Kalman filters (joint side; motor side scaled by r^2).
    double kalman_q{1e6};
    /// First-order low-pass on the friction estimate [Hz]; 0 disables it.
    double compensation_cutoff{20.0};
    std::optional<DisturbancePulse> disturbance;

    void validate() const;
};

void to_json(nlohmann::json& j, const ClosedLoopOptions& o);
void from_json(const nlohmann::json& j, ClosedLoopOptions& o);

struct ExperimentTrace
{
    std::vector<double> t;
    std::vector<double> s_des;
    std::vector<double> s;     ///< encoder reading
    std::vector<double> s_dot; ///< online estimate
    std::vector<double> tau_des;
    std::vector<double> tau_F_hat;
    std::vector<double> i_ref;
    std::vector<double> disturbance;
    std::vector<double> saturated; ///< 0 or 1

    std::size_t size() const
    {
        return t.size();
    }
    /// Header t,s_des,s,s_dot,tau_des,tau_F_hat,i_ref,disturbance,saturated.
    io::Table toTable() const;
};

/**
 * Starts at rest on the reference at t = 0. Every tick reads noisy encoders,
 * updates the online estimates and the compensator, then holds i_ref over
 * @c substeps simulator steps.
 */
ExperimentTrace runClosedLoop(const Reference& reference,
                              const ControllerGains& gains,
                              const Compensator& compensator,
                              const sim::JointParams& params,
                              const sim::FrictionGroundTruth& gt,
                              const ClosedLoopOptions& options);

} // namespace frictionid::control

#endif // FRICTIONID_CONTROL_HPP
