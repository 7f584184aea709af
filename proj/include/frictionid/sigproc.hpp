/**
 * @file sigproc.hpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 *
 * Preprocessing chain turning raw joint logs into identification datasets:
 * Butterworth low-pass filtering, Kalman differentiation, 500 -> 1000 Hz
 * resampling, inverse dynamics and friction ground-truth reconstruction.
 */

#ifndef FRICTIONID_SIGPROC_HPP
#define FRICTIONID_SIGPROC_HPP

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include <frictionid/io.hpp>
#include <frictionid/jointsim.hpp>

namespace frictionid::sigproc
{

struct Dataset
{
    double rate{1000.0};
    std::vector<double> t;
    std::vector<double> s;
    std::vector<double> s_dot;
    std::vector<double> s_ddot;
    std::vector<double> theta;
    std::vector<double> theta_dot;
    std::vector<double> i_m;
    std::vector<double> tau;
    std::vector<double> tau_F_true;

    std::size_t size() const
    {
        return t.size();
    }

    /// Checks equal column lengths (tau / tau_F_true may be empty) and
    /// uniform timestamps within 1e-9 s.
    void validate() const;

    /// Header t,s,s_dot,s_ddot,theta,theta_dot,i_m,tau,tau_F_true.
    io::Table toTable() const;
    static Dataset fromTable(const io::Table& table);
};

/// Second-order section, transposed direct form II, a0 = 1.
struct Biquad
{
    double b0{1.0}, b1{0.0}, b2{0.0};
    double a1{0.0}, a2{0.0};
};

/// Digital Butterworth low-pass by bilinear transform with prewarping.
/// Orders 2 and 4; the DC gain of every section is 1.
std::vector<Biquad> designButterworthLowpass(double rate, double cutoff, int order);

/// Streaming (single-pass) Butterworth filter for online use.
class ButterworthFilter
{
public:
    ButterworthFilter(double rate, double cutoff, int order);

    /// Sets the internal state to the steady state of a constant input.
    void reset(double value);
    double process(double x);

private:
    std::vector<Biquad> m_sections;
    std::vector<std::array<double, 2>> m_state;
};

/**
 * Zero-phase (forward-backward) or single-pass Butterworth low-pass.
 * Requires 0 < cutoff < rate / 2 and x.size() >= 3 * order.
 */
std::vector<double> butterworthLowpass(std::span<const double> x,
                                       double rate,
                                       double cutoff,
                                       int order,
                                       bool zeroPhase = true);

/**
 * Position/velocity/acceleration Kalman filter driven by white jerk with
 * power spectral density q and position measurement variance r.
 */
class KalmanDifferentiator
{
public:
    KalmanDifferentiator(double dt, double q, double measurementVariance);

    void reset(double position);
    /// Predict + update with one position measurement; returns the estimate.
    const Eigen::Vector3d& update(double position);

    const Eigen::Vector3d& state() const
    {
        return m_x;
    }

private:
    Eigen::Matrix3d m_F;
    Eigen::Matrix3d m_Q;
    Eigen::Matrix3d m_P;
    Eigen::Vector3d m_x;
    double m_r;
    bool m_initialized{false};
};

struct KalmanEstimate
{
    std::vector<double> position;
    std::vector<double> velocity;
    std::vector<double> acceleration;
};

KalmanEstimate kalmanDifferentiate(std::span<const double> measured,
                                   double rate,
                                   double q,
                                   double measurementVariance);

/// 500 Hz -> 1000 Hz by linear interpolation at midpoints; length 2n - 1.
Dataset resample(const Dataset& input);

/// Joint torque from motion; replaceable by a multibody provider.
class InverseDynamics
{
public:
    virtual ~InverseDynamics() = default;
    virtual double torque(double s, double sDot, double sDdot) const = 0;
};

/// tau = I_l s_ddot + g_amp sin(s).
class SingleJointInverseDynamics final : public InverseDynamics
{
public:
    explicit SingleJointInverseDynamics(const sim::JointParams& params);
    double torque(double s, double sDot, double sDdot) const override;

private:
    double m_inertia;
    double m_gravity;
};

double inverseDynamicsSingleJoint(double s, double sDot, double sDdot, const sim::JointParams& params);

/// Fills dataset.tau from the provider.
void applyInverseDynamics(Dataset& dataset, const InverseDynamics& provider);

/// tau_F_true = r k_t i_m - tau, elementwise. Throws if tau is missing.
Dataset reconstructFriction(const Dataset& dataset, const sim::JointParams& params);

struct PipelineSettings
{
    double current_cutoff{20.0};
    int current_order{2};
    double kalman_q{1e2};
    /// Joint encoder variance; <= 0 means sigma_s^2 of the default noise.
    double kalman_r{-1.0};
    /// Motor-side settings; <= 0 derives q * r^2 and sigma_theta^2.
    double kalman_q_theta{-1.0};
    double kalman_r_theta{-1.0};
};

void to_json(nlohmann::json& j, const PipelineSettings& s);
void from_json(const nlohmann::json& j, PipelineSettings& s);

/**
 * Butterworth on i_m, Kalman on s and theta, resampling to 1000 Hz,
 * inverse dynamics, friction reconstruction, in that order.
 */
Dataset runPipeline(const sim::RawLog& raw,
                    const sim::JointParams& params,
                    const PipelineSettings& settings,
                    const InverseDynamics* provider = nullptr);

} // namespace frictionid::sigproc

#endif // FRICTIONID_SIGPROC_HPP
