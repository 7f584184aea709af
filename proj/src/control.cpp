/**
 * @file control.cpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 */

#include <frictionid/control.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <frictionid/sigproc.hpp>

namespace frictionid::control
{

void ControllerGains::validate() const
{
    if (!(kp >= 0.0) || !std::isfinite(kp))
        throw std::invalid_argument("ControllerGains: kp must be finite and >= 0");
    if (!(kd >= 0.0) || !std::isfinite(kd))
        throw std::invalid_argument("ControllerGains: kd must be finite and >= 0");
}

std::string toString(CompensatorKind kind)
{
    switch (kind)
    {
    case CompensatorKind::None:
        return "none";
    case CompensatorKind::Cv:
        return "cv";
    case CompensatorKind::Scv:
        return "scv";
    case CompensatorKind::Pinn:
        return "pinn";
    }
    return "?";
}

CompensatorKind compensatorKindFromString(const std::string& name)
{
    if (name == "none" || name == "NONE")
        return CompensatorKind::None;
    if (name == "cv" || name == "CV")
        return CompensatorKind::Cv;
    if (name == "scv" || name == "SCV")
        return CompensatorKind::Scv;
    if (name == "pinn" || name == "PINN")
        return CompensatorKind::Pinn;
    throw std::invalid_argument("unknown compensator kind '" + name + "'");
}

Compensator Compensator::none()
{
    return Compensator{};
}

Compensator Compensator::fromStatic(const friction::StaticParams& params)
{
    std::visit([](const auto& p) { p.validate(); }, params);
    Compensator c;
    c.m_kind = friction::kindOf(params) == friction::ModelKind::Cv ? CompensatorKind::Cv : CompensatorKind::Scv;
    c.m_static = params;
    return c;
}

Compensator Compensator::fromPinn(std::shared_ptr<const pinn::PinnModel> model)
{
    if (!model)
        throw std::invalid_argument("Compensator::fromPinn: null model");
    Compensator c;
    c.m_kind = CompensatorKind::Pinn;
    c.m_pinn = std::move(model);
    return c;
}

double highLevelAccel(double sDes,
                      double sDotDes,
                      double sDdotDes,
                      double s,
                      double sDot,
                      const ControllerGains& gains)
{
    return sDdotDes + gains.kd * (sDotDes - sDot) + gains.kp * (sDes - s);
}

double highLevelTorque(double accel, double s, const sim::JointParams& params)
{
    return params.load_inertia * accel + params.gravity_amplitude * std::sin(s);
}

CurrentCommand lowLevelCurrent(double tauDes, double tauFHat, const sim::JointParams& params)
{
    const double raw = (tauDes + tauFHat) / (params.reduction_ratio * params.torque_constant);
    CurrentCommand cmd;
    cmd.i_ref = std::clamp(raw, -params.current_limit, params.current_limit);
    cmd.saturated = cmd.i_ref != raw;
    return cmd;
}

ReferenceSample Reference::sample(double t) const
{
    if (kind == ReferenceKind::Hold)
        return {offset, 0.0, 0.0};
    const double w = 2.0 * std::numbers::pi * frequency;
    return {offset + amplitude * std::sin(w * t),
            amplitude * w * std::cos(w * t),
            -amplitude * w * w * std::sin(w * t)};
}

void to_json(nlohmann::json& j, const Reference& r)
{
    j = nlohmann::json{{"kind", r.kind == ReferenceKind::Hold ? "hold" : "sine"},
                       {"offset", r.offset},
                       {"amplitude", r.amplitude},
                       {"frequency", r.frequency}};
}

void from_json(const nlohmann::json& j, Reference& r)
{
    if (j.contains("kind"))
    {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "hold")
            r.kind = ReferenceKind::Hold;
        else if (kind == "sine")
            r.kind = ReferenceKind::Sine;
        else
            throw std::invalid_argument("unknown reference kind '" + kind + "'");
    }
    r.offset = j.value("offset", r.offset);
    r.amplitude = j.value("amplitude", r.amplitude);
    r.frequency = j.value("frequency", r.frequency);
}

double DisturbancePulse::torque(double t) const
{
    return (t >= start && t < start + duration) ? amplitude : 0.0;
}

void to_json(nlohmann::json& j, const DisturbancePulse& d)
{
    j = nlohmann::json{{"start", d.start}, {"duration", d.duration}, {"amplitude", d.amplitude}};
}

void from_json(const nlohmann::json& j, DisturbancePulse& d)
{
    d.start = j.value("start", d.start);
    d.duration = j.value("duration", d.duration);
    d.amplitude = j.value("amplitude", d.amplitude);
}

void ClosedLoopOptions::validate() const
{
    if (!(duration > 0.0))
        throw std::invalid_argument("ClosedLoopOptions: duration must be > 0");
    if (!(control_rate > 0.0))
        throw std::invalid_argument("ClosedLoopOptions: control_rate must be > 0");
    if (substeps < 1)
        throw std::invalid_argument("ClosedLoopOptions: substeps must be >= 1");
    if (1.0 / (control_rate * substeps) > 1e-3)
        throw std::invalid_argument("ClosedLoopOptions: simulator step exceeds 1 ms");
    if (!(kalman_q > 0.0))
        throw std::invalid_argument("ClosedLoopOptions: kalman_q must be > 0");
    if (!(compensation_cutoff >= 0.0))
        throw std::invalid_argument("ClosedLoopOptions: compensation_cutoff must be >= 0");
    if (disturbance && !(disturbance->duration > 0.0))
        throw std::invalid_argument("ClosedLoopOptions: disturbance duration must be > 0");
}

void to_json(nlohmann::json& j, const ClosedLoopOptions& o)
{
    j = nlohmann::json{{"duration", o.duration},
                       {"control_rate", o.control_rate},
                       {"substeps", o.substeps},
                       {"noise",
                        {{"enabled", o.noise.enabled},
                         {"sigma_s", o.noise.sigma_s},
                         {"sigma_theta", o.noise.sigma_theta},
                         {"sigma_i", o.noise.sigma_i}}},
                       {"seed", o.seed},
                       {"kalman_q", o.kalman_q},
                       {"compensation_cutoff", o.compensation_cutoff}};
    if (o.disturbance)
        j["disturbance"] = *o.disturbance;
}

void from_json(const nlohmann::json& j, ClosedLoopOptions& o)
{
    o.duration = j.value("duration", o.duration);
    o.control_rate = j.value("control_rate", o.control_rate);
    o.substeps = j.value("substeps", o.substeps);
    if (j.contains("noise"))
    {
        const auto& n = j.at("noise");
        o.noise.enabled = n.value("enabled", o.noise.enabled);
        o.noise.sigma_s = n.value("sigma_s", o.noise.sigma_s);
        o.noise.sigma_theta = n.value("sigma_theta", o.noise.sigma_theta);
        o.noise.sigma_i = n.value("sigma_i", o.noise.sigma_i);
    }
    o.seed = j.value("seed", o.seed);
    o.kalman_q = j.value("kalman_q", o.kalman_q);
    o.compensation_cutoff = j.value("compensation_cutoff", o.compensation_cutoff);
    if (j.contains("disturbance") && !j.at("disturbance").is_null())
        o.disturbance = j.at("disturbance").get<DisturbancePulse>();
}

io::Table ExperimentTrace::toTable() const
{
    io::Table table;
    table.header = {"t", "s_des", "s", "s_dot", "tau_des", "tau_F_hat", "i_ref", "disturbance", "saturated"};
    table.columns = {t, s_des, s, s_dot, tau_des, tau_F_hat, i_ref, disturbance, saturated};
    return table;
}

ExperimentTrace runClosedLoop(const Reference& reference,
                              const ControllerGains& gains,
                              const Compensator& compensator,
                              const sim::JointParams& params,
                              const sim::FrictionGroundTruth& gt,
                              const ClosedLoopOptions& options)
{
    gains.validate();
    params.validate();
    gt.validate();
    options.validate();

    const double tick = 1.0 / options.control_rate;
    const double dt = tick / options.substeps;
    const auto ticks = static_cast<std::size_t>(std::llround(options.duration * options.control_rate));
    const double r = params.reduction_ratio;

    sim::SimState state = sim::SimState::atRest(reference.sample(0.0).position, params);
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto measure = [&](double value, double sigma) {
        return options.noise.enabled ? value + sigma * gauss(rng) : value;
    };

    const double sigmaS = std::max(options.noise.sigma_s, 1e-9);
    const double sigmaTheta = std::max(options.noise.sigma_theta, 1e-9);
    sigproc::KalmanDifferentiator jointFilter(tick, options.kalman_q, sigmaS * sigmaS);
    sigproc::KalmanDifferentiator motorFilter(tick, options.kalman_q * r * r, sigmaTheta * sigmaTheta);
    jointFilter.reset(state.s);
    motorFilter.reset(state.theta);

    std::optional<pinn::PinnEstimator> estimator;
    if (compensator.kind() == CompensatorKind::Pinn)
        estimator.emplace(*compensator.pinnModel());
    const double smoothing = options.compensation_cutoff > 0.0
                                 ? 1.0 - std::exp(-2.0 * std::numbers::pi * options.compensation_cutoff * tick)
                                 : 1.0;
    double tauFHat = 0.0;

    ExperimentTrace trace;
    for (auto* column : {&trace.t,
                         &trace.s_des,
                         &trace.s,
                         &trace.s_dot,
                         &trace.tau_des,
                         &trace.tau_F_hat,
                         &trace.i_ref,
                         &trace.disturbance,
                         &trace.saturated})
        column->reserve(ticks);

    for (std::size_t k = 0; k < ticks; ++k)
    {
        const double t = static_cast<double>(k) * tick;
        const double sMeas = measure(state.s, options.noise.sigma_s);
        const double thetaMeas = measure(state.theta, options.noise.sigma_theta);
        const Eigen::Vector3d& js = jointFilter.update(sMeas);
        const Eigen::Vector3d& ms = motorFilter.update(thetaMeas);
        const double sHat = js(0);
        const double sDotHat = js(1);
        const double deltaTheta = r * sHat - ms(0);

        double raw = 0.0;
        switch (compensator.kind())
        {
        case CompensatorKind::None:
            break;
        case CompensatorKind::Cv:
        case CompensatorKind::Scv:
            raw = friction::evaluate(*compensator.staticParams(), sDotHat);
            break;
        case CompensatorKind::Pinn:
            estimator->push(deltaTheta, sDotHat);
            raw = estimator->estimate();
            break;
        }
        tauFHat += smoothing * (raw - tauFHat);

        const ReferenceSample ref = reference.sample(t);
        const double accel = highLevelAccel(ref.position, ref.velocity, ref.acceleration, sHat, sDotHat, gains);
        const double tauDes = highLevelTorque(accel, sHat, params);
        const CurrentCommand cmd = lowLevelCurrent(tauDes, tauFHat, params);
        const double disturbance = options.disturbance ? options.disturbance->torque(t) : 0.0;

        trace.t.push_back(t);
        trace.s_des.push_back(ref.position);
        trace.s.push_back(sMeas);
        trace.s_dot.push_back(sDotHat);
        trace.tau_des.push_back(tauDes);
        trace.tau_F_hat.push_back(tauFHat);
        trace.i_ref.push_back(cmd.i_ref);
        trace.disturbance.push_back(disturbance);
        trace.saturated.push_back(cmd.saturated ? 1.0 : 0.0);

        for (int sub = 0; sub < options.substeps; ++sub)
            state = sim::step(state, cmd.i_ref, params, gt, dt, disturbance);
    }
    return trace;
}

} // namespace frictionid::control
