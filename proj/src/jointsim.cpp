/**
 * @file jointsim.cpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 */

#include <frictionid/jointsim.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace frictionid::sim
{

namespace
{

void require(bool condition, const std::string& what)
{
    if (!condition)
        throw std::invalid_argument(what);
}

double sign(double x)
{
    return (x > 0.0) - (x < 0.0);
}

void checkFinite(const SimState& s)
{
    const std::pair<const char*, double> fields[] = {{"s", s.s},
                                                     {"s_dot", s.s_dot},
                                                     {"theta", s.theta},
                                                     {"theta_dot", s.theta_dot},
                                                     {"i_m", s.i_m},
                                                     {"friction_lag", s.friction_lag}};
    for (const auto& [name, value] : fields)
    {
        if (!std::isfinite(value))
            throw std::runtime_error(std::string("jointsim: non-finite state field '") + name
                                     + "'");
    }
}

} // namespace

void JointParams::validate() const
{
    require(reduction_ratio > 0.0, "JointParams: reduction_ratio must be > 0");
    require(torque_constant > 0.0, "JointParams: torque_constant must be > 0");
    require(motor_inertia > 0.0, "JointParams: motor_inertia must be > 0");
    require(load_inertia > 0.0, "JointParams: load_inertia must be > 0");
    require(transmission_stiffness > 0.0, "JointParams: transmission_stiffness must be > 0");
    require(transmission_damping >= 0.0, "JointParams: transmission_damping must be >= 0");
    require(position_min < position_max, "JointParams: position_min must be < position_max");
    require(current_limit > 0.0, "JointParams: current_limit must be > 0");
    require(current_time_constant >= 0.0, "JointParams: current_time_constant must be >= 0");
    require(std::isfinite(gravity_amplitude), "JointParams: gravity_amplitude must be finite");
}

JointParams JointParams::ankle()
{
    return JointParams{};
}

JointParams JointParams::knee()
{
    JointParams p;
    p.load_inertia = 0.5;
    p.gravity_amplitude = 30.0;
    p.position_min = -1.2;
    p.position_max = 1.2;
    p.current_limit = 6.0;
    return p;
}

JointParams JointParams::fixture(const std::string& name)
{
    if (name == "ankle")
        return ankle();
    if (name == "knee")
        return knee();
    throw std::invalid_argument("unknown joint fixture '" + name + "'");
}

SimState SimState::atRest(double s0, const JointParams& params)
{
    SimState state;
    state.s = s0;
    state.theta = params.reduction_ratio * s0;
    return state;
}

void FrictionGroundTruth::validate() const
{
    std::visit([](const auto& p) { p.validate(); }, params);
    require(hysteresis_gain >= 0.0, "FrictionGroundTruth: hysteresis_gain must be >= 0");
    if (kind == FrictionKind::Cv)
    {
        require(std::holds_alternative<friction::CvParams>(params),
                "FrictionGroundTruth: CV kind needs CV parameters");
    } else
    {
        require(std::holds_alternative<friction::ScvParams>(params),
                "FrictionGroundTruth: SCV kinds need SCV parameters");
    }
    if (kind == FrictionKind::ScvPlusHysteresis)
    {
        require(hysteresis_timeconstant > 0.0,
                "FrictionGroundTruth: hysteresis_timeconstant must be > 0");
    }
}

double FrictionGroundTruth::breakaway() const
{
    if (const auto* cv = std::get_if<friction::CvParams>(&params))
        return cv->k_c;
    return std::get<friction::ScvParams>(params).k_s;
}

FrictionGroundTruth FrictionGroundTruth::frictionless()
{
    FrictionGroundTruth gt;
    gt.kind = FrictionKind::Cv;
    gt.params = friction::CvParams{1.0, 0.0, 0.0};
    return gt;
}

FrictionGroundTruth FrictionGroundTruth::fixture(const std::string& name)
{
    FrictionGroundTruth gt;
    gt.kind = FrictionKind::ScvPlusHysteresis;
    gt.hysteresis_timeconstant = 0.02;
    if (name == "ankle")
    {
        gt.params = friction::ankleScvPreset();
        gt.hysteresis_gain = 0.5;
    } else if (name == "knee")
    {
        gt.params = friction::kneeScvPreset();
        gt.hysteresis_gain = 2.0;
    } else
    {
        throw std::invalid_argument("unknown friction fixture '" + name + "'");
    }
    return gt;
}

std::string toString(FrictionKind kind)
{
    switch (kind)
    {
    case FrictionKind::Cv:
        return "cv";
    case FrictionKind::Scv:
        return "scv";
    case FrictionKind::ScvPlusHysteresis:
        return "scv_plus_hysteresis";
    }
    return "?";
}

FrictionKind frictionKindFromString(const std::string& name)
{
    if (name == "cv")
        return FrictionKind::Cv;
    if (name == "scv")
        return FrictionKind::Scv;
    if (name == "scv_plus_hysteresis")
        return FrictionKind::ScvPlusHysteresis;
    throw std::invalid_argument("unknown friction ground-truth kind '" + name + "'");
}

std::string toString(FrictionSide side)
{
    return side == FrictionSide::Motor ? "motor" : "joint";
}

FrictionSide frictionSideFromString(const std::string& name)
{
    if (name == "motor")
        return FrictionSide::Motor;
    if (name == "joint")
        return FrictionSide::Joint;
    throw std::invalid_argument("unknown friction side '" + name + "'");
}

double frictionGroundTruthTorque(double jointVelocity, double lagState, const FrictionGroundTruth& gt)
{
    switch (gt.kind)
    {
    case FrictionKind::Cv:
        return friction::cvEval(std::get<friction::CvParams>(gt.params), jointVelocity);
    case FrictionKind::Scv:
        return friction::scvEval(std::get<friction::ScvParams>(gt.params), jointVelocity);
    case FrictionKind::ScvPlusHysteresis: {
        const auto& p = std::get<friction::ScvParams>(gt.params);
        const double target = friction::scvEval(p, jointVelocity);
        const double scale = p.k_c > 0.0 ? p.k_c : 1.0;
        return lagState + gt.hysteresis_gain * std::tanh((target - lagState) / scale);
    }
    }
    return 0.0;
}

double advanceFrictionLag(double lagState, double jointVelocity, const FrictionGroundTruth& gt, double dt)
{
    if (gt.kind != FrictionKind::ScvPlusHysteresis)
        return lagState;
    const double target
        = friction::scvEval(std::get<friction::ScvParams>(gt.params), jointVelocity);
    return target + (lagState - target) * std::exp(-dt / gt.hysteresis_timeconstant);
}

SimState step(const SimState& state,
              double iCmd,
              const JointParams& params,
              const FrictionGroundTruth& gt,
              double dt,
              double externalTorque)
{
    if (!(dt > 0.0 && dt <= 1e-3))
        throw std::invalid_argument("jointsim: dt must be in (0, 1e-3]");
    checkFinite(state);

    const double r = params.reduction_ratio;
    const double iLimited = std::clamp(iCmd, -params.current_limit, params.current_limit);

    SimState next = state;
    if (params.current_time_constant > 0.0)
    {
        const double alpha = std::min(1.0, dt / params.current_time_constant);
        next.i_m = state.i_m + alpha * (iLimited - state.i_m);
    } else
    {
        next.i_m = iLimited;
    }

    const double twist = state.theta / r - state.s;
    const double twistRate = state.theta_dot / r - state.s_dot;
    const double transmission
        = params.transmission_stiffness * twist + params.transmission_damping * twistRate;

    // Everything below is in joint-side units: the motor is a body of inertia
    // r^2 J_m moving at theta_dot / r.
    const double motorInertia = r * r * params.motor_inertia;
    const double motorVelocity = state.theta_dot / r;
    const double motorNet = r * params.torque_constant * next.i_m - transmission;
    const double loadNet
        = transmission - params.gravity_amplitude * std::sin(state.s) + externalTorque;

    const bool motorSide = gt.side == FrictionSide::Motor;
    const double bodyInertia = motorSide ? motorInertia : params.load_inertia;
    const double bodyVelocity = motorSide ? motorVelocity : state.s_dot;
    const double bodyNet = motorSide ? motorNet : loadNet;
    const double band = kStickBandMotor / r;
    const double breakaway = gt.breakaway();

    double friction = 0.0;
    double bodyVelocityNext = 0.0;
    next.stuck = false;
    if (std::abs(bodyVelocity) < band)
    {
        if (std::abs(bodyNet) <= breakaway)
        {
            friction = bodyNet;
            next.stuck = true;
        } else
        {
            friction = breakaway * sign(bodyNet);
            bodyVelocityNext = bodyVelocity + dt * (bodyNet - friction) / bodyInertia;
        }
    } else
    {
        friction = frictionGroundTruthTorque(bodyVelocity, state.friction_lag, gt);
        bodyVelocityNext = bodyVelocity + dt * (bodyNet - friction) / bodyInertia;
        // a reversal produced by friction alone ends in sticking
        if (bodyVelocityNext * bodyVelocity < 0.0 && friction * bodyVelocity > 0.0)
        {
            const double freeVelocity = bodyVelocity + dt * bodyNet / bodyInertia;
            if (freeVelocity * bodyVelocity >= 0.0)
                bodyVelocityNext = 0.0;
        }
    }
    next.friction = friction;

    double motorVelocityNext = 0.0;
    if (motorSide)
    {
        motorVelocityNext = bodyVelocityNext;
        next.s_dot = state.s_dot + dt * loadNet / params.load_inertia;
    } else
    {
        motorVelocityNext = motorVelocity + dt * motorNet / motorInertia;
        next.s_dot = bodyVelocityNext;
    }
    next.theta_dot = r * motorVelocityNext;

    next.theta = state.theta + dt * next.theta_dot;
    next.s = state.s + dt * next.s_dot;

    next.at_limit = false;
    if (next.s >= params.position_max)
    {
        next.s = params.position_max;
        next.s_dot = std::min(next.s_dot, 0.0);
        next.at_limit = true;
    } else if (next.s <= params.position_min)
    {
        next.s = params.position_min;
        next.s_dot = std::max(next.s_dot, 0.0);
        next.at_limit = true;
    }

    next.friction_lag = advanceFrictionLag(state.friction_lag, bodyVelocity, gt, dt);
    next.t = state.t + dt;
    checkFinite(next);
    return next;
}

double mechanicalEnergy(const SimState& state, const JointParams& params)
{
    const double twist = state.theta / params.reduction_ratio - state.s;
    return 0.5 * params.motor_inertia * state.theta_dot * state.theta_dot
           + 0.5 * params.load_inertia * state.s_dot * state.s_dot
           + 0.5 * params.transmission_stiffness * twist * twist
           + params.gravity_amplitude * (1.0 - std::cos(state.s));
}

io::Table RawLog::toTable() const
{
    return io::Table{{"t", "s", "theta", "i_m", "s_shadow", "theta_shadow"},
                     {t, s, theta, i_m, s_shadow, theta_shadow}};
}

RawLog RawLog::fromTable(const io::Table& table, double rate)
{
    RawLog log;
    log.rate = rate;
    log.t = table.column("t");
    log.s = table.column("s");
    log.theta = table.column("theta");
    log.i_m = table.column("i_m");
    log.s_shadow = table.column("s_shadow");
    log.theta_shadow = table.column("theta_shadow");
    return log;
}

RawLog runTrajectory(const JointParams& params,
                     const FrictionGroundTruth& gt,
                     std::span<const CurrentSample> currents,
                     const TrajectoryOptions& options)
{
    params.validate();
    gt.validate();
    if (currents.empty())
        throw std::invalid_argument("runTrajectory: empty current sequence");
    if (!(options.log_rate > 0.0))
        throw std::invalid_argument("runTrajectory: log_rate must be > 0");
    if (options.initial_position < params.position_min
        || options.initial_position > params.position_max)
    {
        throw std::invalid_argument("runTrajectory: initial position outside joint limits");
    }

    const double logPeriod = 1.0 / options.log_rate;
    const auto substeps = static_cast<std::size_t>(std::llround(logPeriod / options.dt));
    if (substeps == 0 || std::abs(substeps * options.dt - logPeriod) > 1e-12)
        throw std::invalid_argument("runTrajectory: log period must be a multiple of dt");

    const std::size_t n = currents.size();
    const double spacing = n > 1 ? currents[n - 1].t - currents[n - 2].t : logPeriod;
    if (n > 1 && currents[1].t - currents[0].t > logPeriod + 1e-12)
        throw std::invalid_argument("runTrajectory: currents must be sampled at >= log_rate");
    const double t0 = currents.front().t;
    const double tEnd = currents.back().t + spacing;
    const auto nLog = static_cast<std::size_t>(std::ceil((tEnd - t0) / logPeriod - 1e-9));

    RawLog log;
    log.rate = options.log_rate;
    for (auto* v : {&log.t, &log.s, &log.theta, &log.i_m, &log.s_shadow, &log.theta_shadow,
                    &log.s_dot_shadow, &log.i_m_shadow, &log.friction_shadow})
    {
        v->reserve(nLog);
    }

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const bool noisy = options.noise.enabled;

    SimState state = SimState::atRest(options.initial_position, params);
    state.t = t0;
    std::size_t cmd = 0;

    for (std::size_t k = 0; k < nLog; ++k)
    {
        const double tk = t0 + static_cast<double>(k) * logPeriod;
        const double ns = noisy ? options.noise.sigma_s * gauss(rng) : 0.0;
        const double nt = noisy ? options.noise.sigma_theta * gauss(rng) : 0.0;
        const double ni = noisy ? options.noise.sigma_i * gauss(rng) : 0.0;
        log.t.push_back(tk);
        log.s.push_back(state.s + ns);
        log.theta.push_back(state.theta + nt);
        log.i_m.push_back(state.i_m + ni);
        log.s_shadow.push_back(state.s);
        log.theta_shadow.push_back(state.theta);
        log.s_dot_shadow.push_back(state.s_dot);
        log.i_m_shadow.push_back(state.i_m);
        log.friction_shadow.push_back(state.friction);

        if (k + 1 == nLog)
            break;
        for (std::size_t j = 0; j < substeps; ++j)
        {
            const double tSub = tk + static_cast<double>(j) * options.dt;
            while (cmd + 1 < n && currents[cmd + 1].t <= tSub + 1e-12)
                ++cmd;
            state = step(state, currents[cmd].i, params, gt, options.dt);
            if (options.stop_at_limit && state.at_limit)
            {
                log.hit_limit = true;
                return log;
            }
        }
    }
    return log;
}

void to_json(nlohmann::json& j, const JointParams& p)
{
    j = nlohmann::json{{"reduction_ratio", p.reduction_ratio},
                       {"torque_constant", p.torque_constant},
                       {"motor_inertia", p.motor_inertia},
                       {"load_inertia", p.load_inertia},
                       {"gravity_amplitude", p.gravity_amplitude},
                       {"transmission_stiffness", p.transmission_stiffness},
                       {"transmission_damping", p.transmission_damping},
                       {"position_min", p.position_min},
                       {"position_max", p.position_max},
                       {"current_limit", p.current_limit},
                       {"current_time_constant", p.current_time_constant}};
}

void from_json(const nlohmann::json& j, JointParams& p)
{
    // missing keys keep their current value so partial overrides work
    auto read = [&j](const char* key, double& field) {
        if (j.contains(key))
            j.at(key).get_to(field);
    };
    read("reduction_ratio", p.reduction_ratio);
    read("torque_constant", p.torque_constant);
    read("motor_inertia", p.motor_inertia);
    read("load_inertia", p.load_inertia);
    read("gravity_amplitude", p.gravity_amplitude);
    read("transmission_stiffness", p.transmission_stiffness);
    read("transmission_damping", p.transmission_damping);
    read("position_min", p.position_min);
    read("position_max", p.position_max);
    read("current_limit", p.current_limit);
    read("current_time_constant", p.current_time_constant);
}

void to_json(nlohmann::json& j, const FrictionGroundTruth& gt)
{
    j = nlohmann::json{{"kind", toString(gt.kind)},
                       {"params", friction::paramsToJson(gt.params)},
                       {"hysteresis_gain", gt.hysteresis_gain},
                       {"hysteresis_timeconstant", gt.hysteresis_timeconstant},
                       {"side", toString(gt.side)}};
}

void from_json(const nlohmann::json& j, FrictionGroundTruth& gt)
{
    if (j.contains("kind"))
        gt.kind = frictionKindFromString(j.at("kind").get<std::string>());
    if (j.contains("params"))
        gt.params = friction::paramsFromJson(j.at("params"));
    if (j.contains("hysteresis_gain"))
        j.at("hysteresis_gain").get_to(gt.hysteresis_gain);
    if (j.contains("hysteresis_timeconstant"))
        j.at("hysteresis_timeconstant").get_to(gt.hysteresis_timeconstant);
    if (j.contains("side"))
        gt.side = frictionSideFromString(j.at("side").get<std::string>());
}

} // namespace frictionid::sim
