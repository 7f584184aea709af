/**
 * @file excitation.cpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 */

#include <frictionid/excitation.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace frictionid::excitation
{

namespace
{

void requireIncreasing(std::span<const double> values, const char* name)
{
    if (values.empty())
        throw std::invalid_argument(std::string("sineGrid: empty ") + name);
    for (std::size_t i = 1; i < values.size(); ++i)
    {
        if (!(values[i] > values[i - 1]))
            throw std::invalid_argument(std::string("sineGrid: ") + name
                                        + " must be strictly increasing");
    }
}

} // namespace

void TrajectorySpec::validate(double currentLimit) const
{
    if (!(duration_max > 0.0))
        throw std::invalid_argument("TrajectorySpec: duration_max must be > 0");
    if (std::abs(amplitude) > currentLimit)
        throw std::invalid_argument("TrajectorySpec: amplitude exceeds current limit");
    if (kind == TrajectoryKind::Sine && !(frequency > 0.0))
        throw std::invalid_argument("TrajectorySpec: sine frequency must be > 0");
    if (kind == TrajectoryKind::Ramp && !(slope > 0.0))
        throw std::invalid_argument("TrajectorySpec: ramp slope must be > 0");
    if (kind == TrajectoryKind::Step && !(hold_time > 0.0))
        throw std::invalid_argument("TrajectorySpec: step hold_time must be > 0");
}

std::vector<TrajectorySpec> sineGrid(std::span<const double> amps,
                                     std::span<const double> freqs,
                                     double duration)
{
    requireIncreasing(amps, "amplitudes");
    requireIncreasing(freqs, "frequencies");
    if (!(duration > 0.0))
        throw std::invalid_argument("sineGrid: duration must be > 0");

    std::vector<TrajectorySpec> specs;
    specs.reserve(amps.size() * freqs.size());
    for (double a : amps)
    {
        for (double f : freqs)
        {
            TrajectorySpec spec;
            spec.kind = TrajectoryKind::Sine;
            spec.amplitude = a;
            spec.frequency = f;
            spec.duration_max = duration;
            specs.push_back(spec);
        }
    }
    return specs;
}

std::vector<TrajectorySpec> rampFamily(std::span<const double> slopes, double currentLimit)
{
    if (!(currentLimit > 0.0))
        throw std::invalid_argument("rampFamily: current limit must be > 0");
    std::vector<TrajectorySpec> specs;
    specs.reserve(slopes.size());
    for (double slope : slopes)
    {
        if (!(slope > 0.0))
            throw std::invalid_argument("rampFamily: slopes must be > 0");
        TrajectorySpec spec;
        spec.kind = TrajectoryKind::Ramp;
        spec.amplitude = currentLimit;
        spec.slope = slope;
        spec.duration_max = currentLimit / slope;
        specs.push_back(spec);
    }
    return specs;
}

std::vector<TrajectorySpec> stepFamily(std::span<const double> levels, double hold)
{
    if (!(hold > 0.0))
        throw std::invalid_argument("stepFamily: hold must be > 0");
    std::vector<TrajectorySpec> specs;
    specs.reserve(levels.size());
    for (double level : levels)
    {
        TrajectorySpec spec;
        spec.kind = TrajectoryKind::Step;
        spec.amplitude = level;
        spec.hold_time = hold;
        spec.duration_max = hold;
        specs.push_back(spec);
    }
    return specs;
}

std::vector<TrajectorySpec> withInitialConfigurations(std::span<const TrajectorySpec> specs,
                                                      std::span<const double> initialPositions,
                                                      double positionMin,
                                                      double positionMax)
{
    for (double q : initialPositions)
    {
        if (q < positionMin || q > positionMax)
            throw std::invalid_argument("withInitialConfigurations: initial position "
                                        + std::to_string(q) + " outside joint limits");
    }
    std::vector<TrajectorySpec> out;
    out.reserve(specs.size() * initialPositions.size());
    for (const auto& spec : specs)
    {
        for (double q : initialPositions)
        {
            TrajectorySpec copy = spec;
            copy.initial_joint_position = q;
            out.push_back(copy);
        }
    }
    return out;
}

double commandAt(const TrajectorySpec& spec, double t)
{
    switch (spec.kind)
    {
    case TrajectoryKind::Sine:
        return spec.amplitude * std::sin(2.0 * std::numbers::pi * spec.frequency * t);
    case TrajectoryKind::Ramp:
        return std::min(spec.slope * t, spec.amplitude);
    case TrajectoryKind::Step:
        return spec.amplitude;
    }
    return 0.0;
}

std::vector<sim::CurrentSample> sampleCommands(const TrajectorySpec& spec, double rate)
{
    if (!(rate > 0.0))
        throw std::invalid_argument("sampleCommands: rate must be > 0");
    const auto n = static_cast<std::size_t>(std::ceil(spec.duration_max * rate - 1e-9));
    std::vector<sim::CurrentSample> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        const double t = static_cast<double>(k) / rate;
        out.push_back({t, commandAt(spec, t)});
    }
    return out;
}

std::vector<TrajectorySpec> defaultBatch(const std::string& fixture, const sim::JointParams& params)
{
    double scale = 1.0;
    if (fixture == "knee")
        scale = 3.0;
    else if (fixture != "ankle")
        throw std::invalid_argument("defaultBatch: unknown fixture '" + fixture + "'");

    std::vector<double> amps{0.3, 0.6, 1.0, 1.5};
    for (double& a : amps)
        a *= scale;
    const std::vector<double> freqs{0.1, 0.3, 0.5, 1.0, 2.0};
    const std::vector<double> slopes{0.25 * scale, 0.5 * scale, 1.0 * scale};
    std::vector<double> levels{0.6, -0.6, 0.8, -0.8, 1.0, -1.0};
    for (double& l : levels)
        l *= scale;

    std::vector<TrajectorySpec> base = sineGrid(amps, freqs, kDefaultSineDwell);
    const auto ramps = rampFamily(slopes, params.current_limit);
    base.insert(base.end(), ramps.begin(), ramps.end());
    const auto steps = stepFamily(levels, 3.0);
    base.insert(base.end(), steps.begin(), steps.end());

    const double span = params.position_max - params.position_min;
    const double mid = 0.5 * (params.position_max + params.position_min);
    const std::vector<double> initial{mid - 0.3 * span, mid, mid + 0.3 * span};
    return withInitialConfigurations(base, initial, params.position_min, params.position_max);
}

std::string toString(TrajectoryKind kind)
{
    switch (kind)
    {
    case TrajectoryKind::Sine:
        return "sine";
    case TrajectoryKind::Ramp:
        return "ramp";
    case TrajectoryKind::Step:
        return "step";
    }
    return "?";
}

TrajectoryKind trajectoryKindFromString(const std::string& name)
{
    if (name == "sine")
        return TrajectoryKind::Sine;
    if (name == "ramp")
        return TrajectoryKind::Ramp;
    if (name == "step")
        return TrajectoryKind::Step;
    throw std::invalid_argument("unknown trajectory kind '" + name + "'");
}

void to_json(nlohmann::json& j, const TrajectorySpec& spec)
{
    j = nlohmann::json{{"kind", toString(spec.kind)},
                       {"amplitude", spec.amplitude},
                       {"frequency", spec.frequency},
                       {"slope", spec.slope},
                       {"hold_time", spec.hold_time},
                       {"duration_max", spec.duration_max},
                       {"initial_joint_position", spec.initial_joint_position}};
}

void from_json(const nlohmann::json& j, TrajectorySpec& spec)
{
    spec.kind = trajectoryKindFromString(j.at("kind").get<std::string>());
    j.at("amplitude").get_to(spec.amplitude);
    spec.frequency = j.value("frequency", 0.0);
    spec.slope = j.value("slope", 0.0);
    spec.hold_time = j.value("hold_time", 0.0);
    j.at("duration_max").get_to(spec.duration_max);
    spec.initial_joint_position = j.value("initial_joint_position", 0.0);
}

nlohmann::json manifestToJson(std::span<const TrajectorySpec> specs)
{
    nlohmann::json list = nlohmann::json::array();
    for (const auto& s : specs)
        list.push_back(s);
    return nlohmann::json{{"trajectories", list}};
}

std::vector<TrajectorySpec> manifestFromJson(const nlohmann::json& j)
{
    return j.at("trajectories").get<std::vector<TrajectorySpec>>();
}

} // namespace frictionid::excitation
