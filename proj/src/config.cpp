/**
 * @file config.cpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 */

#include <frictionid/config.hpp>

#include <cmath>

#include <frictionid/io.hpp>

namespace frictionid::config
{

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field + ": " + message)
    , m_field(std::move(field))
{
}

namespace
{

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

nlohmann::json noiseJson(const sim::NoiseSettings& n)
{
    return nlohmann::json{{"enabled", n.enabled},
                       {"sigma_s", n.sigma_s},
                       {"sigma_theta", n.sigma_theta},
                       {"sigma_i", n.sigma_i}};
}

void noiseFromJson(const nlohmann::json& j, sim::NoiseSettings& n)
{
    n.enabled = j.value("enabled", n.enabled);
    n.sigma_s = j.value("sigma_s", n.sigma_s);
    n.sigma_theta = j.value("sigma_theta", n.sigma_theta);
    n.sigma_i = j.value("sigma_i", n.sigma_i);
}

nlohmann::json sectionJson(const ExperimentConfig& c)
{
    nlohmann::json adam = c.fit.adam;
    adam.erase("seed");
    nlohmann::json pinnJson = c.pinn;
    pinnJson.erase("seed");

    nlohmann::json evalJson{{"kp_min", c.eval.kp_min},
                            {"kp_max", c.eval.kp_max},
                            {"kp_per_decade", c.eval.kp_per_decade},
                            {"kd", c.eval.kd},
                            {"rmse_threshold", c.eval.rmse_threshold},
                            {"tracking_duration", c.eval.tracking_duration},
                            {"tracking_settle", c.eval.tracking_settle},
                            {"reference", c.eval.reference},
                            {"pulse", c.eval.pulse},
                            {"recovery_window", c.eval.recovery_window},
                            {"hold_position", c.eval.hold_position},
                            {"kalman_q", c.eval.kalman_q},
                            {"compensation_cutoff", c.eval.compensation_cutoff},
                            {"disturbance_kp", nullptr}};
    if (c.eval.disturbance_kp)
        evalJson["disturbance_kp"] = *c.eval.disturbance_kp;

    return nlohmann::json{{"fixture", c.fixture},
                          {"seed", c.seed},
                          {"joint", c.joint},
                          {"friction", c.friction},
                          {"simulation",
                           {{"command_rate", c.simulation.command_rate},
                            {"log_rate", c.simulation.log_rate},
                            {"noise", noiseJson(c.simulation.noise)},
                            {"manifest", excitation::manifestToJson(c.simulation.manifest)},
                            {"min_log_samples", c.simulation.min_log_samples}}},
                          {"pipeline", c.pipeline},
                          {"fit", {{"adam", adam}, {"decimation", c.fit.decimation}}},
                          {"pinn", pinnJson},
                          {"sweep", {{"space", c.sweep.space}, {"trials", c.sweep.trials}}},
                          {"eval", evalJson}};
}

std::string typeName(const nlohmann::json& j)
{
    return j.type_name();
}

bool compatible(const nlohmann::json& reference, const nlohmann::json& value)
{
    if (reference.is_null())
        return true; // optional field
    if (reference.is_number())
        return value.is_number() && (!reference.is_number_integer() || value.is_number_integer());
    if (reference.is_boolean())
        return value.is_boolean();
    if (reference.is_string())
        return value.is_string();
    if (reference.is_array())
        return value.is_array();
    if (reference.is_object())
        return value.is_object();
    return false;
}

/// Rejects keys absent from @p reference and values of the wrong JSON type.
void checkSchema(const nlohmann::json& reference, const nlohmann::json& value, const std::string& path)
{
    if (!compatible(reference, value))
        throw ConfigError(path.empty() ? "/" : path,
                          "expected " + typeName(reference) + ", got " + typeName(value));
    if (!reference.is_object())
        return;
    for (const auto& [key, child] : value.items())
    {
        const std::string childPath = path + "/" + key;
        if (!reference.contains(key))
            throw ConfigError(childPath, "unknown field");
        // Physics parameters and references carry model-specific keys.
        if (childPath == "/pinn/physics_params" || childPath == "/friction/params")
        {
            if (!child.is_object())
                throw ConfigError(childPath, "expected object, got " + typeName(child));
            continue;
        }
        checkSchema(reference.at(key), child, childPath);
    }
}

template <typename Fn>
void guarded(const std::string& path, Fn&& fn)
{
    try
    {
        fn();
    } catch (const ConfigError&)
    {
        throw;
    } catch (const std::exception& e)
    {
        throw ConfigError(path, e.what());
    }
}

void applySection(ExperimentConfig& c, const nlohmann::json& j)
{
    guarded("/fixture", [&] { c.fixture = j.at("fixture").get<std::string>(); });
    guarded("/seed", [&] { c.seed = j.at("seed").get<std::uint64_t>(); });
    guarded("/joint", [&] { c.joint = j.at("joint").get<sim::JointParams>(); });
    guarded("/friction", [&] { c.friction = j.at("friction").get<sim::FrictionGroundTruth>(); });
    guarded("/simulation", [&] {
        const auto& s = j.at("simulation");
        c.simulation.command_rate = s.at("command_rate").get<double>();
        c.simulation.log_rate = s.at("log_rate").get<double>();
        noiseFromJson(s.at("noise"), c.simulation.noise);
        c.simulation.min_log_samples = s.at("min_log_samples").get<std::size_t>();
    });
    guarded("/simulation/manifest", [&] {
        c.simulation.manifest = excitation::manifestFromJson(j.at("simulation").at("manifest"));
    });
    guarded("/pipeline", [&] { c.pipeline = j.at("pipeline").get<sigproc::PipelineSettings>(); });
    guarded("/fit", [&] {
        c.fit.adam = j.at("fit").at("adam").get<fitting::AdamSettings>();
        c.fit.decimation = j.at("fit").at("decimation").get<int>();
    });
    guarded("/pinn", [&] { c.pinn = j.at("pinn").get<pinn::PinnConfig>(); });
    guarded("/sweep", [&] {
        c.sweep.space = j.at("sweep").at("space").get<pinn::SearchSpace>();
        c.sweep.trials = j.at("sweep").at("trials").get<int>();
    });
    guarded("/eval", [&] {
        const auto& e = j.at("eval");
        c.eval.kp_min = e.at("kp_min").get<double>();
        c.eval.kp_max = e.at("kp_max").get<double>();
        c.eval.kp_per_decade = e.at("kp_per_decade").get<int>();
        c.eval.kd = e.at("kd").get<double>();
        c.eval.rmse_threshold = e.at("rmse_threshold").get<double>();
        c.eval.tracking_duration = e.at("tracking_duration").get<double>();
        c.eval.tracking_settle = e.at("tracking_settle").get<double>();
        c.eval.reference = e.at("reference").get<control::Reference>();
        c.eval.pulse = e.at("pulse").get<control::DisturbancePulse>();
        c.eval.recovery_window = e.at("recovery_window").get<double>();
        c.eval.hold_position = e.at("hold_position").get<double>();
        c.eval.kalman_q = e.at("kalman_q").get<double>();
        c.eval.compensation_cutoff = e.at("compensation_cutoff").get<double>();
        // merge_patch deletes keys set to null, so absence also means unset.
        if (!e.contains("disturbance_kp") || e.at("disturbance_kp").is_null())
            c.eval.disturbance_kp.reset();
        else
            c.eval.disturbance_kp = e.at("disturbance_kp").get<double>();
    });
}

/// Section seeds follow the top-level seed so one flag controls every stage.
void deriveSeeds(ExperimentConfig& c)
{
    c.fit.adam.seed = splitmix64(c.seed ^ 0x66697400ULL);
    c.pinn.seed = splitmix64(c.seed ^ 0x70696E6EULL);
}

} // namespace

ExperimentConfig ExperimentConfig::defaults(const std::string& fixture)
{
    if (fixture != "ankle" && fixture != "knee")
        throw ConfigError("/fixture", "unknown fixture '" + fixture + "' (expected ankle or knee)");
    ExperimentConfig c;
    c.fixture = fixture;
    c.joint = sim::JointParams::fixture(fixture);
    c.friction = sim::FrictionGroundTruth::fixture(fixture);
    c.pinn = pinn::PinnConfig::fixture(fixture);
    // The gravity-loaded joint has larger jerk content than the ankle.
    if (fixture == "knee")
        c.pipeline.kalman_q = 1e6;

    const eval::Fixture f = eval::Fixture::standard(fixture);
    c.eval.kd = f.kd;
    c.eval.rmse_threshold = f.rmse_threshold;
    c.eval.tracking_duration = f.tracking_options.duration;
    c.eval.tracking_settle = f.tracking_settle;
    c.eval.reference = f.tracking_reference;
    c.eval.pulse = f.pulse;
    c.eval.recovery_window = f.recovery_window;
    c.eval.hold_position = f.hold_position;
    c.eval.kalman_q = f.tracking_options.kalman_q;
    c.eval.compensation_cutoff = f.tracking_options.compensation_cutoff;
    deriveSeeds(c);
    return c;
}

void ExperimentConfig::validate() const
{
    guarded("/joint", [&] { joint.validate(); });
    guarded("/friction", [&] { friction.validate(); });
    if (!(simulation.command_rate >= simulation.log_rate))
        throw ConfigError("/simulation/command_rate", "must be >= log_rate");
    if (simulation.log_rate != 500.0 && simulation.log_rate != 1000.0)
        throw ConfigError("/simulation/log_rate", "must be 500 or 1000");
    for (std::size_t k = 0; k < simulation.manifest.size(); ++k)
        guarded("/simulation/manifest/" + std::to_string(k),
                      [&] { simulation.manifest[k].validate(joint.current_limit); });
    if (!(pipeline.current_cutoff > 0.0) || pipeline.current_order < 1 || !(pipeline.kalman_q > 0.0))
        throw ConfigError("/pipeline", "cutoff, order and kalman_q must be positive");
    guarded("/fit/adam", [&] { fit.adam.validate(); });
    if (fit.decimation < 1)
        throw ConfigError("/fit/decimation", "must be >= 1");
    guarded("/pinn", [&] { pinn.validate(); });
    guarded("/sweep/space", [&] { sweep.space.validate(); });
    if (sweep.trials < 1)
        throw ConfigError("/sweep/trials", "must be >= 1");
    if (!(eval.kp_min > 0.0) || !(eval.kp_max >= eval.kp_min))
        throw ConfigError("/eval/kp_min", "need 0 < kp_min <= kp_max");
    if (eval.kp_per_decade < 1)
        throw ConfigError("/eval/kp_per_decade", "must be >= 1");
    if (!(eval.kd >= 0.0))
        throw ConfigError("/eval/kd", "must be >= 0");
    if (!(eval.rmse_threshold > 0.0))
        throw ConfigError("/eval/rmse_threshold", "must be > 0");
    if (!(eval.tracking_duration > eval.tracking_settle) || !(eval.tracking_settle >= 0.0))
        throw ConfigError("/eval/tracking_duration", "must exceed tracking_settle");
    if (!(eval.pulse.duration > 0.0) || !(eval.pulse.start >= 0.0))
        throw ConfigError("/eval/pulse", "need start >= 0 and duration > 0");
    if (!(eval.recovery_window > 0.0))
        throw ConfigError("/eval/recovery_window", "must be > 0");
    if (!(eval.kalman_q > 0.0))
        throw ConfigError("/eval/kalman_q", "must be > 0");
    if (!(eval.compensation_cutoff >= 0.0))
        throw ConfigError("/eval/compensation_cutoff", "must be >= 0");
    if (eval.disturbance_kp && !(*eval.disturbance_kp >= 0.0))
        throw ConfigError("/eval/disturbance_kp", "must be >= 0");
}

eval::Fixture ExperimentConfig::evalFixture() const
{
    eval::Fixture f = eval::Fixture::standard(fixture);
    f.params = joint;
    f.ground_truth = friction;
    f.tracking_reference = eval.reference;
    f.tracking_options.duration = eval.tracking_duration;
    f.tracking_options.noise = simulation.noise;
    f.tracking_options.kalman_q = eval.kalman_q;
    f.tracking_options.compensation_cutoff = eval.compensation_cutoff;
    f.tracking_options.seed = splitmix64(seed ^ 0x6576616CULL);
    f.tracking_settle = eval.tracking_settle;
    f.kd = eval.kd;
    f.rmse_threshold = eval.rmse_threshold;
    f.pulse = eval.pulse;
    f.recovery_window = eval.recovery_window;
    f.hold_position = eval.hold_position;
    return f;
}

nlohmann::json toJson(const ExperimentConfig& config)
{
    return sectionJson(config);
}

ExperimentConfig fromJson(const nlohmann::json& overrides,
                          const std::optional<std::string>& fixtureFlag,
                          const std::optional<std::uint64_t>& seedFlag)
{
    if (!overrides.is_null() && !overrides.is_object())
        throw ConfigError("/", "configuration must be a JSON object");

    std::string fixture = "ankle";
    if (overrides.is_object() && overrides.contains("fixture"))
    {
        if (!overrides.at("fixture").is_string())
            throw ConfigError("/fixture", "expected string");
        fixture = overrides.at("fixture").get<std::string>();
    }
    if (fixtureFlag)
        fixture = *fixtureFlag;

    ExperimentConfig config = ExperimentConfig::defaults(fixture);
    nlohmann::json merged = sectionJson(config);
    if (overrides.is_object())
    {
        checkSchema(merged, overrides, "");
        merged.merge_patch(overrides);
    }
    merged["fixture"] = fixture;
    if (seedFlag)
        merged["seed"] = *seedFlag;

    applySection(config, merged);
    deriveSeeds(config);
    config.validate();
    return config;
}

ExperimentConfig load(const std::filesystem::path& path,
                      const std::optional<std::string>& fixtureFlag,
                      const std::optional<std::uint64_t>& seedFlag)
{
    nlohmann::json overrides;
    if (!path.empty())
    {
        std::string text;
        try
        {
            text = io::readText(path);
        } catch (const std::exception& e)
        {
            throw ConfigError("/", "cannot read config file '" + path.string() + "': " + e.what());
        }
        try
        {
            overrides = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e)
        {
            throw ConfigError("/", std::string("malformed JSON: ") + e.what());
        }
    }
    return fromJson(overrides, fixtureFlag, seedFlag);
}

std::string configHash(const ExperimentConfig& config)
{
    return io::fnv1aHex(toJson(config).dump());
}

io::Provenance provenance(const ExperimentConfig& config)
{
    return io::Provenance{configHash(config), config.seed};
}

} // namespace frictionid::config
