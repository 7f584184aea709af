/**
 * @file test_config.cpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 */

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <frictionid/config.hpp>

using namespace frictionid;
using namespace frictionid::config;

namespace
{

std::string errorField(const nlohmann::json& overrides)
{
    try
    {
        fromJson(overrides);
    } catch (const ConfigError& e)
    {
        return e.field();
    }
    return "";
}

std::filesystem::path writeTemp(const std::string& name, const std::string& text)
{
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << text;
    return path;
}

} // namespace

TEST_CASE("fixture defaults")
{
    const auto ankle = ExperimentConfig::defaults("ankle");
    const auto knee = ExperimentConfig::defaults("knee");
    CHECK(ankle.fixture == "ankle");
    CHECK(knee.joint.gravity_amplitude > 0.0);
    CHECK(ankle.pinn.hidden1 == 268);
    CHECK(knee.pinn.hidden1 == 194);
    CHECK(knee.pipeline.kalman_q == 1e6);
    CHECK(ankle.eval.compensation_cutoff == 50.0);
    CHECK(knee.eval.compensation_cutoff == 20.0);
    CHECK(ankle.eval.pulse.amplitude == 12.0);
    CHECK(knee.eval.pulse.amplitude == 25.0);
    CHECK_NOTHROW(ankle.validate());
    CHECK_THROWS_AS(ExperimentConfig::defaults("hip"), ConfigError);
}

TEST_CASE("precedence is flag over file over default")
{
    const nlohmann::json file{{"fixture", "knee"}, {"seed", 5}, {"pinn", {{"epochs", 7}}}};
    const auto fromFile = fromJson(file);
    CHECK(fromFile.fixture == "knee");
    CHECK(fromFile.seed == 5);
    CHECK(fromFile.pinn.epochs == 7);
    CHECK(fromFile.pinn.hidden1 == 194); // untouched default of the knee

    const auto flagged = fromJson(file, std::string("ankle"), std::uint64_t{9});
    CHECK(flagged.fixture == "ankle");
    CHECK(flagged.seed == 9);
    CHECK(flagged.pinn.epochs == 7);
    CHECK(flagged.pinn.hidden1 == 268);

    const auto defaults = fromJson(nlohmann::json{});
    CHECK(defaults.fixture == "ankle");
    CHECK(defaults.seed == 1);
}

TEST_CASE("section seeds follow the experiment seed")
{
    const auto a = fromJson(nlohmann::json{{"seed", 1}});
    const auto b = fromJson(nlohmann::json{{"seed", 2}});
    const auto a2 = fromJson(nlohmann::json{{"seed", 1}});
    CHECK(a.pinn.seed != b.pinn.seed);
    CHECK(a.fit.adam.seed != b.fit.adam.seed);
    CHECK(a.pinn.seed == a2.pinn.seed);
}

TEST_CASE("errors name the offending field")
{
    CHECK(errorField({{"pinn", {{"hiden1", 3}}}}) == "/pinn/hiden1");
    CHECK(errorField({{"pinn", {{"hidden1", "wide"}}}}) == "/pinn/hidden1");
    CHECK(errorField({{"pinn", {{"hidden1", 3.5}}}}) == "/pinn/hidden1");
    CHECK(errorField({{"eval", {{"compensation_cutoff", -1.0}}}}) == "/eval/compensation_cutoff");
    CHECK(errorField({{"fixture", "hip"}}) == "/fixture");
    CHECK(errorField({{"fixture", 3}}) == "/fixture");
    CHECK(errorField({{"bogus", true}}) == "/bogus");
    CHECK(errorField(nlohmann::json::array()) == "/");
    CHECK(errorField({{"eval", {{"disturbance_kp", 400.0}}}}).empty());
}

TEST_CASE("files load with the same precedence")
{
    const auto path = writeTemp("frictionid_test_config.json", R"({"seed": 4, "eval": {"kd": 3.0}})");
    const auto c = load(path, std::nullopt, std::uint64_t{8});
    CHECK(c.seed == 8);
    CHECK(c.eval.kd == 3.0);
    CHECK(load({}).seed == 1);

    const auto bad = writeTemp("frictionid_test_bad.json", "{ not json");
    CHECK_THROWS_AS(load(bad), ConfigError);
    CHECK_THROWS_AS(load(std::filesystem::temp_directory_path() / "frictionid_missing.json"), ConfigError);
    std::filesystem::remove(path);
    std::filesystem::remove(bad);
}

TEST_CASE("JSON round trip preserves the configuration hash")
{
    const auto c = fromJson(nlohmann::json{{"fixture", "knee"}, {"seed", 3}});
    const auto back = fromJson(toJson(c));
    CHECK(configHash(back) == configHash(c));
    CHECK(configHash(fromJson(nlohmann::json{{"seed", 4}})) != configHash(fromJson(nlohmann::json{{"seed", 5}})));
    CHECK(configHash(c).size() == 16);
}

TEST_CASE("evaluation fixture carries the eval section")
{
    auto c = ExperimentConfig::defaults("knee");
    c.eval.kd = 3.0;
    c.eval.compensation_cutoff = 12.0;
    c.eval.tracking_duration = 6.0;
    const auto f = c.evalFixture();
    CHECK(f.kd == 3.0);
    CHECK(f.tracking_options.compensation_cutoff == 12.0);
    CHECK(f.tracking_options.duration == 6.0);
    CHECK(f.params.gravity_amplitude == c.joint.gravity_amplitude);
}

TEST_CASE("report CSV embeds the configuration hash and seed")
{
    const auto c = fromJson(nlohmann::json{{"seed", 6}});
    const auto prov = provenance(c);
    const std::vector<eval::ExperimentReport> none;
    const std::string csv = eval::reportCsv(none, prov);
    CHECK(csv == "# config_hash=" + configHash(c) + " seed=6\n"
                     + "model,rmse,moment,kp,kd,recovery_rmse,recovery_kp,energy_proxy,energy_kp,trace\n");
}
