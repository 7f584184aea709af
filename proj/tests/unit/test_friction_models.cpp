/**
 * @file test_friction_models.cpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 */

#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include <frictionid/friction_models.hpp>

using namespace frictionid::friction;

namespace
{

// Reference formulas written out independently of the library.
double refCv(double ka, double kc, double kv, double v)
{
    return kc * std::tanh(ka * v) + kv * v;
}

// Extended precision keeps finite-difference round-off far below the tolerance.
long double refScvLong(long double ka, long double kc, long double kv, long double ks, long double vs,
                       long double alpha, long double v)
{
    const long double stribeck = std::exp(-std::pow(std::abs(v / vs), alpha));
    return kv * v + kc * std::tanh(ka * v) + (ks - kc) * stribeck * std::tanh(ka * v);
}

double refScv(const ScvParams& p, double v)
{
    return static_cast<double>(refScvLong(p.k_a, p.k_c, p.k_v, p.k_s, p.v_s, p.alpha, v));
}

double relErr(double a, double b)
{
    return std::abs(a - b) / std::max(1e-12, std::max(std::abs(a), std::abs(b)));
}

} // namespace

TEST_CASE("cv_eval matches the ankle preset examples")
{
    const CvParams p = ankleCvPreset();
    CHECK(cvEval(p, 0.0) == 0.0);
    // frozen from an independent scripted evaluation
    CHECK(cvEval(p, 1.0) == doctest::Approx(1.439999998286163).epsilon(1e-12));
    CHECK(cvEval(p, -0.1) == doctest::Approx(-0.9635639537243524).epsilon(1e-12));
}

TEST_CASE("scv_eval matches the ankle preset examples")
{
    const ScvParams p = ankleScvPreset();
    CHECK(scvEval(p, 0.0) == 0.0);
    CHECK(scvEval(p, 2.0) == doctest::Approx(1.6093110366046801).epsilon(1e-12));
}

TEST_CASE("scv shows a Stribeck excess over its Coulomb-viscous part")
{
    const ScvParams p = ankleScvPreset();
    for (double v = 0.01; v <= 0.2; v += 0.01)
        CHECK(scvEval(p, v) > refCv(p.k_a, p.k_c, p.k_v, v));
    // local maximum near 0.5 rad/s followed by a dip before the viscous tail
    CHECK(scvEval(p, 0.5) > scvEval(p, 1.0));
    CHECK(scvEval(p, 2.0) > scvEval(p, 1.0));
}

TEST_CASE("both models agree with the reference formulas on random inputs")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> vel(-3.0, 3.0);
    for (const ScvParams& p : {ankleScvPreset(), kneeScvPreset()})
    {
        for (int i = 0; i < 500; ++i)
        {
            const double v = vel(rng);
            CHECK(relErr(scvEval(p, v), refScv(p, v)) < 1e-12);
        }
    }
    for (const CvParams& p : {ankleCvPreset(), kneeCvPreset()})
    {
        for (int i = 0; i < 500; ++i)
        {
            const double v = vel(rng);
            CHECK(relErr(cvEval(p, v), refCv(p.k_a, p.k_c, p.k_v, v)) < 1e-12);
        }
    }
}

TEST_CASE("odd symmetry holds exactly")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> vel(-5.0, 5.0);
    for (int i = 0; i < 1000; ++i)
    {
        const double v = vel(rng);
        CHECK(cvEval(kneeCvPreset(), -v) == -cvEval(kneeCvPreset(), v));
        CHECK(scvEval(ankleScvPreset(), -v) == -scvEval(ankleScvPreset(), v));
    }
}

TEST_CASE("scv with k_s = k_c reduces to cv")
{
    ScvParams s = kneeScvPreset();
    s.k_s = s.k_c;
    const CvParams c{s.k_a, s.k_c, s.k_v};
    for (double v = -3.0; v <= 3.0; v += 0.013)
        CHECK(scvEval(s, v) == doctest::Approx(cvEval(c, v)).epsilon(1e-15));
}

TEST_CASE("viscous tail is increasing beyond ten Stribeck velocities")
{
    const ScvParams p = ankleScvPreset();
    const double h = 1e-6;
    for (double v = 10.0 * p.v_s + 0.01; v < 5.0; v += 0.05)
        CHECK((scvEval(p, v + h) - scvEval(p, v - h)) / (2.0 * h) > 0.0);
}

TEST_CASE("cv gradient")
{
    const CvParams p = ankleCvPreset();
    const auto g = cvGrad(p, 1.0);
    CHECK(g[1] == doctest::Approx(0.9999999985718027).epsilon(1e-12));
    CHECK(g[2] == 1.0);
    for (double v : {-2.0, -0.3, 0.05, 0.7})
        CHECK(cvGrad(p, v)[2] == v);
}

TEST_CASE("scv gradient against central differences")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    const long double h = 1e-6L;
    for (int trial = 0; trial < 50; ++trial)
    {
        ScvParams p{u(rng) * 5.0, u(rng), u(rng), 0.0, u(rng) * 0.2, u(rng)};
        p.k_s = p.k_c + u(rng);
        for (double v : {0.05, -0.05, 0.4, -1.3})
        {
            const auto g = scvGrad(p, v);
            const std::array<long double, 6> x{p.k_a, p.k_c, p.k_v, p.k_s, p.v_s, p.alpha};
            for (std::size_t k = 0; k < 6; ++k)
            {
                auto plus = x;
                auto minus = x;
                plus[k] += h;
                minus[k] -= h;
                const long double fp = refScvLong(plus[0], plus[1], plus[2], plus[3], plus[4], plus[5], v);
                const long double fm = refScvLong(minus[0], minus[1], minus[2], minus[3], minus[4], minus[5], v);
                const double fd = static_cast<double>((fp - fm) / (2.0L * h));
                // torques are O(1); partials below 1e-6 are compared absolutely
                CHECK(std::abs(g[k] - fd) / std::max(1e-6, std::abs(fd)) < 1e-5);
            }
        }
    }
}

TEST_CASE("scv gradient at zero velocity is finite")
{
    ScvParams p = ankleScvPreset();
    const auto g = scvGrad(p, 0.0);
    for (double x : g)
        CHECK(std::isfinite(x));
    CHECK(g[4] == 0.0);
    CHECK(g[5] == 0.0);
}

TEST_CASE("parameter validation")
{
    CHECK_THROWS_AS(CvParams({0.0, 1.0, 1.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(CvParams({1.0, -1.0, 1.0}).validate(), std::invalid_argument);
    ScvParams s = ankleScvPreset();
    s.k_s = s.k_c - 0.1;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = ankleScvPreset();
    s.v_s = 0.0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("json round trip keeps the discriminator")
{
    const StaticParams cv = kneeCvPreset();
    const StaticParams scv = kneeScvPreset();
    CHECK(paramsToJson(cv).at("model_kind") == "cv");
    CHECK(paramsToJson(scv).at("model_kind") == "scv");
    const auto back = std::get<ScvParams>(paramsFromJson(paramsToJson(scv)));
    CHECK(back.k_s == kneeScvPreset().k_s);
    CHECK(back.alpha == kneeScvPreset().alpha);
    CHECK((kindOf(paramsFromJson(paramsToJson(cv))) == ModelKind::Cv));
}
