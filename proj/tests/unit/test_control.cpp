/**
 * @file test_control.cpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 */

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <frictionid/control.hpp>

using namespace frictionid;
using namespace frictionid::control;

TEST_CASE("high-level acceleration examples")
{
    CHECK(highLevelAccel(0.3, 0.1, 0.7, 0.3, 0.1, ControllerGains{550.0, 4.0}) == doctest::Approx(0.7));
    CHECK(highLevelAccel(0.01, 0.0, 0.0, 0.0, 0.0, ControllerGains{550.0, 4.0}) == doctest::Approx(5.5));
    CHECK(highLevelAccel(0.0, 0.5, 0.0, 0.0, 0.0, ControllerGains{30.0, 4.0}) == doctest::Approx(2.0));
}

TEST_CASE("high-level torque examples")
{
    sim::JointParams p;
    p.gravity_amplitude = 0.0;
    CHECK(highLevelTorque(0.0, 0.4, p) == 0.0);
    p.load_inertia = 0.5;
    CHECK(highLevelTorque(2.0, 0.4, p) == doctest::Approx(1.0));
    p.gravity_amplitude = 30.0;
    CHECK(highLevelTorque(0.0, std::numbers::pi / 6.0, p) == doctest::Approx(15.0));
}

TEST_CASE("low-level current examples and saturation")
{
    sim::JointParams p;
    p.reduction_ratio = 100.0;
    p.torque_constant = 0.1;
    p.current_limit = 2.0;
    const auto c = lowLevelCurrent(2.0, 1.0, p);
    CHECK(c.i_ref == doctest::Approx(0.3));
    CHECK_FALSE(c.saturated);
    CHECK(lowLevelCurrent(2.0, 0.0, p).i_ref == doctest::Approx(0.2));

    const auto hi = lowLevelCurrent(50.0, 0.0, p);
    CHECK(hi.i_ref == 2.0);
    CHECK(hi.saturated);
    const auto lo = lowLevelCurrent(-50.0, -1.0, p);
    CHECK(lo.i_ref == -2.0);
    CHECK(lo.saturated);
}

TEST_CASE("low-level current is linear below saturation")
{
    const auto p = sim::JointParams::fixture("knee");
    std::mt19937_64 rng(5);
    const double bound = 0.45 * p.current_limit * p.reduction_ratio * p.torque_constant;
    std::uniform_real_distribution<double> u(-bound, bound);
    for (int k = 0; k < 200; ++k)
    {
        const double a = u(rng), b = u(rng), f = u(rng) * 0.1;
        const double sum = lowLevelCurrent(a + b, f, p).i_ref;
        const double parts = lowLevelCurrent(a, f, p).i_ref + lowLevelCurrent(b, 0.0, p).i_ref;
        CHECK(sum == doctest::Approx(parts).epsilon(1e-12).scale(1.0));
        CHECK(lowLevelCurrent(a, b * 0.1, p).i_ref == doctest::Approx(lowLevelCurrent(a + b * 0.1, 0.0, p).i_ref));
    }
}

TEST_CASE("reference and pulse samples")
{
    const Reference sine{ReferenceKind::Sine, 0.3, 0.2, 0.5};
    const auto r = sine.sample(0.5);
    CHECK(r.position == doctest::Approx(0.3 + 0.2));
    CHECK(r.velocity == doctest::Approx(0.0).scale(1.0));
    CHECK(r.acceleration == doctest::Approx(-0.2 * std::numbers::pi * std::numbers::pi));
    const Reference hold{ReferenceKind::Hold, 0.1, 0.2, 0.5};
    CHECK(hold.sample(3.0).position == 0.1);
    CHECK(hold.sample(3.0).velocity == 0.0);

    const DisturbancePulse pulse{1.0, 0.5, 12.0};
    CHECK(pulse.torque(0.99) == 0.0);
    CHECK(pulse.torque(1.0) == 12.0);
    CHECK(pulse.torque(1.49) == 12.0);
    CHECK(pulse.torque(1.5) == 0.0);
    CHECK(pulse.end() == 1.5);

    const Reference back = nlohmann::json(hold).get<Reference>();
    CHECK((back.kind == ReferenceKind::Hold));
    CHECK_THROWS_AS(nlohmann::json({{"kind", "ramp"}}).get<Reference>(), std::invalid_argument);
}

TEST_CASE("compensator handles")
{
    CHECK((Compensator::none().kind() == CompensatorKind::None));
    CHECK((Compensator::fromStatic(friction::ankleCvPreset()).kind() == CompensatorKind::Cv));
    CHECK((Compensator::fromStatic(friction::ankleScvPreset()).kind() == CompensatorKind::Scv));
    CHECK_THROWS_AS(Compensator::fromPinn(nullptr), std::invalid_argument);
    for (auto k : {CompensatorKind::None, CompensatorKind::Cv, CompensatorKind::Scv, CompensatorKind::Pinn})
        CHECK((compensatorKindFromString(toString(k)) == k));
    CHECK_THROWS_AS(compensatorKindFromString("lugre"), std::invalid_argument);
}

TEST_CASE("option and gain validation")
{
    CHECK_THROWS_AS(ControllerGains({-1.0, 4.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(ControllerGains({1.0, -4.0}).validate(), std::invalid_argument);
    ClosedLoopOptions o;
    o.compensation_cutoff = -1.0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    o = ClosedLoopOptions{};
    o.substeps = 0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    o = ClosedLoopOptions{};
    o.disturbance = DisturbancePulse{1.0, 0.0, 3.0};
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);

    o = ClosedLoopOptions{};
    o.compensation_cutoff = 7.5;
    o.disturbance = DisturbancePulse{2.0, 1.0, 3.0};
    const ClosedLoopOptions back = nlohmann::json(o).get<ClosedLoopOptions>();
    CHECK(back.compensation_cutoff == 7.5);
    REQUIRE(back.disturbance.has_value());
    CHECK(back.disturbance->amplitude == 3.0);
}

TEST_CASE("zero reference without disturbance stays at equilibrium")
{
    const auto p = sim::JointParams::fixture("ankle");
    const auto gt = sim::FrictionGroundTruth::fixture("ankle");
    ClosedLoopOptions o;
    o.duration = 2.0;
    o.seed = 3;
    const Reference hold{ReferenceKind::Hold, 0.0, 0.0, 0.0};
    const auto trace = runClosedLoop(hold, ControllerGains{300.0, 4.0}, Compensator::none(), p, gt, o);
    REQUIRE(trace.size() == 2000);
    for (double s : trace.s)
        CHECK(std::abs(s) < 6.0 * o.noise.sigma_s);
}

TEST_CASE("zero gains command the gravity feedforward only")
{
    const auto p = sim::JointParams::fixture("knee");
    const auto gt = sim::FrictionGroundTruth::fixture("knee");
    ClosedLoopOptions o;
    o.duration = 0.5;
    o.noise.enabled = false;
    const Reference hold{ReferenceKind::Hold, 0.3, 0.0, 0.0};
    const auto trace = runClosedLoop(hold, ControllerGains{0.0, 0.0}, Compensator::none(), p, gt, o);
    const double expected = p.gravity_amplitude * std::sin(0.3) / (p.reduction_ratio * p.torque_constant);
    CHECK(trace.i_ref.front() == doctest::Approx(expected).epsilon(1e-12));
    // The gravity-loaded link is held by the feedforward; the command stays near constant.
    for (double i : trace.i_ref)
        CHECK(i == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("closed-loop traces are deterministic under a fixed seed")
{
    const auto p = sim::JointParams::fixture("ankle");
    const auto gt = sim::FrictionGroundTruth::fixture("ankle");
    ClosedLoopOptions o;
    o.duration = 1.0;
    o.seed = 11;
    o.disturbance = DisturbancePulse{0.3, 0.2, 5.0};
    const Reference sine{};
    const auto c = Compensator::fromStatic(friction::ankleScvPreset());
    const auto a = runClosedLoop(sine, ControllerGains{500.0, 4.0}, c, p, gt, o);
    const auto b = runClosedLoop(sine, ControllerGains{500.0, 4.0}, c, p, gt, o);
    CHECK(a.toTable().columns == b.toTable().columns);
    CHECK(a.toTable().header.front() == "t");
    CHECK(a.disturbance[400] == 5.0);
    CHECK(a.disturbance[600] == 0.0);
    o.seed = 12;
    const auto d = runClosedLoop(sine, ControllerGains{500.0, 4.0}, c, p, gt, o);
    CHECK(d.s != a.s);
}

TEST_CASE("compensation low-pass delays the friction estimate")
{
    const auto p = sim::JointParams::fixture("ankle");
    const auto gt = sim::FrictionGroundTruth::fixture("ankle");
    ClosedLoopOptions o;
    o.duration = 1.0;
    o.noise.enabled = false;
    const Reference sine{};
    const auto c = Compensator::fromStatic(friction::ankleCvPreset());
    o.compensation_cutoff = 0.0;
    const auto raw = runClosedLoop(sine, ControllerGains{500.0, 4.0}, c, p, gt, o);
    // Unfiltered estimate is the model evaluated on the online velocity.
    for (std::size_t k = 0; k < raw.size(); k += 50)
        CHECK(raw.tau_F_hat[k] == doctest::Approx(friction::cvEval(friction::ankleCvPreset(), raw.s_dot[k])));
    o.compensation_cutoff = 5.0;
    const auto slow = runClosedLoop(sine, ControllerGains{500.0, 4.0}, c, p, gt, o);
    // The first tick sees a zero estimate and then only a fraction of the raw value.
    const double alpha = 1.0 - std::exp(-2.0 * std::numbers::pi * 5.0 * 1e-3);
    CHECK(slow.tau_F_hat[0]
          == doctest::Approx(alpha * friction::cvEval(friction::ankleCvPreset(), slow.s_dot[0])).scale(1.0));
}
