/**
 * @file friction_models.cpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 */

#include <frictionid/friction_models.hpp>

#include <cmath>
#include <stdexcept>

namespace frictionid::friction
{

namespace
{

void require(bool condition, const char* what)
{
    if (!condition)
    {
        throw std::invalid_argument(what);
    }
}

bool allFinite(std::initializer_list<double> values)
{
    for (double v : values)
    {
        if (!std::isfinite(v))
            return false;
    }
    return true;
}

} // namespace

void CvParams::validate() const
{
    require(allFinite({k_a, k_c, k_v}), "CvParams: non-finite value");
    require(k_a > 0.0, "CvParams: k_a must be > 0");
    require(k_c >= 0.0, "CvParams: k_c must be >= 0");
    require(k_v >= 0.0, "CvParams: k_v must be >= 0");
}

void ScvParams::validate() const
{
    require(allFinite({k_a, k_c, k_v, k_s, v_s, alpha}), "ScvParams: non-finite value");
    require(k_a > 0.0, "ScvParams: k_a must be > 0");
    require(k_c >= 0.0, "ScvParams: k_c must be >= 0");
    require(k_v >= 0.0, "ScvParams: k_v must be >= 0");
    require(k_s >= k_c, "ScvParams: k_s must be >= k_c");
    require(v_s > 0.0, "ScvParams: v_s must be > 0");
    require(alpha > 0.0, "ScvParams: alpha must be > 0");
}

std::string toString(ModelKind kind)
{
    return kind == ModelKind::Cv ? "cv" : "scv";
}

ModelKind modelKindFromString(const std::string& name)
{
    if (name == "cv" || name == "CV")
        return ModelKind::Cv;
    if (name == "scv" || name == "SCV")
        return ModelKind::Scv;
    throw std::invalid_argument("unknown friction model kind '" + name + "'");
}

ModelKind kindOf(const StaticParams& params)
{
    return std::holds_alternative<CvParams>(params) ? ModelKind::Cv : ModelKind::Scv;
}

// Both models are evaluated on |s_dot| and the sign is applied last, which
// makes them odd to the last bit.
double cvEval(const CvParams& p, double sDot)
{
    const double speed = std::abs(sDot);
    const double value = p.k_c * std::tanh(p.k_a * speed) + p.k_v * speed;
    return std::signbit(sDot) ? -value : value;
}

double scvEval(const ScvParams& p, double sDot)
{
    const double speed = std::abs(sDot);
    const double smoothSign = std::tanh(p.k_a * speed);
    const double stribeck = std::exp(-std::pow(speed / p.v_s, p.alpha));
    const double value
        = p.k_c * smoothSign + p.k_v * speed + (p.k_s - p.k_c) * stribeck * smoothSign;
    return std::signbit(sDot) ? -value : value;
}

double evaluate(const StaticParams& p, double sDot)
{
    return std::visit(
        [sDot](const auto& params) -> double {
            using T = std::decay_t<decltype(params)>;
            if constexpr (std::is_same_v<T, CvParams>)
                return cvEval(params, sDot);
            else
                return scvEval(params, sDot);
        },
        p);
}

namespace
{

// 1 - tanh^2 loses every digit once tanh saturates.
double sech2(double x)
{
    const double c = std::cosh(x);
    return 1.0 / (c * c);
}

} // namespace

std::array<double, 3> cvGrad(const CvParams& p, double sDot)
{
    return {p.k_c * sech2(p.k_a * sDot) * sDot, std::tanh(p.k_a * sDot), sDot};
}

std::array<double, 6> scvGrad(const ScvParams& p, double sDot)
{
    const double t = std::tanh(p.k_a * sDot);
    const double dTanhDka = sech2(p.k_a * sDot) * sDot;
    const double delta = p.k_s - p.k_c;

    if (sDot == 0.0)
    {
        // tanh(0) = 0 kills every term except the viscous one; the Stribeck
        // exponent's v_s / alpha sensitivities are pinned to 0.
        return {(p.k_c + delta) * dTanhDka, 0.0, 0.0, 0.0, 0.0, 0.0};
    }

    const double u = std::abs(sDot) / p.v_s;
    const double uPow = std::pow(u, p.alpha);
    const double e = std::exp(-uPow);

    std::array<double, 6> g{};
    g[0] = (p.k_c + delta * e) * dTanhDka;
    g[1] = -std::expm1(-uPow) * t;
    g[2] = sDot;
    g[3] = e * t;
    g[4] = delta * t * e * p.alpha * uPow / p.v_s;
    g[5] = -delta * t * e * uPow * std::log(u);
    return g;
}

CvParams ankleCvPreset()
{
    return {10.53, 1.2, 0.24};
}

ScvParams ankleScvPreset()
{
    return {2.78, 1.0005, 0.29, 6.0, 0.13, 0.6};
}

CvParams kneeCvPreset()
{
    return {50.84, 8.1, 5.55};
}

ScvParams kneeScvPreset()
{
    return {16.95, 5.0, 5.34, 9.7, 5.4, 0.5};
}

void to_json(nlohmann::json& j, const CvParams& p)
{
    j = nlohmann::json{{"k_a", p.k_a}, {"k_c", p.k_c}, {"k_v", p.k_v}};
}

void from_json(const nlohmann::json& j, CvParams& p)
{
    j.at("k_a").get_to(p.k_a);
    j.at("k_c").get_to(p.k_c);
    j.at("k_v").get_to(p.k_v);
}

void to_json(nlohmann::json& j, const ScvParams& p)
{
    j = nlohmann::json{{"k_a", p.k_a},
                       {"k_c", p.k_c},
                       {"k_v", p.k_v},
                       {"k_s", p.k_s},
                       {"v_s", p.v_s},
                       {"alpha", p.alpha}};
}

void from_json(const nlohmann::json& j, ScvParams& p)
{
    j.at("k_a").get_to(p.k_a);
    j.at("k_c").get_to(p.k_c);
    j.at("k_v").get_to(p.k_v);
    j.at("k_s").get_to(p.k_s);
    j.at("v_s").get_to(p.v_s);
    j.at("alpha").get_to(p.alpha);
}

nlohmann::json paramsToJson(const StaticParams& p)
{
    nlohmann::json j;
    std::visit([&j](const auto& params) { j = params; }, p);
    j["model_kind"] = toString(kindOf(p));
    return j;
}

StaticParams paramsFromJson(const nlohmann::json& j)
{
    const ModelKind kind = modelKindFromString(j.at("model_kind").get<std::string>());
    if (kind == ModelKind::Cv)
        return j.get<CvParams>();
    return j.get<ScvParams>();
}

} // namespace frictionid::friction
