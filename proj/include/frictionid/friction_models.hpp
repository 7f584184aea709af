/**
 * @file friction_models.hpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 */

#ifndef FRICTIONID_FRICTION_MODELS_HPP
#define FRICTIONID_FRICTION_MODELS_HPP

#include <array>
#include <string>
#include <variant>

#include <json.hpp>

namespace frictionid::friction
{

/**
 * Parameters of the smooth Coulomb-viscous model
 *   tau_F = k_c tanh(k_a s_dot) + k_v s_dot.
 */
struct CvParams
{
    double k_a{10.0}; ///< tanh sharpness [s/rad]
    double k_c{0.0};  ///< Coulomb level [N m]
    double k_v{0.0};  ///< viscous coefficient [N m s/rad]

    /// Throws std::invalid_argument naming the first violated invariant.
    void validate() const;
};

/**
 * Parameters of the Stribeck-Coulomb-viscous model
 *   tau_F = k_v s_dot + k_c tanh(k_a s_dot)
 *         + (k_s - k_c) exp(-|s_dot / v_s|^alpha) tanh(k_a s_dot).
 */
struct ScvParams
{
    double k_a{10.0};
    double k_c{0.0};
    double k_v{0.0};
    double k_s{0.0};   ///< breakaway level [N m], k_s >= k_c
    double v_s{0.1};   ///< Stribeck velocity [rad/s]
    double alpha{1.0}; ///< Stribeck shape exponent

    void validate() const;
};

enum class ModelKind
{
    Cv,
    Scv
};

using StaticParams = std::variant<CvParams, ScvParams>;

std::string toString(ModelKind kind);
ModelKind modelKindFromString(const std::string& name);
ModelKind kindOf(const StaticParams& params);

double cvEval(const CvParams& p, double sDot);
double scvEval(const ScvParams& p, double sDot);
double evaluate(const StaticParams& p, double sDot);

/// d tau_F / d(k_a, k_c, k_v).
std::array<double, 3> cvGrad(const CvParams& p, double sDot);

/**
 * d tau_F / d(k_a, k_c, k_v, k_s, v_s, alpha).
 * The v_s and alpha partials are defined as exactly 0 at s_dot = 0, where the
 * Stribeck term vanishes together with tanh.
 */
std::array<double, 6> scvGrad(const ScvParams& p, double sDot);

// Identified parameter sets, kept as named presets for fixtures and examples.
CvParams ankleCvPreset();
ScvParams ankleScvPreset();
CvParams kneeCvPreset();
ScvParams kneeScvPreset();

void to_json(nlohmann::json& j, const CvParams& p);
void from_json(const nlohmann::json& j, CvParams& p);
void to_json(nlohmann::json& j, const ScvParams& p);
void from_json(const nlohmann::json& j, ScvParams& p);

/// JSON with a `model_kind` discriminator ("cv" or "scv").
nlohmann::json paramsToJson(const StaticParams& p);
StaticParams paramsFromJson(const nlohmann::json& j);

} // namespace frictionid::friction

#endif // FRICTIONID_FRICTION_MODELS_HPP
