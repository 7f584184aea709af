/**
 * @file fitting.hpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 *
 * Adam-based identification of the static CV and SCV friction models.
 */

#ifndef FRICTIONID_FITTING_HPP
#define FRICTIONID_FITTING_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include <frictionid/friction_models.hpp>
#include <frictionid/io.hpp>
#include <frictionid/sigproc.hpp>

namespace frictionid::fitting
{

struct AdamSettings
{
    double learning_rate{1e-2};
    double beta1{0.9};
    double beta2{0.999};
    double epsilon{1e-8};
    int epochs{10000};
    std::size_t batch_size{0}; ///< 0 = full batch
    std::uint64_t seed{0};

    void validate() const;
};

void to_json(nlohmann::json& j, const AdamSettings& s);
void from_json(const nlohmann::json& j, AdamSettings& s);

struct AdamMoments
{
    std::vector<double> m;
    std::vector<double> v;

    explicit AdamMoments(std::size_t n = 0)
        : m(n, 0.0)
        , v(n, 0.0)
    {
    }
};

/// One bias-corrected Adam update in place; @p step counts from 1.
void adamStep(std::span<double> params,
              std::span<const double> grads,
              AdamMoments& moments,
              const AdamSettings& settings,
              long step);

double softplus(double x);
/// Inverse of softplus; arguments below 1e-12 are clamped.
double softplusInverse(double y);

/**
 * Unconstrained coordinates used by the optimizer.
 * CV: (k_a, k_c, k_v). SCV: (k_a, k_c, k_v, delta, v_s, alpha) with
 * k_s = k_c + softplus(delta); every other entry passes through softplus.
 */
std::vector<double> toUnconstrained(const friction::StaticParams& params);
friction::StaticParams fromUnconstrained(friction::ModelKind kind, std::span<const double> u);

double meanSquaredError(const friction::StaticParams& params,
                        std::span<const double> sDot,
                        std::span<const double> tau);

/// Heuristic starting point from robust statistics of the data.
friction::StaticParams initialGuess(friction::ModelKind kind,
                                    std::span<const double> sDot,
                                    std::span<const double> tau);

struct FitResult
{
    friction::StaticParams params;
    double final_mse{0.0};
    std::vector<double> loss_curve; ///< full-data MSE after each epoch
    int best_epoch{0};
};

/// Throws std::runtime_error on a non-finite loss.
FitResult fitStaticModel(friction::ModelKind kind,
                         std::span<const double> sDot,
                         std::span<const double> tau,
                         const AdamSettings& settings,
                         const std::optional<friction::StaticParams>& init = std::nullopt);

/// Uses the s_dot and tau_F_true columns.
FitResult fitStaticModel(friction::ModelKind kind,
                         const sigproc::Dataset& dataset,
                         const AdamSettings& settings,
                         const std::optional<friction::StaticParams>& init = std::nullopt);

std::string datasetHash(const sigproc::Dataset& dataset);

nlohmann::json fitResultToJson(const FitResult& result,
                               const AdamSettings& settings,
                               const std::string& datasetHash);
FitResult fitResultFromJson(const nlohmann::json& j);

/// Header epoch,mse.
io::Table lossCurveTable(const FitResult& result);

} // namespace frictionid::fitting

#endif // FRICTIONID_FITTING_HPP
