/**
 * @file fitting.cpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 */

#include <frictionid/fitting.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace frictionid::fitting
{

using friction::CvParams;
using friction::ModelKind;
using friction::ScvParams;
using friction::StaticParams;

namespace
{

double sigmoid(double x)
{
    if (x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::size_t dimension(ModelKind kind)
{
    return kind == ModelKind::Cv ? 3 : 6;
}

// Accumulates d(MSE)/d(constrained params) over the index range.
void accumulateGradient(const StaticParams& params,
                        std::span<const double> sDot,
                        std::span<const double> tau,
                        std::span<const std::size_t> indices,
                        std::span<double> grad)
{
    std::fill(grad.begin(), grad.end(), 0.0);
    const double scale = 2.0 / static_cast<double>(indices.size());
    if (const auto* cv = std::get_if<CvParams>(&params))
    {
        for (std::size_t idx : indices)
        {
            const double r = friction::cvEval(*cv, sDot[idx]) - tau[idx];
            const auto g = friction::cvGrad(*cv, sDot[idx]);
            for (std::size_t k = 0; k < 3; ++k)
                grad[k] += scale * r * g[k];
        }
        return;
    }
    const auto& scv = std::get<ScvParams>(params);
    for (std::size_t idx : indices)
    {
        const double r = friction::scvEval(scv, sDot[idx]) - tau[idx];
        const auto g = friction::scvGrad(scv, sDot[idx]);
        for (std::size_t k = 0; k < 6; ++k)
            grad[k] += scale * r * g[k];
    }
}

// Chain rule from constrained to unconstrained coordinates.
void toUnconstrainedGradient(ModelKind kind,
                             std::span<const double> u,
                             std::span<const double> gradP,
                             std::span<double> gradU)
{
    if (kind == ModelKind::Cv)
    {
        for (std::size_t k = 0; k < 3; ++k)
            gradU[k] = gradP[k] * sigmoid(u[k]);
        return;
    }
    // p = (k_a, k_c, k_v, k_s, v_s, alpha); k_s depends on u[1] and u[3].
    gradU[0] = gradP[0] * sigmoid(u[0]);
    gradU[1] = (gradP[1] + gradP[3]) * sigmoid(u[1]);
    gradU[2] = gradP[2] * sigmoid(u[2]);
    gradU[3] = gradP[3] * sigmoid(u[3]);
    gradU[4] = gradP[4] * sigmoid(u[4]);
    gradU[5] = gradP[5] * sigmoid(u[5]);
}

double quantileOfSorted(const std::vector<double>& sorted, double q)
{
    if (sorted.empty())
        return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

void checkInputs(std::span<const double> sDot, std::span<const double> tau)
{
    if (sDot.empty())
        throw std::invalid_argument("fitStaticModel: empty dataset");
    if (sDot.size() != tau.size())
        throw std::invalid_argument("fitStaticModel: s_dot and tau lengths differ");
    for (std::size_t i = 0; i < sDot.size(); ++i)
    {
        if (!std::isfinite(sDot[i]) || !std::isfinite(tau[i]))
            throw std::invalid_argument("fitStaticModel: non-finite sample at index "
                                        + std::to_string(i));
    }
}

} // namespace

void AdamSettings::validate() const
{
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("AdamSettings: learning_rate must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0))
        throw std::invalid_argument("AdamSettings: beta1 must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0))
        throw std::invalid_argument("AdamSettings: beta2 must be in [0, 1)");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("AdamSettings: epsilon must be > 0");
    if (epochs < 1)
        throw std::invalid_argument("AdamSettings: epochs must be >= 1");
}

void to_json(nlohmann::json& j, const AdamSettings& s)
{
    j = nlohmann::json{{"learning_rate", s.learning_rate},
                       {"beta1", s.beta1},
                       {"beta2", s.beta2},
                       {"epsilon", s.epsilon},
                       {"epochs", s.epochs},
                       {"batch_size", s.batch_size},
                       {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, AdamSettings& s)
{
    s.learning_rate = j.value("learning_rate", s.learning_rate);
    s.beta1 = j.value("beta1", s.beta1);
    s.beta2 = j.value("beta2", s.beta2);
    s.epsilon = j.value("epsilon", s.epsilon);
    s.epochs = j.value("epochs", s.epochs);
    s.batch_size = j.value("batch_size", s.batch_size);
    s.seed = j.value("seed", s.seed);
}

void adamStep(std::span<double> params,
              std::span<const double> grads,
              AdamMoments& moments,
              const AdamSettings& settings,
              long step)
{
    if (grads.size() != params.size() || moments.m.size() != params.size()
        || moments.v.size() != params.size())
        throw std::invalid_argument("adamStep: dimension mismatch");
    if (step < 1)
        throw std::invalid_argument("adamStep: step index must be >= 1");

    const double c1 = 1.0 - std::pow(settings.beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(settings.beta2, static_cast<double>(step));
    for (std::size_t k = 0; k < params.size(); ++k)
    {
        const double g = grads[k];
        moments.m[k] = settings.beta1 * moments.m[k] + (1.0 - settings.beta1) * g;
        moments.v[k] = settings.beta2 * moments.v[k] + (1.0 - settings.beta2) * g * g;
        const double mHat = moments.m[k] / c1;
        const double vHat = moments.v[k] / c2;
        params[k] -= settings.learning_rate * mHat / (std::sqrt(vHat) + settings.epsilon);
    }
}

double softplus(double x)
{
    if (x > 30.0)
        return x;
    return std::log1p(std::exp(x));
}

double softplusInverse(double y)
{
    y = std::max(y, 1e-12);
    if (y > 30.0)
        return y;
    return std::log(std::expm1(y));
}

std::vector<double> toUnconstrained(const StaticParams& params)
{
    if (const auto* cv = std::get_if<CvParams>(&params))
        return {softplusInverse(cv->k_a), softplusInverse(cv->k_c), softplusInverse(cv->k_v)};
    const auto& p = std::get<ScvParams>(params);
    return {softplusInverse(p.k_a),
            softplusInverse(p.k_c),
            softplusInverse(p.k_v),
            softplusInverse(p.k_s - p.k_c),
            softplusInverse(p.v_s),
            softplusInverse(p.alpha)};
}

StaticParams fromUnconstrained(ModelKind kind, std::span<const double> u)
{
    if (u.size() != dimension(kind))
        throw std::invalid_argument("fromUnconstrained: dimension mismatch");
    if (kind == ModelKind::Cv)
        return CvParams{softplus(u[0]), softplus(u[1]), softplus(u[2])};
    ScvParams p;
    p.k_a = softplus(u[0]);
    p.k_c = softplus(u[1]);
    p.k_v = softplus(u[2]);
    p.k_s = p.k_c + softplus(u[3]);
    p.v_s = softplus(u[4]);
    p.alpha = softplus(u[5]);
    return p;
}

double meanSquaredError(const StaticParams& params,
                        std::span<const double> sDot,
                        std::span<const double> tau)
{
    if (sDot.size() != tau.size())
        throw std::invalid_argument("meanSquaredError: length mismatch");
    if (sDot.empty())
        return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < sDot.size(); ++i)
    {
        const double r = friction::evaluate(params, sDot[i]) - tau[i];
        acc += r * r;
    }
    return acc / static_cast<double>(sDot.size());
}

namespace
{

// k_c, k_v, k_s from low- and high-speed statistics; k_a = 10, v_s = 0.1, alpha = 1.
StaticParams robustStatisticsGuess(ModelKind kind,
                                   std::span<const double> sDot,
                                   std::span<const double> tau)
{
    checkInputs(sDot, tau);
    std::vector<std::size_t> order(sDot.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(sDot[a]) < std::abs(sDot[b]);
    });

    const std::size_t n = order.size();
    // Low-speed band: 10th to 30th percentile of |s_dot|.
    std::vector<double> lowAbs;
    for (std::size_t k = n / 10; k < std::max<std::size_t>(n * 3 / 10, n / 10 + 1) && k < n; ++k)
        lowAbs.push_back(std::abs(tau[order[k]]));
    std::sort(lowAbs.begin(), lowAbs.end());
    const double kc = quantileOfSorted(lowAbs, 0.5);
    const double ks = std::max(kc, quantileOfSorted(lowAbs, 0.9));

    // High-speed band: top 30 % of |s_dot|, least-squares slope of |tau| on |s_dot|.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (std::size_t k = n - std::max<std::size_t>(n * 3 / 10, 1); k < n; ++k)
    {
        const double x = std::abs(sDot[order[k]]);
        const double y = std::abs(tau[order[k]]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    double kv = 0.0;
    const double denom = static_cast<double>(m) * sxx - sx * sx;
    if (m >= 2 && denom > 1e-12)
        kv = std::max(0.0, (static_cast<double>(m) * sxy - sx * sy) / denom);

    if (kind == ModelKind::Cv)
        return CvParams{10.0, kc, kv};
    ScvParams p;
    p.k_a = 10.0;
    p.k_c = kc;
    p.k_v = kv;
    p.k_s = ks;
    p.v_s = 0.1;
    p.alpha = 1.0;
    return p;
}

} // namespace

StaticParams initialGuess(ModelKind kind, std::span<const double> sDot, std::span<const double> tau)
{
    StaticParams best = robustStatisticsGuess(kind, sDot, tau);
    double bestMse = meanSquaredError(best, sDot, tau);

    // The model is linear in (k_c, k_v, k_s - k_c) once the shape parameters
    // are fixed, so scan the shape on a coarse grid and solve the rest.
    const std::size_t n = sDot.size();
    const int dim = kind == ModelKind::Cv ? 2 : 3;
    std::vector<double> vsGrid{0.1};
    std::vector<double> alphaGrid{1.0};
    if (kind == ModelKind::Scv)
    {
        vsGrid = {0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0};
        alphaGrid = {0.5, 1.0, 2.0};
    }
    for (int ia = 0; ia <= 16; ++ia)
    {
        const double ka = 0.5 * std::pow(10.0, ia / 6.0); // 0.5 .. ~232
        for (double vs : vsGrid)
        {
            for (double alpha : alphaGrid)
            {
                Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(dim, dim);
                Eigen::VectorXd atb = Eigen::VectorXd::Zero(dim);
                Eigen::VectorXd row(dim);
                for (std::size_t i = 0; i < n; ++i)
                {
                    const double th = std::tanh(ka * sDot[i]);
                    row(0) = th;
                    row(1) = sDot[i];
                    if (kind == ModelKind::Scv)
                        row(2) = std::exp(-std::pow(std::abs(sDot[i] / vs), alpha)) * th;
                    ata.noalias() += row * row.transpose();
                    atb.noalias() += row * tau[i];
                }
                ata.diagonal().array() += 1e-12 * (1.0 + ata.diagonal().array());
                Eigen::VectorXd x = ata.ldlt().solve(atb);
                for (int k = 0; k < dim; ++k)
                    x(k) = std::isfinite(x(k)) ? std::max(x(k), 0.0) : 0.0;

                StaticParams candidate;
                if (kind == ModelKind::Cv)
                    candidate = CvParams{ka, x(0), x(1)};
                else
                    candidate = ScvParams{ka, x(0), x(1), x(0) + x(2), vs, alpha};
                const double mse = meanSquaredError(candidate, sDot, tau);
                if (mse < bestMse)
                {
                    bestMse = mse;
                    best = candidate;
                }
            }
        }
    }
    return best;
}

FitResult fitStaticModel(ModelKind kind,
                         std::span<const double> sDot,
                         std::span<const double> tau,
                         const AdamSettings& settings,
                         const std::optional<StaticParams>& init)
{
    settings.validate();
    checkInputs(sDot, tau);
    StaticParams start = init ? *init : initialGuess(kind, sDot, tau);
    if (friction::kindOf(start) != kind)
        throw std::invalid_argument("fitStaticModel: init does not match the model kind");
    std::visit([](const auto& p) { p.validate(); }, start);

    const std::size_t n = sDot.size();
    const std::size_t dim = dimension(kind);
    const std::size_t batch = (settings.batch_size == 0 || settings.batch_size >= n) ? n : settings.batch_size;

    std::vector<double> u = toUnconstrained(start);
    std::vector<double> gradP(dim), gradU(dim);
    AdamMoments moments(dim);
    std::vector<std::size_t> indices(n);
    std::iota(indices.begin(), indices.end(), 0);
    std::mt19937_64 rng(settings.seed);

    FitResult result;
    result.params = start;
    result.final_mse = meanSquaredError(start, sDot, tau);
    result.best_epoch = 0;
    result.loss_curve.reserve(static_cast<std::size_t>(settings.epochs));

    long step = 0;
    for (int epoch = 1; epoch <= settings.epochs; ++epoch)
    {
        if (batch < n)
            std::shuffle(indices.begin(), indices.end(), rng);
        for (std::size_t begin = 0; begin < n; begin += batch)
        {
            const std::size_t count = std::min(batch, n - begin);
            const auto current = fromUnconstrained(kind, u);
            accumulateGradient(current,
                               sDot,
                               tau,
                               std::span<const std::size_t>(indices).subspan(begin, count),
                               gradP);
            toUnconstrainedGradient(kind, u, gradP, gradU);
            adamStep(u, gradU, moments, settings, ++step);
        }
        const auto current = fromUnconstrained(kind, u);
        const double loss = meanSquaredError(current, sDot, tau);
        if (!std::isfinite(loss))
            throw std::runtime_error("fitStaticModel: non-finite loss at epoch " + std::to_string(epoch)
                                     + " (learning rate too high?)");
        result.loss_curve.push_back(loss);
        if (loss < result.final_mse || result.best_epoch == 0)
        {
            result.final_mse = loss;
            result.params = current;
            result.best_epoch = epoch;
        }
    }
    return result;
}

FitResult fitStaticModel(ModelKind kind,
                         const sigproc::Dataset& dataset,
                         const AdamSettings& settings,
                         const std::optional<StaticParams>& init)
{
    if (dataset.tau_F_true.size() != dataset.s_dot.size())
        throw std::invalid_argument("fitStaticModel: dataset has no tau_F_true column");
    return fitStaticModel(kind, dataset.s_dot, dataset.tau_F_true, settings, init);
}

std::string datasetHash(const sigproc::Dataset& dataset)
{
    return io::fnv1aHex(io::toCsv(dataset.toTable()));
}

nlohmann::json fitResultToJson(const FitResult& result,
                               const AdamSettings& settings,
                               const std::string& hash)
{
    return nlohmann::json{{"params", friction::paramsToJson(result.params)},
                          {"final_mse", result.final_mse},
                          {"best_epoch", result.best_epoch},
                          {"settings", settings},
                          {"dataset_hash", hash}};
}

FitResult fitResultFromJson(const nlohmann::json& j)
{
    FitResult result;
    result.params = friction::paramsFromJson(j.at("params"));
    j.at("final_mse").get_to(result.final_mse);
    result.best_epoch = j.value("best_epoch", 0);
    return result;
}

io::Table lossCurveTable(const FitResult& result)
{
    io::Table table;
    table.header = {"epoch", "mse"};
    table.columns.resize(2);
    for (std::size_t k = 0; k < result.loss_curve.size(); ++k)
    {
        table.columns[0].push_back(static_cast<double>(k + 1));
        table.columns[1].push_back(result.loss_curve[k]);
    }
    return table;
}

} // namespace frictionid::fitting
