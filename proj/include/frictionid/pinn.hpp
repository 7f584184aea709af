/**
 * @file pinn.hpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 *
 * Physics-informed friction network: history-window features
 * [delta_theta, s_dot] -> two ReLU layers with dropout -> linear output,
 * trained on a weighted sum of data and SCV-physics residuals.
 */

#ifndef FRICTIONID_PINN_HPP
#define FRICTIONID_PINN_HPP

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include <frictionid/friction_models.hpp>
#include <frictionid/io.hpp>
#include <frictionid/jointsim.hpp>
#include <frictionid/sigproc.hpp>

namespace frictionid::pinn
{

struct PinnConfig
{
    int history_length{20};
    int hidden1{268};
    int hidden2{215};
    double dropout_rate{0.07};
    double learning_rate{0.00076};
    std::size_t batch_size{4316};
    int epochs{100};
    double lambda{0.164};
    std::uint64_t seed{0};
    friction::ScvParams physics_params{};

    void validate() const;

    /// Tuned hyperparameters for the two joints; epochs left at the CI default.
    static PinnConfig ankle();
    static PinnConfig knee();
    static PinnConfig fixture(const std::string& name);
};

void to_json(nlohmann::json& j, const PinnConfig& c);
void from_json(const nlohmann::json& j, PinnConfig& c);

struct HistoryWindow
{
    std::vector<double> delta_theta; ///< newest last
    std::vector<double> s_dot;       ///< newest last
};

/// Feature vector layout [delta_theta oldest..newest, s_dot oldest..newest].
Eigen::VectorXd toFeatureVector(const HistoryWindow& window);

/**
 * Windowed samples, one column per window. Physics targets are filled by
 * train() from the configured SCV parameters.
 */
struct FeatureSet
{
    Eigen::MatrixXd features; ///< 2L x N
    std::vector<double> target;
    std::vector<double> s_dot; ///< newest s_dot of every window

    std::size_t size() const
    {
        return target.size();
    }
    void append(const FeatureSet& other);
};

/// Stride-1 windows; window i covers samples [i - L + 1, i].
FeatureSet featurize(const sigproc::Dataset& dataset, const sim::JointParams& params, int historyLength);
FeatureSet featurize(std::span<const sigproc::Dataset> segments,
                     const sim::JointParams& params,
                     int historyLength);

struct LossTerms
{
    double total{0.0};
    double data{0.0};    ///< (1 - lambda) mean (pred - true)^2
    double physics{0.0}; ///< lambda mean (pred - physics)^2
};

LossTerms compositeLoss(std::span<const double> pred,
                        std::span<const double> truth,
                        std::span<const double> physics,
                        double lambda);

class PinnModel
{
public:
    PinnModel() = default;
    /// He-uniform weights, zero biases, identity normalization.
    PinnModel(const PinnConfig& config, int inputSize);

    const PinnConfig& config() const
    {
        return m_config;
    }
    int inputSize() const
    {
        return static_cast<int>(W1.cols());
    }

    /// Single-window forward pass; @p rng is used only when training.
    double forward(const HistoryWindow& window, bool training, std::mt19937_64& rng) const;
    double forward(const Eigen::Ref<const Eigen::VectorXd>& features) const;
    /// Inference on many raw feature columns.
    Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd>& features) const;

    /// Sets feature mean/std and target scale from the given samples.
    void fitNormalization(const FeatureSet& data);

    Eigen::MatrixXd W1, W2, W3;
    Eigen::VectorXd b1, b2, b3;
    Eigen::VectorXd feature_mean;
    Eigen::VectorXd feature_std;
    double output_scale{1.0};

private:
    PinnConfig m_config;
};

/// Gradients in the same layout as the model parameters.
struct Gradients
{
    Eigen::MatrixXd W1, W2, W3;
    Eigen::VectorXd b1, b2, b3;
    LossTerms loss;
};

struct DropoutMasks
{
    Eigen::MatrixXd h1; ///< hidden1 x B, entries 0 or 1/(1-p)
    Eigen::MatrixXd h2;
};

DropoutMasks sampleDropoutMasks(const PinnModel& model, std::size_t batch, std::mt19937_64& rng);

/**
 * Exact gradients of compositeLoss over the batch columns under the given
 * masks (nullptr = dropout off).
 */
Gradients backward(const PinnModel& model,
                   const Eigen::Ref<const Eigen::MatrixXd>& features,
                   std::span<const double> target,
                   std::span<const double> physics,
                   const DropoutMasks* masks);

struct TrainValSplit
{
    std::vector<sigproc::Dataset> train;
    std::vector<sigproc::Dataset> validation;
};

/**
 * Cuts each segment into contiguous blocks of @p blockLength samples and
 * sends every fifth block to validation, so windows never straddle the two
 * sets.
 */
TrainValSplit splitSegments(std::span<const sigproc::Dataset> segments, std::size_t blockLength = 1000);

struct TrainResult
{
    PinnModel model;
    std::vector<double> train_curve; ///< composite loss, dropout off; index 0 = untrained
    std::vector<double> val_curve;   ///< validation data MSE [N^2 m^2], dropout off
    int best_epoch{0};
    double best_val_loss{0.0};
};

/// Throws std::runtime_error on a non-finite loss.
TrainResult train(const FeatureSet& trainSet, const FeatureSet& valSet, const PinnConfig& config);

/// Unweighted mean squared error of the model on a feature set.
double dataMse(const PinnModel& model, const FeatureSet& data);

struct SearchSpace
{
    std::size_t batch_min{512}, batch_max{8192};
    int hidden1_min{32}, hidden1_max{300};
    int hidden2_min{32}, hidden2_max{300};
    double lr_min{1e-4}, lr_max{1e-2};
    int history_min{5}, history_max{30};
    double lambda_min{0.0}, lambda_max{1.0};
    double dropout_min{0.0}, dropout_max{0.3};

    void validate() const;
};

void to_json(nlohmann::json& j, const SearchSpace& s);
void from_json(const nlohmann::json& j, SearchSpace& s);

struct SearchResult
{
    PinnConfig best;
    double best_val_loss{0.0};
    io::Table trials; ///< trial,seed,batch,h1,h2,lr,L,lambda,dropout,val_loss
};

/**
 * Uniform sampling of the hyperparameters (log-uniform learning rate);
 * @p base supplies epochs and physics parameters. The history length
 * changes the features, so the segments are re-featurized per trial.
 */
SearchResult randomSearch(std::span<const sigproc::Dataset> trainSegments,
                          std::span<const sigproc::Dataset> valSegments,
                          const sim::JointParams& params,
                          const SearchSpace& space,
                          const PinnConfig& base,
                          int nTrials,
                          std::uint64_t seed);

/**
 * Fixed-capacity ring buffer and preallocated work vectors for 1 kHz
 * inference. After construction no call allocates.
 */
class PinnEstimator
{
public:
    explicit PinnEstimator(const PinnModel& model);

    void reset();
    void push(double deltaTheta, double sDot);
    /// Missing history during warm-up reads as zero.
    double estimate();

    /// Current window in feature layout, for checking against forward().
    HistoryWindow window() const;

private:
    PinnModel m_model;
    int m_length;
    std::size_t m_count{0};
    std::vector<double> m_deltaTheta;
    std::vector<double> m_sDot;
    std::size_t m_head{0};
    Eigen::VectorXd m_x;
    Eigen::VectorXd m_h1;
    Eigen::VectorXd m_h2;
};

nlohmann::json modelToJson(const PinnModel& model);
PinnModel modelFromJson(const nlohmann::json& j);

io::Table curvesTable(const TrainResult& result);

} // namespace frictionid::pinn

#endif // FRICTIONID_PINN_HPP
