/**
 * @file acceptance.cpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 *
 * End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
 * exits non-zero if any criterion fails.
 */

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <new>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <time.h>

#include <CLI11.hpp>

#include <frictionid/stages.hpp>

namespace fs = std::filesystem;
using namespace frictionid;

// ------------------------------------------------------------ allocation probe

namespace
{
std::atomic<std::size_t> g_allocations{0};
} // namespace

void* operator new(std::size_t size)
{
    g_allocations.fetch_add(1, std::memory_order_relaxed);
    if (void* p = std::malloc(size == 0 ? 1 : size))
        return p;
    throw std::bad_alloc();
}

void* operator new[](std::size_t size)
{
    return ::operator new(size);
}

void* operator new(std::size_t size, std::align_val_t align)
{
    g_allocations.fetch_add(1, std::memory_order_relaxed);
    const auto a = static_cast<std::size_t>(align);
    if (void* p = std::aligned_alloc(a, (size + a - 1) / a * a))
        return p;
    throw std::bad_alloc();
}

void* operator new[](std::size_t size, std::align_val_t align)
{
    return ::operator new(size, align);
}

void operator delete(void* p) noexcept
{
    std::free(p);
}
void operator delete[](void* p) noexcept
{
    std::free(p);
}
void operator delete(void* p, std::size_t) noexcept
{
    std::free(p);
}
void operator delete[](void* p, std::size_t) noexcept
{
    std::free(p);
}
void operator delete(void* p, std::align_val_t) noexcept
{
    std::free(p);
}
void operator delete[](void* p, std::align_val_t) noexcept
{
    std::free(p);
}
void operator delete(void* p, std::size_t, std::align_val_t) noexcept
{
    std::free(p);
}
void operator delete[](void* p, std::size_t, std::align_val_t) noexcept
{
    std::free(p);
}

namespace
{

struct Outcome
{
    bool pass{false};
    std::string detail;
};

std::string fmt(const char* format, auto... args)
{
    char buffer[512];
    std::snprintf(buffer, sizeof(buffer), format, args...);
    return buffer;
}

// ------------------------------------------------------------ shared pipeline

/// Simulated, preprocessed and identified data of one fixture.
struct FixtureRun
{
    config::ExperimentConfig cfg;
    pinn::TrainValSplit split;
    stages::StaticFits fits;
    pinn::TrainResult pinn;
    double scv_val_mse{0.0};
    std::shared_ptr<const pinn::PinnModel> model;
};

FixtureRun runFixture(const std::string& fixture, int epochs)
{
    FixtureRun run;
    run.cfg = config::fromJson(nlohmann::json{{"pinn", {{"epochs", epochs}}}}, fixture, std::uint64_t{1});
    const auto logs = stages::simulate(run.cfg);
    const auto segments = stages::preprocess(logs, run.cfg);
    run.split = pinn::splitSegments(segments);
    run.fits = stages::fitStatic(run.split.train, run.cfg);
    const auto& scv = std::get<friction::ScvParams>(run.fits.scv.params);
    run.pinn = stages::trainPinn(run.split, run.cfg, scv);
    run.scv_val_mse = stages::windowedMse(scv, run.split.validation, run.cfg);
    run.model = std::make_shared<const pinn::PinnModel>(run.pinn.model);
    return run;
}

struct Context
{
    std::string cli;
    fs::path work;
    int ankle_epochs{100};
    int knee_epochs{30};
    std::optional<FixtureRun> ankle;
    std::optional<FixtureRun> knee;

    const FixtureRun& ankleRun()
    {
        if (!ankle)
            ankle = runFixture("ankle", ankle_epochs);
        return *ankle;
    }
    const FixtureRun& kneeRun()
    {
        if (!knee)
            knee = runFixture("knee", knee_epochs);
        return *knee;
    }
};

// ------------------------------------------------------------ 1. closed-form values

long double refCv(const friction::CvParams& p, long double v)
{
    return static_cast<long double>(p.k_c) * std::tanh(static_cast<long double>(p.k_a) * v)
           + static_cast<long double>(p.k_v) * v;
}

long double refScv(const friction::ScvParams& p, long double v)
{
    const long double th = std::tanh(static_cast<long double>(p.k_a) * v);
    const long double stribeck = std::exp(-std::pow(std::abs(v / static_cast<long double>(p.v_s)),
                                                    static_cast<long double>(p.alpha)));
    return static_cast<long double>(p.k_v) * v + static_cast<long double>(p.k_c) * th
           + static_cast<long double>(p.k_s - p.k_c) * stribeck * th;
}

Outcome closedFormValues(Context&)
{
    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    double worst = 0.0;
    auto rel = [](double got, long double ref) {
        return static_cast<double>(std::abs(static_cast<long double>(got) - ref)
                                   / std::max(std::abs(ref), 1e-300L));
    };
    for (int k = 0; k < 1000; ++k)
    {
        const double v = u(rng);
        for (const auto& cv : {friction::ankleCvPreset(), friction::kneeCvPreset()})
            worst = std::max(worst, rel(friction::cvEval(cv, v), refCv(cv, v)));
        for (const auto& scv : {friction::ankleScvPreset(), friction::kneeScvPreset()})
            worst = std::max(worst, rel(friction::scvEval(scv, v), refScv(scv, v)));
    }
    return {worst < 1e-12, fmt("max relative error %.2e over 1000 velocities x 4 models", worst)};
}

// ------------------------------------------------------------ 2. gradients

double modelGradientError(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> ka(0.5, 50.0), kc(0.1, 10.0), kv(0.0, 5.0), extra(0.0, 10.0),
        vs(0.05, 2.0), alpha(0.5, 3.0), v(-3.0, 3.0);
    friction::ScvParams p{ka(rng), kc(rng), kv(rng), 0.0, vs(rng), alpha(rng)};
    p.k_s = p.k_c + extra(rng);
    const friction::CvParams c{p.k_a, p.k_c, p.k_v};
    const double x = v(rng);

    // Central differences on the extended-precision reference.
    const long double h = 1e-7L;
    double worst = 0.0;
    auto check = [&worst](double analytic, long double fd) {
        worst = std::max(worst, static_cast<double>(std::abs(analytic - fd) / std::max(1e-6L, std::abs(fd))));
    };
    const auto gs = friction::scvGrad(p, x);
    for (int k = 0; k < 6; ++k)
    {
        auto perturbed = [&](long double d) {
            long double q[6] = {p.k_a, p.k_c, p.k_v, p.k_s, p.v_s, p.alpha};
            q[k] += d;
            const long double th = std::tanh(q[0] * x);
            const long double stribeck = std::exp(-std::pow(std::abs(x / q[4]), q[5]));
            return q[2] * x + q[1] * th + (q[3] - q[1]) * stribeck * th;
        };
        check(gs[static_cast<std::size_t>(k)], (perturbed(h) - perturbed(-h)) / (2.0L * h));
    }
    const auto gc = friction::cvGrad(c, x);
    for (int k = 0; k < 3; ++k)
    {
        auto perturbed = [&](long double d) {
            long double q[3] = {c.k_a, c.k_c, c.k_v};
            q[k] += d;
            return q[1] * std::tanh(q[0] * x) + q[2] * x;
        };
        check(gc[static_cast<std::size_t>(k)], (perturbed(h) - perturbed(-h)) / (2.0L * h));
    }
    return worst;
}

double networkGradientError(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> hist(1, 4), width(3, 12);
    std::normal_distribution<double> n(0.0, 1.0);
    pinn::PinnConfig c;
    c.history_length = hist(rng);
    c.hidden1 = width(rng);
    c.hidden2 = width(rng);
    c.dropout_rate = 0.0;
    c.lambda = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    c.seed = rng();
    c.physics_params = friction::ankleScvPreset();
    const int in = 2 * c.history_length;
    pinn::PinnModel m(c, in);
    for (Eigen::Index k = 0; k < m.b1.size(); ++k)
        m.b1(k) = 0.3 * n(rng);
    for (Eigen::Index k = 0; k < m.b2.size(); ++k)
        m.b2(k) = 0.3 * n(rng);
    m.output_scale = 2.0;

    const Eigen::Index batch = 8;
    Eigen::MatrixXd x(in, batch);
    for (Eigen::Index k = 0; k < x.size(); ++k)
        x.data()[k] = n(rng);
    std::vector<double> target(batch), physics(batch);
    for (Eigen::Index k = 0; k < batch; ++k)
    {
        target[static_cast<std::size_t>(k)] = n(rng);
        physics[static_cast<std::size_t>(k)] = n(rng);
    }
    const auto g = pinn::backward(m, x, target, physics, nullptr);
    auto loss = [&](const pinn::PinnModel& p) {
        const Eigen::VectorXd y = p.predict(x);
        return pinn::compositeLoss({y.data(), static_cast<std::size_t>(y.size())}, target, physics, c.lambda).total;
    };

    double worst = 0.0;
    auto sweep = [&](auto member, const auto& grad) {
        pinn::PinnModel p = m;
        auto& w = p.*member;
        for (Eigen::Index k = 0; k < w.size(); ++k)
        {
            const double h = 1e-6;
            const double orig = w.data()[k];
            w.data()[k] = orig + h;
            const double up = loss(p);
            w.data()[k] = orig - h;
            const double down = loss(p);
            w.data()[k] = orig;
            const double fd = (up - down) / (2.0 * h);
            worst = std::max(worst, std::abs(grad.data()[k] - fd) / std::max(1e-6, std::abs(fd)));
        }
    };
    sweep(&pinn::PinnModel::W1, g.W1);
    sweep(&pinn::PinnModel::W2, g.W2);
    sweep(&pinn::PinnModel::W3, g.W3);
    sweep(&pinn::PinnModel::b1, g.b1);
    sweep(&pinn::PinnModel::b2, g.b2);
    sweep(&pinn::PinnModel::b3, g.b3);
    return worst;
}

Outcome gradientIntegrity(Context&)
{
    std::mt19937_64 rng(7);
    double models = 0.0;
    double network = 0.0;
    for (int k = 0; k < 50; ++k)
    {
        models = std::max(models, modelGradientError(rng));
        network = std::max(network, networkGradientError(rng));
    }
    return {models < 1e-5 && network < 1e-4,
            fmt("50 configurations: CV/SCV max rel error %.2e (< 1e-5), network %.2e (< 1e-4)", models, network)};
}

// ------------------------------------------------------------ 3. parameter recovery

Outcome parameterRecovery(Context&)
{
    const auto truth = friction::ankleScvPreset();
    std::vector<double> v, tau;
    for (int k = 0; k <= 2000; ++k)
    {
        const double x = -3.0 + 6.0 * k / 2000.0;
        v.push_back(x);
        tau.push_back(friction::scvEval(truth, x));
    }
    double mean = 0.0;
    for (double t : tau)
        mean += t;
    mean /= static_cast<double>(tau.size());
    double var = 0.0;
    for (double t : tau)
        var += (t - mean) * (t - mean);
    var /= static_cast<double>(tau.size());

    fitting::AdamSettings s;
    s.epochs = 10000;
    const auto r = fitting::fitStaticModel(friction::ModelKind::Scv, v, tau, s);
    const auto& p = std::get<friction::ScvParams>(r.params);
    const double ec = std::abs(p.k_c - truth.k_c) / truth.k_c;
    const double ev = std::abs(p.k_v - truth.k_v) / truth.k_v;
    const double es = std::abs(p.k_s - truth.k_s) / truth.k_s;
    const double mseRatio = r.final_mse / var;
    return {ec < 0.02 && ev < 0.02 && es < 0.05 && mseRatio < 0.01,
            fmt("k_c %.2f%%, k_v %.2f%%, k_s %.2f%% off; MSE %.2e of target variance", 100 * ec, 100 * ev, 100 * es,
                mseRatio)};
}

// ------------------------------------------------------------ 4. filters

Outcome filterResponses(Context&)
{
    // Single-pass Butterworth: measured steady-state gain of a sine at the cutoff.
    const double rate = 500.0, cutoff = 20.0;
    sigproc::ButterworthFilter filter(rate, cutoff, 2);
    double peak = 0.0;
    for (int k = 0; k < 20000; ++k)
    {
        const double y = filter.process(std::sin(2.0 * std::numbers::pi * cutoff * k / rate));
        if (k > 10000)
            peak = std::max(peak, std::abs(y));
    }
    const double measuredDb = 20.0 * std::log10(peak);
    // Analytic response of the bilinear Butterworth at the prewarped cutoff.
    const double analyticDb = 20.0 * std::log10(1.0 / std::sqrt(2.0));
    // Reference frequency response evaluated from the designed sections.
    std::complex<double> h{1.0, 0.0};
    const std::complex<double> z = std::polar(1.0, 2.0 * std::numbers::pi * cutoff / rate);
    for (const auto& b : sigproc::designButterworthLowpass(rate, cutoff, 2))
        h *= (b.b0 + b.b1 / z + b.b2 / (z * z)) / (1.0 + b.a1 / z + b.a2 / (z * z));
    const double designDb = 20.0 * std::log10(std::abs(h));
    // Sampled sine peaks can miss the true amplitude by 1 - cos(pi f / fs).
    const bool butterOk = std::abs(designDb + 3.01) < 0.2 && std::abs(measuredDb - analyticDb) < 0.2;

    // Kalman velocity on a noise-free ramp, against a reference implementation.
    const double dt = 1e-3, slope = 0.5, q = 1e2, r = 2.5e-9;
    sigproc::KalmanDifferentiator kf(dt, q, r);
    Eigen::Matrix3d F;
    F << 1, dt, dt * dt / 2, 0, 1, dt, 0, 0, 1;
    Eigen::Matrix3d Q;
    Q << std::pow(dt, 5) / 20, std::pow(dt, 4) / 8, std::pow(dt, 3) / 6, std::pow(dt, 4) / 8, std::pow(dt, 3) / 3,
        dt * dt / 2, std::pow(dt, 3) / 6, dt * dt / 2, dt;
    Q *= q;
    Eigen::Vector3d x(0.0, 0.0, 0.0);
    Eigen::Matrix3d P = Eigen::Matrix3d::Identity();
    double velocity = 0.0, reference = 0.0;
    for (int k = 0; k <= 1000; ++k)
    {
        const double meas = slope * k * dt;
        velocity = kf.update(meas)(1);
        if (k == 0)
        {
            x << meas, 0.0, 0.0;
            continue;
        }
        x = F * x;
        P = F * P * F.transpose() + Q;
        const double s = P(0, 0) + r;
        const Eigen::Vector3d gain = P.col(0) / s;
        x += gain * (meas - x(0));
        P -= gain * P.row(0);
        reference = x(1);
    }
    const double kalmanErr = std::abs(velocity - slope) / slope;
    const double refErr = std::abs(velocity - reference) / slope;
    const bool kalmanOk = kalmanErr < 0.01 && refErr < 1e-6;
    return {butterOk && kalmanOk,
            fmt("Butterworth at cutoff %.3f dB (design), %.3f dB (simulated); Kalman ramp velocity error %.2e, "
                "%.1e from reference filter",
                designDb, measuredDb, kalmanErr, refErr)};
}

// ------------------------------------------------------------ 5. reconstruction

Outcome reconstructionFidelity(Context&)
{
    auto params = sim::JointParams::fixture("knee");
    params.transmission_stiffness = 1e6;
    const auto gt = sim::FrictionGroundTruth::fixture("knee");
    excitation::TrajectorySpec spec;
    spec.kind = excitation::TrajectoryKind::Sine;
    spec.amplitude = 1.5;
    spec.frequency = 0.5;
    spec.duration_max = 10.0;
    sim::TrajectoryOptions options;
    options.noise.enabled = false;
    const auto log = sim::runTrajectory(params, gt, excitation::sampleCommands(spec, 20000.0), options);
    sigproc::PipelineSettings settings;
    settings.kalman_q = 1e6;
    const auto d = sigproc::runPipeline(log, params, settings);
    // Even output samples coincide with the logged samples.
    double se = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < log.size(); ++i)
    {
        const double e = d.tau_F_true[2 * i] - log.friction_shadow[i];
        se += e * e;
        ss += log.friction_shadow[i] * log.friction_shadow[i];
    }
    const double ratio = std::sqrt(se / ss);
    return {ratio < 0.05, fmt("reconstruction RMSE %.2f%% of friction RMS (%.2f N m) over %zu samples", 100 * ratio,
                              std::sqrt(ss / static_cast<double>(log.size())), log.size())};
}

// ------------------------------------------------------------ 6. PINN vs SCV

Outcome pinnBeatsStatic(Context& ctx)
{
    const auto& run = ctx.ankleRun();
    const double pinnMse = run.pinn.best_val_loss;
    return {pinnMse < 0.5 * run.scv_val_mse,
            fmt("ankle: PINN validation MSE %.4g vs fitted SCV %.4g (ratio %.3f, %d epochs, best %d)", pinnMse,
                run.scv_val_mse, pinnMse / run.scv_val_mse, run.cfg.pinn.epochs, run.pinn.best_epoch)};
}

// ------------------------------------------------------------ 7. ordering

stages::Models modelsOf(const FixtureRun& run)
{
    stages::Models m;
    m.cv = std::get<friction::CvParams>(run.fits.cv.params);
    m.scv = std::get<friction::ScvParams>(run.fits.scv.params);
    m.pinn = run.model;
    return m;
}

std::string kpText(const std::optional<double>& kp)
{
    return kp ? fmt("%.1f", *kp) : std::string("n/a");
}

Outcome gainOrdering(Context& ctx)
{
    const auto& run = ctx.kneeRun();
    const auto e = stages::evaluate(modelsOf(run), run.cfg);
    const auto& none = e.models[0].search.kp;
    const auto& cv = e.models[1].search.kp;
    const auto& scv = e.models[2].search.kp;
    const auto& pinn = e.models[3].search.kp;
    const bool ordered = pinn && scv && cv && none && *pinn <= *scv && *scv <= *cv && *cv < *none;
    const double energyPinn = e.models[3].energy_equal_gain;
    const double energyNone = e.models[0].energy_equal_gain;
    const bool energy = energyPinn < energyNone;
    return {ordered && energy,
            fmt("knee min K_p PINN %s, SCV %s, CV %s, NONE %s (%s); energy at K_p %.1f PINN %.4g vs NONE %.4g (%s)",
                kpText(pinn).c_str(), kpText(scv).c_str(), kpText(cv).c_str(), kpText(none).c_str(),
                ordered ? "ordered" : "not ordered", e.energy_kp, energyPinn, energyNone,
                energy ? "lower" : "not lower")};
}

// ------------------------------------------------------------ 8. disturbance

Outcome disturbanceTrend(Context& ctx)
{
    const auto& run = ctx.ankleRun();
    const auto fixture = run.cfg.evalFixture();
    const auto grid = eval::logGrid(run.cfg.eval.kp_min, run.cfg.eval.kp_max, run.cfg.eval.kp_per_decade);
    const auto pinnComp = control::Compensator::fromPinn(run.model);
    const auto search = eval::minKpSearch(pinnComp, grid, fixture);
    if (!search.kp)
        return {false, "ankle PINN never reaches the tracking threshold"};
    const control::ControllerGains gains{*search.kp, fixture.kd};
    const auto pinn = eval::disturbanceRecovery(pinnComp, gains, fixture);
    const auto none = eval::disturbanceRecovery(control::Compensator::none(), gains, fixture);
    return {pinn.recovery_rmse < 0.05 && none.recovery_rmse > 0.1,
            fmt("ankle, K_p %.1f, %.1f N m pulse: recovery RMSE PINN %.4f (< 0.05), NONE %.4f (> 0.1)", *search.kp,
                pinn.peak_moment, pinn.recovery_rmse, none.recovery_rmse)};
}

// ------------------------------------------------------------ 9. latency

Outcome realTimeBudget(Context& ctx)
{
    pinn::PinnModel model;
    if (ctx.ankle)
    {
        model = *ctx.ankle->model;
    } else
    {
        const auto c = pinn::PinnConfig::ankle();
        model = pinn::PinnModel(c, 2 * c.history_length);
    }
    if (model.W1.cols() != 40 || model.W1.rows() != 268 || model.W2.rows() != 215)
        return {false, "unexpected ankle architecture"};

    pinn::PinnEstimator estimator(model);
    constexpr int calls = 100000;
    std::vector<double> durations(calls);
    std::vector<double> cpu(calls);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> inputs(2 * calls);
    for (double& v : inputs)
        v = n(rng);
    volatile double sink = 0.0;
    for (int k = 0; k < 100; ++k) // warm-up
    {
        estimator.push(inputs[2 * k], inputs[2 * k + 1]);
        sink = estimator.estimate();
    }
    const std::size_t before = g_allocations.load();
    for (int k = 0; k < calls; ++k)
    {
        timespec c0{}, c1{};
        clock_gettime(CLOCK_THREAD_CPUTIME_ID, &c0);
        const auto t0 = std::chrono::steady_clock::now();
        estimator.push(inputs[2 * k], inputs[2 * k + 1]);
        sink = estimator.estimate();
        const auto t1 = std::chrono::steady_clock::now();
        clock_gettime(CLOCK_THREAD_CPUTIME_ID, &c1);
        durations[k] = std::chrono::duration<double, std::micro>(t1 - t0).count();
        cpu[k] = 1e6 * static_cast<double>(c1.tv_sec - c0.tv_sec) + 1e-3 * static_cast<double>(c1.tv_nsec - c0.tv_nsec);
    }
    const std::size_t allocations = g_allocations.load() - before;
    (void)sink;
    std::sort(durations.begin(), durations.end());
    std::sort(cpu.begin(), cpu.end());
    const double median = durations[calls / 2];
    const auto preempted = static_cast<std::size_t>(
        durations.end() - std::upper_bound(durations.begin(), durations.end(), 1000.0));
    // Without a real-time scheduler, wall-clock outliers include time the thread was not running.
    const double worst = cpu.back();
    return {median < 100.0 && worst < 1000.0 && allocations == 0,
            fmt("40-268-215-1 over 1e5 calls: median %.1f us, worst %.1f us thread CPU (%.1f us wall, %zu calls "
                "over 1 ms wall), %zu allocations",
                median, worst, durations.back(), preempted, allocations)};
}

// ------------------------------------------------------------ 10. determinism

std::vector<fs::path> listFiles(const fs::path& root)
{
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root))
    {
        if (entry.is_regular_file())
            files.push_back(fs::relative(entry.path(), root));
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome determinism(Context& ctx)
{
    if (ctx.cli.empty() || !fs::exists(ctx.cli))
        return {false, "command-line tool not found (pass --cli)"};
    fs::create_directories(ctx.work);
    // A reduced but complete pipeline: two trajectories, a small network, a short gain grid.
    const auto cfg = nlohmann::json::parse(R"({
        "simulation": {"manifest": {"trajectories": [
            {"kind": "sine", "amplitude": 0.3, "frequency": 2.0, "duration_max": 5.0},
            {"kind": "sine", "amplitude": 0.4, "frequency": 3.0, "duration_max": 5.0}]}},
        "fit": {"adam": {"epochs": 200}},
        "pinn": {"epochs": 3, "hidden1": 16, "hidden2": 16, "batch_size": 256},
        "sweep": {"trials": 2},
        "eval": {"kp_min": 300.0, "kp_max": 2000.0, "kp_per_decade": 4, "tracking_duration": 4.0}})");
    const fs::path cfgPath = ctx.work / "determinism.json";
    std::ofstream(cfgPath) << cfg.dump(2);

    std::vector<fs::path> outs;
    for (const char* name : {"first", "second"})
    {
        const fs::path out = ctx.work / name;
        fs::remove_all(out);
        const std::string cmd = "\"" + ctx.cli + "\" run-all --fixture ankle --seed 3 --config \"" + cfgPath.string()
                                + "\" --out \"" + out.string() + "\" > \"" + (ctx.work / name).string()
                                + ".log\" 2>&1";
        if (std::system(cmd.c_str()) != 0)
            return {false, "run-all failed; see " + (ctx.work / name).string() + ".log"};
        // Rerun a single stage into the same directory.
        const std::string again = "\"" + ctx.cli + "\" fit --fixture ankle --seed 3 --config \"" + cfgPath.string()
                                  + "\" --out \"" + out.string() + "\" >> \"" + (ctx.work / name).string()
                                  + ".log\" 2>&1";
        if (std::system(again.c_str()) != 0)
            return {false, "fit rerun failed"};
        outs.push_back(out);
    }
    const auto a = listFiles(outs[0]);
    const auto b = listFiles(outs[1]);
    if (a != b || a.empty())
        return {false, fmt("file sets differ (%zu vs %zu files)", a.size(), b.size())};
    std::size_t bytes = 0;
    for (const auto& f : a)
    {
        const std::string x = slurp(outs[0] / f);
        if (x != slurp(outs[1] / f))
            return {false, "artifact differs: " + f.string()};
        bytes += x.size();
    }
    return {true, fmt("run-all twice plus a stage rerun: %zu artifacts, %zu bytes, all identical", a.size(), bytes)};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance suite"};
    Context ctx;
    std::vector<int> only;
    std::string work = (fs::temp_directory_path() / "frictionid_acceptance").string();
    app.add_option("--cli", ctx.cli, "Path of the frictionid command-line tool");
    app.add_option("--work", work, "Scratch directory");
    app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 10));
    app.add_option("--ankle-epochs", ctx.ankle_epochs, "PINN epochs on the ankle fixture");
    app.add_option("--knee-epochs", ctx.knee_epochs, "PINN epochs on the knee fixture");
    CLI11_PARSE(app, argc, argv);
    ctx.work = work;

    const std::vector<std::pair<std::string, std::function<Outcome(Context&)>>> criteria{
        {"closed-form friction values", closedFormValues},
        {"gradient integrity", gradientIntegrity},
        {"parameter recovery", parameterRecovery},
        {"filter responses", filterResponses},
        {"friction reconstruction fidelity", reconstructionFidelity},
        {"PINN beats static models", pinnBeatsStatic},
        {"minimum gain ordering and energy", gainOrdering},
        {"disturbance recovery trend", disturbanceTrend},
        {"real-time budget", realTimeBudget},
        {"determinism", determinism},
    };
    const std::set<int> selected(only.begin(), only.end());

    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k)
    {
        const int id = static_cast<int>(k + 1);
        if (!selected.empty() && !selected.contains(id))
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = criteria[k].second(ctx);
        } catch (const std::exception& e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[k].first << ": " << o.detail
                  << " (" << fmt("%.1f", seconds) << " s)" << std::endl;
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
