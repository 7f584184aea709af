/**
 * @file sigproc.cpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 */

#include <frictionid/sigproc.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace frictionid::sigproc
{

namespace
{

constexpr double kTimeTolerance = 1e-9;

template <typename D>
auto columns(D& d)
{
    return std::array{&d.t, &d.s, &d.s_dot, &d.s_ddot, &d.theta, &d.theta_dot, &d.i_m, &d.tau, &d.tau_F_true};
}

std::array<double, 2> steadyState(const Biquad& q, double value)
{
    const double z1 = (q.b2 - q.a2) * value;
    const double z0 = (q.b1 - q.a1) * value + z1;
    return {z0, z1};
}

double runSection(const Biquad& q, std::array<double, 2>& z, double x)
{
    const double y = q.b0 * x + z[0];
    z[0] = q.b1 * x - q.a1 * y + z[1];
    z[1] = q.b2 * x - q.a2 * y;
    return y;
}

void filterInPlace(const std::vector<Biquad>& sections, std::vector<double>& x)
{
    for (const auto& q : sections)
    {
        auto z = steadyState(q, x.front());
        for (double& v : x)
            v = runSection(q, z, v);
    }
}

} // namespace

void Dataset::validate() const
{
    const std::size_t n = t.size();
    const std::vector<const std::vector<double>*> required
        = {&s, &s_dot, &s_ddot, &theta, &theta_dot, &i_m};
    for (const auto* c : required)
    {
        if (c->size() != n)
            throw std::invalid_argument("Dataset: column length mismatch");
    }
    if (!tau.empty() && tau.size() != n)
        throw std::invalid_argument("Dataset: tau length mismatch");
    if (!tau_F_true.empty() && tau_F_true.size() != n)
        throw std::invalid_argument("Dataset: tau_F_true length mismatch");
    if (!(rate > 0.0))
        throw std::invalid_argument("Dataset: rate must be > 0");
    const double period = 1.0 / rate;
    for (std::size_t i = 1; i < n; ++i)
    {
        if (std::abs(t[i] - t[0] - static_cast<double>(i) * period) > kTimeTolerance)
            throw std::invalid_argument("Dataset: non-uniform timestamps at row "
                                        + std::to_string(i));
    }
}

io::Table Dataset::toTable() const
{
    const std::size_t n = t.size();
    auto orZeros = [n](const std::vector<double>& c) {
        return c.empty() ? std::vector<double>(n, 0.0) : c;
    };
    return io::Table{
        {"t", "s", "s_dot", "s_ddot", "theta", "theta_dot", "i_m", "tau", "tau_F_true"},
        {t, s, s_dot, s_ddot, theta, theta_dot, i_m, orZeros(tau), orZeros(tau_F_true)}};
}

Dataset Dataset::fromTable(const io::Table& table)
{
    Dataset d;
    d.t = table.column("t");
    d.s = table.column("s");
    d.s_dot = table.column("s_dot");
    d.s_ddot = table.column("s_ddot");
    d.theta = table.column("theta");
    d.theta_dot = table.column("theta_dot");
    d.i_m = table.column("i_m");
    d.tau = table.column("tau");
    d.tau_F_true = table.column("tau_F_true");
    if (d.t.size() >= 2)
        d.rate = 1.0 / (d.t[1] - d.t[0]);
    // snap to the nominal logging rates
    for (double nominal : {500.0, 1000.0})
    {
        if (std::abs(d.rate - nominal) < 1e-3)
            d.rate = nominal;
    }
    d.validate();
    return d;
}

std::vector<Biquad> designButterworthLowpass(double rate, double cutoff, int order)
{
    if (order != 2 && order != 4)
        throw std::invalid_argument("Butterworth: order must be 2 or 4");
    if (!(rate > 0.0) || !(cutoff > 0.0))
        throw std::invalid_argument("Butterworth: rate and cutoff must be > 0");
    if (!(cutoff < 0.5 * rate))
        throw std::invalid_argument("Butterworth: cutoff must be below Nyquist");

    const double k = std::tan(std::numbers::pi * cutoff / rate);
    std::vector<Biquad> sections;
    for (int i = 0; i < order / 2; ++i)
    {
        const double invQ = 2.0 * std::sin(std::numbers::pi * (2 * i + 1) / (2.0 * order));
        const double norm = 1.0 / (1.0 + k * invQ + k * k);
        Biquad q;
        q.a1 = 2.0 * (k * k - 1.0) * norm;
        q.a2 = (1.0 - k * invQ + k * k) * norm;
        // numerator chosen so that b0 + b1 + b2 = 1 + a1 + a2
        q.b0 = 0.25 * (1.0 + q.a1 + q.a2);
        q.b1 = 2.0 * q.b0;
        q.b2 = q.b0;
        sections.push_back(q);
    }
    return sections;
}

ButterworthFilter::ButterworthFilter(double rate, double cutoff, int order)
    : m_sections(designButterworthLowpass(rate, cutoff, order))
    , m_state(m_sections.size(), std::array<double, 2>{0.0, 0.0})
{
}

void ButterworthFilter::reset(double value)
{
    for (std::size_t i = 0; i < m_sections.size(); ++i)
        m_state[i] = steadyState(m_sections[i], value);
}

double ButterworthFilter::process(double x)
{
    for (std::size_t i = 0; i < m_sections.size(); ++i)
        x = runSection(m_sections[i], m_state[i], x);
    return x;
}

std::vector<double> butterworthLowpass(std::span<const double> x,
                                       double rate,
                                       double cutoff,
                                       int order,
                                       bool zeroPhase)
{
    const auto sections = designButterworthLowpass(rate, cutoff, order);
    const std::size_t n = x.size();
    if (n < static_cast<std::size_t>(3 * order))
        throw std::invalid_argument("Butterworth: input shorter than 3 * order");

    if (!zeroPhase)
    {
        std::vector<double> y(x.begin(), x.end());
        filterInPlace(sections, y);
        return y;
    }

    // odd extension at both ends, then forward-backward
    const std::size_t pad = std::min<std::size_t>(3 * (order + 1), n - 1);
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i)
        ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i)
        ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    filterInPlace(sections, ext);
    std::reverse(ext.begin(), ext.end());
    filterInPlace(sections, ext);
    std::reverse(ext.begin(), ext.end());

    return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                               ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

KalmanDifferentiator::KalmanDifferentiator(double dt, double q, double measurementVariance)
    : m_r(measurementVariance)
{
    if (!(dt > 0.0) || !(q > 0.0) || !(measurementVariance > 0.0))
        throw std::invalid_argument("KalmanDifferentiator: dt, q and r must be > 0");

    m_F << 1.0, dt, 0.5 * dt * dt, 0.0, 1.0, dt, 0.0, 0.0, 1.0;
    const double dt2 = dt * dt;
    const double dt3 = dt2 * dt;
    const double dt4 = dt3 * dt;
    const double dt5 = dt4 * dt;
    m_Q << dt5 / 20.0, dt4 / 8.0, dt3 / 6.0, //
        dt4 / 8.0, dt3 / 3.0, dt2 / 2.0,     //
        dt3 / 6.0, dt2 / 2.0, dt;
    m_Q *= q;
    m_x.setZero();
    m_P.setZero();
}

void KalmanDifferentiator::reset(double position)
{
    m_x << position, 0.0, 0.0;
    m_P.setZero();
    m_P.diagonal() << m_r, 1e4, 1e6;
    m_initialized = true;
}

const Eigen::Vector3d& KalmanDifferentiator::update(double position)
{
    if (!std::isfinite(position))
        throw std::invalid_argument("KalmanDifferentiator: non-finite measurement");
    if (!m_initialized)
    {
        reset(position);
        return m_x;
    }

    m_x = m_F * m_x;
    m_P = m_F * m_P * m_F.transpose() + m_Q;

    const double innovation = position - m_x(0);
    const double s = m_P(0, 0) + m_r;
    const Eigen::Vector3d gain = m_P.col(0) / s;
    m_x += gain * innovation;
    const Eigen::RowVector3d firstRow = m_P.row(0);
    m_P.noalias() -= gain * firstRow;
    m_P = 0.5 * (m_P + m_P.transpose()).eval();
    return m_x;
}

KalmanEstimate kalmanDifferentiate(std::span<const double> measured,
                                   double rate,
                                   double q,
                                   double measurementVariance)
{
    if (measured.size() < 10)
        throw std::invalid_argument("kalmanDifferentiate: need at least 10 samples");
    if (!(rate > 0.0))
        throw std::invalid_argument("kalmanDifferentiate: rate must be > 0");
    for (double v : measured)
    {
        if (!std::isfinite(v))
            throw std::invalid_argument("kalmanDifferentiate: non-finite input");
    }

    KalmanDifferentiator filter(1.0 / rate, q, measurementVariance);
    KalmanEstimate out;
    out.position.reserve(measured.size());
    out.velocity.reserve(measured.size());
    out.acceleration.reserve(measured.size());
    for (double z : measured)
    {
        const auto& x = filter.update(z);
        out.position.push_back(x(0));
        out.velocity.push_back(x(1));
        out.acceleration.push_back(x(2));
    }
    return out;
}

Dataset resample(const Dataset& input)
{
    if (std::abs(input.rate - 500.0) > 1e-9)
        throw std::invalid_argument("resample: input rate must be 500 Hz");
    input.validate();
    const std::size_t n = input.size();

    Dataset out;
    out.rate = 1000.0;
    const auto in = columns(input);
    auto dst = columns(out);
    for (std::size_t c = 0; c < in.size(); ++c)
    {
        const auto& x = *in[c];
        auto& y = *dst[c];
        if (x.empty())
            continue;
        y.resize(2 * n - 1);
        for (std::size_t i = 0; i < n; ++i)
        {
            y[2 * i] = x[i];
            if (i + 1 < n)
                y[2 * i + 1] = 0.5 * (x[i] + x[i + 1]);
        }
    }
    // timestamps rebuilt on the exact 1 ms grid
    for (std::size_t i = 0; i < out.t.size(); ++i)
        out.t[i] = input.t.front() + static_cast<double>(i) * 1e-3;
    return out;
}

SingleJointInverseDynamics::SingleJointInverseDynamics(const sim::JointParams& params)
    : m_inertia(params.load_inertia)
    , m_gravity(params.gravity_amplitude)
{
}

double SingleJointInverseDynamics::torque(double s, double /*sDot*/, double sDdot) const
{
    return m_inertia * sDdot + m_gravity * std::sin(s);
}

double inverseDynamicsSingleJoint(double s, double sDot, double sDdot, const sim::JointParams& params)
{
    return SingleJointInverseDynamics(params).torque(s, sDot, sDdot);
}

void applyInverseDynamics(Dataset& dataset, const InverseDynamics& provider)
{
    dataset.tau.resize(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i)
        dataset.tau[i] = provider.torque(dataset.s[i], dataset.s_dot[i], dataset.s_ddot[i]);
}

Dataset reconstructFriction(const Dataset& dataset, const sim::JointParams& params)
{
    if (dataset.tau.size() != dataset.size() || dataset.i_m.size() != dataset.size())
        throw std::invalid_argument("reconstructFriction: missing tau or i_m column");
    Dataset out = dataset;
    const double gain = params.reduction_ratio * params.torque_constant;
    out.tau_F_true.resize(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i)
        out.tau_F_true[i] = gain * dataset.i_m[i] - dataset.tau[i];
    return out;
}

void to_json(nlohmann::json& j, const PipelineSettings& s)
{
    j = nlohmann::json{{"current_cutoff", s.current_cutoff},
                       {"current_order", s.current_order},
                       {"kalman_q", s.kalman_q},
                       {"kalman_r", s.kalman_r},
                       {"kalman_q_theta", s.kalman_q_theta},
                       {"kalman_r_theta", s.kalman_r_theta}};
}

void from_json(const nlohmann::json& j, PipelineSettings& s)
{
    s.current_cutoff = j.value("current_cutoff", s.current_cutoff);
    s.current_order = j.value("current_order", s.current_order);
    s.kalman_q = j.value("kalman_q", s.kalman_q);
    s.kalman_r = j.value("kalman_r", s.kalman_r);
    s.kalman_q_theta = j.value("kalman_q_theta", s.kalman_q_theta);
    s.kalman_r_theta = j.value("kalman_r_theta", s.kalman_r_theta);
}

Dataset runPipeline(const sim::RawLog& raw,
                    const sim::JointParams& params,
                    const PipelineSettings& settings,
                    const InverseDynamics* provider)
{
    const double rate = raw.rate;
    if (std::abs(rate - 500.0) > 1e-9 && std::abs(rate - 1000.0) > 1e-9)
        throw std::invalid_argument("runPipeline: raw log rate must be 500 or 1000 Hz");

    const sim::NoiseSettings nominalNoise;
    const double rS = settings.kalman_r > 0.0 ? settings.kalman_r
                                              : nominalNoise.sigma_s * nominalNoise.sigma_s;
    const double r = params.reduction_ratio;
    const double qTheta = settings.kalman_q_theta > 0.0 ? settings.kalman_q_theta
                                                        : settings.kalman_q * r * r;
    const double rTheta = settings.kalman_r_theta > 0.0
                              ? settings.kalman_r_theta
                              : nominalNoise.sigma_theta * nominalNoise.sigma_theta;

    Dataset d;
    d.rate = rate;
    d.t = raw.t;
    d.i_m = butterworthLowpass(raw.i_m, rate, settings.current_cutoff, settings.current_order);
    auto joint = kalmanDifferentiate(raw.s, rate, settings.kalman_q, rS);
    auto motor = kalmanDifferentiate(raw.theta, rate, qTheta, rTheta);
    d.s = std::move(joint.position);
    d.s_dot = std::move(joint.velocity);
    d.s_ddot = std::move(joint.acceleration);
    d.theta = std::move(motor.position);
    d.theta_dot = std::move(motor.velocity);
    // uniform grid from the first stamp
    for (std::size_t i = 0; i < d.t.size(); ++i)
        d.t[i] = raw.t.front() + static_cast<double>(i) / rate;

    if (std::abs(rate - 500.0) <= 1e-9)
        d = resample(d);

    const SingleJointInverseDynamics fallback(params);
    applyInverseDynamics(d, provider ? *provider : fallback);
    return reconstructFriction(d, params);
}

} // namespace frictionid::sigproc
