/**
 * @file eval.cpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 */

#include <frictionid/eval.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Geometry>

namespace frictionid::eval
{

Pose Pose::compose(const Pose& other) const
{
    Pose out;
    out.rotation = rotation * other.rotation;
    out.translation = rotation * other.translation + translation;
    return out;
}

void requireRotation(const Eigen::Matrix3d& rotation)
{
    if (!rotation.allFinite())
        throw std::invalid_argument("rotation: non-finite entries");
    const double orthoError = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (orthoError > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9)
        throw std::invalid_argument("rotation: matrix is not orthonormal (max |R^T R - I| = "
                                    + std::to_string(orthoError) + ")");
}

Wrench wrenchTransform(const Wrench& w, const Pose& pose, const std::string& targetFrame)
{
    requireRotation(pose.rotation);
    if (!pose.translation.allFinite() || !w.force.allFinite() || !w.moment.allFinite())
        throw std::invalid_argument("wrenchTransform: non-finite input");
    Wrench out;
    out.force = pose.rotation * w.force;
    out.moment = pose.translation.cross(out.force) + pose.rotation * w.moment;
    out.frame = targetFrame;
    return out;
}

double jointAxisMoment(const Wrench& w, const Pose& jointFromSensor)
{
    return wrenchTransform(w, jointFromSensor, "joint").moment.x();
}

Wrench synthesizeSensorWrench(double jointTorque, const Pose& jointFromSensor)
{
    requireRotation(jointFromSensor.rotation);
    const Eigen::Vector3d& p = jointFromSensor.translation;
    const double lever2 = p.y() * p.y() + p.z() * p.z();
    const Eigen::Vector3d momentJoint = jointTorque * Eigen::Vector3d::UnitX();
    Eigen::Vector3d forceJoint = Eigen::Vector3d::Zero();
    if (lever2 > 1e-12)
        forceJoint = -jointTorque / lever2 * p.cross(Eigen::Vector3d::UnitX()); // (p x f)_x = torque
    // Invert mu_j = p x f_j + R mu_s.
    const Eigen::Matrix3d Rt = jointFromSensor.rotation.transpose();
    Wrench sensor;
    sensor.force = Rt * forceJoint;
    sensor.moment = Rt * (momentJoint - p.cross(forceJoint));
    sensor.frame = "sensor";
    return sensor;
}

double trackingRmse(const control::ExperimentTrace& trace, double tStart)
{
    return trackingRmse(trace, tStart, std::numeric_limits<double>::infinity());
}

double trackingRmse(const control::ExperimentTrace& trace, double tStart, double tEnd)
{
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < trace.size(); ++i)
    {
        if (trace.t[i] < tStart || trace.t[i] >= tEnd)
            continue;
        const double e = trace.s_des[i] - trace.s[i];
        acc += e * e;
        ++n;
    }
    if (n == 0)
        throw std::invalid_argument("trackingRmse: no samples in the evaluation window");
    return std::sqrt(acc / static_cast<double>(n));
}

double energyProxy(const control::ExperimentTrace& trace)
{
    if (trace.size() < 2)
        return 0.0;
    const double dt = trace.t[1] - trace.t[0];
    double acc = 0.0;
    for (double i : trace.i_ref)
        acc += i * i;
    return acc * dt;
}

std::vector<double> logGrid(double lo, double hi, int perDecade)
{
    if (!(lo > 0.0) || !(hi >= lo) || perDecade < 1)
        throw std::invalid_argument("logGrid: need 0 < lo <= hi and perDecade >= 1");
    std::vector<double> grid;
    const double l0 = std::log10(lo);
    for (int k = 0;; ++k)
    {
        const double v = std::pow(10.0, l0 + static_cast<double>(k) / perDecade);
        if (v > hi * (1.0 + 1e-12))
            break;
        grid.push_back(v);
    }
    return grid;
}

std::vector<double> defaultKpGrid()
{
    return logGrid(1.0, 2e4, 16);
}

Fixture Fixture::standard(const std::string& name)
{
    Fixture f;
    f.params = sim::JointParams::fixture(name);
    f.ground_truth = sim::FrictionGroundTruth::fixture(name);
    f.tracking_reference = control::Reference{control::ReferenceKind::Sine, 0.0, 0.2, 0.5};
    f.tracking_options.duration = 8.0;
    f.tracking_options.seed = 7;
    // Sensor 10 cm below the joint, yawed a quarter turn.
    f.sensor_pose.rotation = Eigen::AngleAxisd(std::numbers::pi / 2.0, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    f.sensor_pose.translation = Eigen::Vector3d(0.0, 0.0, -0.1);
    f.pulse.amplitude = 12.0;
    f.tracking_options.compensation_cutoff = 50.0;
    if (name == "knee")
    {
        f.tracking_reference.offset = 0.3;
        f.pulse.amplitude = 25.0;
        f.hold_position = 0.3;
        // Slower smoothing keeps the gravity-loaded stick estimate from ringing.
        f.tracking_options.compensation_cutoff = 20.0;
    }
    return f;
}

double trackingRmseAt(const control::Compensator& compensator, double kp, const Fixture& fixture)
{
    const control::ControllerGains gains{kp, fixture.kd};
    control::ExperimentTrace trace;
    try
    {
        trace = control::runClosedLoop(fixture.tracking_reference,
                                       gains,
                                       compensator,
                                       fixture.params,
                                       fixture.ground_truth,
                                       fixture.tracking_options);
    } catch (const std::runtime_error&)
    {
        return std::numeric_limits<double>::infinity(); // diverged
    }
    return trackingRmse(trace, fixture.tracking_settle);
}

KpSearchResult minKpSearch(const control::Compensator& compensator,
                           std::span<const double> kpGrid,
                           const Fixture& fixture)
{
    for (std::size_t i = 1; i < kpGrid.size(); ++i)
    {
        if (!(kpGrid[i] > kpGrid[i - 1]))
            throw std::invalid_argument("minKpSearch: grid must be strictly increasing");
    }
    KpSearchResult result;
    result.grid_rmse.assign(kpGrid.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < kpGrid.size(); ++i)
    {
        const double rmse = trackingRmseAt(compensator, kpGrid[i], fixture);
        result.grid_rmse[i] = rmse;
        result.rmse = rmse;
        if (rmse <= fixture.rmse_threshold)
        {
            result.kp = kpGrid[i];
            return result;
        }
    }
    return result;
}

KpSearchResult minKpBinarySearch(const control::Compensator& compensator,
                                 std::span<const double> kpGrid,
                                 const Fixture& fixture)
{
    KpSearchResult result;
    if (kpGrid.empty())
        return result;
    std::size_t lo = 0;
    std::size_t hi = kpGrid.size(); // first passing index lies in [lo, hi]
    double hiRmse = std::numeric_limits<double>::quiet_NaN();
    while (lo < hi)
    {
        const std::size_t mid = lo + (hi - lo) / 2;
        const double rmse = trackingRmseAt(compensator, kpGrid[mid], fixture);
        if (rmse <= fixture.rmse_threshold)
        {
            hi = mid;
            hiRmse = rmse;
        } else
        {
            lo = mid + 1;
        }
    }
    if (hi < kpGrid.size())
    {
        result.kp = kpGrid[hi];
        result.rmse = hiRmse;
    } else
    {
        result.rmse = trackingRmseAt(compensator, kpGrid.back(), fixture);
    }
    return result;
}

DisturbanceResult disturbanceRecovery(const control::Compensator& compensator,
                                      const control::ControllerGains& gains,
                                      const Fixture& fixture)
{
    control::ClosedLoopOptions options = fixture.tracking_options;
    options.disturbance = fixture.pulse;
    options.duration = fixture.pulse.end() + fixture.recovery_window;
    const control::Reference hold{control::ReferenceKind::Hold, fixture.hold_position, 0.0, 0.0};

    DisturbanceResult result;
    result.trace = control::runClosedLoop(hold, gains, compensator, fixture.params, fixture.ground_truth, options);
    result.recovery_rmse = trackingRmse(result.trace, fixture.pulse.end(), fixture.pulse.end() + fixture.recovery_window);
    for (double d : result.trace.disturbance)
    {
        const double moment = jointAxisMoment(synthesizeSensorWrench(d, fixture.sensor_pose), fixture.sensor_pose);
        result.peak_moment = std::max(result.peak_moment, std::abs(moment));
    }
    return result;
}

namespace
{

std::string fmt(double v, int precision)
{
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

} // namespace

std::string reportMarkdown(std::span<const ExperimentReport> reports, const std::string& title)
{
    std::ostringstream md;
    md << "# " << title << "\n\n";
    md << "| model | rmse | moment | kp | kd |\n";
    md << "|---|---|---|---|---|\n";
    for (const auto& r : reports)
        md << "| " << r.model_kind << " | " << fmt(r.tracking_rmse, 4) << " | " << fmt(r.disturbance_moment, 4)
           << " | " << fmt(r.kp, 6) << " | " << fmt(r.kd, 4) << " |\n";
    md << "\n## Disturbance recovery\n\n";
    md << "| model | recovery_rmse | kp | kd | energy | energy_kp |\n";
    md << "|---|---|---|---|---|---|\n";
    for (const auto& r : reports)
        md << "| " << r.model_kind << " | " << fmt(r.recovery_rmse, 4) << " | " << fmt(r.recovery_kp, 6) << " | "
           << fmt(r.kd, 4) << " | " << fmt(r.energy_proxy, 6) << " | " << fmt(r.energy_kp, 6) << " |\n";
    return md.str();
}

std::string reportCsv(std::span<const ExperimentReport> reports, const io::Provenance& provenance)
{
    std::ostringstream csv;
    if (!provenance.empty())
        csv << "# config_hash=" << provenance.configHash << " seed=" << provenance.seed << "\n";
    csv << "model,rmse,moment,kp,kd,recovery_rmse,recovery_kp,energy_proxy,energy_kp,trace\n";
    for (const auto& r : reports)
        csv << r.model_kind << ',' << io::formatDouble(r.tracking_rmse) << ','
            << io::formatDouble(r.disturbance_moment) << ',' << io::formatDouble(r.kp) << ','
            << io::formatDouble(r.kd) << ',' << io::formatDouble(r.recovery_rmse) << ','
            << io::formatDouble(r.recovery_kp) << ',' << io::formatDouble(r.energy_proxy) << ','
            << io::formatDouble(r.energy_kp) << ',' << r.trace_path << "\n";
    return csv.str();
}

void emitReport(const std::filesystem::path& dir,
                std::span<const ExperimentReport> reports,
                const std::string& title,
                const io::Provenance& provenance)
{
    std::filesystem::create_directories(dir);
    std::string md = reportMarkdown(reports, title);
    if (!provenance.empty())
        md += "\nconfig_hash: `" + provenance.configHash + "`, seed: " + std::to_string(provenance.seed) + "\n";
    io::writeText(dir / "report.md", md);
    io::writeText(dir / "report.csv", reportCsv(reports, provenance));
}

} // namespace frictionid::eval
