#include "ridlab/sigmodel.hpp"

#include "ridlab/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <random>

namespace ridlab::sigmodel {

namespace {

bool all_positive_finite(std::initializer_list<double> values) {
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return std::isfinite(v) && v > 0.0; });
}

Mat3 cross_matrix(const Vec3& k) {
    Mat3 m;
    m << 0.0, -k.z(), k.y(), k.z(), 0.0, -k.x(), -k.y(), k.x(), 0.0;
    return m;
}

struct MotionAngles {
    double spin, spin_rate;
    double tilt, tilt_rate;
    double coning, coning_rate;
};

MotionAngles motion_angles(const MicroMotion& m, double t) {
    const double two_pi = 2.0 * kPi;
    MotionAngles a{};
    a.spin = two_pi * m.spin_frequency * t + m.spin_phase;
    a.spin_rate = two_pi * m.spin_frequency;
    switch (m.kind) {
        case MotionKind::Spin:
            break;
        case MotionKind::Precession:
            a.tilt = m.precession_angle;
            a.coning = two_pi * m.coning_frequency * t + m.coning_phase;
            a.coning_rate = two_pi * m.coning_frequency;
            break;
        case MotionKind::Nutation: {
            const double w = two_pi * m.nutation_frequency;
            a.tilt = m.precession_angle + m.nutation_amplitude * std::sin(w * t + m.nutation_phase);
            a.tilt_rate = m.nutation_amplitude * w * std::cos(w * t + m.nutation_phase);
            a.coning = two_pi * m.coning_frequency * t + m.coning_phase;
            a.coning_rate = two_pi * m.coning_frequency;
            break;
        }
    }
    return a;
}

const Vec3 kX = Vec3::UnitX();
const Vec3 kZ = Vec3::UnitZ();

struct EdgeState {
    Vec3 center, center_rate;
    Vec3 dir, dir_rate;  // unit in-plane direction toward the radar and its derivative
};

EdgeState edge_state(const TargetScenario& s, double t) {
    const Mat3 r = body_rotation(s.motion, t);
    const Mat3 rdot = body_rotation_rate(s.motion, t);
    const Vec3 base_b(0.0, 0.0, s.geometry.base_z());
    const Vec3 axis = r * kZ;
    const Vec3 axis_rate = rdot * kZ;
    const Vec3& los = s.radar_los;
    const double la = los.dot(axis);
    const Vec3 w = los - la * axis;
    const double wn = w.norm();
    if (wn < 1e-9) throw DegeneracyError("symmetry axis parallel to line of sight");
    const Vec3 w_rate = -los.dot(axis_rate) * axis - la * axis_rate;
    EdgeState e;
    e.center = r * base_b;
    e.center_rate = rdot * base_b;
    e.dir = w / wn;
    e.dir_rate = (w_rate - e.dir * e.dir.dot(w_rate)) / wn;
    return e;
}

void check_index(int index) {
    if (index < 0 || index >= kScattererCount)
        throw PreconditionError("unknown scatterer index " + std::to_string(index));
}

}  // namespace

void RadarConstants::validate() const {
    require(all_positive_finite({carrier_frequency, bandwidth, prf}),
            "radar constants must be strictly positive");
}

double ConeGeometry::radius_at(double z) const {
    return base_radius * (apex_z() - z) / height;
}

std::array<Vec3, 4> ConeGeometry::fixed_scatterers() const {
    const double z = base_z() + ring_height_fraction * height;
    const double r = radius_at(z);
    std::array<Vec3, 4> p;
    for (int i = 0; i < 3; ++i) {
        const double phi = 2.0 * kPi * i / 3.0;
        p[i] = Vec3(r * std::cos(phi), r * std::sin(phi), z);
    }
    p[3] = Vec3(0.0, 0.0, apex_z());
    return p;
}

double ConeGeometry::surface_distance(const Vec3& p) const {
    // Work in the (radial, z) half-plane.
    const Eigen::Vector2d q(std::hypot(p.x(), p.y()), p.z());
    auto segment_distance = [&q](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        const Eigen::Vector2d ab = b - a;
        const double u = std::clamp((q - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
        return (a + u * ab - q).norm();
    };
    const Eigen::Vector2d apex(0.0, apex_z());
    const Eigen::Vector2d rim(base_radius, base_z());
    const Eigen::Vector2d centre(0.0, base_z());
    return std::min(segment_distance(apex, rim), segment_distance(centre, rim));
}

void ConeGeometry::validate() const {
    require(all_positive_finite({height, base_radius}), "cone height and radius must be positive");
    require(ring_height_fraction > 0.0 && ring_height_fraction < 1.0,
            "ring height fraction must lie in (0, 1)");
}

std::string to_string(MotionKind kind) {
    switch (kind) {
        case MotionKind::Spin: return "spin";
        case MotionKind::Precession: return "precession";
        case MotionKind::Nutation: return "nutation";
    }
    return "unknown";
}

MotionKind motion_kind_from_string(const std::string& name) {
    if (name == "spin") return MotionKind::Spin;
    if (name == "precession") return MotionKind::Precession;
    if (name == "nutation") return MotionKind::Nutation;
    throw PreconditionError("unknown motion kind '" + name + "'");
}

void MicroMotion::validate() const {
    for (double f : {spin_frequency, coning_frequency, nutation_frequency})
        require(std::isfinite(f) && f >= 0.0, "motion frequencies must be non-negative");
    const bool spin = spin_frequency > 0.0;
    const bool coning = coning_frequency > 0.0;
    const bool nutation = nutation_frequency > 0.0;
    switch (kind) {
        case MotionKind::Spin:
            require(spin && !coning && !nutation, "spin motion needs exactly a spin frequency");
            break;
        case MotionKind::Precession:
            require(spin && coning && !nutation,
                    "precession needs spin and coning frequencies and no nutation frequency");
            break;
        case MotionKind::Nutation:
            require(spin && coning && nutation, "nutation needs all three frequencies");
            break;
    }
}

ScattererRole scatterer_role(int index) {
    check_index(index);
    if (index < 3) return ScattererRole::Ring;
    if (index == 3) return ScattererRole::Apex;
    return index == 4 ? ScattererRole::NearEdge : ScattererRole::FarEdge;
}

std::string scatterer_name(int index) {
    check_index(index);
    static const char* names[kScattererCount] = {"S1", "S2", "S3", "P1", "P2", "P3"};
    return names[index];
}

void TargetScenario::validate() const {
    geometry.validate();
    motion.validate();
    radar.validate();
    require(std::abs(radar_los.norm() - 1.0) <= 1e-12, "radar line of sight must be a unit vector");
    require(std::isfinite(standoff_range) && standoff_range >= 100.0 * geometry.height,
            "standoff range must be at least 100 target heights (far field)");
    for (const auto& a : amplitudes)
        require(std::isfinite(a.real()) && std::isfinite(a.imag()), "amplitudes must be finite");
}

Vec3 los_from_elevation(double elevation) {
    return Vec3(std::cos(elevation), 0.0, std::sin(elevation));
}

double ComplexSeries::power() const {
    if (samples.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& s : samples) acc += std::norm(s);
    return acc / static_cast<double>(samples.size());
}

void ComplexSeries::validate() const {
    require(!samples.empty(), "complex series must hold at least one sample");
    require(sample_rate > 0.0 && std::isfinite(sample_rate), "sample rate must be positive");
    for (const auto& s : samples)
        require(std::isfinite(s.real()) && std::isfinite(s.imag()), "non-finite sample");
}

Mat3 rotation_about_axis(const Vec3& axis, double angle) {
    if (std::abs(axis.norm() - 1.0) > 1e-9)
        throw PreconditionError("rotation axis must be a unit vector");
    const Mat3 k = cross_matrix(axis);
    return Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * (k * k);
}

Mat3 body_rotation(const MicroMotion& motion, double t) {
    const MotionAngles a = motion_angles(motion, t);
    const Mat3 spin = rotation_about_axis(kZ, a.spin);
    if (motion.kind == MotionKind::Spin) return spin;
    return rotation_about_axis(kZ, a.coning) * rotation_about_axis(kX, a.tilt) * spin;
}

Mat3 body_rotation_rate(const MicroMotion& motion, double t) {
    const MotionAngles a = motion_angles(motion, t);
    const Mat3 kz = cross_matrix(kZ);
    const Mat3 kx = cross_matrix(kX);
    const Mat3 spin = rotation_about_axis(kZ, a.spin);
    const Mat3 spin_rate = a.spin_rate * kz * spin;
    if (motion.kind == MotionKind::Spin) return spin_rate;
    const Mat3 tilt = rotation_about_axis(kX, a.tilt);
    const Mat3 cone = rotation_about_axis(kZ, a.coning);
    return a.coning_rate * kz * cone * tilt * spin + cone * (a.tilt_rate * kx * tilt) * spin +
           cone * tilt * spin_rate;
}

std::array<Vec3, 2> edge_points(const Vec3& axis, const Vec3& base_center, double radius,
                                const Vec3& los) {
    const Vec3 a = axis.normalized();
    const Vec3 w = los - los.dot(a) * a;
    if (w.norm() < 1e-9) throw DegeneracyError("symmetry axis parallel to line of sight");
    const Vec3 u = w.normalized();
    return {base_center + radius * u, base_center - radius * u};
}

std::array<Vec3, 2> equivalent_edge_scatterers(const TargetScenario& scenario, double t) {
    const EdgeState e = edge_state(scenario, t);
    const double rho = scenario.geometry.base_radius;
    return {e.center + rho * e.dir, e.center - rho * e.dir};
}

Vec3 scatterer_position(const TargetScenario& scenario, int scatterer_index, double t) {
    check_index(scatterer_index);
    if (scatterer_index < 4) {
        const auto body = scenario.geometry.fixed_scatterers();
        return body_rotation(scenario.motion, t) * body[scatterer_index];
    }
    return equivalent_edge_scatterers(scenario, t)[scatterer_index - 4];
}

Vec3 scatterer_velocity(const TargetScenario& scenario, int scatterer_index, double t) {
    check_index(scatterer_index);
    if (scatterer_index < 4) {
        const auto body = scenario.geometry.fixed_scatterers();
        return body_rotation_rate(scenario.motion, t) * body[scatterer_index];
    }
    const EdgeState e = edge_state(scenario, t);
    const double sign = scatterer_index == 4 ? 1.0 : -1.0;
    return e.center_rate + sign * scenario.geometry.base_radius * e.dir_rate;
}

double range_at(const TargetScenario& scenario, int scatterer_index, double t) {
    return scenario.standoff_range -
           scenario.radar_los.dot(scatterer_position(scenario, scatterer_index, t));
}

std::vector<double> range_history(const TargetScenario& scenario, int scatterer_index,
                                  const std::vector<double>& times) {
    std::vector<double> r(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) r[i] = range_at(scenario, scatterer_index, times[i]);
    return r;
}

double instantaneous_doppler(const TargetScenario& scenario, int scatterer_index, double t) {
    const Vec3 v = scatterer_velocity(scenario, scatterer_index, t);
    // dR/dt = -los.v, so f_d = (2/lambda) los.v
    return 2.0 / scenario.radar.wavelength() * scenario.radar_los.dot(v);
}

double alias_frequency(double f, double period) {
    double r = std::fmod(f + 0.5 * period, period);
    if (r < 0.0) r += period;
    return r - 0.5 * period;
}

std::vector<double> slow_times(double prf, std::size_t count, double start_time) {
    require(prf > 0.0, "prf must be positive");
    std::vector<double> t(count);
    for (std::size_t m = 0; m < count; ++m) t[m] = start_time + static_cast<double>(m) / prf;
    return t;
}

ComplexSeries synthesize_azimuth_signal(const std::vector<LfmComponent>& components,
                                        const std::vector<double>& times) {
    require(!times.empty(), "time grid must not be empty");
    ComplexSeries out;
    out.start_time = times.front();
    out.sample_rate = times.size() > 1 ? 1.0 / (times[1] - times[0]) : 1.0;
    out.samples.assign(times.size(), cdouble(0.0));
    for (const auto& c : components) {
        for (std::size_t m = 0; m < times.size(); ++m) {
            const double t = times[m];
            const double phase = 2.0 * kPi * c.center_frequency * t + kPi * c.chirp_rate * t * t;
            out.samples[m] += c.amplitude * std::polar(1.0, phase);
        }
    }
    return out;
}

std::array<int, kScattererCount> scatterer_cells(const TargetScenario& scenario,
                                                 const std::vector<double>& times) {
    require(!times.empty(), "time grid must not be empty");
    const double width = scenario.radar.range_resolution();
    std::array<int, kScattererCount> cells{};
    for (int n = 0; n < kScattererCount; ++n) {
        double acc = 0.0;
        for (double t : times) acc += range_at(scenario, n, t) - scenario.standoff_range;
        const double mean = acc / static_cast<double>(times.size());
        cells[n] = static_cast<int>(std::lround(mean / width));
    }
    return cells;
}

std::map<int, std::vector<int>> range_cells(const TargetScenario& scenario,
                                            const std::vector<double>& times) {
    std::map<int, std::vector<int>> cells;
    const auto assignment = scatterer_cells(scenario, times);
    for (int n = 0; n < kScattererCount; ++n) cells[assignment[n]].push_back(n);
    return cells;
}

ComplexSeries synthesize_scatterers_echo(const TargetScenario& scenario,
                                         const std::vector<int>& scatterers,
                                         const std::vector<double>& times) {
    require(!times.empty(), "time grid must not be empty");
    ComplexSeries out;
    out.start_time = times.front();
    out.sample_rate = scenario.radar.prf;
    out.samples.assign(times.size(), cdouble(0.0));
    const double k = 4.0 * kPi / scenario.radar.wavelength();
    for (int n : scatterers) {
        check_index(n);
        for (std::size_t m = 0; m < times.size(); ++m) {
            // Keep only the part of R that varies; the standoff phase is a constant
            // rotation folded in separately to avoid large-argument trig.
            const double dr = range_at(scenario, n, times[m]) - scenario.standoff_range;
            out.samples[m] += scenario.amplitudes[n] * std::polar(1.0, -k * dr);
        }
    }
    const double r0 = std::fmod(scenario.standoff_range, scenario.radar.wavelength() / 2.0);
    const cdouble standoff_phase = std::polar(1.0, -k * r0);
    for (auto& s : out.samples) s *= standoff_phase;
    return out;
}

ComplexSeries synthesize_cell_echo(const TargetScenario& scenario, int range_cell,
                                   const std::vector<double>& times) {
    const auto cells = range_cells(scenario, times);
    const auto it = cells.find(range_cell);
    return synthesize_scatterers_echo(scenario, it == cells.end() ? std::vector<int>{} : it->second,
                                      times);
}

ComplexSeries add_noise(const ComplexSeries& signal, double snr_db, std::uint64_t seed) {
    if (std::isinf(snr_db) && snr_db > 0.0) return signal;
    const double p = signal.power();
    if (!(p > 0.0)) throw PreconditionError("cannot set an SNR on a zero-power signal");
    const double noise_power = p * std::pow(10.0, -snr_db / 10.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(noise_power / 2.0));
    ComplexSeries out = signal;
    for (auto& s : out.samples) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        s += cdouble(re, im);
    }
    return out;
}

int default_multiplicity(MotionKind kind) {
    return kind == MotionKind::Spin ? 36 : 66;
}

std::vector<MicroMotion> motion_grid(MotionKind kind, int multiplicity, const MicroMotion& angles) {
    require(multiplicity >= 1, "multiplicity must be at least 1");
    // Grids held in tenths of a hertz so that 3.0:0.1:4.0 etc. are exact.
    auto range = [](int first, int step, int last) {
        std::vector<double> v;
        for (int x = first; x <= last; x += step) v.push_back(x / 10.0);
        return v;
    };
    std::vector<double> spin, coning{0.0}, nutation{0.0};
    switch (kind) {
        case MotionKind::Spin:
            spin = range(30, 1, 40);
            break;
        case MotionKind::Precession:
            spin = range(15, 2, 25);
            coning = range(15, 2, 23);
            break;
        case MotionKind::Nutation:
            spin = range(16, 2, 20);
            coning = range(16, 2, 20);
            nutation = range(8, 2, 12);
            break;
    }
    std::vector<MicroMotion> grid;
    grid.reserve(spin.size() * coning.size() * nutation.size() * multiplicity);
    for (double fs : spin)
        for (double fc : coning)
            for (double fn : nutation)
                for (int k = 0; k < multiplicity; ++k) {
                    MicroMotion m = angles;
                    m.kind = kind;
                    m.spin_frequency = fs;
                    m.coning_frequency = fc;
                    m.nutation_frequency = fn;
                    m.spin_phase = 2.0 * kPi * k / multiplicity;
                    grid.push_back(m);
                }
    return grid;
}

}  // namespace ridlab::sigmodel
