#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace ridlab::sigmodel {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using cdouble = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

/// Noise-free sentinel for add_noise.
inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

struct RadarConstants {
    double carrier_frequency = 10e9;
    double bandwidth = 400e6;
    double prf = 1000.0;

    double wavelength() const { return kSpeedOfLight / carrier_frequency; }
    double range_resolution() const { return kSpeedOfLight / (2.0 * bandwidth); }
    void validate() const;
};

/// Cone in its body frame: symmetry axis +z, origin at the solid-cone centroid,
/// so the apex sits at z = 3h/4 and the base plane at z = -h/4.
struct ConeGeometry {
    double height = 1.95;
    double base_radius = 0.516;
    // Height of the S1..S3 ring above the base, as a fraction of the height.
    double ring_height_fraction = 30.0 / 65.0;

    double apex_z() const { return 0.75 * height; }
    double base_z() const { return -0.25 * height; }
    /// Cone radius at body-frame height z (0 at the apex).
    double radius_at(double z) const;
    /// S1, S2, S3 (ring at 0, 120, 240 degrees) and P1 (apex).
    std::array<Vec3, 4> fixed_scatterers() const;
    /// Distance of a body-frame point from the cone surface (lateral face or base disc).
    double surface_distance(const Vec3& p) const;
    void validate() const;
};

enum class MotionKind { Spin, Precession, Nutation };

std::string to_string(MotionKind kind);
MotionKind motion_kind_from_string(const std::string& name);

struct MicroMotion {
    MotionKind kind = MotionKind::Spin;
    double spin_frequency = 3.0;
    double coning_frequency = 0.0;
    double nutation_frequency = 0.0;
    double precession_angle = 10.0 * kPi / 180.0;
    double nutation_amplitude = 3.0 * kPi / 180.0;
    double spin_phase = 0.0;
    double coning_phase = 0.0;
    double nutation_phase = 0.0;

    void validate() const;
};

inline constexpr int kScattererCount = 6;

/// Scatterer indices: 0..2 = S1..S3 (ring), 3 = P1 (apex), 4 = P2 (near base edge),
/// 5 = P3 (far base edge).
enum class ScattererRole { Ring, Apex, NearEdge, FarEdge };
ScattererRole scatterer_role(int index);
std::string scatterer_name(int index);

struct TargetScenario {
    ConeGeometry geometry;
    MicroMotion motion;
    Vec3 radar_los = Vec3(std::cos(kPi / 4), 0.0, std::sin(kPi / 4));
    double standoff_range = 1000.0;
    RadarConstants radar;
    std::array<cdouble, kScattererCount> amplitudes{cdouble(1.0), cdouble(0.8), cdouble(0.6),
                                                    cdouble(1.0), cdouble(0.7), cdouble(0.7)};

    void validate() const;
};

/// Line of sight (target to radar) for an elevation above the xy plane.
Vec3 los_from_elevation(double elevation);

struct ComplexSeries {
    std::vector<cdouble> samples;
    double sample_rate = 1.0;
    double start_time = 0.0;

    std::size_t size() const { return samples.size(); }
    double time(std::size_t m) const { return start_time + static_cast<double>(m) / sample_rate; }
    double power() const;
    void validate() const;
};

/// Rodrigues rotation. Throws PreconditionError unless |axis| = 1 within 1e-9.
Mat3 rotation_about_axis(const Vec3& axis, double angle);

/// R_total(t) = R_coning(t) * R_nutation(t) * R_spin(t).
Mat3 body_rotation(const MicroMotion& motion, double t);
Mat3 body_rotation_rate(const MicroMotion& motion, double t);

/// Points where the base circle meets the plane spanned by `axis` and `los`,
/// nearest to the radar first. Throws DegeneracyError when axis is parallel to los.
std::array<Vec3, 2> edge_points(const Vec3& axis, const Vec3& base_center, double radius,
                                const Vec3& los);

std::array<Vec3, 2> equivalent_edge_scatterers(const TargetScenario& scenario, double t);
Vec3 scatterer_position(const TargetScenario& scenario, int scatterer_index, double t);
Vec3 scatterer_velocity(const TargetScenario& scenario, int scatterer_index, double t);

double range_at(const TargetScenario& scenario, int scatterer_index, double t);
std::vector<double> range_history(const TargetScenario& scenario, int scatterer_index,
                                  const std::vector<double>& times);

/// f_d = -(2/lambda) dR/dt; positive for an approaching scatterer.
double instantaneous_doppler(const TargetScenario& scenario, int scatterer_index, double t);

/// Folds a frequency into [-period/2, period/2).
double alias_frequency(double f, double period);

std::vector<double> slow_times(double prf, std::size_t count, double start_time = 0.0);

struct LfmComponent {
    cdouble amplitude;
    double center_frequency;
    double chirp_rate;
};

/// s(t) = sum_n a_n exp(j 2 pi f_n t + j pi k_n t^2). Empty list gives a zero series.
ComplexSeries synthesize_azimuth_signal(const std::vector<LfmComponent>& components,
                                        const std::vector<double>& times);

/// Range cell index of each scatterer from its time-averaged range,
/// round((mean R - standoff) / (c / 2B)).
std::array<int, kScattererCount> scatterer_cells(const TargetScenario& scenario,
                                                 const std::vector<double>& times);
std::map<int, std::vector<int>> range_cells(const TargetScenario& scenario,
                                            const std::vector<double>& times);

/// Sum over scatterers in `range_cell` of a_n exp(-j 4 pi R_n(t) / lambda).
ComplexSeries synthesize_cell_echo(const TargetScenario& scenario, int range_cell,
                                   const std::vector<double>& times);
ComplexSeries synthesize_scatterers_echo(const TargetScenario& scenario,
                                         const std::vector<int>& scatterers,
                                         const std::vector<double>& times);

/// Adds circular complex white Gaussian noise at the requested SNR.
/// snr_db = kNoNoise returns the input unchanged.
ComplexSeries add_noise(const ComplexSeries& signal, double snr_db, std::uint64_t seed);

/// Default dataset multiplicities (spin 36, precession 66, nutation 66).
int default_multiplicity(MotionKind kind);

/// Frequency grid for `kind`, crossed with `multiplicity`
/// evenly spaced initial spin phases (2 pi k / multiplicity).
std::vector<MicroMotion> motion_grid(MotionKind kind, int multiplicity = 1,
                                     const MicroMotion& angles = MicroMotion{});

}  // namespace ridlab::sigmodel
