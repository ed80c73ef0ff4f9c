#include "monoped/gearbox.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace monoped {

namespace {

constexpr std::int64_t kMicro = 1'000'000;

std::int64_t to_micro(double x) {
  return std::llround(x * static_cast<double>(kMicro));
}

}  // namespace

const char* to_string(GearboxKind kind) {
  return kind == GearboxKind::ISSPG ? "ISSPG" : "ESSPG";
}

GearboxKind gearbox_kind_from_string(std::string_view name) {
  if (name == "ISSPG" || name == "isspg") return GearboxKind::ISSPG;
  if (name == "ESSPG" || name == "esspg") return GearboxKind::ESSPG;
  throw std::invalid_argument("unknown gearbox kind: " + std::string(name));
}

void MotorSpec::validate() const {
  if (mass_kg <= 0.0) throw std::invalid_argument("motor mass_kg must be > 0");
  if (outer_diameter_mm <= 0.0)
    throw std::invalid_argument("motor outer_diameter_mm must be > 0");
  if (stator_inner_diameter_mm <= 0.0 ||
      stator_inner_diameter_mm >= outer_diameter_mm)
    throw std::invalid_argument(
        "motor stator_inner_diameter_mm must be in (0, outer_diameter_mm)");
  if (axial_length_mm <= 0.0)
    throw std::invalid_argument("motor axial_length_mm must be > 0");
  if (peak_torque_Nm <= 0.0)
    throw std::invalid_argument("motor peak_torque_Nm must be > 0");
  if (rotor_inertia_kgm2 < 0.0)
    throw std::invalid_argument("motor rotor_inertia_kgm2 must be >= 0");
}

RatioWindow RatioWindow::from_bounds(double lo, double hi, bool closed_hi) {
  if (!(lo < hi)) throw std::invalid_argument("ratio window requires lo < hi");
  return RatioWindow{to_micro(lo), to_micro(hi), closed_hi};
}

bool RatioWindow::contains(std::int64_t num, std::int64_t den) const {
  // lo <= num/den (< or <=) hi, cross-multiplied; den > 0 for real trains.
  if (den <= 0) return false;
  const std::int64_t scaled = num * kMicro;
  if (scaled < lo_micro * den) return false;
  const std::int64_t hi_side = hi_micro * den;
  return closed_hi ? scaled <= hi_side : scaled < hi_side;
}

bool RatioWindow::contains_ratio(double ratio) const {
  if (ratio < lo()) return false;
  return closed_hi ? ratio <= hi() : ratio < hi();
}

void GearboxBounds::validate() const {
  if (!(ratio_min < ratio_max))
    throw std::invalid_argument("gearbox bounds: ratio_min must be < ratio_max");
  if (module_set_mm.empty())
    throw std::invalid_argument("gearbox bounds: module_set_mm must be non-empty");
  for (double m : module_set_mm)
    if (m <= 0.0)
      throw std::invalid_argument("gearbox bounds: modules must be > 0");
  if (!(module_min_mm > 0.0 && module_min_mm <= module_max_mm))
    throw std::invalid_argument("gearbox bounds: need 0 < module_min_mm <= module_max_mm");
  if (min_teeth < 1)
    throw std::invalid_argument("gearbox bounds: min_teeth must be >= 1");
  if (planet_clearance_mm < 0.0)
    throw std::invalid_argument("gearbox bounds: planet_clearance_mm must be >= 0");
  if (housing_clearance_mm < 0.0)
    throw std::invalid_argument("gearbox bounds: housing_clearance_mm must be >= 0");
  if (planet_count_min < 2 || planet_count_min > planet_count_max)
    throw std::invalid_argument(
        "gearbox bounds: need 2 <= planet_count_min <= planet_count_max");
}

const char* ConstraintReport::first_failure() const {
  if (!ratio_ok) return "ratio";
  if (!geometry_ok) return "geometry";
  if (!meshing_ok) return "meshing";
  if (!interference_ok) return "interference";
  if (!bounds_ok) return "bounds";
  return nullptr;
}

double gear_ratio(const GearTrain& train) {
  return static_cast<double>(train.sun_teeth + train.ring_teeth) /
         static_cast<double>(train.sun_teeth);
}

std::pair<std::int64_t, std::int64_t> gear_ratio_rational(const GearTrain& train) {
  return {static_cast<std::int64_t>(train.sun_teeth) + train.ring_teeth,
          static_cast<std::int64_t>(train.sun_teeth)};
}

double max_ring_pitch_mm(GearboxKind kind, const MotorSpec& motor,
                         const GearboxBounds& bounds) {
  const double envelope = kind == GearboxKind::ESSPG
                              ? motor.outer_diameter_mm
                              : motor.stator_inner_diameter_mm;
  return envelope - bounds.housing_clearance_mm;
}

bool check_geometry(const GearTrain& train, int* residual) {
  const int r = train.ring_teeth - train.sun_teeth - 2 * train.planet_teeth;
  if (residual) *residual = r;
  return r == 0;
}

bool check_meshing(const GearTrain& train, int* remainder) {
  if (train.planet_count < 1) {
    if (remainder) *remainder = -1;
    return false;
  }
  const int rem = (train.sun_teeth + train.ring_teeth) % train.planet_count;
  if (remainder) *remainder = rem;
  return rem == 0;
}

double interference_clearance_mm(const GearTrain& train) {
  const double m = train.module_mm;
  const double span = static_cast<double>(train.sun_teeth + train.planet_teeth);
  // sin(pi/n) is rational only for n in {2, 6}; using the exact values keeps
  // clearance-at-the-limit verdicts identical to real arithmetic there. The
  // remaining counts have irrational sines, so ties cannot occur.
  double s;
  switch (train.planet_count) {
    case 2: s = 1.0; break;
    case 6: s = 0.5; break;
    default: s = std::sin(std::numbers::pi / train.planet_count); break;
  }
  return 2.0 * m * span * s - 2.0 * m * train.planet_teeth;
}

bool check_interference(const GearTrain& train, const GearboxBounds& bounds) {
  if (train.planet_count < 1) return false;
  return interference_clearance_mm(train) >= bounds.planet_clearance_mm;
}

bool check_bounds(const GearTrain& train, GearboxKind kind, const MotorSpec& motor,
                  const GearboxBounds& bounds) {
  if (train.module_mm < bounds.module_min_mm || train.module_mm > bounds.module_max_mm)
    return false;
  if (train.sun_teeth < bounds.min_teeth) return false;
  if (train.planet_teeth < bounds.min_teeth) return false;
  if (train.ring_teeth < bounds.min_teeth) return false;
  if (train.planet_count < bounds.planet_count_min ||
      train.planet_count > bounds.planet_count_max)
    return false;
  // 1e-9 mm slack keeps exact decimal products (e.g. 0.6*130 == 78) on the
  // feasible side of the housing limit despite binary rounding.
  const double ring_pitch = train.module_mm * train.ring_teeth;
  return ring_pitch <= max_ring_pitch_mm(kind, motor, bounds) + 1e-9;
}

ConstraintReport validate(const GearTrain& train, GearboxKind kind,
                          const MotorSpec& motor, const GearboxBounds& bounds) {
  ConstraintReport report;
  report.ratio = gear_ratio(train);
  const auto [num, den] = gear_ratio_rational(train);
  report.ratio_ok = bounds.ratio_window().contains(num, den);
  report.geometry_ok = check_geometry(train, &report.geometry_residual);
  report.meshing_ok = check_meshing(train, &report.meshing_remainder);
  report.clearance_mm = interference_clearance_mm(train);
  report.interference_ok = check_interference(train, bounds);
  report.ring_pitch_mm = train.module_mm * train.ring_teeth;
  report.ring_pitch_limit_mm = max_ring_pitch_mm(kind, motor, bounds);
  report.bounds_ok = check_bounds(train, kind, motor, bounds);
  return report;
}

}  // namespace monoped
