#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "monoped/mass_model.hpp"

using namespace monoped;

namespace {

MotorSpec test_motor() {
  MotorSpec m;
  m.name = "bench-motor";
  m.mass_kg = 0.650;
  m.outer_diameter_mm = 88.0;
  m.stator_inner_diameter_mm = 60.0;
  m.axial_length_mm = 25.0;
  m.peak_torque_Nm = 2.5;
  return m;
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-30, std::abs(want));
}

}  // namespace

TEST_CASE("bearing regression coefficients match a from-scratch log-log least squares") {
  const MaterialTable materials;
  const auto& rows = materials.bearing_catalog;
  const double n = static_cast<double>(rows.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : rows) {
    const double x = std::log(r[0]);
    const double y = std::log(r[1]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double a = std::exp((sy - b * sx) / n);
  CHECK(std::abs(b - materials.bearing_mass_exponent) < 1e-9);
  CHECK(rel_err(a, materials.bearing_mass_coeff) < 1e-9);
}

TEST_CASE("bearing mass follows the power law and rejects non-positive bores") {
  const MaterialTable materials;
  CHECK(rel_err(bearing_mass_kg(6.0, materials), 0.0018762823514470021) < 1e-12);
  CHECK(rel_err(bearing_mass_kg(13.5, materials), 0.0067847113980741306) < 1e-12);
  CHECK_THROWS_AS(bearing_mass_kg(0.0, materials), std::invalid_argument);
  CHECK_THROWS_AS(bearing_mass_kg(-5.0, materials), std::invalid_argument);
}

TEST_CASE("nominal 6:1 train mass breakdown matches the frozen spreadsheet values") {
  const MotorSpec motor = test_motor();
  const MaterialTable materials;
  const ActuatorGeometry geometry;
  GearboxBounds bounds;

  const MassBreakdown b = actuator_mass({18, 36, 90, 0.5, 3}, GearboxKind::ISSPG,
                                        motor, materials, geometry, bounds);
  CHECK(b.motor_kg == 0.650);
  CHECK(rel_err(b.sun_gear_kg, 0.0024969771109813379) < 1e-12);
  CHECK(rel_err(b.planet_gears_kg, 0.029963725331776055) < 1e-12);
  CHECK(rel_err(b.ring_gear_kg, 0.062424427774533435) < 1e-12);
  CHECK(rel_err(b.carrier_kg, 0.0097037513884081529) < 1e-12);
  CHECK(rel_err(b.casing_kg, 0.022902210444669592) < 1e-12);
  CHECK(rel_err(b.backplate_kg, 0.030536280592892793) < 1e-12);
  CHECK(rel_err(b.coupling_kg, 0.012723450247038663) < 1e-12);
  CHECK(rel_err(b.bearings_kg, 0.0086609937495211332) < 1e-12);
  CHECK(rel_err(b.total_kg, 0.82941181663982111) < 1e-12);

  const MassBreakdown e = actuator_mass({18, 36, 90, 0.5, 3}, GearboxKind::ESSPG,
                                        motor, materials, geometry, bounds);
  CHECK(rel_err(e.casing_kg, 0.033589908652182067) < 1e-12);
  CHECK(rel_err(e.backplate_kg, 0.065686932475378268) < 1e-12);
  CHECK(rel_err(e.total_kg, 0.87525016672981903) < 1e-12);

  CHECK(rel_err(actuator_mass({30, 30, 90, 0.5, 5}, GearboxKind::ISSPG, motor,
                              materials, geometry, bounds)
                    .total_kg,
                0.84345162454586842) < 1e-12);
  CHECK(rel_err(actuator_mass({22, 65, 152, 0.5, 3}, GearboxKind::ESSPG, motor,
                              materials, geometry, bounds)
                    .total_kg,
                1.0804703269979998) < 1e-12);
}

TEST_CASE("breakdown total equals the component sum and gear terms ignore mounting kind") {
  const MotorSpec motor = test_motor();
  const MaterialTable materials;
  const ActuatorGeometry geometry;
  GearboxBounds bounds;

  for (int ns = 18; ns <= 34; ns += 4) {
    for (int np_teeth = 18; np_teeth <= 42; np_teeth += 6) {
      const GearTrain t{ns, np_teeth, ns + 2 * np_teeth, 0.5, 2};
      if (!check_bounds(t, GearboxKind::ISSPG, motor, bounds)) continue;

      const MassBreakdown i =
          actuator_mass(t, GearboxKind::ISSPG, motor, materials, geometry, bounds);
      const MassBreakdown e =
          actuator_mass(t, GearboxKind::ESSPG, motor, materials, geometry, bounds);

      const double sum = i.motor_kg + i.sun_gear_kg + i.planet_gears_kg +
                         i.ring_gear_kg + i.carrier_kg + i.casing_kg +
                         i.backplate_kg + i.coupling_kg + i.bearings_kg;
      CHECK(std::abs(i.total_kg - sum) < 1e-9);

      // Gears, carrier, coupling, bearings depend only on the train.
      CHECK(i.sun_gear_kg == e.sun_gear_kg);
      CHECK(i.planet_gears_kg == e.planet_gears_kg);
      CHECK(i.ring_gear_kg == e.ring_gear_kg);
      CHECK(i.carrier_kg == e.carrier_kg);
      CHECK(i.coupling_kg == e.coupling_kg);
      CHECK(i.bearings_kg == e.bearings_kg);
      // The in-stator package always beats the wrap-around package.
      CHECK(i.total_kg < e.total_kg);
    }
  }
}

TEST_CASE("actuator mass grows strictly with module and with ring size") {
  const MotorSpec motor = test_motor();
  const MaterialTable materials;
  const ActuatorGeometry geometry;
  GearboxBounds bounds;

  // Same teeth, increasing module (train must stay inside the ESSPG housing).
  double prev = -1.0;
  for (double m : {0.5, 0.6, 0.8}) {
    const double total = actuator_mass({18, 18, 54, m, 2}, GearboxKind::ESSPG,
                                       motor, materials, geometry, bounds)
                             .total_kg;
    CHECK(total > prev);
    prev = total;
  }

  // Same module and planet count, increasing planet teeth hence ring size.
  prev = -1.0;
  for (int np_teeth = 18; np_teeth <= 42; np_teeth += 4) {
    const double total =
        actuator_mass({18, np_teeth, 18 + 2 * np_teeth, 0.5, 2}, GearboxKind::ESSPG,
                      motor, materials, geometry, bounds)
            .total_kg;
    CHECK(total > prev);
    prev = total;
  }
}

TEST_CASE("actuator mass refuses infeasible trains") {
  const MotorSpec motor = test_motor();
  const MaterialTable materials;
  const ActuatorGeometry geometry;
  GearboxBounds bounds;

  // Geometry broken.
  CHECK_THROWS_WITH_AS(actuator_mass({18, 36, 91, 0.5, 3}, GearboxKind::ISSPG, motor,
                                     materials, geometry, bounds),
                       "infeasible gear train", std::invalid_argument);
  // Ring too large for the stator bore.
  CHECK_THROWS_WITH_AS(actuator_mass({22, 65, 152, 0.5, 3}, GearboxKind::ISSPG, motor,
                                     materials, geometry, bounds),
                       "infeasible gear train", std::invalid_argument);
  // Planets collide.
  CHECK_THROWS_WITH_AS(actuator_mass({30, 30, 90, 0.5, 6}, GearboxKind::ISSPG, motor,
                                     materials, geometry, bounds),
                       "infeasible gear train", std::invalid_argument);
}

TEST_CASE("make_actuator scales motor torque by the reduction and tracks total mass") {
  const MotorSpec motor = test_motor();
  const MaterialTable materials;
  const ActuatorGeometry geometry;
  GearboxBounds bounds;

  const ActuatorDesign six = make_actuator({18, 36, 90, 0.5, 3}, GearboxKind::ISSPG,
                                           motor, materials, geometry, bounds);
  CHECK(six.ratio == 6.0);
  CHECK(six.peak_torque_Nm == 15.0);
  CHECK(six.mass_kg > motor.mass_kg);
  CHECK(six.ratio == gear_ratio(six.train));

  const ActuatorDesign four = make_actuator({30, 30, 90, 0.5, 5}, GearboxKind::ISSPG,
                                            motor, materials, geometry, bounds);
  CHECK(four.ratio == 4.0);
  CHECK(four.peak_torque_Nm == 10.0);
  CHECK(four.mass_kg > motor.mass_kg);
}

TEST_CASE("link mass matches frozen values and is affine in length") {
  const MaterialTable materials;
  const LinkMassParams params;

  CHECK(rel_err(link_mass_kg(0.4, params, materials), 0.55120000000000002) < 1e-12);
  CHECK(rel_err(link_mass_kg(0.3, params, materials), 0.43840000000000001) < 1e-12);
  CHECK(rel_err(link_mass_kg(0.5, params, materials), 0.66400000000000003) < 1e-12);

  // Affine: second differences vanish across the admissible range.
  for (double l = 0.1; l <= 0.8; l += 0.07) {
    const double d2 = link_mass_kg(l + 0.1, params, materials) -
                      2.0 * link_mass_kg(l + 0.05, params, materials) +
                      link_mass_kg(l, params, materials);
    CHECK(std::abs(d2) < 1e-12);
  }

  CHECK_THROWS_AS(link_mass_kg(0.04, params, materials), std::invalid_argument);
  CHECK_THROWS_AS(link_mass_kg(1.01, params, materials), std::invalid_argument);
  CHECK_NOTHROW(link_mass_kg(0.05, params, materials));
  CHECK_NOTHROW(link_mass_kg(1.0, params, materials));
}

TEST_CASE("derived dimensions expose pitch diameters and housing sizes") {
  const MotorSpec motor = test_motor();
  const ActuatorGeometry geometry;
  const ActuatorDims dims =
      derive_actuator_dims({18, 36, 90, 0.5, 3}, GearboxKind::ISSPG, motor, geometry);
  CHECK(dims.sun_pitch_mm == 9.0);
  CHECK(dims.planet_pitch_mm == 18.0);
  CHECK(dims.ring_pitch_mm == 45.0);
  CHECK(dims.face_width_mm == 5.0);
  CHECK(dims.casing_diameter_mm == 60.0);
  CHECK(dims.casing_length_mm == 15.0);
  CHECK(dims.carrier_outer_mm == 37.0);
  CHECK(dims.sun_bearing_bore_mm == 6.0);    // floor binds below 10mm pitch
  CHECK(dims.output_bearing_bore_mm == 13.5);

  const ActuatorDims edims =
      derive_actuator_dims({18, 36, 90, 0.5, 3}, GearboxKind::ESSPG, motor, geometry);
  CHECK(edims.casing_diameter_mm == 88.0);
  CHECK(edims.sun_pitch_mm == dims.sun_pitch_mm);
}

TEST_CASE("config validation rejects broken tables") {
  MaterialTable m;
  m.steel_kg_per_m3 = 0.0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);

  MaterialTable m2;
  m2.bearing_catalog = {{10.0, 0.005}};
  CHECK_THROWS_AS(m2.validate(), std::invalid_argument);

  ActuatorGeometry g;
  g.casing_wall_mm = -1.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);

  LinkMassParams p;
  p.plate_width_mm = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  CHECK_NOTHROW(MaterialTable{}.validate());
  CHECK_NOTHROW(ActuatorGeometry{}.validate());
  CHECK_NOTHROW(LinkMassParams{}.validate());
}
