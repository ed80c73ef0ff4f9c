#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "monoped/codesign.hpp"
#include "monoped/stage1.hpp"

using namespace monoped;

namespace {

MotorSpec bench_motor() {
  MotorSpec m;
  m.name = "bench-motor";
  m.mass_kg = 0.650;
  m.outer_diameter_mm = 88.0;
  m.stator_inner_diameter_mm = 60.0;
  m.axial_length_mm = 25.0;
  m.peak_torque_Nm = 2.5;
  return m;
}

// One shared catalog for the whole binary; building it is the expensive part.
const ActuatorCatalog& shared_catalog() {
  static const ActuatorCatalog catalog = [] {
    Stage1Config c;
    c.motor = bench_motor();
    return build_catalog(c);
  }();
  return catalog;
}

DesignVector nominal_design() { return DesignVector{}; }

bool same_design(const DesignVector& a, const DesignVector& b) {
  return a.to_array() == b.to_array();
}

}  // namespace

// ---------------------------------------------------------------------------
// Decoding a design point into a simulated robot
// ---------------------------------------------------------------------------

TEST_CASE("decoding the nominal point assembles the reference robot") {
  const ActuatorCatalog& cat = shared_catalog();
  const DecodeConfig dec;

  const auto d = decode_design(nominal_design(), cat, dec);
  REQUIRE(d.has_value());

  // Both ratios sit in the [6.0, 6.1) bin, whose winner is the in-stator
  // (18, 36, 90) train at exactly 6:1 and 0.819424 kg.
  CHECK(d->hip.train.sun_teeth == 18);
  CHECK(d->hip.train.planet_teeth == 36);
  CHECK(d->hip.train.ring_teeth == 90);
  CHECK(d->hip.kind == GearboxKind::ISSPG);
  CHECK(d->hip.ratio == 6.0);
  CHECK(d->knee.ratio == 6.0);

  // Chassis plus two identical actuators.
  CHECK(d->model.base_mass_kg ==
        doctest::Approx(dec.base_mass_kg + 2.0 * d->hip.mass_kg).epsilon(1e-15));
  CHECK(d->model.base_mass_kg == doctest::Approx(3.138847816).epsilon(1e-9));

  // Link masses come from the length model, torque limits from the catalog.
  CHECK(d->model.thigh_mass_kg == link_mass_kg(0.4, dec.link, dec.materials));
  CHECK(d->model.shank_mass_kg == d->model.thigh_mass_kg);
  CHECK(d->model.thigh_mass_kg == doctest::Approx(0.5512).epsilon(1e-12));
  CHECK(d->model.thigh_length_m == 0.4);
  CHECK(d->model.shank_length_m == 0.4);
  CHECK(d->model.hip_peak_torque_Nm == 15.0);
  CHECK(d->model.knee_peak_torque_Nm == 15.0);
  CHECK(d->model.gravity_mps2 == dec.gravity_mps2);

  // Rest length is a fixed fraction of full reach rather than a free knob.
  CHECK(d->controller.rest_length_m == doctest::Approx(0.9 * 0.8).epsilon(1e-15));
  CHECK(d->controller.rest_angle_rad == 0.0);
  CHECK(d->controller.spring_stiffness_N_per_m == 50.0);
  CHECK(d->controller.spring_damping_Ns_per_m == 2.5);
  CHECK(d->controller.torsion_stiffness_Nm_per_rad == 10.0);

  // The bench motor has no rotor-inertia entry, so nothing reflects.
  CHECK(d->model.hip_reflected_inertia_kgm2 == 0.0);
  CHECK(d->model.knee_reflected_inertia_kgm2 == 0.0);
}

TEST_CASE("asymmetric ratios pick distinct actuators per joint") {
  const ActuatorCatalog& cat = shared_catalog();
  const DecodeConfig dec;

  DesignVector y = nominal_design();
  y.knee_gear_ratio = 4.05;  // [4.0, 4.1) bin: the lightest train in the catalog
  const auto d = decode_design(y, cat, dec);
  REQUIRE(d.has_value());

  CHECK(d->knee.train.sun_teeth == 18);
  CHECK(d->knee.train.planet_teeth == 18);
  CHECK(d->knee.train.ring_teeth == 54);
  CHECK(d->knee.ratio == 4.0);
  CHECK(d->knee.mass_kg == doctest::Approx(0.756960).epsilon(1e-6));
  CHECK(d->model.knee_peak_torque_Nm == 10.0);
  CHECK(d->hip.ratio == 6.0);
  CHECK(d->model.hip_peak_torque_Nm == 15.0);
  CHECK(d->model.base_mass_kg ==
        doctest::Approx(1.5 + d->hip.mass_kg + d->knee.mass_kg).epsilon(1e-15));
}

TEST_CASE("rotor inertia reflects through the realized ratio squared") {
  ActuatorCatalog cat = shared_catalog();
  cat.motor.rotor_inertia_kgm2 = 1.0e-4;

  const auto d = decode_design(nominal_design(), cat, DecodeConfig{});
  REQUIRE(d.has_value());
  CHECK(d->model.hip_reflected_inertia_kgm2 == doctest::Approx(36.0e-4).epsilon(1e-12));
  CHECK(d->model.knee_reflected_inertia_kgm2 == doctest::Approx(36.0e-4).epsilon(1e-12));
}

TEST_CASE("ratios without a feasible gearbox fail to decode") {
  const ActuatorCatalog& cat = shared_catalog();
  // 174/18 = 9.667 is the largest buildable ratio; the [9.7, 9.8) bin is empty.
  CHECK(cat.lookup(9.65) != nullptr);
  CHECK(cat.lookup(9.75) == nullptr);

  DesignVector y = nominal_design();
  y.knee_gear_ratio = 9.75;
  CHECK_FALSE(decode_design(y, cat, DecodeConfig{}).has_value());
  y.knee_gear_ratio = 6.0;
  y.hip_gear_ratio = 12.0;
  CHECK_FALSE(decode_design(y, cat, DecodeConfig{}).has_value());
}

// ---------------------------------------------------------------------------
// Catalog trends the optimizer trades against
// ---------------------------------------------------------------------------

TEST_CASE("per-bin winners trade mass for torque monotonically in ratio") {
  const ActuatorCatalog& cat = shared_catalog();

  // Ratio and torque capacity rise strictly bin over bin...
  for (int i = 1; i <= 56; ++i) {
    CAPTURE(i);
    CHECK(cat.bins[i].best->ratio > cat.bins[i - 1].best->ratio);
    CHECK(cat.bins[i].best->peak_torque_Nm > cat.bins[i - 1].best->peak_torque_Nm);
  }

  // ...while mass only trends upward: integer-ratio bins admit coarser tooth
  // counts and dip below their left neighbor. 5.9 needs (20, 39, 98) but the
  // exact 6:1 gets away with (18, 36, 90).
  CHECK(cat.bins[0].best->mass_kg == doctest::Approx(0.756960).epsilon(1e-6));
  CHECK(cat.bins[56].best->mass_kg == doctest::Approx(1.064127).epsilon(1e-6));
  CHECK(cat.bins[56].best->mass_kg > cat.bins[0].best->mass_kg);
  CHECK(cat.bins[19].best->mass_kg == doctest::Approx(0.837713).epsilon(1e-6));
  CHECK(cat.bins[20].best->mass_kg == doctest::Approx(0.819424).epsilon(1e-6));
  CHECK(cat.bins[19].best->mass_kg > cat.bins[20].best->mass_kg);  // the dip is real
}

// ---------------------------------------------------------------------------
// Cost function
// ---------------------------------------------------------------------------

TEST_CASE("the nominal design scores its frozen reference cost") {
  const CostBreakdown r =
      evaluate_design(nominal_design(), shared_catalog(), DecodeConfig{}, SimConfig{},
                      CostConfig{});
  CHECK_FALSE(r.penalized);
  CHECK_FALSE(r.decode_failed);
  CHECK(r.reason == TerminationReason::Landed);
  CHECK(r.cost == doctest::Approx(28.034750392).epsilon(1e-9));
  CHECK(r.jump_height_m == doctest::Approx(0.810269296).epsilon(1e-9));
  CHECK(r.positive_work_J == doctest::Approx(14.692601881).epsilon(1e-9));
  CHECK(r.liftoff_speed_mps == doctest::Approx(0.712855354).epsilon(1e-9));
  CHECK(r.liftoff_time_s == doctest::Approx(0.440).epsilon(1e-12));
}

TEST_CASE("cost equals the stated formula on the measured rollout") {
  const ActuatorCatalog& cat = shared_catalog();
  const DecodeConfig dec;
  const SimConfig sim;
  CostConfig cost;

  const auto d = decode_design(nominal_design(), cat, dec);
  REQUIRE(d.has_value());
  const JumpResult r = rollout(d->model, d->controller, sim);
  const CostBreakdown e = evaluate_design(nominal_design(), cat, dec, sim, cost);

  // Same rollout, same arithmetic: the breakdown must match the direct
  // simulation bit for bit.
  CHECK(e.jump_height_m == r.jump_height_m);
  CHECK(e.positive_work_J == r.positive_work_J);
  CHECK(e.cost == cost.lambda_height * cost.height_scale_J * std::exp(-r.jump_height_m) +
                      cost.lambda_energy * r.positive_work_J);

  // The weights enter linearly and independently.
  cost.lambda_height = 3.0;
  cost.lambda_energy = 0.5;
  const CostBreakdown s = evaluate_design(nominal_design(), cat, dec, sim, cost);
  CHECK(s.jump_height_m == e.jump_height_m);
  CHECK(s.cost == 3.0 * cost.height_scale_J * std::exp(-r.jump_height_m) +
                      0.5 * r.positive_work_J);

  cost.lambda_height = 0.0;
  cost.lambda_energy = 1.0;
  CHECK(evaluate_design(nominal_design(), cat, dec, sim, cost).cost == r.positive_work_J);

  cost.lambda_height = 1.0;
  cost.lambda_energy = 0.0;
  CHECK(evaluate_design(nominal_design(), cat, dec, sim, cost).cost ==
        cost.height_scale_J * std::exp(-r.jump_height_m));
}

TEST_CASE("designs that fail to decode earn the flat penalty") {
  DesignVector y = nominal_design();
  y.hip_gear_ratio = 9.75;  // empty bin
  const CostBreakdown r =
      evaluate_design(y, shared_catalog(), DecodeConfig{}, SimConfig{}, CostConfig{});
  CHECK(r.penalized);
  CHECK(r.decode_failed);
  CHECK(r.cost == 300.0);
  CHECK(r.jump_height_m == 0.0);
  CHECK(r.positive_work_J == 0.0);
}

TEST_CASE("designs that collapse instead of jumping earn the flat penalty") {
  DesignVector y = nominal_design();
  y.spring_stiffness_N_per_m = 1.0;  // cannot hold the crouch
  y.spring_damping_Ns_per_m = 10.0;
  y.torsion_stiffness_Nm_per_rad = 1.0;
  const CostBreakdown r =
      evaluate_design(y, shared_catalog(), DecodeConfig{}, SimConfig{}, CostConfig{});
  CHECK(r.reason == TerminationReason::Singularity);
  CHECK(r.penalized);
  CHECK_FALSE(r.decode_failed);
  CHECK(r.cost == 300.0);
  // The rollout still reports how far it got before folding.
  CHECK(r.jump_height_m == doctest::Approx(0.751649).epsilon(1e-5));
}

TEST_CASE("the penalty dominates every feasible nominal-weight cost") {
  // exp(-h) <= 1 bounds the height term by the scale; stance work against a
  // 15 Nm torque budget stays far under the remaining margin.
  const CostConfig cost;
  const CostBreakdown nom = evaluate_design(nominal_design(), shared_catalog(),
                                            DecodeConfig{}, SimConfig{}, CostConfig{});
  CHECK(nom.cost < cost.infeasible_penalty_J);
  CHECK(cost.infeasible_penalty_J == 10.0 * cost.height_scale_J);
}

TEST_CASE("cost configuration rejects degenerate weights") {
  CostConfig c;
  c.lambda_height = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = CostConfig{};
  c.lambda_height = 0.0;
  c.lambda_energy = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = CostConfig{};
  c.height_scale_J = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = CostConfig{};
  c.infeasible_penalty_J = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Study cases
// ---------------------------------------------------------------------------

TEST_CASE("study cases freeze exactly the advertised coordinates") {
  const CaseSpec nominal = CaseSpec::from_name("nominal");
  CHECK(nominal.label == "nominal");
  CHECK(nominal.free_count() == 0);
  for (bool f : nominal.frozen) CHECK(f);

  const CaseSpec alias = CaseSpec::from_name("nominal-eval");
  CHECK(alias.label == "nominal");
  CHECK(alias.free_count() == 0);

  const CaseSpec a = CaseSpec::from_name("a");
  CHECK(a.label == "a");
  CHECK(a.free_count() == 5);
  CHECK(a.frozen[0]);  // thigh length
  CHECK(a.frozen[1]);  // shank length
  for (int i = 2; i < kDesignDim; ++i) CHECK_FALSE(a.frozen[i]);

  const CaseSpec b = CaseSpec::from_name("b");
  CHECK(b.label == "b");
  CHECK(b.free_count() == 5);
  CHECK_FALSE(b.frozen[0]);
  CHECK_FALSE(b.frozen[1]);
  CHECK(b.frozen[2]);  // knee ratio
  CHECK(b.frozen[3]);  // hip ratio
  for (int i = 4; i < kDesignDim; ++i) CHECK_FALSE(b.frozen[i]);

  const CaseSpec c = CaseSpec::from_name("c");
  CHECK(c.label == "c");
  CHECK(c.free_count() == kDesignDim);

  // Frozen values default to the nominal design for every named case.
  CHECK(same_design(a.frozen_values, nominal_design()));
  CHECK(same_design(b.frozen_values, nominal_design()));

  CHECK_THROWS_AS(CaseSpec::from_name("d"), std::invalid_argument);
  CHECK_THROWS_AS(CaseSpec::from_name(""), std::invalid_argument);
}

TEST_CASE("case validation polices frozen values against the bounds") {
  const DesignBounds bounds;
  CaseSpec a = CaseSpec::fixed_links();
  CHECK_NOTHROW(a.validate(bounds));

  a.frozen_values.thigh_length_m = 0.25;  // below the 0.3 floor
  CHECK_THROWS_AS(a.validate(bounds), std::invalid_argument);

  // Only frozen coordinates are policed; free ones belong to the optimizer.
  CaseSpec c = CaseSpec::free_all();
  c.frozen_values.thigh_length_m = 0.25;
  CHECK_NOTHROW(c.validate(bounds));
}

TEST_CASE("design bounds report the first violated coordinate") {
  const DesignBounds bounds;
  CHECK_NOTHROW(bounds.validate());
  CHECK(bounds.contains(nominal_design().to_array()));

  auto y = nominal_design().to_array();
  y[4] = 4.0;  // spring stiffness below its 5 N/m floor
  CHECK_FALSE(bounds.contains(y));
  CHECK(bounds.first_violation(y) == 4);
  y[0] = 0.6;
  CHECK(bounds.first_violation(y) == 0);

  DesignBounds bad;
  bad.lower[2] = bad.upper[2];
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Optimization driver
// ---------------------------------------------------------------------------

TEST_CASE("a fully frozen case evaluates the pinned point once") {
  CodesignConfig cc;
  cc.study = CaseSpec::from_name("nominal");
  const CodesignResult r = optimize_case(cc, shared_catalog());

  CHECK(r.evaluations == 1);
  CHECK(same_design(r.best, nominal_design()));
  CHECK(r.best_eval.cost == doctest::Approx(28.034750392).epsilon(1e-9));
  CHECK(r.saw_feasible);
  CHECK(r.max_feasible_cost == r.best_eval.cost);

  REQUIRE(r.history.size() == 1);
  CHECK(r.history[0].generation == 1);
  CHECK(r.history[0].best_cost == r.best_eval.cost);
  CHECK(r.history[0].median_cost == r.best_eval.cost);
  CHECK(r.history[0].sigma == 0.0);

  // The winner is re-simulated with the trace on for artifact export.
  CHECK(r.best_rollout.reason == TerminationReason::Landed);
  CHECK(r.best_rollout.jump_height_m == r.best_eval.jump_height_m);
  CHECK_FALSE(r.best_rollout.trace.empty());
}

TEST_CASE("short optimization runs improve on the nominal cost") {
  CodesignConfig cc;
  cc.study = CaseSpec::from_name("a");
  cc.population = 8;
  cc.max_generations = 12;
  cc.seed = 3;
  const CodesignResult r = optimize_case(cc, shared_catalog());

  CHECK(r.evaluations == 8 * 12);
  CHECK(r.history.size() == 12);
  CHECK(r.saw_feasible);
  CHECK(r.best_eval.cost < 28.034750392);  // beats the frozen nominal cost
  CHECK(r.best_eval.cost > 0.0);
  CHECK(r.max_feasible_cost < cc.cost.infeasible_penalty_J);

  // Frozen coordinates never move; free ones stay inside the box.
  CHECK(r.best.thigh_length_m == 0.4);
  CHECK(r.best.shank_length_m == 0.4);
  CHECK(cc.bounds.contains(r.best.to_array()));
  CHECK(r.best_eval.reason == TerminationReason::Landed);

  int gen = 1;
  double prev = r.history.front().best_cost;
  for (const GenerationStat& row : r.history) {
    CHECK(row.generation == gen++);
    CHECK(row.best_cost <= prev);          // best-ever is non-increasing
    CHECK(row.median_cost >= row.best_cost);
    CHECK(row.sigma > 0.0);
    prev = row.best_cost;
  }
  CHECK(r.history.back().best_cost == r.best_eval.cost);
  CHECK(r.history.back().best_height_m == r.best_eval.jump_height_m);
  CHECK(r.history.back().best_energy_J == r.best_eval.positive_work_J);
}

TEST_CASE("optimization results do not depend on the worker count") {
  CodesignConfig cc;
  cc.study = CaseSpec::from_name("c");
  cc.population = 8;
  cc.max_generations = 6;
  cc.seed = 11;

  cc.jobs = 1;
  const CodesignResult serial = optimize_case(cc, shared_catalog());
  cc.jobs = 4;
  const CodesignResult parallel = optimize_case(cc, shared_catalog());

  CHECK(same_design(serial.best, parallel.best));
  CHECK(serial.best_eval.cost == parallel.best_eval.cost);
  CHECK(serial.evaluations == parallel.evaluations);
  CHECK(history_to_csv(serial.history) == history_to_csv(parallel.history));
}

TEST_CASE("runs are seed-deterministic and seed-sensitive") {
  CodesignConfig cc;
  cc.study = CaseSpec::from_name("b");
  cc.population = 8;
  cc.max_generations = 6;
  cc.seed = 5;

  const CodesignResult first = optimize_case(cc, shared_catalog());
  const CodesignResult second = optimize_case(cc, shared_catalog());
  CHECK(same_design(first.best, second.best));
  CHECK(history_to_csv(first.history) == history_to_csv(second.history));

  cc.seed = 6;
  const CodesignResult other = optimize_case(cc, shared_catalog());
  CHECK(history_to_csv(other.history) != history_to_csv(first.history));
}

TEST_CASE("optimizer configuration is validated up front") {
  const ActuatorCatalog& cat = shared_catalog();
  CodesignConfig cc;
  cc.population = 1;
  CHECK_THROWS_AS(optimize_case(cc, cat), std::invalid_argument);

  cc = CodesignConfig{};
  cc.max_generations = 0;
  CHECK_THROWS_AS(optimize_case(cc, cat), std::invalid_argument);

  cc = CodesignConfig{};
  cc.sigma0 = 0.0;
  CHECK_THROWS_AS(optimize_case(cc, cat), std::invalid_argument);

  cc = CodesignConfig{};
  cc.jobs = -1;
  CHECK_THROWS_AS(optimize_case(cc, cat), std::invalid_argument);

  cc = CodesignConfig{};
  cc.study = CaseSpec::fixed_links();
  cc.study.frozen_values.thigh_length_m = 0.9;  // frozen outside the bounds
  CHECK_THROWS_AS(optimize_case(cc, cat), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// History serialization
// ---------------------------------------------------------------------------

TEST_CASE("history csv is one labeled row per generation") {
  std::vector<GenerationStat> h;
  h.push_back({1, 28.5, 30.25, 0.3, 0.81, 14.7});
  h.push_back({2, 27.0, 29.0, 0.25, 0.83, 14.1});
  const std::string csv = history_to_csv(h);

  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "gen,best_cost,median_cost,sigma,best_h,best_E");
  REQUIRE(std::getline(in, line));
  CHECK(line == "1,28.500000000,30.250000000,0.300000000,0.810000000,14.700000000");
  REQUIRE(std::getline(in, line));
  CHECK(line == "2,27.000000000,29.000000000,0.250000000,0.830000000,14.100000000");
  CHECK_FALSE(std::getline(in, line));

  CHECK(history_to_csv({}) == "gen,best_cost,median_cost,sigma,best_h,best_E\n");
}

// ---------------------------------------------------------------------------
// Design vector plumbing
// ---------------------------------------------------------------------------

TEST_CASE("design vectors round-trip through arrays in declared order") {
  DesignVector y;
  y.thigh_length_m = 0.31;
  y.shank_length_m = 0.47;
  y.knee_gear_ratio = 4.4;
  y.hip_gear_ratio = 7.7;
  y.spring_stiffness_N_per_m = 123.0;
  y.spring_damping_Ns_per_m = 9.5;
  y.torsion_stiffness_Nm_per_rad = 41.0;

  const auto a = y.to_array();
  CHECK(a[0] == 0.31);
  CHECK(a[1] == 0.47);
  CHECK(a[2] == 4.4);
  CHECK(a[3] == 7.7);
  CHECK(a[4] == 123.0);
  CHECK(a[5] == 9.5);
  CHECK(a[6] == 41.0);
  CHECK(same_design(DesignVector::from_array(a), y));

  CHECK(std::string(kDesignVariableNames[0]) == "thigh_length_m");
  CHECK(std::string(kDesignVariableNames[3]) == "hip_gear_ratio");
  CHECK(std::string(kDesignVariableNames[6]) == "torsion_stiffness_Nm_per_rad");
}
