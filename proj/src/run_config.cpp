#include "monoped/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace monoped {

namespace {

using json = nlohmann::ordered_json;

json motor_json(const MotorSpec& m) {
  return {{"name", m.name},
          {"mass_kg", m.mass_kg},
          {"outer_diameter_mm", m.outer_diameter_mm},
          {"stator_inner_diameter_mm", m.stator_inner_diameter_mm},
          {"axial_length_mm", m.axial_length_mm},
          {"peak_torque_Nm", m.peak_torque_Nm},
          {"rotor_inertia_kgm2", m.rotor_inertia_kgm2}};
}

json bounds_json(const GearboxBounds& b) {
  return {{"ratio_min", b.ratio_min},
          {"ratio_max", b.ratio_max},
          {"ratio_max_inclusive", b.ratio_max_inclusive},
          {"module_set_mm", b.module_set_mm},
          {"module_min_mm", b.module_min_mm},
          {"module_max_mm", b.module_max_mm},
          {"min_teeth", b.min_teeth},
          {"planet_clearance_mm", b.planet_clearance_mm},
          {"housing_clearance_mm", b.housing_clearance_mm},
          {"planet_count_min", b.planet_count_min},
          {"planet_count_max", b.planet_count_max}};
}

json materials_json(const MaterialTable& m) {
  json catalog = json::array();
  for (const auto& row : m.bearing_catalog) catalog.push_back({row[0], row[1]});
  return {{"aluminum_kg_per_m3", m.aluminum_kg_per_m3},
          {"steel_kg_per_m3", m.steel_kg_per_m3},
          {"plastic_kg_per_m3", m.plastic_kg_per_m3},
          {"bearing_mass_coeff", m.bearing_mass_coeff},
          {"bearing_mass_exponent", m.bearing_mass_exponent},
          {"bearing_catalog", std::move(catalog)}};
}

json geometry_json(const ActuatorGeometry& g) {
  return {{"face_width_per_module", g.face_width_per_module},
          {"casing_wall_mm", g.casing_wall_mm},
          {"casing_end_clearance_mm", g.casing_end_clearance_mm},
          {"backplate_thickness_mm", g.backplate_thickness_mm},
          {"carrier_thickness_mm", g.carrier_thickness_mm},
          {"carrier_rim_mm", g.carrier_rim_mm},
          {"carrier_bore_mm", g.carrier_bore_mm},
          {"coupling_diameter_mm", g.coupling_diameter_mm},
          {"coupling_length_mm", g.coupling_length_mm},
          {"sun_bore_scale", g.sun_bore_scale},
          {"sun_bore_min_mm", g.sun_bore_min_mm},
          {"output_bore_scale", g.output_bore_scale},
          {"output_bore_min_mm", g.output_bore_min_mm}};
}

json link_json(const LinkMassParams& l) {
  return {{"plate_thickness_mm", l.plate_thickness_mm},
          {"plate_width_mm", l.plate_width_mm},
          {"core_thickness_mm", l.core_thickness_mm},
          {"chain_kg_per_m", l.chain_kg_per_m},
          {"fixed_hardware_kg", l.fixed_hardware_kg}};
}

json design_point_json(const std::array<double, kDesignDim>& values) {
  json out;
  for (int i = 0; i < kDesignDim; ++i) out[kDesignVariableNames[i]] = values[i];
  return out;
}

std::array<double, kDesignDim> design_point_from_json(const json& j) {
  std::array<double, kDesignDim> out{};
  for (int i = 0; i < kDesignDim; ++i) out[i] = j.at(kDesignVariableNames[i]).get<double>();
  return out;
}

// Paths merged as opaque leaves: replacing, not recursing. Arrays always
// replace wholesale; custom_frozen is an open-keyed object.
bool replace_wholesale(const std::string& path) {
  return path == "codesign.custom_frozen";
}

void merge_config(json& base, const json& user, const std::string& prefix) {
  if (!user.is_object())
    throw std::invalid_argument("config: " + (prefix.empty() ? "root" : prefix) +
                                " must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    const auto slot = base.find(key);
    if (slot == base.end())
      throw std::invalid_argument("config: unknown key " + path);

    if (replace_wholesale(path)) {
      if (!value.is_object())
        throw std::invalid_argument("config: " + path + " must be an object");
      *slot = value;
      continue;
    }
    if (slot->is_object()) {
      merge_config(*slot, value, path);
      continue;
    }
    if (slot->is_array()) {
      if (!value.is_array())
        throw std::invalid_argument("config: " + path + " must be an array");
      *slot = value;
      continue;
    }
    if (slot->is_boolean()) {
      if (!value.is_boolean())
        throw std::invalid_argument("config: " + path + " must be a boolean");
    } else if (slot->is_string()) {
      if (!value.is_string())
        throw std::invalid_argument("config: " + path + " must be a string");
    } else if (slot->is_number_integer()) {  // covers unsigned too
      if (!value.is_number_integer())
        throw std::invalid_argument("config: " + path + " must be an integer");
    } else if (slot->is_number()) {
      if (!value.is_number())
        throw std::invalid_argument("config: " + path + " must be a number");
    }
    *slot = value;
  }
}

double get_num(const json& j, const char* key) { return j.at(key).get<double>(); }
int get_int(const json& j, const char* key) { return j.at(key).get<int>(); }

RunConfig parse_config(const json& j) {
  RunConfig c;

  const json& motor = j.at("motor");
  c.stage1.motor.name = motor.at("name").get<std::string>();
  c.stage1.motor.mass_kg = get_num(motor, "mass_kg");
  c.stage1.motor.outer_diameter_mm = get_num(motor, "outer_diameter_mm");
  c.stage1.motor.stator_inner_diameter_mm = get_num(motor, "stator_inner_diameter_mm");
  c.stage1.motor.axial_length_mm = get_num(motor, "axial_length_mm");
  c.stage1.motor.peak_torque_Nm = get_num(motor, "peak_torque_Nm");
  c.stage1.motor.rotor_inertia_kgm2 = get_num(motor, "rotor_inertia_kgm2");

  const json& gb = j.at("gearbox_bounds");
  c.stage1.bounds.ratio_min = get_num(gb, "ratio_min");
  c.stage1.bounds.ratio_max = get_num(gb, "ratio_max");
  c.stage1.bounds.ratio_max_inclusive = gb.at("ratio_max_inclusive").get<bool>();
  c.stage1.bounds.module_set_mm = gb.at("module_set_mm").get<std::vector<double>>();
  c.stage1.bounds.module_min_mm = get_num(gb, "module_min_mm");
  c.stage1.bounds.module_max_mm = get_num(gb, "module_max_mm");
  c.stage1.bounds.min_teeth = get_int(gb, "min_teeth");
  c.stage1.bounds.planet_clearance_mm = get_num(gb, "planet_clearance_mm");
  c.stage1.bounds.housing_clearance_mm = get_num(gb, "housing_clearance_mm");
  c.stage1.bounds.planet_count_min = get_int(gb, "planet_count_min");
  c.stage1.bounds.planet_count_max = get_int(gb, "planet_count_max");

  const json& mt = j.at("materials");
  c.stage1.materials.aluminum_kg_per_m3 = get_num(mt, "aluminum_kg_per_m3");
  c.stage1.materials.steel_kg_per_m3 = get_num(mt, "steel_kg_per_m3");
  c.stage1.materials.plastic_kg_per_m3 = get_num(mt, "plastic_kg_per_m3");
  c.stage1.materials.bearing_mass_coeff = get_num(mt, "bearing_mass_coeff");
  c.stage1.materials.bearing_mass_exponent = get_num(mt, "bearing_mass_exponent");
  c.stage1.materials.bearing_catalog.clear();
  for (const json& row : mt.at("bearing_catalog")) {
    if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number())
      throw std::invalid_argument(
          "config: materials.bearing_catalog rows must be [bore_mm, mass_kg]");
    c.stage1.materials.bearing_catalog.push_back(
        {row[0].get<double>(), row[1].get<double>()});
  }

  const json& g = j.at("geometry");
  c.stage1.geometry.face_width_per_module = get_num(g, "face_width_per_module");
  c.stage1.geometry.casing_wall_mm = get_num(g, "casing_wall_mm");
  c.stage1.geometry.casing_end_clearance_mm = get_num(g, "casing_end_clearance_mm");
  c.stage1.geometry.backplate_thickness_mm = get_num(g, "backplate_thickness_mm");
  c.stage1.geometry.carrier_thickness_mm = get_num(g, "carrier_thickness_mm");
  c.stage1.geometry.carrier_rim_mm = get_num(g, "carrier_rim_mm");
  c.stage1.geometry.carrier_bore_mm = get_num(g, "carrier_bore_mm");
  c.stage1.geometry.coupling_diameter_mm = get_num(g, "coupling_diameter_mm");
  c.stage1.geometry.coupling_length_mm = get_num(g, "coupling_length_mm");
  c.stage1.geometry.sun_bore_scale = get_num(g, "sun_bore_scale");
  c.stage1.geometry.sun_bore_min_mm = get_num(g, "sun_bore_min_mm");
  c.stage1.geometry.output_bore_scale = get_num(g, "output_bore_scale");
  c.stage1.geometry.output_bore_min_mm = get_num(g, "output_bore_min_mm");

  const json& grid = j.at("grid");
  c.stage1.grid.lo = get_num(grid, "lo");
  c.stage1.grid.hi = get_num(grid, "hi");
  c.stage1.grid.step = get_num(grid, "step");

  const json& en = j.at("enumeration");
  c.stage1.max_sun_teeth = get_int(en, "max_sun_teeth");
  c.stage1.max_planet_teeth = get_int(en, "max_planet_teeth");

  const json& sim = j.at("sim");
  c.sim.dt_s = get_num(sim, "dt_s");
  c.sim.start_leg_length_m = get_num(sim, "start_leg_length_m");
  c.sim.max_sim_time_s = get_num(sim, "max_sim_time_s");
  c.sim.stop_at_apex = sim.at("stop_at_apex").get<bool>();

  const json& dec = j.at("decode");
  c.decode.base_mass_kg = get_num(dec, "base_mass_kg");
  c.decode.rest_length_scale = get_num(dec, "rest_length_scale");
  c.decode.rest_angle_rad = get_num(dec, "rest_angle_rad");
  c.decode.gravity_mps2 = get_num(dec, "gravity_mps2");
  const json& link = dec.at("link");
  c.decode.link.plate_thickness_mm = get_num(link, "plate_thickness_mm");
  c.decode.link.plate_width_mm = get_num(link, "plate_width_mm");
  c.decode.link.core_thickness_mm = get_num(link, "core_thickness_mm");
  c.decode.link.chain_kg_per_m = get_num(link, "chain_kg_per_m");
  c.decode.link.fixed_hardware_kg = get_num(link, "fixed_hardware_kg");
  c.decode.materials = c.stage1.materials;

  const json& cd = j.at("codesign");
  c.study_case = cd.at("case").get<std::string>();
  c.population = get_int(cd, "population");
  c.max_generations = get_int(cd, "max_generations");
  c.sigma0 = get_num(cd, "sigma0");
  c.bounds.lower = design_point_from_json(cd.at("bounds").at("lower"));
  c.bounds.upper = design_point_from_json(cd.at("bounds").at("upper"));
  const json& cost = cd.at("cost");
  c.cost.lambda_height = get_num(cost, "lambda_height");
  c.cost.lambda_energy = get_num(cost, "lambda_energy");
  c.cost.height_scale_J = get_num(cost, "height_scale_J");
  c.cost.infeasible_penalty_J = get_num(cost, "infeasible_penalty_J");
  c.custom_frozen.clear();
  for (const auto& [name, value] : cd.at("custom_frozen").items()) {
    if (!value.is_number())
      throw std::invalid_argument("config: codesign.custom_frozen." + name +
                                  " must be a number");
    c.custom_frozen[name] = value.get<double>();
  }

  const json& seed = j.at("seed");
  if (!seed.is_number_integer() ||
      (seed.is_number_integer() && !seed.is_number_unsigned() &&
       seed.get<std::int64_t>() < 0))
    throw std::invalid_argument("config: seed must be a non-negative integer");
  c.seed = seed.get<std::uint64_t>();
  c.out_dir = j.at("out_dir").get<std::string>();
  c.jobs = j.at("jobs").get<int>();
  return c;
}

}  // namespace

CaseSpec RunConfig::study() const {
  if (study_case != "custom") return CaseSpec::from_name(study_case);

  CaseSpec s;
  s.label = "custom";
  for (const auto& [name, value] : custom_frozen) {
    const auto* begin = kDesignVariableNames.begin();
    const auto* end = kDesignVariableNames.end();
    const auto* hit = std::find_if(begin, end,
                                   [&](const char* n) { return name == n; });
    if (hit == end)
      throw std::invalid_argument("config: codesign.custom_frozen." + name +
                                  " is not a design variable");
    const int i = static_cast<int>(hit - begin);
    s.frozen[i] = true;
    auto values = s.frozen_values.to_array();
    values[i] = value;
    s.frozen_values = DesignVector::from_array(values);
  }
  return s;
}

CodesignConfig RunConfig::codesign_config() const {
  CodesignConfig cc;
  cc.bounds = bounds;
  cc.study = study();
  cc.cost = cost;
  cc.decode = decode;
  cc.sim = sim;
  cc.population = population;
  cc.max_generations = max_generations;
  cc.sigma0 = sigma0;
  cc.seed = seed;
  cc.jobs = jobs;
  return cc;
}

void RunConfig::validate() const {
  stage1.validate();
  sim.validate();
  decode.validate();
  bounds.validate();
  cost.validate();
  if (study_case != "nominal" && study_case != "a" && study_case != "b" &&
      study_case != "c" && study_case != "custom")
    throw std::invalid_argument("config: codesign.case must be nominal, a, b, c, or custom");
  study().validate(bounds);
  if (population < 2) throw std::invalid_argument("config: codesign.population must be >= 2");
  if (max_generations < 1)
    throw std::invalid_argument("config: codesign.max_generations must be >= 1");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("config: codesign.sigma0 must be > 0");
  if (jobs < 0) throw std::invalid_argument("config: jobs must be >= 0");
  if (out_dir.empty()) throw std::invalid_argument("config: out_dir must not be empty");
}

RunConfig default_run_config() {
  RunConfig c;
  c.stage1.motor.name = "bench-motor";
  c.stage1.motor.mass_kg = 0.650;
  c.stage1.motor.outer_diameter_mm = 88.0;
  c.stage1.motor.stator_inner_diameter_mm = 60.0;
  c.stage1.motor.axial_length_mm = 25.0;
  c.stage1.motor.peak_torque_Nm = 2.5;
  c.decode.materials = c.stage1.materials;
  return c;
}

nlohmann::ordered_json run_config_to_json(const RunConfig& c) {
  json j;
  j["motor"] = motor_json(c.stage1.motor);
  j["gearbox_bounds"] = bounds_json(c.stage1.bounds);
  j["materials"] = materials_json(c.stage1.materials);
  j["geometry"] = geometry_json(c.stage1.geometry);
  j["grid"] = {{"lo", c.stage1.grid.lo}, {"hi", c.stage1.grid.hi},
               {"step", c.stage1.grid.step}};
  j["enumeration"] = {{"max_sun_teeth", c.stage1.max_sun_teeth},
                      {"max_planet_teeth", c.stage1.max_planet_teeth}};
  j["sim"] = {{"dt_s", c.sim.dt_s},
              {"start_leg_length_m", c.sim.start_leg_length_m},
              {"max_sim_time_s", c.sim.max_sim_time_s},
              {"stop_at_apex", c.sim.stop_at_apex}};
  j["decode"] = {{"base_mass_kg", c.decode.base_mass_kg},
                 {"rest_length_scale", c.decode.rest_length_scale},
                 {"rest_angle_rad", c.decode.rest_angle_rad},
                 {"gravity_mps2", c.decode.gravity_mps2},
                 {"link", link_json(c.decode.link)}};
  json frozen = json::object();
  for (const auto& [name, value] : c.custom_frozen) frozen[name] = value;
  j["codesign"] = {{"case", c.study_case},
                   {"population", c.population},
                   {"max_generations", c.max_generations},
                   {"sigma0", c.sigma0},
                   {"bounds", {{"lower", design_point_json(c.bounds.lower)},
                               {"upper", design_point_json(c.bounds.upper)}}},
                   {"cost", {{"lambda_height", c.cost.lambda_height},
                             {"lambda_energy", c.cost.lambda_energy},
                             {"height_scale_J", c.cost.height_scale_J},
                             {"infeasible_penalty_J", c.cost.infeasible_penalty_J}}},
                   {"custom_frozen", std::move(frozen)}};
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["jobs"] = c.jobs;
  return j;
}

RunConfig run_config_from_json(const nlohmann::ordered_json& user) {
  json base = run_config_to_json(default_run_config());
  merge_config(base, user, "");
  RunConfig c = parse_config(base);
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json user;
  try {
    user = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config: invalid JSON in " + path + ": " + e.what());
  }
  return run_config_from_json(user);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const char ch : bytes) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t config_hash(const RunConfig& config) {
  json j = run_config_to_json(config);
  j.erase("seed");
  j.erase("out_dir");
  j.erase("jobs");
  return fnv1a64(j.dump());
}

std::uint64_t stage1_hash(const RunConfig& config) {
  const json full = run_config_to_json(config);
  json j;
  for (const char* key : {"motor", "gearbox_bounds", "materials", "geometry", "grid",
                          "enumeration"})
    j[key] = full.at(key);
  return fnv1a64(j.dump());
}

}  // namespace monoped
