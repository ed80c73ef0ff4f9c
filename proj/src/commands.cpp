#include "monoped/commands.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "monoped/manifest.hpp"

namespace monoped {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kBestPointSchema = "codesign-best-point/1";
constexpr const char* kRunSummarySchema = "run-summary/1";

std::string hash_hex(std::uint64_t hash) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016" PRIx64, hash);
  return buf;
}

fs::path prepare_out_dir(const RunConfig& config) {
  const fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() +
                                   ": " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

json provenance_block(const RunConfig& config) {
  return {{"tool_version", kToolVersion},
          {"config_hash", hash_hex(config_hash(config))},
          {"seed", std::to_string(config.seed)},
          {"study_case", config.study_case}};
}

// Reuse an on-disk catalog only when it was built from the same stage-1
// inputs; otherwise sweep again in memory.
ActuatorCatalog obtain_catalog(const RunConfig& config, std::ostream& out) {
  const fs::path path = fs::path(config.out_dir) / "catalog.json";
  if (fs::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
      ActuatorCatalog catalog = catalog_from_json(buffer.str());
      if (catalog.config_hash == stage1_hash(config)) {
        out << "catalog: reusing " << path.string() << "\n";
        return catalog;
      }
      out << "catalog: " << path.string() << " was built from different inputs, rebuilding\n";
    } catch (const std::exception&) {
      out << "catalog: " << path.string() << " is unreadable, rebuilding\n";
    }
  }
  ActuatorCatalog catalog = build_catalog(config.stage1, config.jobs);
  catalog.config_hash = stage1_hash(config);
  return catalog;
}

json design_json(const DesignVector& y) {
  json out;
  const auto values = y.to_array();
  for (int i = 0; i < kDesignDim; ++i) out[kDesignVariableNames[i]] = values[i];
  return out;
}

DesignVector design_from_json(const json& j, const std::string& where) {
  std::array<double, kDesignDim> values{};
  for (int i = 0; i < kDesignDim; ++i) {
    const auto it = j.find(kDesignVariableNames[i]);
    if (it == j.end() || !it->is_number())
      throw std::invalid_argument(where + ": design." + kDesignVariableNames[i] +
                                  " is missing or not a number");
    values[i] = it->get<double>();
  }
  return DesignVector::from_array(values);
}

struct BestPoint {
  DesignVector design;
  json provenance;
};

BestPoint read_best_point(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open best-point file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("invalid JSON in " + path + ": " + e.what());
  }
  const auto schema = j.find("schema");
  if (schema == j.end() || !schema->is_string() ||
      schema->get<std::string>() != kBestPointSchema)
    throw std::invalid_argument(path + ": schema must be \"" +
                                std::string(kBestPointSchema) + "\"");
  const auto design = j.find("design");
  if (design == j.end())
    throw std::invalid_argument(path + ": design block is missing");
  BestPoint p;
  p.design = design_from_json(*design, path);
  p.provenance = j.value("provenance", json::object());
  return p;
}

void check_in_bounds(const DesignVector& y, const DesignBounds& bounds,
                     const std::string& where) {
  const auto values = y.to_array();
  const int i = bounds.first_violation(values);
  if (i < 0) return;
  std::ostringstream msg;
  msg << where << ": " << kDesignVariableNames[i] << " = " << values[i]
      << " is outside [" << bounds.lower[i] << ", " << bounds.upper[i] << "]";
  throw std::invalid_argument(msg.str());
}

void print_rollout(const CostBreakdown& e, std::ostream& out) {
  char line[192];
  std::snprintf(line, sizeof(line),
                "  termination %s, h %.6f m, E %.6f J, cost %.6f\n",
                to_string(e.reason), e.jump_height_m, e.positive_work_J, e.cost);
  out << line;
}

json best_point_json(const RunConfig& config, const CodesignResult& r) {
  json j;
  j["schema"] = kBestPointSchema;
  j["provenance"] = provenance_block(config);
  j["cost"] = r.best_eval.cost;
  j["penalized"] = r.best_eval.penalized;
  j["termination"] = to_string(r.best_eval.reason);
  j["design"] = design_json(r.best);
  j["result"] = {{"jump_height_m", r.best_eval.jump_height_m},
                 {"positive_work_J", r.best_eval.positive_work_J},
                 {"liftoff_speed_mps", r.best_eval.liftoff_speed_mps},
                 {"liftoff_time_s", r.best_eval.liftoff_time_s}};
  j["optimizer"] = {{"population", config.population},
                    {"generations", static_cast<int>(r.history.size())},
                    {"evaluations", r.evaluations},
                    {"max_feasible_cost", r.max_feasible_cost},
                    {"saw_feasible", r.saw_feasible}};
  return j;
}

}  // namespace

int cmd_stage1(const RunConfig& config, KindFilter kind, std::ostream& out) {
  const fs::path dir = prepare_out_dir(config);

  ActuatorCatalog catalog = build_catalog(config.stage1, config.jobs);
  catalog.config_hash = stage1_hash(config);

  int populated = 0, isspg = 0;
  double ratio_lo = 0.0, ratio_hi = 0.0;
  for (const CatalogBin& bin : catalog.bins) {
    if (!bin.best) continue;
    if (populated == 0) ratio_lo = bin.best->ratio;
    ratio_hi = bin.best->ratio;
    ++populated;
    if (bin.best_isspg) ++isspg;
  }

  write_text(dir / "catalog.json", catalog_to_json(catalog));
  write_text(dir / "catalog.csv", catalog_to_csv(catalog, kind));

  char line[192];
  std::snprintf(line, sizeof(line),
                "catalog: %d of %d bins populated (%d with in-stator designs), "
                "winning ratios %.3f-%.3f\n",
                populated, static_cast<int>(catalog.bins.size()), isspg, ratio_lo,
                ratio_hi);
  out << line;
  out << "wrote " << (dir / "catalog.json").string() << "\n";
  out << "wrote " << (dir / "catalog.csv").string() << "\n";
  return 0;
}

int cmd_codesign(const RunConfig& config, std::ostream& out) {
  const fs::path dir = prepare_out_dir(config);
  const ActuatorCatalog catalog = obtain_catalog(config, out);

  const CodesignConfig cc = config.codesign_config();
  const CodesignResult result = optimize_case(cc, catalog);

  write_text(dir / "best_point.json", best_point_json(config, result).dump(2) + "\n");
  write_text(dir / "history.csv", history_to_csv(result.history));
  write_text(dir / "best_trajectory.csv", trace_to_csv(result.best_rollout.trace));

  if (config.study_case == "nominal") {
    char line[128];
    std::snprintf(line, sizeof(line), "nominal point: h = %.6f m, E = %.6f J\n",
                  result.best_eval.jump_height_m, result.best_eval.positive_work_J);
    out << line;
  } else {
    out << "case " << config.study_case << " best after "
        << result.history.size() << " generations (" << result.evaluations
        << " evaluations):\n";
    print_rollout(result.best_eval, out);
  }
  out << "wrote " << (dir / "best_point.json").string() << "\n";
  out << "wrote " << (dir / "history.csv").string() << "\n";
  out << "wrote " << (dir / "best_trajectory.csv").string() << "\n";
  return 0;
}

int cmd_simulate(const RunConfig& config, const std::string& point_path,
                 std::ostream& out) {
  const fs::path dir = prepare_out_dir(config);

  DesignVector y;
  if (point_path.empty()) {
    y = config.study().frozen_values;  // pinned/nominal values for free coords
    out << "simulating the " << config.study_case << " case's pinned point\n";
  } else {
    y = read_best_point(point_path).design;
    out << "simulating " << point_path << "\n";
  }
  check_in_bounds(y, config.bounds, "point");

  const ActuatorCatalog catalog = obtain_catalog(config, out);
  const auto decoded = decode_design(y, catalog, config.decode);
  if (!decoded)
    throw std::runtime_error("no feasible actuator for the requested gear ratios");

  SimConfig sim = config.sim;
  sim.record_trace = true;
  const JumpResult r = rollout(decoded->model, decoded->controller, sim);

  write_text(dir / "trajectory.csv", trace_to_csv(r.trace));

  char line[192];
  std::snprintf(line, sizeof(line),
                "termination %s, h %.6f m, E %.6f J, liftoff t %.4f s v %.4f m/s\n",
                to_string(r.reason), r.jump_height_m, r.positive_work_J,
                r.liftoff_time_s, r.liftoff_speed_mps);
  out << line;
  out << "wrote " << (dir / "trajectory.csv").string() << "\n";
  return 0;
}

int cmd_export(const RunConfig& config, const std::string& point_path,
               std::ostream& out) {
  const fs::path dir = prepare_out_dir(config);

  const BestPoint point = read_best_point(point_path);
  const std::string current_hash = hash_hex(config_hash(config));
  const std::string point_hash = point.provenance.value("config_hash", "");
  if (point_hash != current_hash)
    throw std::invalid_argument(point_path + ": produced under config " + point_hash +
                                " but the current config hashes to " + current_hash);
  check_in_bounds(point.design, config.bounds, point_path);

  const ActuatorCatalog catalog = obtain_catalog(config, out);
  const auto decoded = decode_design(point.design, catalog, config.decode);
  if (!decoded)
    throw std::runtime_error("no feasible actuator for the requested gear ratios");

  ManifestMeta meta;
  meta.config_hash = config_hash(config);
  meta.seed = std::strtoull(point.provenance.value("seed", "0").c_str(), nullptr, 10);
  meta.study_case = point.provenance.value("study_case", config.study_case);

  const DesignManifest manifest =
      build_manifest(*decoded, config.stage1, config.decode, meta);
  validate_manifest(manifest);
  write_manifest(manifest, (dir / "manifest.json").string());

  out << "manifest: hip " << manifest["actuators"]["hip"]["mounting"].get<std::string>()
      << " " << manifest["actuators"]["hip"]["gear_ratio"].get<double>() << ":1, knee "
      << manifest["actuators"]["knee"]["mounting"].get<std::string>() << " "
      << manifest["actuators"]["knee"]["gear_ratio"].get<double>() << ":1\n";
  out << "wrote " << (dir / "manifest.json").string() << "\n";
  return 0;
}

int cmd_pipeline(const RunConfig& config, std::ostream& out) {
  const fs::path dir = prepare_out_dir(config);

  // Stage 1, skipped when the existing catalog matches this config.
  const fs::path catalog_path = dir / "catalog.json";
  bool have_catalog = false;
  if (fs::exists(catalog_path)) {
    std::ifstream in(catalog_path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
      have_catalog = catalog_from_json(buffer.str()).config_hash == stage1_hash(config);
    } catch (const std::exception&) {
      have_catalog = false;
    }
  }
  if (have_catalog) {
    out << "stage1: catalog up to date, skipping\n";
  } else {
    cmd_stage1(config, KindFilter::Both, out);
  }

  // Reference point for the summary: the all-nominal design.
  const ActuatorCatalog catalog = obtain_catalog(config, out);
  const CostBreakdown nominal = evaluate_design(CaseSpec::nominal().frozen_values,
                                                catalog, config.decode, config.sim,
                                                config.cost);
  out << "nominal reference:\n";
  print_rollout(nominal, out);

  cmd_codesign(config, out);
  cmd_export(config, (dir / "best_point.json").string(), out);

  const json best = json::parse(std::ifstream(dir / "best_point.json"));
  json summary;
  summary["schema"] = kRunSummarySchema;
  summary["provenance"] = provenance_block(config);
  summary["nominal"] = {{"cost", nominal.cost},
                        {"jump_height_m", nominal.jump_height_m},
                        {"positive_work_J", nominal.positive_work_J}};
  summary["optimized"] = {{"case", config.study_case},
                          {"cost", best.at("cost")},
                          {"jump_height_m", best.at("result").at("jump_height_m")},
                          {"positive_work_J", best.at("result").at("positive_work_J")}};
  summary["delta"] = {
      {"cost", best.at("cost").get<double>() - nominal.cost},
      {"jump_height_m",
       best.at("result").at("jump_height_m").get<double>() - nominal.jump_height_m},
      {"positive_work_J", best.at("result").at("positive_work_J").get<double>() -
                              nominal.positive_work_J}};
  write_text(dir / "run_summary.json", summary.dump(2) + "\n");
  out << "wrote " << (dir / "run_summary.json").string() << "\n";
  return 0;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"three-stage co-design pipeline for a jumping monoped"};
  app.fallthrough();
  app.set_version_flag("--version", kToolVersion);

  std::string config_path, out_dir, case_name, kind = "both", point_path;
  std::uint64_t seed = 0;
  int jobs = -1;

  app.add_option("--config", config_path, "JSON config; defaults used when omitted");
  app.add_option("--out", out_dir, "output directory (overrides config out_dir)");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides config seed)");
  app.add_option("--jobs", jobs, "worker threads, 0 = hardware default");

  CLI::App* stage1 = app.add_subcommand("stage1", "build the geared-actuator catalog");
  stage1->add_option("--kind", kind, "catalog CSV mounting filter: both|isspg|esspg");

  CLI::App* codesign =
      app.add_subcommand("codesign", "optimize a study case with the evolution strategy");
  codesign->add_option("--case", case_name, "nominal|a|b|c|custom");

  CLI::App* simulate = app.add_subcommand("simulate", "roll out one design and dump the trajectory");
  simulate->add_option("--point", point_path, "best-point JSON (default: the case's pinned point)");
  simulate->add_option("--case", case_name, "nominal|a|b|c|custom");

  CLI::App* exporter = app.add_subcommand("export", "write the CAD-ready design manifest");
  exporter->add_option("--point", point_path, "best-point JSON from codesign")->required();
  exporter->add_option("--case", case_name, "nominal|a|b|c|custom");

  CLI::App* pipeline = app.add_subcommand("pipeline", "stage1 + codesign + export + summary");
  pipeline->add_option("--case", case_name, "nominal|a|b|c|custom");

  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  RunConfig config;
  try {
    config = config_path.empty() ? default_run_config() : load_run_config(config_path);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (seed_opt->count() > 0) config.seed = seed;
    if (jobs >= 0) config.jobs = jobs;
    if (!case_name.empty())
      config.study_case = case_name == "nominal-eval" ? "nominal" : case_name;
    config.validate();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (stage1->parsed()) return cmd_stage1(config, kind_filter_from_string(kind), out);
    if (codesign->parsed()) return cmd_codesign(config, out);
    if (simulate->parsed()) return cmd_simulate(config, point_path, out);
    if (exporter->parsed()) return cmd_export(config, point_path, out);
    if (pipeline->parsed()) return cmd_pipeline(config, out);
    err << "error: no command selected\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace monoped
