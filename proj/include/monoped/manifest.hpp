#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "monoped/codesign.hpp"
#include "monoped/stage1.hpp"

namespace monoped {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kManifestSchema = "monoped-design-manifest/1";

// Ordered so repeated exports of the same design diff clean.
using DesignManifest = nlohmann::ordered_json;

struct ManifestMeta {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string study_case = "c";
  std::string tool_version = kToolVersion;
};

// Every dimension a downstream CAD template needs: link geometry, per-actuator
// gear train with derived pitch diameters / housing dimensions / component
// masses, controller gains, and provenance. All derived values are recomputed
// from the gear train with the same routines the mass model uses; a design
// whose stored fields disagree with that recomputation is rejected with an
// error naming every mismatched field.
DesignManifest build_manifest(const DecodedDesign& design, const Stage1Config& stage1,
                              const DecodeConfig& decode, const ManifestMeta& meta);

// Structural and arithmetic checks on an already-built or freshly-read
// manifest: schema tag, required blocks, unit-suffix naming on every numeric
// leaf, pitch diameters vs teeth*module, ratio vs tooth counts, component
// masses summing to totals. Throws std::invalid_argument naming the first
// offending field path.
void validate_manifest(const DesignManifest& manifest);

// Lossless, diff-stable round-trip (2-space indent, trailing newline).
// write_manifest throws std::runtime_error on I/O failure; read_manifest also
// validates and throws std::invalid_argument on schema violations.
void write_manifest(const DesignManifest& manifest, const std::string& path);
DesignManifest read_manifest(const std::string& path);

}  // namespace monoped
