#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dctcrn {

// One training/eval item: where to get the clean speech and the noise.
// Either field is a wav path (resolved against the manifest's directory)
// or a synthesis spec:
//
//   speech=synth:<seed>
//   noise=synth:<white|pink|babble>:<seed>
//
// Lines are tab-separated `key=value` pairs; blank lines and lines starting
// with '#' are skipped.
struct ManifestItem {
  std::string speech;
  std::string noise;
};

struct Manifest {
  std::string base_dir;  // directory of the manifest file
  std::vector<ManifestItem> items;
  uint64_t seed = 0;  // runtime choice, not stored in the file
};

// Parses the file, rejects empty manifests and checks that every referenced
// wav exists right away instead of failing mid-run.
Manifest load_manifest(const std::string& path);

// True when the field asks for synthesis rather than a file.
bool is_synth_spec(const std::string& field);

// Joins base_dir and a relative path; absolute paths pass through.
std::string resolve_manifest_path(const Manifest& m, const std::string& rel);

}  // namespace dctcrn
