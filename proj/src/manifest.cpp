#include "dctcrn/manifest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dctcrn {

namespace {

std::string strip(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);

  Manifest m;
  m.base_dir = std::filesystem::path(path).parent_path().string();

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = strip(line);
    if (t.empty() || t[0] == '#') continue;

    ManifestItem item;
    std::stringstream fields(t);
    std::string field;
    while (std::getline(fields, field, '\t')) {
      field = strip(field);
      if (field.empty()) continue;
      const size_t eq = field.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": expected key=value, got '" + field + "'");
      const std::string key = field.substr(0, eq);
      const std::string val = field.substr(eq + 1);
      if (key == "speech")
        item.speech = val;
      else if (key == "noise")
        item.noise = val;
      else
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key '" + key +
                                 "'");
    }
    if (item.speech.empty() || item.noise.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": line needs both speech= and noise=");
    for (const std::string* field : {&item.speech, &item.noise}) {
      if (is_synth_spec(*field)) continue;
      const std::string full = resolve_manifest_path(m, *field);
      if (!std::filesystem::exists(full))
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing file '" + full +
                                 "'");
    }
    m.items.push_back(std::move(item));
  }
  if (m.items.empty()) throw std::runtime_error("manifest has no items: " + path);
  return m;
}

bool is_synth_spec(const std::string& field) { return field.rfind("synth:", 0) == 0; }

std::string resolve_manifest_path(const Manifest& m, const std::string& rel) {
  std::filesystem::path p(rel);
  if (p.is_absolute() || m.base_dir.empty()) return rel;
  return (std::filesystem::path(m.base_dir) / p).string();
}

}  // namespace dctcrn
