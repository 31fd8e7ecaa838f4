#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <openssl/evp.h>

#include "json.hpp"

#include "qsteady/core/types.hpp"
#include "qsteady/noise/philox.hpp"

#ifndef QSTEADY_VERSION
#define QSTEADY_VERSION "0.0.0-dev"
#endif

namespace qsteady::xprun {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* kManifestName = "manifest.json";

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + p.string());
  os << bytes;
  os.flush();
  if (!os) throw IoError("write failed for " + p.string());
}

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json software_versions() {
  return {{"qsteady", QSTEADY_VERSION},
          {"prng", std::string(noise::Philox4x64::kName)},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"compiler", __VERSION__}};
}

struct RunManifest {
  json config;   // resolved config snapshot
  json seeds;    // curve id -> seed list
  json versions = software_versions();
  std::string started, finished;
  std::map<std::string, std::string> hashes;  // file name -> sha256

  json to_json() const {
    json h = json::object();
    for (const auto& [k, v] : hashes) h[k] = v;
    return {{"config", config}, {"seeds", seeds}, {"versions", versions}, {"started_utc", started},
            {"finished_utc", finished}, {"hashes", h}};
  }

  static RunManifest from_json(const json& j) {
    for (const char* k : {"config", "seeds", "versions", "hashes"})
      if (!j.contains(k)) throw IoError(std::string("manifest: missing '") + k + "'");
    RunManifest m;
    m.config = j.at("config");
    m.seeds = j.at("seeds");
    m.versions = j.at("versions");
    m.started = j.value("started_utc", "");
    m.finished = j.value("finished_utc", "");
    for (const auto& [k, v] : j.at("hashes").items()) m.hashes[k] = v.get<std::string>();
    return m;
  }

  static RunManifest load(const fs::path& p) {
    try {
      return from_json(json::parse(read_file(p)));
    } catch (const json::exception& e) {
      throw IoError("manifest " + p.string() + ": " + e.what());
    }
  }
};

struct OutputFile {
  std::string name;
  std::string bytes;
};

/// Writes the files and the manifest. Existing outputs are only replaced
/// with `force`; the check runs before anything is written.
inline void export_outputs(const std::vector<OutputFile>& files, RunManifest& manifest, const fs::path& dir, bool force) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
  if (!force) {
    std::vector<std::string> names{kManifestName};
    for (const auto& f : files) names.push_back(f.name);
    for (const auto& n : names)
      if (fs::exists(dir / n)) throw IoError("refusing to overwrite " + (dir / n).string() + " (use --force)");
  }
  manifest.hashes.clear();
  for (const auto& f : files) {
    require(f.name.find('/') == std::string::npos && f.name != kManifestName, "export: bad file name " + f.name);
    write_file(dir / f.name, f.bytes);
    manifest.hashes[f.name] = sha256_hex(f.bytes);
  }
  if (manifest.finished.empty()) manifest.finished = utc_now();
  write_file(dir / kManifestName, manifest.to_json().dump(2) + "\n");
}

struct HashMismatch {
  std::string file;
  std::string expected, actual;  // actual empty when missing
};

/// Recomputes every recorded hash against the files in `dir`.
inline std::vector<HashMismatch> verify_outputs(const RunManifest& m, const fs::path& dir) {
  std::vector<HashMismatch> bad;
  for (const auto& [name, want] : m.hashes) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) {
      bad.push_back({name, want, ""});
      continue;
    }
    const std::string got = sha256_hex(read_file(p));
    if (got != want) bad.push_back({name, want, got});
  }
  return bad;
}

}  // namespace qsteady::xprun
