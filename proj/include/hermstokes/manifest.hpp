#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hermstokes/errors.hpp"
#include "hermstokes/hashing.hpp"
#include "hermstokes/version.hpp"

namespace hermstokes {

struct ArtifactRecord {
  std::string path;
  std::string fnv1a64;  ///< content checksum, 16 hex digits
};

struct PhaseTiming {
  std::string phase;
  double seconds = 0.0;
};

/** @brief Wall-clock phase timer; starting a phase closes the previous one. */
class PhaseClock {
 public:
  void start(const std::string& phase) {
    close();
    current_ = phase;
    t0_ = clock::now();
    open_ = true;
  }
  void close() {
    if (!open_) return;
    const double s = std::chrono::duration<double>(clock::now() - t0_).count();
    timings_.push_back({current_, s});
    open_ = false;
  }
  const std::vector<PhaseTiming>& timings() {
    close();
    return timings_;
  }

 private:
  using clock = std::chrono::steady_clock;
  std::vector<PhaseTiming> timings_;
  std::string current_;
  clock::time_point t0_;
  bool open_ = false;
};

/**
 * @brief Provenance record for one command run: configuration snapshot, code
 * version, seeds, paths, per-phase wall-clock, and every produced artifact
 * with its content checksum.
 */
struct RunManifest {
  std::string command;
  std::string version = kVersion;
  std::string config_path;
  std::map<std::string, std::string> config;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::string> inputs;
  std::string out_dir;
  std::vector<ArtifactRecord> artifacts;
  std::vector<PhaseTiming> timings;
};

/** @brief FNV-1a checksum of a file's bytes, as 16 hex digits. */
inline std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("file_checksum: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw io_error("file_checksum: read failure on '" + path + "'");
  return hex64(fnv1a64(buf.str()));
}

/** @brief Register a produced file: reads it back and records its checksum. */
inline void record_artifact(RunManifest& m, const std::string& path) {
  m.artifacts.push_back({path, file_checksum(path)});
}

inline nlohmann::json manifest_to_json(const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["version"] = m.version;
  j["config_path"] = m.config_path;
  j["config"] = m.config;
  j["seeds"] = m.seeds;
  j["inputs"] = m.inputs;
  j["out_dir"] = m.out_dir;
  j["artifacts"] = nlohmann::json::array();
  for (const ArtifactRecord& a : m.artifacts)
    j["artifacts"].push_back({{"path", a.path}, {"fnv1a64", a.fnv1a64}});
  j["timings"] = nlohmann::json::array();
  for (const PhaseTiming& t : m.timings)
    j["timings"].push_back({{"phase", t.phase}, {"seconds", t.seconds}});
  return j;
}

/** @brief Write the manifest JSON (the manifest itself is not self-listed). */
inline void write_manifest(const std::string& path, const RunManifest& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("write_manifest: cannot open '" + path + "'");
  out << manifest_to_json(m).dump(2) << '\n';
  if (!out) throw io_error("write_manifest: write failure on '" + path + "'");
}

}  // namespace hermstokes
