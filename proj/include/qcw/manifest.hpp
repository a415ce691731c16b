#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

// Run manifest: every CLI run directory gets exactly one manifest.json tying
// together the experiment id, the verb that ran, the resolved configuration
// snapshot, the seed, wall-clock start/end stamps, the code version, and a
// content hash for every artifact the run wrote. The file lands atomically
// (tmp + rename), so a crashed run leaves either no manifest or a complete
// one — never a torn file. Identical configuration + seed must reproduce
// identical artifact hashes; the timestamps are the only fields allowed to
// differ between such runs.

namespace qcw {

struct RunManifest {
    std::string experiment;
    std::string command;          // the CLI verb
    std::string code_version;     // git short hash baked in at build time
    std::uint64_t seed = 0;
    std::string started;          // ISO 8601 UTC
    std::string finished;
    std::string config_snapshot;  // canonical JSON text (embedded as JSON)
    std::vector<std::pair<std::string, std::string>> artifacts;  // file -> sha256
};

std::string code_version();
std::string iso8601_utc_now();

// SHA-256 of a file's bytes, lowercase hex. Throws if the file cannot be read.
std::string sha256_file(const std::string& path);

// Hash `name` under `dir` and append it to the manifest's artifact list.
void add_artifact(RunManifest& m, const std::string& dir, const std::string& name);

// Serialize and write <dir>/manifest.json atomically.
void write_manifest(const std::string& dir, const RunManifest& m);

} // namespace qcw
