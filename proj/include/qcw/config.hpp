#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcw/bath.hpp"
#include "qcw/env.hpp"
#include "qcw/heom.hpp"
#include "qcw/lindblad.hpp"
#include "qcw/model.hpp"

// Workbench configuration: one JSON document covering the system, the baths,
// the Lindblad rate calibration, hierarchy settings, and the two optimizer
// blocks, plus run bookkeeping (seed, experiment id, output directory).
// Parsing is strict — unknown keys and type mismatches are rejected with the
// JSON-pointer path of the offending entry — and every omitted key falls back
// to the workbench defaults, so the empty document "{}" (or no --config at
// all) runs the standard scenario.

namespace qcw {

struct HeomSettings {
    int depth = 6;
    int substeps = 0;  // 0 = auto from the 0.05 rule
    std::size_t max_ados = 2000000;
};

struct RlSettings {
    Backend backend = Backend::Isolated;
    ActionMode action_mode = ActionMode::Absolute;
    std::size_t n_steps = 50;
    double a_min = 0.0;
    double a_max = 3.0;
    double eta = 1e-3;
    std::size_t batch = 10;
    std::size_t episodes = 100;
    bool baseline = true;
    std::string guess = "zero";  // delta mode base field: "zero" | "sine-squared"
    double guess_peak_y = 4.443;
    double guess_peak_z = 4.443;
};

struct OctSettings {
    double alpha = 2e-4;
    int iterations = 15;
    int depth = -1;  // hierarchy depth override; -1 = inherit heom.depth
    double guess_peak_y = 4.443;
    double guess_peak_z = 4.443;
    std::size_t guess_n = 2000;
};

struct RunSettings {
    std::uint64_t seed = 0;
    std::string experiment = "workbench";
    std::string out;  // empty: the CLI picks runs/<verb>
};

struct WorkbenchConfig {
    SystemSpec system;
    std::vector<BathSpec> baths;            // defaults: tuning + coupling
    std::vector<CollapseChannel> rates;     // defaults: the four constant channels
    HeomSettings heom;
    RlSettings rl;
    OctSettings oct;
    RunSettings run;
};

WorkbenchConfig default_config();

// Parse a JSON document; `origin` names the source in error messages (the
// file path, usually). Throws std::invalid_argument on any schema violation.
WorkbenchConfig parse_config(const std::string& text, const std::string& origin = "<config>");

// Read and parse a file; an empty path yields default_config().
WorkbenchConfig load_config_file(const std::string& path);

// Canonical JSON snapshot of a fully resolved configuration: every key
// explicit, keys sorted, numbers at full precision. Identical configurations
// produce identical snapshots, which is what run manifests hash.
std::string config_snapshot(const WorkbenchConfig& wc);

// Name <-> enum maps shared by the config schema and the CLI flags.
Backend backend_from_name(const std::string& name);
std::string backend_name(Backend b);
ActionMode action_mode_from_name(const std::string& name);
std::string action_mode_name(ActionMode m);

} // namespace qcw
