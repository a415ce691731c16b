#include "qcw/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qcw {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& path,
                       const std::string& what) {
    throw std::invalid_argument(origin + ": " + (path.empty() ? "/" : path) + ": " + what);
}

void require_object(const json& j, const std::string& origin, const std::string& path) {
    if (!j.is_object()) fail(origin, path, std::string("expected an object, got ") + j.type_name());
}

void require_array(const json& j, const std::string& origin, const std::string& path) {
    if (!j.is_array()) fail(origin, path, std::string("expected an array, got ") + j.type_name());
}

// strict schema: every key in the object must be in the whitelist
void check_keys(const json& obj, const std::string& origin, const std::string& path,
                std::initializer_list<const char*> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) { ok = true; break; }
        if (!ok) fail(origin, path + "/" + it.key(), "unknown key");
    }
}

double as_double(const json& v, const std::string& origin, const std::string& path) {
    if (!v.is_number()) fail(origin, path, std::string("expected a number, got ") + v.type_name());
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(origin, path, "expected a finite number");
    return x;
}

long long as_int(const json& v, const std::string& origin, const std::string& path) {
    if (!v.is_number_integer())
        fail(origin, path, std::string("expected an integer, got ") + v.type_name());
    return v.get<long long>();
}

bool as_bool(const json& v, const std::string& origin, const std::string& path) {
    if (!v.is_boolean()) fail(origin, path, std::string("expected a boolean, got ") + v.type_name());
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& origin, const std::string& path) {
    if (!v.is_string()) fail(origin, path, std::string("expected a string, got ") + v.type_name());
    return v.get<std::string>();
}

// optional-key getters: leave the target untouched when the key is absent
void opt_double(const json& obj, const char* key, const std::string& origin,
                const std::string& path, double& out) {
    if (obj.contains(key)) out = as_double(obj.at(key), origin, path + "/" + key);
}

void opt_bool(const json& obj, const char* key, const std::string& origin,
              const std::string& path, bool& out) {
    if (obj.contains(key)) out = as_bool(obj.at(key), origin, path + "/" + key);
}

void opt_string(const json& obj, const char* key, const std::string& origin,
                const std::string& path, std::string& out) {
    if (obj.contains(key)) out = as_string(obj.at(key), origin, path + "/" + key);
}

long long opt_int(const json& obj, const char* key, const std::string& origin,
                  const std::string& path, long long fallback, long long lo, long long hi) {
    if (!obj.contains(key)) return fallback;
    const std::string p = path + "/" + key;
    const long long v = as_int(obj.at(key), origin, p);
    if (v < lo || v > hi)
        fail(origin, p, "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
}

void parse_system(const json& j, const std::string& origin, const std::string& path,
                  SystemSpec& s) {
    require_object(j, origin, path);
    check_keys(j, origin, path,
               {"e1", "e2", "mu_y", "mu_z", "omega_y", "omega_z", "detuning_y", "detuning_z"});
    opt_double(j, "e1", origin, path, s.e1);
    opt_double(j, "e2", origin, path, s.e2);
    opt_double(j, "mu_y", origin, path, s.mu_y);
    opt_double(j, "mu_z", origin, path, s.mu_z);
    // carriers stay resonant with the (possibly overridden) level energies
    // unless set explicitly
    s.omega_y = s.e1;
    s.omega_z = s.e2;
    opt_double(j, "omega_y", origin, path, s.omega_y);
    opt_double(j, "omega_z", origin, path, s.omega_z);
    opt_double(j, "detuning_y", origin, path, s.detuning_y);
    opt_double(j, "detuning_z", origin, path, s.detuning_z);
    if (!(s.e1 > 0.0) || !(s.e2 > 0.0)) fail(origin, path, "level energies must be positive");
    if (s.omega_y < 0.0 || s.omega_z < 0.0) fail(origin, path, "carriers must be >= 0");
}

Mat3 parse_coupling_op(const json& j, const std::string& origin, const std::string& path) {
    require_array(j, origin, path);
    if (j.size() != 3) fail(origin, path, "expected 3 rows");
    Mat3 m = Mat3::Zero();
    for (std::size_t r = 0; r < 3; ++r) {
        const json& row = j.at(r);
        const std::string rp = path + "/" + std::to_string(r);
        require_array(row, origin, rp);
        if (row.size() != 3) fail(origin, rp, "expected 3 entries");
        for (std::size_t c = 0; c < 3; ++c)
            m(Eigen::Index(r), Eigen::Index(c)) =
                as_double(row.at(c), origin, rp + "/" + std::to_string(c));
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 0.0)
        fail(origin, path, "coupling operator must be symmetric");
    return m;
}

BathSpec parse_bath(const json& j, const std::string& origin, const std::string& path) {
    require_object(j, origin, path);
    check_keys(j, origin, path, {"label", "beta", "coupling_op", "terms"});
    BathSpec b;
    if (!j.contains("label")) fail(origin, path, "missing key 'label'");
    b.label = as_string(j.at("label"), origin, path + "/label");
    if (b.label.empty()) fail(origin, path + "/label", "must be non-empty");
    if (!j.contains("beta")) fail(origin, path, "missing key 'beta'");
    b.beta = as_double(j.at("beta"), origin, path + "/beta");
    if (!(b.beta > 0.0)) fail(origin, path + "/beta", "must be > 0");
    if (!j.contains("coupling_op")) fail(origin, path, "missing key 'coupling_op'");
    b.coupling_op = parse_coupling_op(j.at("coupling_op"), origin, path + "/coupling_op");
    if (!j.contains("terms")) fail(origin, path, "missing key 'terms'");
    const json& terms = j.at("terms");
    require_array(terms, origin, path + "/terms");
    if (terms.empty()) fail(origin, path + "/terms", "need at least one Lorentzian term");
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string tp = path + "/terms/" + std::to_string(i);
        const json& t = terms.at(i);
        require_object(t, origin, tp);
        check_keys(t, origin, tp, {"p", "Omega", "Gamma"});
        LorentzianTerm lt{};
        for (const char* k : {"p", "Omega", "Gamma"})
            if (!t.contains(k)) fail(origin, tp, std::string("missing key '") + k + "'");
        lt.p = as_double(t.at("p"), origin, tp + "/p");
        lt.Omega = as_double(t.at("Omega"), origin, tp + "/Omega");
        lt.Gamma = as_double(t.at("Gamma"), origin, tp + "/Gamma");
        if (!(lt.Omega > 0.0)) fail(origin, tp + "/Omega", "must be > 0");
        if (!(lt.Gamma > 0.0)) fail(origin, tp + "/Gamma", "must be > 0");
        b.params.terms.push_back(lt);
    }
    return b;
}

CollapseChannel parse_rate(const json& j, const std::string& origin, const std::string& path) {
    require_object(j, origin, path);
    check_keys(j, origin, path, {"op", "rate", "label"});
    if (!j.contains("op")) fail(origin, path, "missing key 'op'");
    const json& op = j.at("op");
    require_array(op, origin, path + "/op");
    if (op.size() != 2) fail(origin, path + "/op", "expected [i, j] level indices");
    const long long i = as_int(op.at(0), origin, path + "/op/0");
    const long long k = as_int(op.at(1), origin, path + "/op/1");
    if (i < 0 || i > 2 || k < 0 || k > 2)
        fail(origin, path + "/op", "level indices must lie in [0, 2]");
    if (!j.contains("rate")) fail(origin, path, "missing key 'rate'");
    const double rate = as_double(j.at("rate"), origin, path + "/rate");
    if (rate < 0.0) fail(origin, path + "/rate", "calibration rates must be >= 0");
    CollapseChannel ch;
    ch.op = Mat3::Zero();
    ch.op(Eigen::Index(i), Eigen::Index(k)) = 1.0;
    ch.rate = RateFunction::constant(rate);
    ch.label = "L" + std::to_string(i) + std::to_string(k);
    opt_string(j, "label", origin, path, ch.label);
    return ch;
}

void parse_heom(const json& j, const std::string& origin, const std::string& path,
                HeomSettings& h) {
    require_object(j, origin, path);
    check_keys(j, origin, path, {"depth", "substeps", "max_ados"});
    h.depth = int(opt_int(j, "depth", origin, path, h.depth, 0, 64));
    h.substeps = int(opt_int(j, "substeps", origin, path, h.substeps, 0, 1000000));
    h.max_ados =
        std::size_t(opt_int(j, "max_ados", origin, path, (long long)h.max_ados, 1, 1LL << 40));
}

void parse_rl(const json& j, const std::string& origin, const std::string& path, RlSettings& r) {
    require_object(j, origin, path);
    check_keys(j, origin, path,
               {"backend", "action_mode", "n_steps", "a_min", "a_max", "eta", "batch", "episodes",
                "baseline", "guess", "guess_peak_y", "guess_peak_z"});
    if (j.contains("backend"))
        r.backend = backend_from_name(as_string(j.at("backend"), origin, path + "/backend"));
    if (j.contains("action_mode"))
        r.action_mode =
            action_mode_from_name(as_string(j.at("action_mode"), origin, path + "/action_mode"));
    r.n_steps = std::size_t(opt_int(j, "n_steps", origin, path, (long long)r.n_steps, 1, 1000000));
    opt_double(j, "a_min", origin, path, r.a_min);
    opt_double(j, "a_max", origin, path, r.a_max);
    if (!(r.a_min < r.a_max)) fail(origin, path, "need a_min < a_max");
    opt_double(j, "eta", origin, path, r.eta);
    if (!(r.eta > 0.0)) fail(origin, path + "/eta", "must be > 0");
    r.batch = std::size_t(opt_int(j, "batch", origin, path, (long long)r.batch, 1, 1000000));
    r.episodes =
        std::size_t(opt_int(j, "episodes", origin, path, (long long)r.episodes, 1, 100000000));
    opt_bool(j, "baseline", origin, path, r.baseline);
    opt_string(j, "guess", origin, path, r.guess);
    if (r.guess != "zero" && r.guess != "sine-squared")
        fail(origin, path + "/guess", "expected \"zero\" or \"sine-squared\", got \"" + r.guess +
                                          "\"");
    opt_double(j, "guess_peak_y", origin, path, r.guess_peak_y);
    opt_double(j, "guess_peak_z", origin, path, r.guess_peak_z);
}

void parse_oct(const json& j, const std::string& origin, const std::string& path, OctSettings& o) {
    require_object(j, origin, path);
    check_keys(j, origin, path,
               {"alpha", "iterations", "depth", "guess_peak_y", "guess_peak_z", "guess_n"});
    opt_double(j, "alpha", origin, path, o.alpha);
    if (!(o.alpha > 0.0)) fail(origin, path + "/alpha", "must be > 0");
    o.iterations = int(opt_int(j, "iterations", origin, path, o.iterations, 0, 1000000));
    o.depth = int(opt_int(j, "depth", origin, path, o.depth, -1, 64));
    opt_double(j, "guess_peak_y", origin, path, o.guess_peak_y);
    opt_double(j, "guess_peak_z", origin, path, o.guess_peak_z);
    o.guess_n = std::size_t(opt_int(j, "guess_n", origin, path, (long long)o.guess_n, 2, 10000000));
}

void parse_run(const json& j, const std::string& origin, const std::string& path, RunSettings& r) {
    require_object(j, origin, path);
    check_keys(j, origin, path, {"seed", "experiment", "out"});
    if (j.contains("seed")) {
        const json& v = j.at("seed");
        if (!v.is_number_unsigned())
            fail(origin, path + "/seed", "expected a non-negative integer");
        r.seed = v.get<std::uint64_t>();
    }
    opt_string(j, "experiment", origin, path, r.experiment);
    if (r.experiment.empty()) fail(origin, path + "/experiment", "must be non-empty");
    opt_string(j, "out", origin, path, r.out);
}

// the single nonzero unit entry of a config-shaped collapse operator
std::pair<int, int> op_indices(const Mat3& op) {
    int found_i = -1, found_j = -1;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            const cplx v = op(r, c);
            if (v == cplx(0.0, 0.0)) continue;
            if (v != cplx(1.0, 0.0) || found_i >= 0)
                throw std::logic_error("config_snapshot: collapse operator is not |i><j|");
            found_i = r;
            found_j = c;
        }
    if (found_i < 0) throw std::logic_error("config_snapshot: collapse operator is zero");
    return {found_i, found_j};
}

} // namespace

WorkbenchConfig default_config() {
    WorkbenchConfig wc;
    wc.baths = {default_tuning_bath(), default_coupling_bath()};
    wc.rates = default_channels();
    return wc;
}

WorkbenchConfig parse_config(const std::string& text, const std::string& origin) {
    WorkbenchConfig wc = default_config();
    // an empty (or whitespace-only) document means "all defaults"
    bool blank = true;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) { blank = false; break; }
    if (blank) return wc;

    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(origin + ": " + e.what());
    }
    require_object(j, origin, "");
    check_keys(j, origin, "", {"system", "baths", "rates", "heom", "rl", "oct", "run"});

    if (j.contains("system")) parse_system(j.at("system"), origin, "/system", wc.system);
    if (j.contains("baths")) {
        const json& arr = j.at("baths");
        require_array(arr, origin, "/baths");
        wc.baths.clear();  // an explicit list replaces the defaults wholesale
        for (std::size_t i = 0; i < arr.size(); ++i)
            wc.baths.push_back(parse_bath(arr.at(i), origin, "/baths/" + std::to_string(i)));
    }
    if (j.contains("rates")) {
        const json& arr = j.at("rates");
        require_array(arr, origin, "/rates");
        wc.rates.clear();
        for (std::size_t i = 0; i < arr.size(); ++i)
            wc.rates.push_back(parse_rate(arr.at(i), origin, "/rates/" + std::to_string(i)));
    }
    if (j.contains("heom")) parse_heom(j.at("heom"), origin, "/heom", wc.heom);
    if (j.contains("rl")) parse_rl(j.at("rl"), origin, "/rl", wc.rl);
    if (j.contains("oct")) parse_oct(j.at("oct"), origin, "/oct", wc.oct);
    if (j.contains("run")) parse_run(j.at("run"), origin, "/run", wc.run);
    return wc;
}

WorkbenchConfig load_config_file(const std::string& path) {
    if (path.empty()) return default_config();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string config_snapshot(const WorkbenchConfig& wc) {
    json j;  // nlohmann objects iterate in key order, so the dump is canonical
    j["system"] = {{"e1", wc.system.e1},
                   {"e2", wc.system.e2},
                   {"mu_y", wc.system.mu_y},
                   {"mu_z", wc.system.mu_z},
                   {"omega_y", wc.system.omega_y},
                   {"omega_z", wc.system.omega_z},
                   {"detuning_y", wc.system.detuning_y},
                   {"detuning_z", wc.system.detuning_z}};
    j["baths"] = json::array();
    for (const BathSpec& b : wc.baths) {
        json cop = json::array();
        for (int r = 0; r < 3; ++r) {
            json row = json::array();
            for (int c = 0; c < 3; ++c) row.push_back(b.coupling_op(r, c).real());
            cop.push_back(row);
        }
        json terms = json::array();
        for (const LorentzianTerm& t : b.params.terms)
            terms.push_back({{"p", t.p}, {"Omega", t.Omega}, {"Gamma", t.Gamma}});
        j["baths"].push_back(
            {{"label", b.label}, {"beta", b.beta}, {"coupling_op", cop}, {"terms", terms}});
    }
    j["rates"] = json::array();
    for (const CollapseChannel& ch : wc.rates) {
        if (ch.rate.kind != RateKind::Constant)
            throw std::logic_error("config_snapshot: only constant calibration rates are "
                                   "config-representable");
        const auto [i, k] = op_indices(ch.op);
        j["rates"].push_back({{"op", {i, k}}, {"rate", ch.rate.c}, {"label", ch.label}});
    }
    j["heom"] = {{"depth", wc.heom.depth},
                 {"substeps", wc.heom.substeps},
                 {"max_ados", wc.heom.max_ados}};
    j["rl"] = {{"backend", backend_name(wc.rl.backend)},
               {"action_mode", action_mode_name(wc.rl.action_mode)},
               {"n_steps", wc.rl.n_steps},
               {"a_min", wc.rl.a_min},
               {"a_max", wc.rl.a_max},
               {"eta", wc.rl.eta},
               {"batch", wc.rl.batch},
               {"episodes", wc.rl.episodes},
               {"baseline", wc.rl.baseline},
               {"guess", wc.rl.guess},
               {"guess_peak_y", wc.rl.guess_peak_y},
               {"guess_peak_z", wc.rl.guess_peak_z}};
    j["oct"] = {{"alpha", wc.oct.alpha},
                {"iterations", wc.oct.iterations},
                {"depth", wc.oct.depth},
                {"guess_peak_y", wc.oct.guess_peak_y},
                {"guess_peak_z", wc.oct.guess_peak_z},
                {"guess_n", wc.oct.guess_n}};
    j["run"] = {{"seed", wc.run.seed}, {"experiment", wc.run.experiment}, {"out", wc.run.out}};
    return j.dump(2) + "\n";
}

Backend backend_from_name(const std::string& name) {
    if (name == "isolated") return Backend::Isolated;
    if (name == "lindblad-const") return Backend::LindbladConst;
    if (name == "lindblad-td") return Backend::LindbladTd;
    if (name == "heom") return Backend::Heom;
    throw std::invalid_argument(
        "unknown backend \"" + name +
        "\" (expected isolated, lindblad-const, lindblad-td, or heom)");
}

std::string backend_name(Backend b) {
    switch (b) {
    case Backend::Isolated: return "isolated";
    case Backend::LindbladConst: return "lindblad-const";
    case Backend::LindbladTd: return "lindblad-td";
    case Backend::Heom: return "heom";
    }
    throw std::logic_error("backend_name: unhandled enum value");
}

ActionMode action_mode_from_name(const std::string& name) {
    if (name == "absolute") return ActionMode::Absolute;
    if (name == "delta") return ActionMode::Delta;
    throw std::invalid_argument("unknown action mode \"" + name +
                                "\" (expected absolute or delta)");
}

std::string action_mode_name(ActionMode m) {
    switch (m) {
    case ActionMode::Absolute: return "absolute";
    case ActionMode::Delta: return "delta";
    }
    throw std::logic_error("action_mode_name: unhandled enum value");
}

} // namespace qcw
