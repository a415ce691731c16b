#include "qcw/manifest.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "qcw/sha256.hpp"

#ifndef QCW_CODE_VERSION
#define QCW_CODE_VERSION "untracked"
#endif

namespace qcw {

std::string code_version() { return QCW_CODE_VERSION; }

std::string iso8601_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("sha256_file: cannot read " + path);
    Sha256 h;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof buf);
        const std::streamsize got = in.gcount();
        if (got > 0) h.update(buf, std::size_t(got));
    }
    return h.hex_digest();
}

void add_artifact(RunManifest& m, const std::string& dir, const std::string& name) {
    m.artifacts.emplace_back(name, sha256_file(dir + "/" + name));
}

void write_manifest(const std::string& dir, const RunManifest& m) {
    nlohmann::json j;
    j["experiment"] = m.experiment;
    j["command"] = m.command;
    j["code_version"] = m.code_version;
    j["seed"] = m.seed;
    j["started"] = m.started;
    j["finished"] = m.finished;
    j["config"] = nlohmann::json::parse(m.config_snapshot);  // structured, not a string blob
    j["artifacts"] = nlohmann::json::array();
    for (const auto& [file, hash] : m.artifacts)
        j["artifacts"].push_back({{"file", file}, {"sha256", hash}});

    const std::string text = j.dump(2) + "\n";
    const std::string tmp = dir + "/manifest.json.tmp";
    const std::string dst = dir + "/manifest.json";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("write_manifest: cannot open " + tmp);
        out << text;
        if (!out.flush()) throw std::runtime_error("write_manifest: write failed on " + tmp);
    }
    if (std::rename(tmp.c_str(), dst.c_str()) != 0)
        throw std::runtime_error("write_manifest: rename to " + dst + " failed");
}

} // namespace qcw
