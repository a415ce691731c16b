#include "qcw/csvio.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace qcw {

void write_field_csv(const std::string& path, const ControlField& f) {
    f.validate();
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("write_field_csv: cannot open " + path);
    std::fprintf(fp, "# picture=%s\n",
                 f.picture == Picture::Schrodinger ? "schrodinger" : "rwa");
    std::fprintf(fp, "# interp=%s\n",
                 f.interp == EnvelopeInterp::PiecewiseConstant ? "pwc" : "linear");
    std::fprintf(fp, "# omega_y=%.17g\n", f.omega_y);
    std::fprintf(fp, "# omega_z=%.17g\n", f.omega_z);
    std::fputs("t,env_y,env_z\n", fp);
    for (std::size_t i = 0; i < f.grid.size(); ++i)
        std::fprintf(fp, "%.17g,%.17g,%.17g\n", f.grid[i], f.env_y[i], f.env_z[i]);
    if (std::fclose(fp) != 0) throw std::runtime_error("write_field_csv: write failed");
}

namespace {

// value of a "# key=value" comment line, or null if the key differs
const char* comment_value(const std::string& line, const char* key) {
    const std::string prefix = std::string("# ") + key + "=";
    return line.rfind(prefix, 0) == 0 ? line.c_str() + prefix.size() : nullptr;
}

double parse_double(const char* s, const char* what) {
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || !std::isfinite(v))
        throw std::runtime_error(std::string("read_field_csv: bad ") + what + " value '" + s +
                                 "'");
    return v;
}

} // namespace

ControlField read_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_field_csv: cannot open " + path);
    ControlField f;
    bool header_seen = false;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (const char* v = comment_value(line, "picture")) {
                if (std::strcmp(v, "rwa") == 0) f.picture = Picture::RwaInteraction;
                else if (std::strcmp(v, "schrodinger") == 0) f.picture = Picture::Schrodinger;
                else throw std::runtime_error("read_field_csv: unknown picture '" +
                                              std::string(v) + "'");
            } else if (const char* v2 = comment_value(line, "interp")) {
                if (std::strcmp(v2, "pwc") == 0) f.interp = EnvelopeInterp::PiecewiseConstant;
                else if (std::strcmp(v2, "linear") == 0) f.interp = EnvelopeInterp::Linear;
                else throw std::runtime_error("read_field_csv: unknown interp '" +
                                              std::string(v2) + "'");
            } else if (const char* v3 = comment_value(line, "omega_y")) {
                f.omega_y = parse_double(v3, "omega_y");
            } else if (const char* v4 = comment_value(line, "omega_z")) {
                f.omega_z = parse_double(v4, "omega_z");
            }
            continue;  // unknown comments pass through harmlessly
        }
        if (!header_seen) {
            if (line != "t,env_y,env_z")
                throw std::runtime_error("read_field_csv: expected header t,env_y,env_z, got '" +
                                         line + "'");
            header_seen = true;
            continue;
        }
        double t = 0.0, ey = 0.0, ez = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &ey, &ez) != 3)
            throw std::runtime_error("read_field_csv: malformed row '" + line + "'");
        f.grid.push_back(t);
        f.env_y.push_back(ey);
        f.env_z.push_back(ez);
    }
    if (f.grid.size() < 2) throw std::runtime_error("read_field_csv: fewer than 2 samples");
    // snap onto the exact uniform grid (tolerates formatting noise, keeps
    // node times bitwise identical to freshly constructed fields)
    const std::size_t n = f.grid.size() - 1;
    for (std::size_t i = 0; i <= n; ++i) {
        const double want = double(i) / double(n);
        if (std::abs(f.grid[i] - want) > 1e-9)
            throw std::runtime_error("read_field_csv: grid is not uniform over [0,1]");
        f.grid[i] = want;
    }
    f.validate();
    return f;
}

} // namespace qcw
