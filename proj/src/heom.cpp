#include "qcw/heom.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

#include "qcw/sha256.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace qcw {

namespace {

double binomial(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b *= double(n - k + i) / double(i);
    return b;
}

void put_bytes(std::vector<std::uint8_t>& v, const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    v.insert(v.end(), b, b + n);
}
void put_u32(std::vector<std::uint8_t>& v, std::uint32_t x) { put_bytes(v, &x, 4); }
void put_f64(std::vector<std::uint8_t>& v, double x) { put_bytes(v, &x, 8); }

std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t x;
    std::memcpy(&x, p, 4);
    return x;
}
double get_f64(const std::uint8_t* p) {
    double x;
    std::memcpy(&x, p, 8);
    return x;
}

std::vector<std::uint8_t> hex_to_bytes(const std::string& hex) {
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::uint8_t(std::stoi(hex.substr(2 * i, 2), nullptr, 16));
    return out;
}

constexpr char kMagic[8] = {'Q', 'C', 'W', 'H', 'E', 'O', 'M', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderSize = 8 + 4 + 32 + 4 + 4 + 8;

} // namespace

HierarchyTable enumerate_ados(int K, int L, std::size_t cap) {
    if (K < 1) throw std::invalid_argument("enumerate_ados: need at least one mode");
    // depth 0 is legal: a single zero index with no neighbours, i.e. the bath
    // never acts and propagation is purely Hamiltonian (the isolated backend)
    if (L < 0) throw std::invalid_argument("enumerate_ados: depth must be >= 0");
    const double count = binomial(K + L, K);
    if (count > double(cap))
        throw std::runtime_error("enumerate_ados: hierarchy of " + std::to_string(count) +
                                 " indices exceeds the capacity cap of " + std::to_string(cap));

    HierarchyTable tab;
    tab.K = K;
    tab.L = L;
    tab.indices.reserve(std::size_t(count));

    // graded-lexicographic: ascending total degree, lexicographic within it
    std::vector<std::uint8_t> cur(K, 0);
    auto emit_degree = [&](auto&& self, int pos, int left) -> void {
        if (pos == K - 1) {
            cur[pos] = std::uint8_t(left);
            tab.indices.push_back(cur);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            cur[pos] = std::uint8_t(v);
            self(self, pos + 1, left - v);
        }
    };
    for (int d = 0; d <= L; ++d) emit_degree(emit_degree, 0, d);

    std::map<std::vector<std::uint8_t>, std::int32_t> pos_of;
    for (std::size_t i = 0; i < tab.indices.size(); ++i)
        pos_of[tab.indices[i]] = std::int32_t(i);

    tab.up.assign(tab.indices.size() * K, -1);
    tab.down.assign(tab.indices.size() * K, -1);
    std::vector<std::uint8_t> probe;
    for (std::size_t i = 0; i < tab.indices.size(); ++i) {
        const auto& n = tab.indices[i];
        int degree = 0;
        for (int k = 0; k < K; ++k) degree += n[k];
        for (int k = 0; k < K; ++k) {
            if (degree + 1 <= L) {
                probe = n;
                ++probe[k];
                tab.up[i * K + k] = pos_of.at(probe);
            }
            if (n[k] > 0) {
                probe = n;
                --probe[k];
                tab.down[i * K + k] = pos_of.at(probe);
            }
        }
    }
    return tab;
}

HeomConfig default_heom_config() {
    HeomConfig cfg;
    cfg.baths = {default_tuning_bath(), default_coupling_bath()};
    for (const auto& b : cfg.baths) cfg.expansions.push_back(expand_correlation(b));
    cfg.depth = 6;
    return cfg;
}

HeomKernel::HeomKernel(const HeomConfig& cfg) : cfg_(cfg) {
    if (cfg.baths.empty()) throw std::invalid_argument("HeomKernel: no baths");
    if (cfg.expansions.size() != cfg.baths.size())
        throw std::invalid_argument("HeomKernel: expansions must parallel baths");

    for (std::size_t b = 0; b < cfg.baths.size(); ++b) {
        coupling_.push_back(cfg.baths[b].coupling_op);
        if ((coupling_.back() - coupling_.back().adjoint()).cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("HeomKernel: coupling operator of bath '" +
                                        cfg.baths[b].label + "' is not Hermitian");
        bath_begin_.push_back(int(gamma_.size()));
        for (const auto& m : cfg.expansions[b].modes) {
            alpha_.push_back(m.alpha);
            alpha_tilde_.push_back(m.alpha_tilde);
            gamma_.push_back(m.gamma);
            mode_bath_.push_back(int(b));
            gamma_max_ = std::max(gamma_max_, std::abs(m.gamma));
        }
        bath_end_.push_back(int(gamma_.size()));
    }
    if (gamma_.empty()) throw std::invalid_argument("HeomKernel: baths carry no expansion modes");

    table_ = enumerate_ados(int(gamma_.size()), cfg.depth, cfg.max_ados);

    iw_.resize(table_.size());
    for (std::size_t i = 0; i < table_.size(); ++i) {
        cplx w = 0.0;
        const auto& n = table_.indices[i];
        for (int k = 0; k < table_.K; ++k) w += double(n[k]) * gamma_[k];
        iw_[i] = I1 * w;
    }

    // configuration fingerprint: expansions + depth + system
    Sha256 sha;
    const char tag[] = "qcw-hierarchy-config-v1";
    sha.update(tag, sizeof tag);
    auto sha_d = [&](double x) { sha.update(&x, 8); };
    auto sha_u = [&](std::uint32_t x) { sha.update(&x, 4); };
    sha_u(std::uint32_t(cfg.depth));
    sha_u(std::uint32_t(cfg.baths.size()));
    for (std::size_t b = 0; b < cfg.baths.size(); ++b) {
        const auto& label = cfg.baths[b].label;
        sha.update(label.data(), label.size());
        sha.update("\0", 1);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                sha_d(cfg.baths[b].coupling_op(r, c).real());
                sha_d(cfg.baths[b].coupling_op(r, c).imag());
            }
        sha_u(std::uint32_t(cfg.expansions[b].modes.size()));
        for (const auto& m : cfg.expansions[b].modes) {
            sha_d(m.alpha.real());
            sha_d(m.alpha.imag());
            sha_d(m.alpha_tilde.real());
            sha_d(m.alpha_tilde.imag());
            sha_d(m.gamma.real());
            sha_d(m.gamma.imag());
        }
    }
    const SystemSpec& s = cfg.system;
    for (double x : {s.e1, s.e2, s.mu_y, s.mu_z, s.omega_y, s.omega_z, s.detuning_y, s.detuning_z})
        sha_d(x);
    hash_ = sha.hex_digest();
}

int HeomKernel::substeps_per_interval(const ControlField& f) const {
    if (cfg_.substeps > 0) return cfg_.substeps;
    double hmax = gamma_max_;
    for (double t : f.grid) {
        const Mat3 h = build_h(f, t, cfg_.system);
        hmax = std::max(hmax, h.cwiseAbs().rowwise().sum().maxCoeff());
    }
    const double dt_grid = f.grid[1] - f.grid[0];
    return std::max(1, int(std::ceil(dt_grid * hmax / 0.05)));
}

void HeomKernel::rhs(const std::vector<Mat3>& in, std::vector<Mat3>& out, const Mat3& h) const {
    const std::size_t n = table_.size();
    const int K = table_.K;
    const int nb = int(coupling_.size());
    out.resize(n);
    for (std::size_t idx = 0; idx < n; ++idx) {
        const Mat3& r = in[idx];
        Mat3 o = -I1 * (h * r - r * h) + iw_[idx] * r;
        const std::int32_t* up = &table_.up[idx * K];
        for (int b = 0; b < nb; ++b) {
            Mat3 acc;
            bool any = false;
            for (int k = bath_begin_[b]; k < bath_end_[b]; ++k) {
                if (up[k] < 0) continue;
                if (any) acc += in[up[k]];
                else { acc = in[up[k]]; any = true; }
            }
            if (any) o -= I1 * (coupling_[b] * acc - acc * coupling_[b]);
        }
        const std::int32_t* dn = &table_.down[idx * K];
        const std::uint8_t* occ = table_.indices[idx].data();
        for (int k = 0; k < K; ++k) {
            if (occ[k] == 0) continue;
            const Mat3& rd = in[dn[k]];
            const Mat3& S = coupling_[mode_bath_[k]];
            o -= I1 * double(occ[k]) * (alpha_[k] * (S * rd) - alpha_tilde_[k] * (rd * S));
        }
        out[idx] = o;
    }
}

void HeomKernel::rhs_adjoint(const std::vector<Mat3>& in, std::vector<Mat3>& out,
                             const Mat3& h) const {
    const std::size_t n = table_.size();
    const int K = table_.K;
    const int nb = int(coupling_.size());
    out.resize(n);
    for (std::size_t idx = 0; idx < n; ++idx) {
        const Mat3& x = in[idx];
        Mat3 o = I1 * (h * x - x * h) + std::conj(iw_[idx]) * x;
        const std::int32_t* dn = &table_.down[idx * K];
        const std::uint8_t* occ = table_.indices[idx].data();
        for (int b = 0; b < nb; ++b) {
            Mat3 acc;
            bool any = false;
            for (int k = bath_begin_[b]; k < bath_end_[b]; ++k) {
                if (occ[k] == 0) continue;
                if (any) acc += in[dn[k]];
                else { acc = in[dn[k]]; any = true; }
            }
            if (any) o += I1 * (coupling_[b] * acc - acc * coupling_[b]);
        }
        const std::int32_t* up = &table_.up[idx * K];
        for (int k = 0; k < K; ++k) {
            if (up[k] < 0) continue;
            const Mat3& xu = in[up[k]];
            const Mat3& S = coupling_[mode_bath_[k]];
            o += I1 * double(occ[k] + 1) *
                 (std::conj(alpha_[k]) * (S * xu) - std::conj(alpha_tilde_[k]) * (xu * S));
        }
        out[idx] = o;
    }
}

HierarchyState HeomKernel::cold_start(const Mat3& rho0, double t0) const {
    HierarchyState s;
    s.ados.assign(table_.size(), Mat3::Zero());
    s.ados[0] = rho0;
    s.t = t0;
    s.config_hash = hash_;
    return s;
}

namespace {

std::size_t grid_index(const ControlField& f, double t, const char* what) {
    const double dt = f.grid[1] - f.grid[0];
    const double x = (t - f.grid.front()) / dt;
    const auto i = std::size_t(std::llround(x));
    if (i >= f.grid.size() || std::abs(f.grid[i] - t) > 1e-9)
        throw std::invalid_argument(std::string("propagate_heom: ") + what +
                                    " must lie on the field grid");
    return i;
}

HeomRun run_hierarchy(HierarchyState state, const ControlField& field, const HeomKernel& kernel,
                      double t1) {
    field.validate();
    if (field.picture != Picture::Schrodinger)
        throw std::invalid_argument(
            "propagate_heom: hierarchy propagates in the Schrodinger picture only");
    const std::size_t i0 = grid_index(field, state.t, "start time");
    const std::size_t i1 = grid_index(field, t1, "end time");
    if (i1 < i0) throw std::invalid_argument("propagate_heom: end time precedes the state");

    const int m = kernel.substeps_per_interval(field);
    const SystemSpec& sys = kernel.config().system;
    const double trace0 = state.ados[0].trace().real();

    HeomRun run;
    run.traj.t.reserve(i1 - i0 + 1);
    run.traj.rho.reserve(i1 - i0 + 1);
    run.rho_dot.reserve(i1 - i0 + 1);

    const std::size_t n = kernel.table().size();
    std::vector<Mat3> k1(n), k2(n), k3(n), k4(n), tmp(n), scratch(n);

    auto record = [&](double t) {
        run.traj.t.push_back(t);
        run.traj.rho.push_back(state.ados[0]);
        kernel.rhs(state.ados, scratch, build_h(field, t, sys));
        run.rho_dot.push_back(scratch[0]);
    };
    record(state.t);

    for (std::size_t i = i0; i < i1; ++i) {
        const double h = (field.grid[i + 1] - field.grid[i]) / double(m);
        double t = field.grid[i];
        for (int step = 0; step < m; ++step) {
            kernel.rhs(state.ados, k1, build_h_interval(field, i, t, sys));
            for (std::size_t j = 0; j < n; ++j) tmp[j] = state.ados[j] + (0.5 * h) * k1[j];
            const Mat3 hmid = build_h_interval(field, i, t + 0.5 * h, sys);
            kernel.rhs(tmp, k2, hmid);
            for (std::size_t j = 0; j < n; ++j) tmp[j] = state.ados[j] + (0.5 * h) * k2[j];
            kernel.rhs(tmp, k3, hmid);
            for (std::size_t j = 0; j < n; ++j) tmp[j] = state.ados[j] + h * k3[j];
            kernel.rhs(tmp, k4, build_h_interval(field, i, t + h, sys));
            for (std::size_t j = 0; j < n; ++j)
                state.ados[j] += (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            t += h;
        }
        state.t = field.grid[i + 1];
        const double drift = std::abs(state.ados[0].trace().real() - trace0);
        if (!(drift <= 1e-5))  // negated form also catches NaN from a blown-up step
            throw std::runtime_error(
                "propagate_heom: trace drift exceeds 1e-5 at t=" + std::to_string(state.t) +
                " (depth " + std::to_string(kernel.config().depth) + ", " + std::to_string(m) +
                " substeps/interval) — deepen the hierarchy or refine the step");
        record(state.t);
    }
    run.state = std::move(state);
    return run;
}

} // namespace

HeomRun propagate_heom(const Mat3& rho0, const ControlField& field, const HeomKernel& kernel,
                       double t0, double t1) {
    return run_hierarchy(kernel.cold_start(rho0, t0), field, kernel, t1);
}

HeomRun propagate_heom(const HierarchyState& start, const ControlField& field,
                       const HeomKernel& kernel, double t1) {
    if (start.config_hash != kernel.config_hash())
        throw std::invalid_argument(
            "propagate_heom: state was produced under a different hierarchy configuration");
    if (start.ados.size() != kernel.table().size())
        throw std::invalid_argument("propagate_heom: state size does not match the hierarchy");
    return run_hierarchy(start, field, kernel, t1);
}

std::vector<std::uint8_t> checkpoint(const HierarchyState& s, const HeomKernel& kernel) {
    if (s.config_hash != kernel.config_hash())
        throw std::invalid_argument("checkpoint: state/kernel configuration mismatch");
    if (s.ados.size() != kernel.table().size())
        throw std::invalid_argument("checkpoint: state size does not match the hierarchy");
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + s.ados.size() * 18 * 8);
    put_bytes(out, kMagic, 8);
    put_u32(out, kVersion);
    const auto hash = hex_to_bytes(s.config_hash);
    put_bytes(out, hash.data(), hash.size());
    put_u32(out, std::uint32_t(kernel.table().K));
    put_u32(out, std::uint32_t(kernel.table().L));
    put_f64(out, s.t);
    for (const Mat3& a : s.ados) {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) put_f64(out, a(r, c).real());
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) put_f64(out, a(r, c).imag());
    }
    return out;
}

HierarchyState restore(const std::vector<std::uint8_t>& bytes, const HeomKernel& kernel) {
    const std::size_t count = kernel.table().size();
    if (bytes.size() != kHeaderSize + count * 18 * 8)
        throw std::runtime_error("restore: checkpoint size does not match the hierarchy "
                                 "(truncated stream or different depth)");
    if (std::memcmp(bytes.data(), kMagic, 8) != 0)
        throw std::runtime_error("restore: not a hierarchy checkpoint (bad magic)");
    const std::uint8_t* p = bytes.data() + 8;
    if (get_u32(p) != kVersion)
        throw std::runtime_error("restore: unsupported checkpoint version");
    p += 4;
    const auto want = hex_to_bytes(kernel.config_hash());
    if (std::memcmp(p, want.data(), 32) != 0)
        throw std::runtime_error("restore: checkpoint was written under a different "
                                 "hierarchy configuration");
    p += 32;
    const auto K = get_u32(p);
    p += 4;
    const auto L = get_u32(p);
    p += 4;
    if (int(K) != kernel.table().K || int(L) != kernel.table().L)
        throw std::runtime_error("restore: hierarchy shape mismatch (checkpoint K=" +
                                 std::to_string(K) + ", L=" + std::to_string(L) + ")");
    HierarchyState s;
    s.t = get_f64(p);
    p += 8;
    s.config_hash = kernel.config_hash();
    s.ados.resize(count);
    for (Mat3& a : s.ados) {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                a(r, c) = cplx(get_f64(p), 0.0);
                p += 8;
            }
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                a(r, c) += cplx(0.0, get_f64(p));
                p += 8;
            }
    }
    return s;
}

void save_checkpoint_file(const std::string& path, const HierarchyState& s,
                          const HeomKernel& kernel) {
    const auto bytes = checkpoint(s, kernel);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("save_checkpoint_file: cannot open " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!f) throw std::runtime_error("save_checkpoint_file: write failed for " + path);
}

HierarchyState load_checkpoint_file(const std::string& path, const HeomKernel& kernel) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_checkpoint_file: cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return restore(bytes, kernel);
}

} // namespace qcw
