#include "qcw/policy.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace qcw {

namespace {

constexpr int kLayerSizes[5] = {9, 100, 50, 30, 2};
constexpr double kLogStdMin = -5.0, kLogStdMax = 1.0;
constexpr double kLog2Pi = 1.8378770664093453;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Forward {
    std::array<Eigen::VectorXd, 3> h;  // post-tanh hidden activations
    Eigen::Vector2d z;                 // raw mean-head output
    Eigen::Vector2d sd;                // sigmoid(z)
    Action mu;
    Eigen::Vector2d sigma;
};

Forward forward_pass(const PolicyNetwork& p, const Obs& s) {
    Forward f;
    Eigen::VectorXd x = s;
    for (int l = 0; l < 3; ++l) {
        f.h[std::size_t(l)] = (p.w[std::size_t(l)] * x + p.b[std::size_t(l)]).array().tanh();
        x = f.h[std::size_t(l)];
    }
    f.z = p.w[3] * x + p.b[3];
    const double span = p.a_max - p.a_min;
    for (int i = 0; i < 2; ++i) {
        f.sd(i) = sigmoid(f.z(i));
        f.mu(i) = p.a_min + span * f.sd(i);
    }
    f.sigma = p.sigma();
    return f;
}

// little-endian byte helpers (format stability; the platform assert lives in
// the hierarchy checkpoint code and this file mirrors its conventions)
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}
void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(std::uint8_t(u >> (8 * i)));
}
std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t& at) {
    if (at + 4 > in.size()) throw std::invalid_argument("policy checkpoint truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(in[at + std::size_t(i)]) << (8 * i);
    at += 4;
    return v;
}
double get_f64(const std::vector<std::uint8_t>& in, std::size_t& at) {
    if (at + 8 > in.size()) throw std::invalid_argument("policy checkpoint truncated");
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= std::uint64_t(in[at + std::size_t(i)]) << (8 * i);
    at += 8;
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

constexpr char kMagic[8] = {'Q', 'C', 'W', 'P', 'O', 'L', 'Y', '1'};
constexpr std::uint32_t kVersion = 1;

} // namespace

std::size_t PolicyNetwork::n_params() const {
    std::size_t n = 0;
    for (int l = 0; l < 4; ++l)
        n += std::size_t(w[std::size_t(l)].size()) + std::size_t(b[std::size_t(l)].size());
    return n + 2;  // log-stds
}

Eigen::VectorXd PolicyNetwork::params() const {
    Eigen::VectorXd p(static_cast<Eigen::Index>(n_params()));
    Eigen::Index at = 0;
    for (int l = 0; l < 4; ++l) {
        const auto& wl = w[std::size_t(l)];
        const auto& bl = b[std::size_t(l)];
        p.segment(at, wl.size()) = Eigen::Map<const Eigen::VectorXd>(wl.data(), wl.size());
        at += wl.size();
        p.segment(at, bl.size()) = bl;
        at += bl.size();
    }
    p.segment(at, 2) = log_std;
    return p;
}

void PolicyNetwork::set_params(const Eigen::VectorXd& p) {
    if (std::size_t(p.size()) != n_params())
        throw std::invalid_argument("PolicyNetwork: parameter vector size mismatch");
    Eigen::Index at = 0;
    for (int l = 0; l < 4; ++l) {
        auto& wl = w[std::size_t(l)];
        auto& bl = b[std::size_t(l)];
        Eigen::Map<Eigen::VectorXd>(wl.data(), wl.size()) = p.segment(at, wl.size());
        at += wl.size();
        bl = p.segment(at, bl.size());
        at += bl.size();
    }
    log_std = p.segment(at, 2);
}

Action PolicyNetwork::mean(const Obs& s) const { return forward_pass(*this, s).mu; }

Eigen::Vector2d PolicyNetwork::sigma() const {
    Eigen::Vector2d out;
    for (int i = 0; i < 2; ++i)
        out(i) = std::exp(std::min(kLogStdMax, std::max(kLogStdMin, log_std(i))));
    return out;
}

PolicyNetwork init_policy(double a_min, double a_max, Rng& rng) {
    // a degenerate interval is legal: the squash pins the mean to a_min and
    // sampling clips every draw there (how a delta interval {0} is spelled)
    if (!(a_max >= a_min)) throw std::invalid_argument("init_policy: need a_max >= a_min");
    PolicyNetwork p;
    p.a_min = a_min;
    p.a_max = a_max;
    for (int l = 0; l < 4; ++l) {
        const int rows = kLayerSizes[l + 1], cols = kLayerSizes[l];
        // uniform +-1/sqrt(fan_in); the mean head an order smaller so raw
        // outputs start near 0 and the squashed mean near mid-interval
        const double r = (l == 3 ? 0.1 : 1.0) / std::sqrt(double(cols));
        auto& wl = p.w[std::size_t(l)];
        wl.resize(rows, cols);
        for (Eigen::Index j = 0; j < wl.size(); ++j) wl.data()[j] = rng.uniform(-r, r);
        p.b[std::size_t(l)] = Eigen::VectorXd::Zero(rows);
    }
    // sigma starts at 10% of the interval, clamped into the legal band (a
    // zero-width interval would otherwise store log 0)
    p.log_std.setConstant(
        std::min(kLogStdMax, std::max(kLogStdMin, std::log(0.1 * (a_max - a_min)))));
    return p;
}

ActionSample sample_action(const PolicyNetwork& policy, const Obs& s, Rng& rng) {
    const Forward f = forward_pass(policy, s);
    ActionSample out;
    out.log_prob = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double xi = rng.gaussian();
        out.raw(i) = f.mu(i) + f.sigma(i) * xi;
        out.a(i) = std::min(policy.a_max, std::max(policy.a_min, out.raw(i)));
        out.log_prob += -0.5 * xi * xi - std::log(f.sigma(i)) - 0.5 * kLog2Pi;
    }
    return out;
}

double log_prob(const PolicyNetwork& policy, const Obs& s, const Action& a) {
    const Forward f = forward_pass(policy, s);
    double lp = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double z = (a(i) - f.mu(i)) / f.sigma(i);
        lp += -0.5 * z * z - std::log(f.sigma(i)) - 0.5 * kLog2Pi;
    }
    return lp;
}

Eigen::VectorXd log_prob_grad(const PolicyNetwork& policy, const Obs& s, const Action& a) {
    const Forward f = forward_pass(policy, s);
    const double span = policy.a_max - policy.a_min;

    // d lnpi / d mu_i = (a_i - mu_i)/sigma_i^2; chain through the sigmoid squash
    Eigen::Vector2d dz;
    for (int i = 0; i < 2; ++i) {
        const double gmu = (a(i) - f.mu(i)) / (f.sigma(i) * f.sigma(i));
        dz(i) = gmu * span * f.sd(i) * (1.0 - f.sd(i));
    }

    PolicyNetwork g;  // gradient in network shape, flattened at the end
    g.a_min = policy.a_min;
    g.a_max = policy.a_max;

    Eigen::VectorXd delta = dz;  // backpropagated error at each layer's output
    for (int l = 3; l >= 1; --l) {
        g.w[std::size_t(l)] = delta * f.h[std::size_t(l - 1)].transpose();
        g.b[std::size_t(l)] = delta;
        const Eigen::VectorXd back = policy.w[std::size_t(l)].transpose() * delta;
        delta = back.cwiseProduct((1.0 - f.h[std::size_t(l - 1)].array().square()).matrix());
    }
    g.w[0] = delta * s.transpose();
    g.b[0] = delta;

    // d lnpi / d log-std = ((a - mu)/sigma)^2 - 1 on the active interval; a
    // clamped log-std is insensitive to its parameter
    for (int i = 0; i < 2; ++i) {
        const bool active = policy.log_std(i) > kLogStdMin && policy.log_std(i) < kLogStdMax;
        const double z = (a(i) - f.mu(i)) / f.sigma(i);
        g.log_std(i) = active ? z * z - 1.0 : 0.0;
    }
    return g.params();
}

UpdateResult reinforce_update(PolicyNetwork& policy, const std::vector<Episode>& batch,
                              double eta, bool baseline) {
    if (batch.empty()) throw std::invalid_argument("reinforce_update: empty batch");
    if (!(eta > 0.0)) throw std::invalid_argument("reinforce_update: eta must be positive");

    UpdateResult res;
    for (const Episode& ep : batch) res.mean_return += ep.ret;
    res.mean_return /= double(batch.size());
    const double b = baseline ? res.mean_return : 0.0;

    Eigen::VectorXd delta = Eigen::VectorXd::Zero(Eigen::Index(policy.n_params()));
    for (const Episode& ep : batch) {
        if (ep.s.size() != ep.a.size())
            throw std::invalid_argument("reinforce_update: malformed episode");
        const double adv = ep.ret - b;
        if (adv == 0.0) continue;
        Eigen::VectorXd score = Eigen::VectorXd::Zero(delta.size());
        for (std::size_t t = 0; t < ep.s.size(); ++t)
            score += log_prob_grad(policy, ep.s[t], ep.a[t]);
        delta += adv * score;
    }
    delta *= eta / double(batch.size());

    if (!delta.allFinite()) {
        res.skipped = true;
        return res;
    }
    policy.set_params(policy.params() + delta);
    return res;
}

std::vector<std::uint8_t> policy_checkpoint(const PolicyNetwork& policy) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 8);
    put_u32(out, kVersion);
    put_u32(out, 4);  // layer count
    for (int l = 0; l < 4; ++l) {
        put_u32(out, std::uint32_t(policy.w[std::size_t(l)].rows()));
        put_u32(out, std::uint32_t(policy.w[std::size_t(l)].cols()));
    }
    put_f64(out, policy.a_min);
    put_f64(out, policy.a_max);
    put_f64(out, policy.log_std(0));
    put_f64(out, policy.log_std(1));
    for (int l = 0; l < 4; ++l) {
        const auto& wl = policy.w[std::size_t(l)];
        for (Eigen::Index j = 0; j < wl.size(); ++j) put_f64(out, wl.data()[j]);
        const auto& bl = policy.b[std::size_t(l)];
        for (Eigen::Index j = 0; j < bl.size(); ++j) put_f64(out, bl(j));
    }
    return out;
}

PolicyNetwork restore_policy(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 8) != 0)
        throw std::invalid_argument("policy checkpoint: bad magic");
    std::size_t at = 8;
    if (get_u32(bytes, at) != kVersion)
        throw std::invalid_argument("policy checkpoint: unsupported version");
    if (get_u32(bytes, at) != 4)
        throw std::invalid_argument("policy checkpoint: unexpected layer count");
    PolicyNetwork p;
    std::array<std::pair<std::uint32_t, std::uint32_t>, 4> shapes;
    for (auto& sh : shapes) {
        sh.first = get_u32(bytes, at);
        sh.second = get_u32(bytes, at);
    }
    for (int l = 0; l < 4; ++l)
        if (shapes[std::size_t(l)].first != std::uint32_t(kLayerSizes[l + 1]) ||
            shapes[std::size_t(l)].second != std::uint32_t(kLayerSizes[l]))
            throw std::invalid_argument("policy checkpoint: layer shape mismatch");
    p.a_min = get_f64(bytes, at);
    p.a_max = get_f64(bytes, at);
    p.log_std(0) = get_f64(bytes, at);
    p.log_std(1) = get_f64(bytes, at);
    for (int l = 0; l < 4; ++l) {
        auto& wl = p.w[std::size_t(l)];
        wl.resize(kLayerSizes[l + 1], kLayerSizes[l]);
        for (Eigen::Index j = 0; j < wl.size(); ++j) wl.data()[j] = get_f64(bytes, at);
        auto& bl = p.b[std::size_t(l)];
        bl.resize(kLayerSizes[l + 1]);
        for (Eigen::Index j = 0; j < bl.size(); ++j) bl(j) = get_f64(bytes, at);
    }
    if (at != bytes.size())
        throw std::invalid_argument("policy checkpoint: trailing bytes");
    return p;
}

void save_policy_file(const PolicyNetwork& policy, const std::string& path) {
    const std::vector<std::uint8_t> bytes = policy_checkpoint(policy);
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("save_policy_file: cannot open " + path);
    const std::size_t n = std::fwrite(bytes.data(), 1, bytes.size(), fp);
    std::fclose(fp);
    if (n != bytes.size()) throw std::runtime_error("save_policy_file: short write to " + path);
}

PolicyNetwork load_policy_file(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw std::runtime_error("load_policy_file: cannot open " + path);
    std::vector<std::uint8_t> bytes;
    std::uint8_t buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, fp)) > 0) bytes.insert(bytes.end(), buf, buf + n);
    std::fclose(fp);
    return restore_policy(bytes);
}

} // namespace qcw
