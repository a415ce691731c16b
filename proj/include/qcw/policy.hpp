#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qcw/rng.hpp"

// Gaussian policy over the two control actions: an MLP 9 -> 100 -> 50 -> 30
// -> 2 with tanh hidden layers produces the action means, squashed onto
// [a_min, a_max] by an affine sigmoid so the mean always respects the action
// interval. Exploration is a learned state-independent log-std per head,
// clamped to [-5, 1] and initialized so sigma is 10% of the interval. Sampled
// actions are clipped at the interval edges while gradients use the unclipped
// Gaussian log-density (boundary policy).

namespace qcw {

using Obs = Eigen::Matrix<double, 9, 1>;
using Action = Eigen::Vector2d;

struct PolicyNetwork {
    std::array<Eigen::MatrixXd, 4> w;  // 100x9, 50x100, 30x50, 2x30
    std::array<Eigen::VectorXd, 4> b;
    Eigen::Vector2d log_std = Eigen::Vector2d::Zero();
    double a_min = 0.0, a_max = 3.0;

    std::size_t n_params() const;
    Eigen::VectorXd params() const;            // flat copy (column-major blocks)
    void set_params(const Eigen::VectorXd& p);

    Action mean(const Obs& s) const;
    Eigen::Vector2d sigma() const;             // exp of the clamped log-stds
};

// Small random weights (mean starts near mid-interval), sigma = 10% interval.
PolicyNetwork init_policy(double a_min, double a_max, Rng& rng);

struct ActionSample {
    Action a;         // clipped to [a_min, a_max]
    Action raw;       // the pre-clip Gaussian draw
    double log_prob;  // pre-clip log-density at the draw
};
ActionSample sample_action(const PolicyNetwork& policy, const Obs& s, Rng& rng);

double log_prob(const PolicyNetwork& policy, const Obs& s, const Action& a);

// Exact gradient of ln pi(a|s) with respect to every parameter, flattened in
// params() order (backpropagation, no approximation).
Eigen::VectorXd log_prob_grad(const PolicyNetwork& policy, const Obs& s, const Action& a);

struct Episode {
    std::vector<Obs> s;
    std::vector<Action> a;
    std::vector<double> r;  // zero except the final step
    double ret = 0.0;       // R(tau) = r_N
};

struct UpdateResult {
    double mean_return = 0.0;
    bool skipped = false;  // non-finite gradient: parameters left untouched
};

// theta <- theta + eta (1/M) sum_tau (R - b) sum_t grad ln pi(a_t|s_t), with
// b the batch mean return when baseline is set and 0 otherwise.
UpdateResult reinforce_update(PolicyNetwork& policy, const std::vector<Episode>& batch,
                              double eta, bool baseline);

// Versioned checkpoint: header + little-endian doubles.
std::vector<std::uint8_t> policy_checkpoint(const PolicyNetwork& policy);
PolicyNetwork restore_policy(const std::vector<std::uint8_t>& bytes);
void save_policy_file(const PolicyNetwork& policy, const std::string& path);
PolicyNetwork load_policy_file(const std::string& path);

} // namespace qcw
