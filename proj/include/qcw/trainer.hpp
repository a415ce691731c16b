#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qcw/env.hpp"
#include "qcw/policy.hpp"

// REINFORCE training loop: roll a batch of episodes, step the policy along
// eta (1/M) sum (R - b) sum grad ln pi, repeat until the episode budget runs
// out. Every episode draws its randomness from a substream keyed by the
// global episode index alone, so histories are reproducible bit for bit no
// matter how episodes are scheduled.

namespace qcw {

struct TrainerConfig {
    double eta = 1e-3;
    std::size_t batch = 10;
    std::size_t total_episodes = 100;
    std::uint64_t seed = 0;
    bool baseline = true;  // subtract the batch mean return (off = plain Eq.-17 mode)
};

struct TrainingHistory {
    std::vector<double> episode_return;     // indexed by episode
    std::vector<double> area_y, area_z;     // realized envelope areas per episode
    std::vector<double> batch_mean_return;  // one entry per policy update
    std::size_t skipped_updates = 0;        // non-finite gradients, parameters untouched
    double best_return = 0.0;
    std::size_t best_episode = 0;
    ControlField best_field;  // realized field of the best episode
    PolicyNetwork policy;     // final parameters
};

// One on-policy episode; fills `realized` (when given) with the field the
// actions produced.
Episode run_episode(const Environment& env, const PolicyNetwork& policy, Rng& rng,
                    ControlField* realized = nullptr);

// `resume` (when given) picks the loop up where a previous run stopped: the
// passed history supplies the policy, the best-so-far record, and the episode
// count, which must sit on an update boundary (a multiple of the batch size,
// or the full budget).  Episode RNG substreams are keyed by global episode
// index alone, so a resumed run reproduces the uninterrupted one bit for bit.
// `on_batch` (when given) runs after every policy update with the history so
// far — the hook for checkpointing mid-run.
TrainingHistory train(const Environment& env, const TrainerConfig& tc,
                      const TrainingHistory* resume = nullptr,
                      const std::function<void(const TrainingHistory&)>& on_batch = {});

// "episode,return,area_y,area_z" rows, full double precision.
void write_history_csv(const std::string& path, const TrainingHistory& h);

} // namespace qcw
