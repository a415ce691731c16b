#include "qcw/trainer.hpp"

#include <cstdio>
#include <limits>
#include <stdexcept>
#include <utility>

namespace qcw {

Episode run_episode(const Environment& env, const PolicyNetwork& policy, Rng& rng,
                    ControlField* realized) {
    const std::size_t n = env.config().n_steps;
    Episode ep;
    ep.s.reserve(n);
    ep.a.reserve(n);
    ep.r.reserve(n);
    RolloutState st = env.reset();
    for (std::size_t t = 0; t < n; ++t) {
        const Obs s = observe(st.rho);  // the policy sees rho(t) and nothing else
        const ActionSample as = sample_action(policy, s, rng);
        const double r = env.step(st, as.a);
        ep.s.push_back(s);
        ep.a.push_back(as.a);
        ep.r.push_back(r);
    }
    ep.ret = ep.r.back();
    if (realized) *realized = std::move(st.field);
    return ep;
}

TrainingHistory train(const Environment& env, const TrainerConfig& tc,
                      const TrainingHistory* resume,
                      const std::function<void(const TrainingHistory&)>& on_batch) {
    if (!(tc.eta > 0.0)) throw std::invalid_argument("train: eta must be > 0");
    if (tc.batch < 1) throw std::invalid_argument("train: batch size must be >= 1");
    if (tc.total_episodes < 1) throw std::invalid_argument("train: need at least one episode");

    TrainingHistory h;
    std::size_t e = 0;
    if (resume) {
        h = *resume;
        e = h.episode_return.size();
        // Only update boundaries are valid entry points: between updates the
        // policy in the checkpoint is exactly the policy the loop would hold.
        if (e % tc.batch != 0 && e != tc.total_episodes)
            throw std::invalid_argument("train: resume point is not an update boundary");
        if (e > tc.total_episodes)
            throw std::invalid_argument("train: resume history exceeds the episode budget");
        if (h.area_y.size() != e || h.area_z.size() != e)
            throw std::invalid_argument("train: resume history arrays disagree in length");
    } else {
        h.episode_return.reserve(tc.total_episodes);
        h.area_y.reserve(tc.total_episodes);
        h.area_z.reserve(tc.total_episodes);
        Rng init_rng(tc.seed, "policy-init", 0);
        h.policy = init_policy(env.config().a_min, env.config().a_max, init_rng);
        h.best_return = -std::numeric_limits<double>::infinity();
    }

    while (e < tc.total_episodes) {
        const std::size_t m = std::min(tc.batch, tc.total_episodes - e);  // last batch may be short
        std::vector<Episode> batch;
        batch.reserve(m);
        for (std::size_t k = 0; k < m; ++k, ++e) {
            Rng rng(tc.seed, "episode", e);
            ControlField realized;
            Episode ep = run_episode(env, h.policy, rng, &realized);
            const auto [ay, az] = field_areas(realized);
            h.episode_return.push_back(ep.ret);
            h.area_y.push_back(ay);
            h.area_z.push_back(az);
            if (ep.ret > h.best_return) {
                h.best_return = ep.ret;
                h.best_episode = e;
                h.best_field = std::move(realized);
            }
            batch.push_back(std::move(ep));
        }
        const UpdateResult u = reinforce_update(h.policy, batch, tc.eta, tc.baseline);
        h.batch_mean_return.push_back(u.mean_return);
        if (u.skipped) ++h.skipped_updates;
        if (on_batch) on_batch(h);
    }
    return h;
}

void write_history_csv(const std::string& path, const TrainingHistory& h) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("write_history_csv: cannot open " + path);
    std::fputs("episode,return,area_y,area_z\n", fp);
    for (std::size_t i = 0; i < h.episode_return.size(); ++i)
        std::fprintf(fp, "%zu,%.17g,%.17g,%.17g\n", i, h.episode_return[i], h.area_y[i],
                     h.area_z[i]);
    if (std::fclose(fp) != 0) throw std::runtime_error("write_history_csv: write failed");
}

} // namespace qcw
