#include "tabular.hpp"

#include <cmath>
#include <cstring>

#include "mutadapt/human.hpp"

namespace mutadapt::detail {

Tabular::Tabular(const MomdpModel& model)
    : model_(&model),
      states_(model.states().size()),
      actions_(model.actions().size()),
      latents_(model.latent_count()),
      gamma_(model.gamma()) {
    terminal_.resize(states_);
    next_.assign(states_ * actions_ * kNumModes, 0);
    reward_.assign(states_ * actions_ * kNumModes, 0.0);
    human_.assign(states_ * latents_ * kNumModes, 0.0);
    conveying_.resize(actions_);
    own_mode_.assign(states_, 0);
    for (std::size_t a = 0; a < actions_; ++a)
        conveying_[a] = model.actions()[a].kind == RobotAction::Kind::state_conveying;

    for (std::size_t s = 0; s < states_; ++s) {
        const auto& x = model.states()[s];
        terminal_[s] = x.terminal();
        own_mode_[s] = x.last_human_mode().id;
        if (x.terminal()) continue;
        for (std::size_t a = 0; a < actions_; ++a)
            for (std::uint8_t m = 0; m < kNumModes; ++m) {
                const HumanAction a_h{Mode{m}};
                const auto x_next = world_transition(model, x, model.actions()[a], a_h);
                next_[(s * actions_ + a) * kNumModes + m] = model.state_index(x_next);
                reward_[(s * actions_ + a) * kNumModes + m] =
                    mutadapt::reward(model, x, model.actions()[a], a_h, x_next);
            }
        for (std::size_t y = 0; y < latents_; ++y) {
            const auto dist =
                human_action_distribution(x, model.alpha_value(y), model.compliance_value(y));
            for (std::size_t m = 0; m < kNumModes; ++m)
                human_[(s * latents_ + y) * kNumModes + m] = dist[m];
        }
    }
}

double Tabular::latent_transition(std::size_t a, std::size_t y, std::size_t y_next) const {
    if (!conveying(a)) return y == y_next ? 1.0 : 0.0;
    const std::size_t nc = model_->compliance_count();
    return model_->t_alpha()(y / nc, y_next / nc) * model_->t_compliance()(y % nc, y_next % nc);
}

std::vector<double> Tabular::pull_back(std::size_t a, const std::vector<double>& v) const {
    if (!conveying(a)) return v;
    std::vector<double> out(latents_, 0.0);
    for (std::size_t y = 0; y < latents_; ++y) {
        double acc = 0.0;
        for (std::size_t yn = 0; yn < latents_; ++yn) {
            const double t = latent_transition(a, y, yn);
            if (t != 0.0) acc += t * v[yn];
        }
        out[y] = acc;
    }
    return out;
}

void Tabular::expand(std::size_t s, const Belief& b, std::size_t a, std::vector<Outcome>& out) const {
    out.clear();
    std::vector<double> lik(latents_);
    for (std::size_t m = 0; m < kNumModes; ++m) {
        double p = 0.0;
        for (std::size_t y = 0; y < latents_; ++y) {
            lik[y] = human(s, a, y, m);
            p += lik[y] * b[y];
        }
        if (!(p > 0.0)) continue;
        Outcome o;
        o.mode = m;
        o.probability = p;
        o.next = next(s, a, m);
        o.reward = reward(s, a, m);
        o.posterior = posterior(*model_, b, lik, action(a));
        out.push_back(std::move(o));
    }
}

std::string belief_key(std::size_t s, const Belief& b, std::int64_t extra) {
    std::string key;
    key.resize(sizeof(std::uint64_t) * (2 + b.size()));
    char* p = key.data();
    const auto put = [&p](std::int64_t v) {
        std::memcpy(p, &v, sizeof v);
        p += sizeof v;
    };
    put(static_cast<std::int64_t>(s));
    put(extra);
    for (std::size_t y = 0; y < b.size(); ++y) put(std::llround(b[y] * 0x1.0p40));
    return key;
}

}  // namespace mutadapt::detail
