#include "ridlab/net/optim.hpp"

#include "ridlab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ridlab::net {

void adamw_step(std::vector<float>& values, const std::vector<double>& grads,
                AdamWMoments& state, long t, const AdamWConfig& config) {
    const std::size_t n = values.size();
    if (grads.size() != n) throw PreconditionError("AdamW: gradient size differs from parameter size");
    if (state.m.empty() && state.v.empty()) {
        state.m.assign(n, 0.0);
        state.v.assign(n, 0.0);
    }
    if (state.m.size() != n || state.v.size() != n)
        throw PreconditionError("AdamW: moment size differs from parameter size");
    require(t >= 1, "AdamW step index starts at 1");
    const double lr = config.learning_rate;
    const double decay = 1.0 - lr * config.weight_decay;
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grads[i];
        double& m = state.m[i];
        double& v = state.v[i];
        m = config.beta1 * m + (1.0 - config.beta1) * g;
        v = config.beta2 * v + (1.0 - config.beta2) * g * g;
        const double p = static_cast<double>(values[i]) * decay -
                         lr * (m / c1) / (std::sqrt(v / c2) + config.epsilon);
        values[i] = static_cast<float>(p);
    }
}

AdamW::AdamW(std::vector<Parameter*> params, const AdamWConfig& config)
    : params_(std::move(params)), state_(params_.size()), config_(config) {
    for (const Parameter* p : params_)
        if (!p->has_grad()) throw PreconditionError("AdamW: parameter " + p->name + " is frozen");
}

void AdamW::step() {
    ++t_;
    for (std::size_t i = 0; i < params_.size(); ++i)
        adamw_step(params_[i]->value, params_[i]->grad, state_[i], t_, config_);
}

void AdamW::zero_grad() {
    for (Parameter* p : params_) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

}  // namespace ridlab::net
