#include "ridlab/net/discriminator.hpp"

#include "ridlab/errors.hpp"

#include <cmath>

namespace ridlab::net {

void DiscriminatorConfig::validate() const {
    require(!channels.empty(), "discriminator needs at least one backbone block");
    for (int c : channels) require(c >= 1, "channel counts must be positive");
    require(input_size >= 1, "input size must be positive");
    require(leaky_slope >= 0.0 && leaky_slope < 1.0, "leaky slope must lie in [0, 1)");
}

Discriminator::Discriminator(ParameterStore& store, const DiscriminatorConfig& config,
                             std::uint64_t seed, const std::string& prefix)
    : config_(config), prefix_(prefix) {
    config_.validate();
    Rng rng(seed);
    int in = 1;
    for (std::size_t i = 0; i < config_.channels.size(); ++i) {
        const int out = config_.channels[i];
        backbone_.emplace_back(store, prefix + ".conv" + std::to_string(i + 1), in, out, 3, 2,
                               ParamGroup::Base);
        fill_normal(backbone_.back().core().weight(), std::sqrt(2.0 / (in * 9)), rng);
        in = out;
    }
    head_ = Linear(store, prefix + ".head", 1, config_.feature_dim(), ParamGroup::Head);
}

MatD Discriminator::features(const Tensor& input, DiscriminatorTape* tape) const {
    const int n = config_.input_size;
    if (input.channels != 1 || input.height != n || input.width != n)
        throw PreconditionError("discriminator input must be 1x" + std::to_string(n) + "x" +
                                std::to_string(n));
    if (tape) {
        *tape = DiscriminatorTape{};
        tape->conv.resize(backbone_.size());
    }
    Tensor h = input;
    for (std::size_t i = 0; i < backbone_.size(); ++i) {
        Tensor pre = backbone_[i].forward(h, tape ? &tape->conv[i] : nullptr);
        check_finite(pre, "discriminator layer " + std::to_string(i));
        h = leaky_relu(pre, config_.leaky_slope);
        if (tape) tape->pre.push_back(std::move(pre));
    }
    MatD feature = h.matrix().rowwise().mean();
    if (tape) {
        tape->pooled_hw = {h.height, h.width};
        tape->feature = feature;
    }
    return feature;
}

DiscriminatorOutput Discriminator::forward(const Tensor& input, DiscriminatorTape* tape) const {
    return classify(features(input, tape), tape);
}

DiscriminatorOutput Discriminator::classify(const MatD& feature, DiscriminatorTape* tape) const {
    if (feature.rows() != config_.feature_dim() || feature.cols() != 1)
        throw PreconditionError("discriminator feature must be " + std::to_string(config_.feature_dim()) + "x1");
    const double logit = head_.forward(feature)(0, 0);
    if (!std::isfinite(logit)) throw NumericalError("non-finite discriminator logit");
    DiscriminatorOutput out{logit, sigmoid(logit)};
    if (tape) {
        tape->feature = feature;
        tape->logit = out.logit;
        tape->prob = out.prob;
        tape->recorded = true;
    }
    return out;
}

bool Discriminator::backbone_frozen() const {
    for (const auto& layer : backbone_)
        if (layer.core().weight().has_grad() || layer.core().bias().has_grad()) return false;
    return true;
}

Tensor Discriminator::backward(const DiscriminatorTape& tape, double grad_logit, bool to_input) {
    if (!tape.recorded) throw PreconditionError("discriminator backward without a recorded forward pass");
    MatD dy(1, 1);
    dy(0, 0) = grad_logit;
    const MatD grad_feature = head_.backward(tape.feature, dy);
    if (!to_input && backbone_frozen()) return {};
    return backward_features(tape, grad_feature);
}

Tensor Discriminator::backward_features(const DiscriminatorTape& tape, const MatD& grad_feature) {
    if (tape.pre.size() != backbone_.size())
        throw PreconditionError("discriminator backward without a recorded forward pass");
    const auto [h, w] = tape.pooled_hw;
    Tensor dy(config_.feature_dim(), h, w);
    const double inv = 1.0 / (static_cast<double>(h) * w);
    for (int c = 0; c < dy.channels; ++c)
        for (int i = 0; i < dy.plane(); ++i)
            dy.data[static_cast<std::size_t>(c) * dy.plane() + i] = grad_feature(c, 0) * inv;
    for (int i = static_cast<int>(backbone_.size()) - 1; i >= 0; --i)
        dy = backbone_[i].backward(tape.conv[i],
                                   leaky_relu_backward(tape.pre[i], dy, config_.leaky_slope));
    return dy;
}

}  // namespace ridlab::net
