#include "ridlab/net/generator.hpp"

#include "ridlab/errors.hpp"

#include <cmath>

namespace ridlab::net {

namespace {

void he_init(LoraConv2d& conv, int fan_in, double gain, Rng& rng) {
    fill_normal(conv.core().base().weight(), gain * std::sqrt(2.0 / fan_in), rng);
}

}  // namespace

void GeneratorConfig::validate() const {
    require(depth() >= 1, "generator needs at least one encoder block");
    for (int c : channels) require(c >= 1, "channel counts must be positive");
    require(input_size >= 1, "input size must be positive");
    require(residual_blocks >= 0, "residual block count must be non-negative");
    require(lora_rank >= 1, "LoRA rank must be at least 1");
    require(leaky_slope >= 0.0 && leaky_slope < 1.0, "leaky slope must lie in [0, 1)");
}

Generator::Generator(ParameterStore& store, const GeneratorConfig& config, std::uint64_t seed,
                     const std::string& prefix)
    : config_(config), prefix_(prefix) {
    config_.validate();
    Rng rng(seed);
    const int depth = config_.depth();
    const auto& ch = config_.channels;
    const int r = config_.lora_rank;
    const double scale = config_.lora_scale;
    const double a_std = config_.lora_init_std;

    for (int i = 0; i < depth; ++i) {
        const int in = i == 0 ? 1 : ch[i - 1];
        encoder_.emplace_back(store, prefix + ".enc" + std::to_string(i + 1), in, ch[i], 3, 2, r,
                              scale, a_std, rng);
        he_init(encoder_.back(), in * 9, 1.0, rng);
    }
    const int bottleneck = ch.back();
    for (int j = 0; j < config_.residual_blocks; ++j) {
        const std::string name = prefix + ".res" + std::to_string(j + 1);
        res_a_.emplace_back(store, name + ".conv_a", bottleneck, bottleneck, 3, 1, r, scale, a_std, rng);
        he_init(res_a_.back(), bottleneck * 9, 1.0, rng);
        res_b_.emplace_back(store, name + ".conv_b", bottleneck, bottleneck, 3, 1, r, scale, a_std, rng);
        he_init(res_b_.back(), bottleneck * 9, 0.1, rng);
    }
    for (int i = 0; i < depth; ++i)
        zero_.emplace_back(store, prefix + ".zero_conv" + std::to_string(i + 1), ch[i], ch[i]);
    for (int j = 0; j < depth; ++j) {
        const int k = depth - 1 - j;
        const int out = k > 0 ? ch[k - 1] : ch[0];
        decoder_.emplace_back(store, prefix + ".dec" + std::to_string(j + 1), ch[k], out, 3, 1, r,
                              scale, a_std, rng);
        he_init(decoder_.back(), ch[k] * 9, 1.0, rng);
    }
    out_conv_ = LoraConv2d(store, prefix + ".out", ch[0], 1, 3, 1, r, scale, a_std, rng);
    fill_normal(out_conv_.core().base().weight(), std::sqrt(1.0 / (ch[0] * 9)), rng);
    // start near the sparse-target mean instead of 0.5
    out_conv_.core().base().bias().value[0] = -3.0f;
}

std::vector<LoraConv2d*> Generator::lora_layers() {
    std::vector<LoraConv2d*> out;
    for (auto& l : encoder_) out.push_back(&l);
    for (std::size_t j = 0; j < res_a_.size(); ++j) {
        out.push_back(&res_a_[j]);
        out.push_back(&res_b_[j]);
    }
    for (auto& l : decoder_) out.push_back(&l);
    out.push_back(&out_conv_);
    return out;
}

std::vector<ZeroConv*> Generator::zero_convs() {
    std::vector<ZeroConv*> out;
    for (auto& z : zero_) out.push_back(&z);
    return out;
}

Tensor Generator::forward(const Tensor& input, GeneratorTape* tape) const {
    return run(input, tape, true);
}

Tensor Generator::forward_base(const Tensor& input) const { return run(input, nullptr, false); }

Tensor Generator::run(const Tensor& input, GeneratorTape* tape, bool adapters) const {
    const int n = config_.input_size;
    if (input.channels != 1 || input.height != n || input.width != n)
        throw PreconditionError("generator input must be 1x" + std::to_string(n) + "x" +
                                std::to_string(n));
    const int depth = config_.depth();
    const double slope = config_.leaky_slope;
    if (tape) {
        *tape = GeneratorTape{};
        tape->enc_conv.resize(depth);
        tape->res_a.resize(res_a_.size());
        tape->res_b.resize(res_b_.size());
        tape->dec_conv.resize(depth);
    }
    auto conv = [&](const LoraConv2d& layer, const Tensor& x, ConvCache* cache) {
        return adapters ? layer.forward(x, cache) : layer.forward_base(x);
    };
    int layer_index = 0;
    auto checked = [&](Tensor t) {
        check_finite(t, "generator layer " + std::to_string(layer_index++));
        return t;
    };

    std::vector<Tensor> activations;  // encoder outputs h_1..h_depth
    Tensor h = input;
    for (int i = 0; i < depth; ++i) {
        Tensor pre = checked(conv(encoder_[i], h, tape ? &tape->enc_conv[i] : nullptr));
        if (tape) tape->enc_in.push_back(h);
        h = leaky_relu(pre, slope);
        if (tape) tape->enc_pre.push_back(std::move(pre));
        activations.push_back(h);
    }
    for (std::size_t j = 0; j < res_a_.size(); ++j) {
        Tensor a = checked(conv(res_a_[j], h, tape ? &tape->res_a[j] : nullptr));
        Tensor b = checked(conv(res_b_[j], leaky_relu(a, slope), tape ? &tape->res_b[j] : nullptr));
        add_inplace(h, b);
        if (tape) tape->res_pre.push_back(std::move(a));
    }
    for (int j = 0; j < depth; ++j) {
        const int k = depth - 1 - j;
        if (adapters) add_inplace(h, zero_[k].forward(activations[k]));
        const Tensor& target = k > 0 ? activations[k - 1] : input;
        if (tape) {
            tape->skip_in.push_back(activations[k]);
            tape->dec_merge_hw.emplace_back(h.height, h.width);
        }
        const Tensor up = resize_nearest(h, target.height, target.width);
        Tensor pre = checked(conv(decoder_[j], up, tape ? &tape->dec_conv[j] : nullptr));
        h = leaky_relu(pre, 0.0);
        if (tape) tape->dec_pre.push_back(std::move(pre));
    }
    Tensor out = sigmoid(checked(conv(out_conv_, h, tape ? &tape->out_conv : nullptr)));
    if (tape) {
        tape->output = out;
        tape->recorded = true;
    }
    return out;
}

Tensor Generator::backward(const GeneratorTape& tape, const Tensor& grad_output) {
    if (!tape.recorded) throw PreconditionError("generator backward without a recorded forward pass");
    if (!grad_output.same_shape(tape.output))
        throw PreconditionError("gradient shape does not match generator output");
    const int depth = config_.depth();
    const double slope = config_.leaky_slope;

    Tensor dy = out_conv_.backward(tape.out_conv, sigmoid_backward(tape.output, grad_output));
    std::vector<Tensor> skip_grad(depth);  // extra gradient into encoder output k
    for (int j = depth - 1; j >= 0; --j) {
        const int k = depth - 1 - j;
        const Tensor dpre = leaky_relu_backward(tape.dec_pre[j], dy, 0.0);
        const Tensor dup = decoder_[j].backward(tape.dec_conv[j], dpre);
        dy = resize_nearest_backward(dup, tape.dec_merge_hw[j].first, tape.dec_merge_hw[j].second);
        skip_grad[k] = zero_[k].backward(tape.skip_in[j], dy);
    }
    for (int j = static_cast<int>(res_a_.size()) - 1; j >= 0; --j) {
        const Tensor dact = res_b_[j].backward(tape.res_b[j], dy);
        add_inplace(dy, res_a_[j].backward(tape.res_a[j],
                                           leaky_relu_backward(tape.res_pre[j], dact, slope)));
    }
    for (int i = depth - 1; i >= 0; --i) {
        add_inplace(dy, skip_grad[i]);
        dy = encoder_[i].backward(tape.enc_conv[i], leaky_relu_backward(tape.enc_pre[i], dy, slope));
    }
    return dy;
}

}  // namespace ridlab::net
