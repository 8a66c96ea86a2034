#pragma once

#include "ridlab/net/layers.hpp"

#include <cstdint>
#include <vector>

namespace ridlab::net {

struct GeneratorConfig {
    int input_size = 128;
    std::vector<int> channels{8, 16, 32, 64};  // one entry per encoder block
    int residual_blocks = 2;
    int lora_rank = 4;
    double lora_scale = 1.0;
    double lora_init_std = 0.01;
    double leaky_slope = 0.2;

    int depth() const { return static_cast<int>(channels.size()); }
    void validate() const;
};

struct GeneratorTape {
    bool recorded = false;
    std::vector<Tensor> enc_in;   // input to encoder block i
    std::vector<ConvCache> enc_conv;
    std::vector<Tensor> enc_pre;
    std::vector<ConvCache> res_a, res_b;
    std::vector<Tensor> res_pre;
    std::vector<Tensor> skip_in;  // encoder activation feeding each zero conv (decoder order)
    std::vector<std::pair<int, int>> dec_merge_hw;
    std::vector<ConvCache> dec_conv;
    std::vector<Tensor> dec_pre;
    ConvCache out_conv;
    Tensor output;
};

/// Encoder (stride-2 conv + leaky ReLU per block), residual bottleneck, and decoder
/// (nearest upsample + conv + ReLU per block), ending in a 3x3 conv and a sigmoid.
/// Every conv is LoRA-adapted; zero convs connect encoder block i to decoder block
/// depth - i + 1 (1-based).
class Generator {
  public:
    Generator(ParameterStore& store, const GeneratorConfig& config, std::uint64_t seed,
              const std::string& prefix = "gen");

    /// Input and output are 1 x H x W with H = W = config().input_size.
    Tensor forward(const Tensor& input, GeneratorTape* tape = nullptr) const;
    /// Frozen-base output: same network with every adapter path removed.
    Tensor forward_base(const Tensor& input) const;
    /// Back-propagates dL/d(output); returns dL/d(input). Gradients are accumulated only into
    /// parameters that own a gradient buffer.
    Tensor backward(const GeneratorTape& tape, const Tensor& grad_output);

    const GeneratorConfig& config() const { return config_; }
    const std::string& prefix() const { return prefix_; }
    std::vector<LoraConv2d*> lora_layers();
    std::vector<ZeroConv*> zero_convs();

  private:
    Tensor run(const Tensor& input, GeneratorTape* tape, bool adapters) const;

    GeneratorConfig config_;
    std::string prefix_;
    std::vector<LoraConv2d> encoder_;
    std::vector<LoraConv2d> res_a_, res_b_;
    std::vector<LoraConv2d> decoder_;
    std::vector<ZeroConv> zero_;  // indexed by encoder block
    LoraConv2d out_conv_;
};

}  // namespace ridlab::net
