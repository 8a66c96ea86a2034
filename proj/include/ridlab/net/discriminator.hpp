#pragma once

#include "ridlab/net/layers.hpp"

#include <cstdint>
#include <vector>

namespace ridlab::net {

struct DiscriminatorConfig {
    int input_size = 128;
    std::vector<int> channels{16, 32, 128, 256};  // stride-2 backbone blocks
    double leaky_slope = 0.2;

    int feature_dim() const { return channels.empty() ? 0 : channels.back(); }
    void validate() const;
};

struct DiscriminatorTape {
    bool recorded = false;
    std::vector<ConvCache> conv;
    std::vector<Tensor> pre;
    std::pair<int, int> pooled_hw{0, 0};
    MatD feature;  // feature_dim x 1
    double logit = 0.0;
    double prob = 0.5;
};

struct DiscriminatorOutput {
    double logit = 0.0;
    double prob = 0.5;
};

/// Plain conv backbone (Base group) with global average pooling, followed by a single
/// trainable dense head producing one logit. The head starts at zero, so every input maps
/// to probability 0.5 until it is trained.
class Discriminator {
  public:
    Discriminator(ParameterStore& store, const DiscriminatorConfig& config, std::uint64_t seed,
                  const std::string& prefix = "disc");

    DiscriminatorOutput forward(const Tensor& input, DiscriminatorTape* tape = nullptr) const;
    /// Pooled backbone features (feature_dim x 1).
    MatD features(const Tensor& input, DiscriminatorTape* tape = nullptr) const;
    /// Head only, from precomputed features. The tape supports backward with to_input false.
    DiscriminatorOutput classify(const MatD& feature, DiscriminatorTape* tape = nullptr) const;
    bool backbone_frozen() const;
    /// Back-propagates dL/d(logit); accumulates head gradients (and backbone gradients when
    /// the backbone owns buffers). Returns dL/d(input), or an empty tensor when
    /// `to_input` is false and the backbone is frozen.
    Tensor backward(const DiscriminatorTape& tape, double grad_logit, bool to_input = true);
    /// Back-propagates dL/d(features) through the backbone only.
    Tensor backward_features(const DiscriminatorTape& tape, const MatD& grad_feature);

    const DiscriminatorConfig& config() const { return config_; }
    const std::string& prefix() const { return prefix_; }
    Linear& head() { return head_; }
    const Linear& head() const { return head_; }

  private:
    DiscriminatorConfig config_;
    std::string prefix_;
    std::vector<Conv2d> backbone_;
    Linear head_;
};

}  // namespace ridlab::net
