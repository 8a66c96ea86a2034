#pragma once

#include "ridlab/net/params.hpp"

#include <vector>

namespace ridlab::net {

struct AdamWConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;
};

struct AdamWMoments {
    std::vector<double> m;
    std::vector<double> v;
};

/// One AdamW update of `values` at step `t` (1-based). Decoupled decay is applied first:
/// p <- p (1 - lr wd) - lr m_hat / (sqrt(v_hat) + eps). Empty moments are zero-initialized.
void adamw_step(std::vector<float>& values, const std::vector<double>& grads,
                AdamWMoments& state, long t, const AdamWConfig& config);

/// AdamW over a fixed parameter list. Parameters without a gradient buffer are rejected.
class AdamW {
  public:
    AdamW(std::vector<Parameter*> params, const AdamWConfig& config);

    void step();
    void zero_grad();
    long steps() const { return t_; }
    const std::vector<Parameter*>& params() const { return params_; }

  private:
    std::vector<Parameter*> params_;
    std::vector<AdamWMoments> state_;
    AdamWConfig config_;
    long t_ = 0;
};

}  // namespace ridlab::net
