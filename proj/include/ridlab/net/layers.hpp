#pragma once

#include "ridlab/net/params.hpp"
#include "ridlab/net/tensor.hpp"

#include <random>
#include <string>

namespace ridlab::net {

using Rng = std::mt19937_64;

/// Square-kernel convolution geometry with "same"-style padding of kernel/2.
struct ConvShape {
    int in_channels = 0;
    int in_h = 0;
    int in_w = 0;
    int kernel = 3;
    int stride = 1;

    int pad() const { return kernel / 2; }
    int out_h() const { return (in_h + 2 * pad() - kernel) / stride + 1; }
    int out_w() const { return (in_w + 2 * pad() - kernel) / stride + 1; }
    int patch() const { return in_channels * kernel * kernel; }
};

/// Patch matrix of shape (C*k*k) x (out_h*out_w); row index (c*k + ky)*k + kx.
MatD im2col(const Tensor& x, const ConvShape& shape);
Tensor col2im(const MatD& cols, const ConvShape& shape);

void fill_normal(Parameter& p, double stddev, Rng& rng);

/// Affine map W x + b over the columns of x. W is out x in.
class Linear {
  public:
    Linear() = default;
    Linear(ParameterStore& store, const std::string& name, int out, int in, ParamGroup group);

    MatD forward(const MatD& x) const;
    /// Accumulates into any gradient buffers present and returns dL/dx.
    MatD backward(const MatD& x, const MatD& dy);

    Parameter& weight() { return *weight_; }
    Parameter& bias() { return *bias_; }
    const Parameter& weight() const { return *weight_; }
    const Parameter& bias() const { return *bias_; }
    int out_features() const { return weight_->rows(); }
    int in_features() const { return weight_->cols(); }

  private:
    Parameter* weight_ = nullptr;
    Parameter* bias_ = nullptr;
};

struct LoraCache {
    MatD x;
    MatD z;  // A x
};

/// Frozen W0 (d x k) and bias with a trainable low-rank update B A, B: d x r, A: r x k.
/// B starts at zero, so the adapter path is an exact no-op at initialization.
class LoraLinear {
  public:
    LoraLinear() = default;
    LoraLinear(ParameterStore& store, const std::string& name, int out, int in, int rank,
               double scale, double a_init_std, Rng& rng);

    /// W0 x + scale * B (A x) + b; A x is formed first so the d x k update is never built.
    MatD forward(const MatD& x, LoraCache* cache) const;
    MatD forward_base(const MatD& x) const { return base_.forward(x); }
    MatD backward(const LoraCache& cache, const MatD& dy);

    int rank() const { return rank_; }
    double scale() const { return scale_; }
    Linear& base() { return base_; }
    const Linear& base() const { return base_; }
    Parameter& lora_a() { return *a_; }
    Parameter& lora_b() { return *b_; }
    const Parameter& lora_a() const { return *a_; }
    const Parameter& lora_b() const { return *b_; }

  private:
    Linear base_;
    Parameter* a_ = nullptr;
    Parameter* b_ = nullptr;
    int rank_ = 0;
    double scale_ = 1.0;
};

struct ConvCache {
    ConvShape shape;
    LoraCache lora;  // lora.x holds the patch matrix for both conv kinds
};

/// Convolution whose flattened kernel (out x in*k*k) is a LoraLinear.
class LoraConv2d {
  public:
    LoraConv2d() = default;
    LoraConv2d(ParameterStore& store, const std::string& name, int in, int out, int kernel,
               int stride, int rank, double scale, double a_init_std, Rng& rng);

    Tensor forward(const Tensor& x, ConvCache* cache) const;
    /// Convolution with W0 and bias only.
    Tensor forward_base(const Tensor& x) const;
    Tensor backward(const ConvCache& cache, const Tensor& dy);

    LoraLinear& core() { return core_; }
    const LoraLinear& core() const { return core_; }

  private:
    ConvShape shape_for(const Tensor& x) const;
    LoraLinear core_;
    int in_ = 0;
    int kernel_ = 3;
    int stride_ = 1;
};

/// Plain convolution (no adapter).
class Conv2d {
  public:
    Conv2d() = default;
    Conv2d(ParameterStore& store, const std::string& name, int in, int out, int kernel, int stride,
           ParamGroup group);

    Tensor forward(const Tensor& x, ConvCache* cache) const;
    Tensor backward(const ConvCache& cache, const Tensor& dy);
    Linear& core() { return core_; }
    const Linear& core() const { return core_; }

  private:
    ConvShape shape_for(const Tensor& x) const;
    Linear core_;
    int in_ = 0;
    int kernel_ = 3;
    int stride_ = 1;
};

/// 1x1 convolution with weight and bias both initialized to zero and trainable.
class ZeroConv {
  public:
    ZeroConv() = default;
    ZeroConv(ParameterStore& store, const std::string& name, int in, int out);

    Tensor forward(const Tensor& x) const;
    /// x is the forward input.
    Tensor backward(const Tensor& x, const Tensor& dy);
    Linear& core() { return core_; }
    const Linear& core() const { return core_; }

  private:
    Linear core_;
};

Tensor leaky_relu(const Tensor& x, double slope);
Tensor leaky_relu_backward(const Tensor& pre, const Tensor& dy, double slope);
Tensor sigmoid(const Tensor& x);
Tensor sigmoid_backward(const Tensor& out, const Tensor& dy);
double sigmoid(double x);

/// Nearest-neighbour resize; out(y, x) = in(floor(y*in_h/h), floor(x*in_w/w)).
Tensor resize_nearest(const Tensor& x, int h, int w);
Tensor resize_nearest_backward(const Tensor& dy, int in_h, int in_w);

void add_inplace(Tensor& a, const Tensor& b);

/// Throws NumericalError naming `where` if any entry is not finite.
void check_finite(const Tensor& t, const std::string& where);

}  // namespace ridlab::net
