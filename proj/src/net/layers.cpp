#include "ridlab/net/layers.hpp"

#include "ridlab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ridlab::net {

namespace {

Eigen::MatrixXd as_double(const Parameter& p) { return p.matrix().cast<double>(); }

Eigen::VectorXd bias_vector(const Parameter& p) {
    return Eigen::Map<const Eigen::VectorXf>(p.value.data(), static_cast<Eigen::Index>(p.size()))
        .cast<double>();
}

ConvShape conv_shape(const Tensor& x, int expected_in, int kernel, int stride) {
    if (x.channels != expected_in)
        throw PreconditionError("conv expects " + std::to_string(expected_in) + " channels, got " +
                                std::to_string(x.channels));
    return ConvShape{x.channels, x.height, x.width, kernel, stride};
}

}  // namespace

MatD im2col(const Tensor& x, const ConvShape& s) {
    const int k = s.kernel, oh = s.out_h(), ow = s.out_w(), p = s.pad();
    MatD cols = MatD::Zero(s.patch(), static_cast<Eigen::Index>(oh) * ow);
    for (int c = 0; c < s.in_channels; ++c)
        for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
                double* row = cols.row((c * k + ky) * k + kx).data();
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * s.stride + ky - p;
                    if (iy < 0 || iy >= s.in_h) continue;
                    const double* src = &x.data[(static_cast<std::size_t>(c) * s.in_h + iy) * s.in_w];
                    double* dst = row + static_cast<std::size_t>(oy) * ow;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * s.stride + kx - p;
                        if (ix >= 0 && ix < s.in_w) dst[ox] = src[ix];
                    }
                }
            }
    return cols;
}

Tensor col2im(const MatD& cols, const ConvShape& s) {
    const int k = s.kernel, oh = s.out_h(), ow = s.out_w(), p = s.pad();
    Tensor x(s.in_channels, s.in_h, s.in_w);
    for (int c = 0; c < s.in_channels; ++c)
        for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
                const double* row = cols.row((c * k + ky) * k + kx).data();
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * s.stride + ky - p;
                    if (iy < 0 || iy >= s.in_h) continue;
                    double* dst = &x.data[(static_cast<std::size_t>(c) * s.in_h + iy) * s.in_w];
                    const double* src = row + static_cast<std::size_t>(oy) * ow;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * s.stride + kx - p;
                        if (ix >= 0 && ix < s.in_w) dst[ix] += src[ox];
                    }
                }
            }
    return x;
}

void fill_normal(Parameter& p, double stddev, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, stddev);
    for (float& v : p.value) v = static_cast<float>(gauss(rng));
}

Linear::Linear(ParameterStore& store, const std::string& name, int out, int in, ParamGroup group)
    : weight_(&store.add(name + ".weight", {out, in}, group)),
      bias_(&store.add(name + ".bias", {out}, group)) {}

MatD Linear::forward(const MatD& x) const {
    if (x.rows() != in_features())
        throw PreconditionError(weight_->name + ": input has " + std::to_string(x.rows()) +
                                " rows, expected " + std::to_string(in_features()));
    MatD y = as_double(*weight_) * x;
    y.colwise() += bias_vector(*bias_);
    return y;
}

MatD Linear::backward(const MatD& x, const MatD& dy) {
    if (weight_->has_grad()) weight_->grad_matrix().noalias() += dy * x.transpose();
    if (bias_->has_grad()) {
        Eigen::Map<Eigen::VectorXd> g(bias_->grad.data(), static_cast<Eigen::Index>(bias_->size()));
        g += dy.rowwise().sum();
    }
    return as_double(*weight_).transpose() * dy;
}

LoraLinear::LoraLinear(ParameterStore& store, const std::string& name, int out, int in, int rank,
                       double scale, double a_init_std, Rng& rng)
    : base_(store, name, out, in, ParamGroup::Base), scale_(scale) {
    if (rank < 1) throw PreconditionError(name + ": LoRA rank must be at least 1");
    rank_ = std::min({rank, out, in});
    a_ = &store.add(name + ".lora_a", {rank_, in}, ParamGroup::Adapter);
    b_ = &store.add(name + ".lora_b", {out, rank_}, ParamGroup::Adapter);
    fill_normal(*a_, a_init_std, rng);
}

MatD LoraLinear::forward(const MatD& x, LoraCache* cache) const {
    MatD y = base_.forward(x);
    MatD z = as_double(*a_) * x;
    y.noalias() += scale_ * (as_double(*b_) * z);
    if (cache) {
        cache->x = x;
        cache->z = std::move(z);
    }
    return y;
}

MatD LoraLinear::backward(const LoraCache& cache, const MatD& dy) {
    if (cache.x.size() == 0) throw PreconditionError(a_->name + ": backward without forward");
    MatD dx = base_.backward(cache.x, dy);
    const MatD dz = scale_ * (as_double(*b_).transpose() * dy);
    if (b_->has_grad()) b_->grad_matrix().noalias() += scale_ * (dy * cache.z.transpose());
    if (a_->has_grad()) a_->grad_matrix().noalias() += dz * cache.x.transpose();
    dx.noalias() += as_double(*a_).transpose() * dz;
    return dx;
}

LoraConv2d::LoraConv2d(ParameterStore& store, const std::string& name, int in, int out,
                       int kernel, int stride, int rank, double scale, double a_init_std, Rng& rng)
    : core_(store, name, out, in * kernel * kernel, rank, scale, a_init_std, rng),
      in_(in), kernel_(kernel), stride_(stride) {}

ConvShape LoraConv2d::shape_for(const Tensor& x) const {
    return conv_shape(x, in_, kernel_, stride_);
}

Tensor LoraConv2d::forward(const Tensor& x, ConvCache* cache) const {
    const ConvShape s = shape_for(x);
    const MatD y = core_.forward(im2col(x, s), cache ? &cache->lora : nullptr);
    if (cache) cache->shape = s;
    return Tensor::from_matrix(y, s.out_h(), s.out_w());
}

Tensor LoraConv2d::forward_base(const Tensor& x) const {
    const ConvShape s = shape_for(x);
    return Tensor::from_matrix(core_.forward_base(im2col(x, s)), s.out_h(), s.out_w());
}

Tensor LoraConv2d::backward(const ConvCache& cache, const Tensor& dy) {
    return col2im(core_.backward(cache.lora, dy.matrix()), cache.shape);
}

Conv2d::Conv2d(ParameterStore& store, const std::string& name, int in, int out, int kernel,
               int stride, ParamGroup group)
    : core_(store, name, out, in * kernel * kernel, group), in_(in), kernel_(kernel),
      stride_(stride) {}

ConvShape Conv2d::shape_for(const Tensor& x) const { return conv_shape(x, in_, kernel_, stride_); }

Tensor Conv2d::forward(const Tensor& x, ConvCache* cache) const {
    const ConvShape s = shape_for(x);
    MatD cols = im2col(x, s);
    const MatD y = core_.forward(cols);
    if (cache) {
        cache->shape = s;
        cache->lora.x = std::move(cols);
    }
    return Tensor::from_matrix(y, s.out_h(), s.out_w());
}

Tensor Conv2d::backward(const ConvCache& cache, const Tensor& dy) {
    if (cache.lora.x.size() == 0) throw PreconditionError("conv backward without forward");
    return col2im(core_.backward(cache.lora.x, dy.matrix()), cache.shape);
}

ZeroConv::ZeroConv(ParameterStore& store, const std::string& name, int in, int out)
    : core_(store, name, out, in, ParamGroup::Adapter) {}

Tensor ZeroConv::forward(const Tensor& x) const {
    return Tensor::from_matrix(core_.forward(x.matrix()), x.height, x.width);
}

Tensor ZeroConv::backward(const Tensor& x, const Tensor& dy) {
    return Tensor::from_matrix(core_.backward(x.matrix(), dy.matrix()), x.height, x.width);
}

Tensor leaky_relu(const Tensor& x, double slope) {
    Tensor y = x;
    for (double& v : y.data)
        if (v < 0.0) v *= slope;
    return y;
}

Tensor leaky_relu_backward(const Tensor& pre, const Tensor& dy, double slope) {
    Tensor dx = dy;
    for (std::size_t i = 0; i < dx.data.size(); ++i)
        if (pre.data[i] < 0.0) dx.data[i] *= slope;
    return dx;
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) {
    Tensor y = x;
    for (double& v : y.data) v = sigmoid(v);
    return y;
}

Tensor sigmoid_backward(const Tensor& out, const Tensor& dy) {
    Tensor dx = dy;
    for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= out.data[i] * (1.0 - out.data[i]);
    return dx;
}

Tensor resize_nearest(const Tensor& x, int h, int w) {
    if (x.height == h && x.width == w) return x;
    Tensor y(x.channels, h, w);
    for (int c = 0; c < x.channels; ++c)
        for (int yy = 0; yy < h; ++yy) {
            const int sy = static_cast<int>(static_cast<long>(yy) * x.height / h);
            for (int xx = 0; xx < w; ++xx)
                y.at(c, yy, xx) = x.at(c, sy, static_cast<int>(static_cast<long>(xx) * x.width / w));
        }
    return y;
}

Tensor resize_nearest_backward(const Tensor& dy, int in_h, int in_w) {
    if (dy.height == in_h && dy.width == in_w) return dy;
    Tensor dx(dy.channels, in_h, in_w);
    for (int c = 0; c < dy.channels; ++c)
        for (int yy = 0; yy < dy.height; ++yy) {
            const int sy = static_cast<int>(static_cast<long>(yy) * in_h / dy.height);
            for (int xx = 0; xx < dy.width; ++xx)
                dx.at(c, sy, static_cast<int>(static_cast<long>(xx) * in_w / dy.width)) +=
                    dy.at(c, yy, xx);
        }
    return dx;
}

void add_inplace(Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw PreconditionError("tensor shape mismatch in add");
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

void check_finite(const Tensor& t, const std::string& where) {
    for (double v : t.data)
        if (!std::isfinite(v)) throw NumericalError("non-finite activation at " + where);
}

}  // namespace ridlab::net
