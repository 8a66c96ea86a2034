#pragma once

#include "ridlab/net/tensor.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace ridlab::net {

enum class ParamGroup : std::uint8_t {
    Base,     // pre-trained weights, frozen after pretraining
    Adapter,  // LoRA A/B and zero-conv weights
    Head,     // discriminator output layer
};

struct Parameter {
    std::string name;
    std::vector<int> shape;
    ParamGroup group = ParamGroup::Base;
    bool trainable = false;
    std::vector<float> value;
    std::vector<double> grad;  // empty when the parameter has no gradient buffer

    std::size_t size() const { return value.size(); }
    bool has_grad() const { return !grad.empty(); }
    int rows() const { return shape.empty() ? 0 : shape[0]; }
    int cols() const { return shape.size() < 2 ? 1 : static_cast<int>(value.size() / shape[0]); }

    Eigen::Map<MatF> matrix() { return {value.data(), rows(), cols()}; }
    Eigen::Map<const MatF> matrix() const { return {value.data(), rows(), cols()}; }
    Eigen::Map<MatD> grad_matrix() { return {grad.data(), rows(), cols()}; }
};

struct Partition {
    std::vector<const Parameter*> frozen;
    std::vector<const Parameter*> trainable;
    std::size_t frozen_count = 0;
    std::size_t trainable_count = 0;
};

/// Owns every parameter of one or more networks. Addresses are stable for the store's
/// lifetime. Base parameters are frozen by default; once sealed they can never be made
/// trainable again.
class ParameterStore {
  public:
    Parameter& add(std::string name, std::vector<int> shape, ParamGroup group);

    Parameter* find(const std::string& name);
    const Parameter* find(const std::string& name) const;
    Parameter& get(const std::string& name);

    const std::vector<std::unique_ptr<Parameter>>& all() const { return params_; }

    /// Allocates or releases the gradient buffer.
    void set_trainable(Parameter& p, bool trainable);
    /// Sets every parameter whose name starts with `prefix` and whose group matches.
    void set_group_trainable(const std::string& prefix, ParamGroup group, bool trainable);

    /// Permanently freezes every Base parameter.
    void seal();
    bool sealed() const { return sealed_; }

    void zero_grad();
    void zero_grad(const std::string& prefix);

    Partition partition() const;
    std::vector<Parameter*> trainable(const std::string& prefix = "");

    /// SHA-256 over the serialized frozen partition (names, shapes, values).
    std::string frozen_digest() const;

  private:
    std::vector<std::unique_ptr<Parameter>> params_;
    bool sealed_ = false;
};

}  // namespace ridlab::net
