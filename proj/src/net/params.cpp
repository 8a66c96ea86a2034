#include "ridlab/net/params.hpp"

#include "ridlab/errors.hpp"
#include "ridlab/io.hpp"

#include <algorithm>
#include <numeric>

namespace ridlab::net {

Parameter& ParameterStore::add(std::string name, std::vector<int> shape, ParamGroup group) {
    require(!name.empty() && find(name) == nullptr, "duplicate or empty parameter name: " + name);
    require(!shape.empty() && std::all_of(shape.begin(), shape.end(), [](int d) { return d > 0; }),
            "parameter dimensions must be positive: " + name);
    auto p = std::make_unique<Parameter>();
    p->name = std::move(name);
    p->shape = std::move(shape);
    p->group = group;
    const auto n = std::accumulate(p->shape.begin(), p->shape.end(), std::size_t{1},
                                   [](std::size_t a, int d) { return a * static_cast<std::size_t>(d); });
    p->value.assign(n, 0.0f);
    params_.push_back(std::move(p));
    Parameter& ref = *params_.back();
    set_trainable(ref, group != ParamGroup::Base);
    return ref;
}

Parameter* ParameterStore::find(const std::string& name) {
    for (auto& p : params_)
        if (p->name == name) return p.get();
    return nullptr;
}

const Parameter* ParameterStore::find(const std::string& name) const {
    for (const auto& p : params_)
        if (p->name == name) return p.get();
    return nullptr;
}

Parameter& ParameterStore::get(const std::string& name) {
    Parameter* p = find(name);
    if (!p) throw PreconditionError("no parameter named " + name);
    return *p;
}

void ParameterStore::set_trainable(Parameter& p, bool trainable) {
    if (trainable && sealed_ && p.group == ParamGroup::Base)
        throw PreconditionError("base parameter " + p.name + " is sealed");
    p.trainable = trainable;
    if (trainable) p.grad.assign(p.value.size(), 0.0);
    else std::vector<double>().swap(p.grad);
}

void ParameterStore::set_group_trainable(const std::string& prefix, ParamGroup group,
                                         bool trainable) {
    for (auto& p : params_)
        if (p->group == group && p->name.starts_with(prefix)) set_trainable(*p, trainable);
}

void ParameterStore::seal() {
    for (auto& p : params_)
        if (p->group == ParamGroup::Base) set_trainable(*p, false);
    sealed_ = true;
}

void ParameterStore::zero_grad() { zero_grad(""); }

void ParameterStore::zero_grad(const std::string& prefix) {
    for (auto& p : params_)
        if (p->name.starts_with(prefix)) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

Partition ParameterStore::partition() const {
    Partition part;
    for (const auto& p : params_) {
        if (p->trainable) {
            part.trainable.push_back(p.get());
            part.trainable_count += p->size();
        } else {
            part.frozen.push_back(p.get());
            part.frozen_count += p->size();
        }
    }
    return part;
}

std::vector<Parameter*> ParameterStore::trainable(const std::string& prefix) {
    std::vector<Parameter*> out;
    for (auto& p : params_)
        if (p->trainable && p->name.starts_with(prefix)) out.push_back(p.get());
    return out;
}

std::string ParameterStore::frozen_digest() const {
    io::ByteWriter w;
    for (const auto& p : params_) {
        if (p->trainable) continue;
        w.u32(static_cast<std::uint32_t>(p->name.size()));
        w.bytes(p->name);
        w.u32(static_cast<std::uint32_t>(p->shape.size()));
        for (int d : p->shape) w.u32(static_cast<std::uint32_t>(d));
        for (float v : p->value) w.f32(v);
    }
    return io::sha256_hex(w.str());
}

}  // namespace ridlab::net
