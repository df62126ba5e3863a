#pragma once

#include <string>
#include <vector>

#include "nsrkit/engine/tensor.hpp"

namespace nsr {

/// A named trainable leaf. Frozen parameters never require gradients.
template <typename T>
struct BasicParameter {
    std::string name;
    BasicTensor<T> value;
    bool frozen = false;

    BasicParameter() = default;
    BasicParameter(std::string name_, BasicTensor<T> value_, bool frozen_ = false)
        : name(std::move(name_)), value(std::move(value_)), frozen(frozen_) {
        value.set_requires_grad(!frozen);
    }

    void freeze(bool on = true) {
        frozen = on;
        value.set_requires_grad(!on);
    }
};

using Parameter = BasicParameter<float>;
using ParameterRefs = std::vector<Parameter*>;

/// Total element count across parameters.
std::size_t count_elements(const ParameterRefs& params);

}  // namespace nsr
