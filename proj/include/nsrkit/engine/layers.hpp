#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nsrkit/engine/ops.hpp"
#include "nsrkit/engine/parameter.hpp"
#include "nsrkit/engine/random.hpp"

namespace nsr {

template <typename T>
using BasicParameterRefs = std::vector<BasicParameter<T>*>;

/// Weight-normalized convolution: w = g * v / ||v|| per output channel,
/// "same" padding for odd kernels. Parameters are named <prefix>.v/.g/.b.
template <typename T>
struct BasicWnConv {
    BasicParameter<T> v, g, b;
    std::size_t padding = 0;

    BasicWnConv() = default;

    /// He fan-in init of v; g starts at ||v|| so the effective weight equals v.
    BasicWnConv(const std::string& prefix, std::size_t out, std::size_t in, std::size_t k, Rng& rng) : padding(k / 2) {
        const std::size_t fan_in = in * k * k;
        const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
        std::vector<T> vv(out * fan_in), gg(out);
        for (auto& x : vv) x = static_cast<T>(stddev * rng.normal());
        for (std::size_t o = 0; o < out; ++o) {
            double n2 = 0;
            for (std::size_t i = 0; i < fan_in; ++i) n2 += double(vv[o * fan_in + i]) * double(vv[o * fan_in + i]);
            gg[o] = static_cast<T>(std::sqrt(n2));
        }
        v = {prefix + ".v", BasicTensor<T>({out, in, k, k}, std::move(vv))};
        g = {prefix + ".g", BasicTensor<T>({out}, std::move(gg))};
        b = {prefix + ".b", BasicTensor<T>::zeros({out})};
    }

    std::size_t out_channels() const { return v.value.dim(0); }
    std::size_t in_channels() const { return v.value.dim(1); }
    std::size_t kernel() const { return v.value.dim(2); }

    BasicTensor<T> operator()(const BasicTensor<T>& x) const {
        return ops::conv2d(x, ops::weight_norm(v.value, g.value), b.value, padding);
    }

    void collect(BasicParameterRefs<T>& out) {
        out.push_back(&v);
        out.push_back(&g);
        out.push_back(&b);
    }

    void freeze(bool on = true) {
        v.freeze(on);
        g.freeze(on);
        b.freeze(on);
    }

    template <typename U>
    BasicWnConv<U> cast() const {
        BasicWnConv<U> c;
        c.v = {v.name, v.value.template cast<U>(), v.frozen};
        c.g = {g.name, g.value.template cast<U>(), g.frozen};
        c.b = {b.name, b.value.template cast<U>(), b.frozen};
        c.padding = padding;
        return c;
    }
};

using WnConv = BasicWnConv<float>;

}  // namespace nsr
