#include "nsrkit/engine/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace nsr {

std::size_t count_elements(const ParameterRefs& params) {
    std::size_t n = 0;
    for (const auto* p : params) n += p->value.numel();
    return n;
}

Adam::Adam(ParameterRefs params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto* p : params_) {
        m_.emplace_back(p->value.numel(), 0.0);
        v_.emplace_back(p->value.numel(), 0.0);
    }
}

void Adam::step() {
    for (const auto* p : params_) {
        if (!p->frozen && !p->value.has_grad()) {
            throw std::runtime_error("adam: parameter '" + p->name + "' has no gradient; run backward first");
        }
    }
    ++t_;
    const double b1 = options_.beta1, b2 = options_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Parameter& p = *params_[k];
        if (p.frozen) continue;
        auto w = p.value.mutable_data();
        auto g = p.value.grad();
        auto& m = m_[k];
        auto& v = v_[k];
        bool finite = true;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double gi = g[i];
            m[i] = b1 * m[i] + (1.0 - b1) * gi;
            v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            w[i] = static_cast<float>(w[i] - options_.lr * mhat / (std::sqrt(vhat) + options_.eps));
            finite = finite && std::isfinite(w[i]);
        }
        if (!finite) throw std::runtime_error("adam: parameter '" + p.name + "' became non-finite");
    }
    zero_grad();
}

void Adam::zero_grad() {
    for (auto* p : params_) p->value.zero_grad();
}

}  // namespace nsr
