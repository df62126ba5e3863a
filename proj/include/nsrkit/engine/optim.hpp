#pragma once

#include <cstdint>
#include <vector>

#include "nsrkit/engine/parameter.hpp"

namespace nsr {

struct AdamOptions {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction. Moments are kept in double; parameters stay float32.
class Adam {
public:
    Adam(ParameterRefs params, AdamOptions options = {});

    /// Applies one update to every non-frozen parameter, then zeroes gradients.
    void step();
    void zero_grad();

    std::uint64_t steps() const { return t_; }
    const AdamOptions& options() const { return options_; }
    void set_lr(double lr) { options_.lr = lr; }

    const std::vector<double>& first_moment(std::size_t i) const { return m_[i]; }
    const std::vector<double>& second_moment(std::size_t i) const { return v_[i]; }

private:
    ParameterRefs params_;
    AdamOptions options_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::uint64_t t_ = 0;
};

}  // namespace nsr
