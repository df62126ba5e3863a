#pragma once

#include <cstdint>
#include <span>
#include <type_traits>

#include "nsrkit/engine/tensor.hpp"

namespace nsr::ops {

// Elementwise, shapes must match exactly.
template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, std::type_identity_t<T> factor);

/// Adds offsets[c] to every element of channel c of an NCHW tensor.
template <typename T>
BasicTensor<T> add_channel(const BasicTensor<T>& x, std::span<const std::type_identity_t<T>> offsets);

/// Sum of all elements, accumulated in double.
template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x);

/// Cross-correlation with zero padding and stride 1.
/// input [N,Cin,H,W], weight [Cout,Cin,kH,kW], bias [Cout] -> [N,Cout,H',W'].
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight, const BasicTensor<T>& bias, std::size_t padding);

/// 2x2 window, stride 2. Ties resolve to the first element in row-major window order.
template <typename T>
BasicTensor<T> max_pool2(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> nearest_upsample2(const BasicTensor<T>& x);

/// out[n][c][h*r+i][w*r+j] = in[n][c*r*r + i*r + j][h][w]
template <typename T>
BasicTensor<T> pixel_shuffle(const BasicTensor<T>& x, std::size_t r);
template <typename T>
BasicTensor<T> pixel_unshuffle(const BasicTensor<T>& x, std::size_t r);

/// w[o] = g[o] * v[o] / ||v[o]|| with the norm taken over everything but axis 0.
template <typename T>
BasicTensor<T> weight_norm(const BasicTensor<T>& v, const BasicTensor<T>& g);

template <typename T>
BasicTensor<T> mae_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target);
template <typename T>
BasicTensor<T> mse_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target);

/// While alive, relu and max_pool2 on this thread fold their branch decisions
/// (activation masks, window argmax) into a fingerprint. Two evaluations with
/// equal fingerprints took the same linear piece, which is what a
/// finite-difference step needs to be meaningful.
class BranchTrace {
public:
    BranchTrace();
    ~BranchTrace();
    BranchTrace(const BranchTrace&) = delete;
    BranchTrace& operator=(const BranchTrace&) = delete;

    std::uint64_t fingerprint() const { return hash_; }
    void mix(std::uint64_t value);

    static BranchTrace* current();

private:
    BranchTrace* previous_;
    std::uint64_t hash_ = 1469598103934665603ull;
};

/// Throws if any element is NaN or infinite.
template <typename T>
void check_finite(const BasicTensor<T>& x, const char* what);

#define NSR_DECLARE_OPS(T)                                                                     \
    extern template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);          \
    extern template BasicTensor<T> sub(const BasicTensor<T>&, const BasicTensor<T>&);          \
    extern template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);          \
    extern template BasicTensor<T> scale(const BasicTensor<T>&, T);                            \
    extern template BasicTensor<T> add_channel(const BasicTensor<T>&, std::span<const T>);     \
    extern template BasicTensor<T> sum(const BasicTensor<T>&);                                 \
    extern template BasicTensor<T> relu(const BasicTensor<T>&);                                \
    extern template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&,        \
                                          const BasicTensor<T>&, std::size_t);                 \
    extern template BasicTensor<T> max_pool2(const BasicTensor<T>&);                           \
    extern template BasicTensor<T> nearest_upsample2(const BasicTensor<T>&);                   \
    extern template BasicTensor<T> pixel_shuffle(const BasicTensor<T>&, std::size_t);          \
    extern template BasicTensor<T> pixel_unshuffle(const BasicTensor<T>&, std::size_t);        \
    extern template BasicTensor<T> weight_norm(const BasicTensor<T>&, const BasicTensor<T>&);  \
    extern template BasicTensor<T> mae_loss(const BasicTensor<T>&, const BasicTensor<T>&);     \
    extern template BasicTensor<T> mse_loss(const BasicTensor<T>&, const BasicTensor<T>&);     \
    extern template void check_finite(const BasicTensor<T>&, const char*);

NSR_DECLARE_OPS(float)
NSR_DECLARE_OPS(double)
#undef NSR_DECLARE_OPS

}  // namespace nsr::ops
