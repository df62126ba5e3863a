#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace nsr {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

template <typename T>
class BasicTensor;

namespace detail {

// Backward closure: reads the output gradient and accumulates into the
// gradient buffers of its inputs. A null buffer means that input does not
// require a gradient.
template <typename T>
using BackwardFn = std::function<void(std::span<const T> grad_out, std::span<std::vector<T>* const> grad_in)>;

template <typename T>
struct Node {
    std::vector<BasicTensor<T>> inputs;
    BackwardFn<T> backward;
    const char* op = "";
};

template <typename T>
struct TensorImpl {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;  // empty until a gradient is accumulated
    bool requires_grad = false;
    std::shared_ptr<Node<T>> grad_fn;
};

}  // namespace detail

/// Dense row-major tensor. Copies share storage; use clone() for a deep copy.
/// Values produced by ops are never modified afterwards; only leaf tensors
/// (parameters) are updated in place by the optimizer.
///
/// Training uses float32 (`Tensor`). The float64 instantiation (`Tensor64`)
/// runs the same kernels and exists for gradient verification.
template <typename T>
class BasicTensor {
public:
    using value_type = T;

    BasicTensor();
    explicit BasicTensor(Shape shape, T fill = T(0));
    BasicTensor(Shape shape, std::vector<T> data);

    static BasicTensor zeros(Shape shape) { return BasicTensor(std::move(shape), T(0)); }
    static BasicTensor ones(Shape shape) { return BasicTensor(std::move(shape), T(1)); }
    static BasicTensor scalar(T value) { return BasicTensor(Shape{}, std::vector<T>{value}); }

    const Shape& shape() const;
    std::size_t dim(std::size_t axis) const;
    std::size_t rank() const { return shape().size(); }
    std::size_t numel() const;
    bool defined() const { return impl_ != nullptr; }

    std::span<const T> data() const;
    std::span<T> mutable_data();
    T item() const;

    bool requires_grad() const;
    BasicTensor& set_requires_grad(bool on);
    bool is_leaf() const;

    bool has_grad() const;
    std::span<const T> grad() const;
    std::span<T> mutable_grad();
    void zero_grad();
    void clear_grad();

    BasicTensor clone() const;
    BasicTensor detach() const;

    template <typename U>
    BasicTensor<U> cast() const {
        auto d = data();
        return BasicTensor<U>(shape(), std::vector<U>(d.begin(), d.end()));
    }

    bool same_storage(const BasicTensor& other) const { return impl_ == other.impl_; }

    // Engine internals.
    static BasicTensor from_op(Shape shape, std::vector<T> data, std::vector<BasicTensor> inputs,
                               detail::BackwardFn<T> backward, const char* op);
    const detail::TensorImpl<T>& impl() const { return *impl_; }
    detail::TensorImpl<T>& impl() { return *impl_; }

private:
    std::shared_ptr<detail::TensorImpl<T>> impl_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

extern template class BasicTensor<float>;
extern template class BasicTensor<double>;

/// True unless a NoGradGuard is alive on this thread.
bool grad_enabled();

class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

/// Reverse-mode pass from a scalar. Leaf gradients accumulate across calls;
/// intermediate gradients live only for the duration of the pass.
template <typename T>
void backward(const BasicTensor<T>& loss);

extern template void backward<float>(const BasicTensor<float>&);
extern template void backward<double>(const BasicTensor<double>&);

}  // namespace nsr
