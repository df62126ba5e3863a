#include "nsrkit/engine/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace nsr {

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

template <typename T>
BasicTensor<T>::BasicTensor() = default;

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill) : impl_(std::make_shared<detail::TensorImpl<T>>()) {
    impl_->data.assign(shape_numel(shape), fill);
    impl_->shape = std::move(shape);
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data)
    : impl_(std::make_shared<detail::TensorImpl<T>>()) {
    if (shape_numel(shape) != data.size()) {
        throw std::invalid_argument("tensor shape " + shape_str(shape) + " holds " +
                                    std::to_string(shape_numel(shape)) + " values but " +
                                    std::to_string(data.size()) + " were given");
    }
    impl_->shape = std::move(shape);
    impl_->data = std::move(data);
}

template <typename T>
const Shape& BasicTensor<T>::shape() const {
    return impl_->shape;
}

template <typename T>
std::size_t BasicTensor<T>::dim(std::size_t axis) const {
    if (axis >= impl_->shape.size()) {
        throw std::out_of_range("axis " + std::to_string(axis) + " out of range for shape " +
                                shape_str(impl_->shape));
    }
    return impl_->shape[axis];
}

template <typename T>
std::size_t BasicTensor<T>::numel() const {
    return impl_->data.size();
}

template <typename T>
std::span<const T> BasicTensor<T>::data() const {
    return impl_->data;
}

template <typename T>
std::span<T> BasicTensor<T>::mutable_data() {
    return impl_->data;
}

template <typename T>
T BasicTensor<T>::item() const {
    if (impl_->data.size() != 1) {
        throw std::invalid_argument("item() needs a single-element tensor, got shape " +
                                    shape_str(impl_->shape));
    }
    return impl_->data[0];
}

template <typename T>
bool BasicTensor<T>::requires_grad() const {
    return impl_->requires_grad;
}

template <typename T>
BasicTensor<T>& BasicTensor<T>::set_requires_grad(bool on) {
    if (!is_leaf()) throw std::logic_error("requires_grad can only be changed on leaf tensors");
    impl_->requires_grad = on;
    if (!on) impl_->grad.clear();
    return *this;
}

template <typename T>
bool BasicTensor<T>::is_leaf() const {
    return impl_->grad_fn == nullptr;
}

template <typename T>
bool BasicTensor<T>::has_grad() const {
    return !impl_->grad.empty();
}

template <typename T>
std::span<const T> BasicTensor<T>::grad() const {
    return impl_->grad;
}

template <typename T>
std::span<T> BasicTensor<T>::mutable_grad() {
    if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), T(0));
    return impl_->grad;
}

template <typename T>
void BasicTensor<T>::zero_grad() {
    if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), T(0));
}

template <typename T>
void BasicTensor<T>::clear_grad() {
    impl_->grad.clear();
}

template <typename T>
BasicTensor<T> BasicTensor<T>::clone() const {
    BasicTensor t(impl_->shape, impl_->data);
    t.impl_->requires_grad = impl_->requires_grad && is_leaf();
    return t;
}

template <typename T>
BasicTensor<T> BasicTensor<T>::detach() const {
    return BasicTensor(impl_->shape, impl_->data);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::from_op(Shape shape, std::vector<T> data, std::vector<BasicTensor> inputs,
                                       detail::BackwardFn<T> backward, const char* op) {
    BasicTensor out(std::move(shape), std::move(data));
    if (!grad_enabled()) return out;
    bool any = std::any_of(inputs.begin(), inputs.end(), [](const BasicTensor& t) { return t.requires_grad(); });
    if (!any) return out;
    auto node = std::make_shared<detail::Node<T>>();
    node->inputs = std::move(inputs);
    node->backward = std::move(backward);
    node->op = op;
    out.impl_->requires_grad = true;
    out.impl_->grad_fn = std::move(node);
    return out;
}

template class BasicTensor<float>;
template class BasicTensor<double>;

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

template <typename T>
void backward(const BasicTensor<T>& loss) {
    if (loss.numel() != 1) {
        throw std::invalid_argument("backward() needs a scalar loss, got shape " + shape_str(loss.shape()));
    }
    if (!loss.requires_grad()) return;

    using Impl = detail::TensorImpl<T>;
    // Iterative post-order DFS gives a topological order (inputs before outputs).
    std::vector<Impl*> order;
    std::unordered_set<Impl*> visited;
    std::vector<std::pair<Impl*, std::size_t>> stack;
    auto* root = const_cast<Impl*>(&loss.impl());
    stack.emplace_back(root, 0);
    visited.insert(root);
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (node->grad_fn && next < node->grad_fn->inputs.size()) {
            auto* child = &node->grad_fn->inputs[next++].impl();
            if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
            continue;
        }
        order.push_back(node);
        stack.pop_back();
    }

    std::unordered_map<Impl*, std::vector<T>> interior;
    auto buffer_for = [&](Impl* t) -> std::vector<T>* {
        if (!t->requires_grad) return nullptr;
        std::vector<T>& g = t->grad_fn ? interior[t] : t->grad;
        if (g.empty()) g.assign(t->data.size(), T(0));
        return &g;
    };

    (*buffer_for(root))[0] += T(1);
    if (!root->grad_fn) return;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Impl* t = *it;
        if (!t->grad_fn) continue;
        std::vector<T>* gout = buffer_for(t);
        std::vector<std::vector<T>*> gin;
        gin.reserve(t->grad_fn->inputs.size());
        for (auto& in : t->grad_fn->inputs) gin.push_back(buffer_for(&in.impl()));
        t->grad_fn->backward(*gout, gin);
        interior.erase(t);
    }
}

template void backward<float>(const BasicTensor<float>&);
template void backward<double>(const BasicTensor<double>&);

}  // namespace nsr
