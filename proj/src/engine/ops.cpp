#include "nsrkit/engine/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace nsr::ops {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

template <typename T>
void require_same_shape(const BasicTensor<T>& a, const BasicTensor<T>& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                    " vs " + shape_str(b.shape()));
    }
}

template <typename T>
void require_rank4(const BasicTensor<T>& x, const char* op) {
    if (x.rank() != 4) {
        throw std::invalid_argument(std::string(op) + ": expected an NCHW tensor, got shape " +
                                    shape_str(x.shape()));
    }
}

template <typename T>
BasicTensor<T> make(Shape shape, std::vector<T> data, std::vector<BasicTensor<T>> inputs,
            detail::BackwardFn<T> fn, const char* op) {
    for (T v : data) {
        if (!std::isfinite(v)) {
            throw std::runtime_error(std::string(op) + ": produced a non-finite value");
        }
    }
    return BasicTensor<T>::from_op(std::move(shape), std::move(data), std::move(inputs), std::move(fn), op);
}

// Column buffer for one image: rows index (cin, ky, kx), columns index (oy, ox).
template <typename T>
void im2col(const T* img, std::size_t cin, std::size_t h, std::size_t w, std::size_t kh,
            std::size_t kw, std::size_t pad, std::size_t oh, std::size_t ow, T* col) {
    for (std::size_t c = 0; c < cin; ++c) {
        const T* plane = img + c * h * w;
        for (std::size_t ky = 0; ky < kh; ++ky) {
            for (std::size_t kx = 0; kx < kw; ++kx) {
                T* row = col + ((c * kh + ky) * kw + kx) * oh * ow;
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    const long iy = static_cast<long>(oy + ky) - static_cast<long>(pad);
                    T* dst = row + oy * ow;
                    if (iy < 0 || iy >= static_cast<long>(h)) {
                        std::fill(dst, dst + ow, T(0));
                        continue;
                    }
                    const T* src = plane + static_cast<std::size_t>(iy) * w;
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        const long ix = static_cast<long>(ox + kx) - static_cast<long>(pad);
                        dst[ox] = (ix < 0 || ix >= static_cast<long>(w)) ? T(0)
                                                                         : src[static_cast<std::size_t>(ix)];
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im_add(const T* col, std::size_t cin, std::size_t h, std::size_t w, std::size_t kh,
                std::size_t kw, std::size_t pad, std::size_t oh, std::size_t ow, T* img) {
    for (std::size_t c = 0; c < cin; ++c) {
        T* plane = img + c * h * w;
        for (std::size_t ky = 0; ky < kh; ++ky) {
            for (std::size_t kx = 0; kx < kw; ++kx) {
                const T* row = col + ((c * kh + ky) * kw + kx) * oh * ow;
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    const long iy = static_cast<long>(oy + ky) - static_cast<long>(pad);
                    if (iy < 0 || iy >= static_cast<long>(h)) continue;
                    T* dst = plane + static_cast<std::size_t>(iy) * w;
                    const T* src = row + oy * ow;
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        const long ix = static_cast<long>(ox + kx) - static_cast<long>(pad);
                        if (ix >= 0 && ix < static_cast<long>(w)) dst[ix] += src[ox];
                    }
                }
            }
        }
    }
}

thread_local BranchTrace* g_trace = nullptr;

}  // namespace

BranchTrace::BranchTrace() : previous_(g_trace) { g_trace = this; }

BranchTrace::~BranchTrace() { g_trace = previous_; }

BranchTrace* BranchTrace::current() { return g_trace; }

void BranchTrace::mix(std::uint64_t value) {
    hash_ ^= value;
    hash_ *= 1099511628211ull;
}

template <typename T>
void check_finite(const BasicTensor<T>& x, const char* what) {
    for (T v : x.data()) {
        if (!std::isfinite(v)) throw std::runtime_error(std::string(what) + ": non-finite value");
    }
}

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    require_same_shape(a, b, "add");
    std::vector<T> out(a.numel());
    auto x = a.data(), y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
    return make<T>(a.shape(), std::move(out), {a, b},
                [](std::span<const T> g, std::span<std::vector<T>* const> gin) {
                    for (auto* buf : gin) {
                        if (!buf) continue;
                        for (std::size_t i = 0; i < g.size(); ++i) (*buf)[i] += g[i];
                    }
                },
                "add");
}

template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    require_same_shape(a, b, "sub");
    std::vector<T> out(a.numel());
    auto x = a.data(), y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
    return make<T>(a.shape(), std::move(out), {a, b},
                [](std::span<const T> g, std::span<std::vector<T>* const> gin) {
                    if (gin[0]) for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i];
                    if (gin[1]) for (std::size_t i = 0; i < g.size(); ++i) (*gin[1])[i] -= g[i];
                },
                "sub");
}

template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    require_same_shape(a, b, "mul");
    std::vector<T> out(a.numel());
    auto x = a.data(), y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
    return make<T>(a.shape(), std::move(out), {a, b},
                [a, b](std::span<const T> g, std::span<std::vector<T>* const> gin) {
                    auto x = a.data(), y = b.data();
                    if (gin[0]) for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i] * y[i];
                    if (gin[1]) for (std::size_t i = 0; i < g.size(); ++i) (*gin[1])[i] += g[i] * x[i];
                },
                "mul");
}

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, std::type_identity_t<T> factor) {
    std::vector<T> out(a.data().begin(), a.data().end());
    for (T& v : out) v *= factor;
    return make<T>(a.shape(), std::move(out), {a},
                [factor](std::span<const T> g, std::span<std::vector<T>* const> gin) {
                    if (gin[0]) for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i] * factor;
                },
                "scale");
}

template <typename T>
BasicTensor<T> add_channel(const BasicTensor<T>& x, std::span<const std::type_identity_t<T>> offsets) {
    require_rank4(x, "add_channel");
    const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    if (offsets.size() != c) {
        throw std::invalid_argument("add_channel: " + std::to_string(offsets.size()) +
                                    " offsets for " + std::to_string(c) + " channels");
    }
    std::vector<T> out(x.data().begin(), x.data().end());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t ch = 0; ch < c; ++ch) {
            T* p = out.data() + (i * c + ch) * hw;
            for (std::size_t k = 0; k < hw; ++k) p[k] += offsets[ch];
        }
    return make<T>(x.shape(), std::move(out), {x},
                [](std::span<const T> g, std::span<std::vector<T>* const> gin) {
                    if (gin[0]) for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i];
                },
                "add_channel");
}

template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& x) {
    double acc = 0.0;
    for (T v : x.data()) acc += v;
    return make<T>(Shape{}, {static_cast<T>(acc)}, {x},
                [](std::span<const T> g, std::span<std::vector<T>* const> gin) {
                    if (!gin[0]) return;
                    for (T& v : *gin[0]) v += g[0];
                },
                "sum");
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x) {
    std::vector<T> out(x.data().begin(), x.data().end());
    for (T& v : out) v = v > T(0) ? v : T(0);
    if (auto* trace = BranchTrace::current()) {
        for (T v : out) trace->mix(v > T(0));
    }
    return make<T>(x.shape(), std::move(out), {x},
                [x](std::span<const T> g, std::span<std::vector<T>* const> gin) {
                    if (!gin[0]) return;
                    auto in = x.data();
                    for (std::size_t i = 0; i < g.size(); ++i)
                        if (in[i] > T(0)) (*gin[0])[i] += g[i];
                },
                "relu");
}

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight, const BasicTensor<T>& bias, std::size_t padding) {
    require_rank4(input, "conv2d input");
    require_rank4(weight, "conv2d weight");
    const std::size_t n = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
    const std::size_t cout = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
    if (weight.dim(1) != cin) {
        throw std::invalid_argument("conv2d: input has " + std::to_string(cin) +
                                    " channels but weight " + shape_str(weight.shape()) + " expects " +
                                    std::to_string(weight.dim(1)));
    }
    if (bias.rank() != 1 || bias.dim(0) != cout) {
        throw std::invalid_argument("conv2d: bias shape " + shape_str(bias.shape()) +
                                    " does not match " + std::to_string(cout) + " output channels");
    }
    if (kh % 2 == 0 || kw % 2 == 0) {
        throw std::invalid_argument("conv2d: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                                    " must have odd sides");
    }
    if (h + 2 * padding < kh || w + 2 * padding < kw) {
        throw std::invalid_argument("conv2d: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                                    " larger than padded input " + shape_str(input.shape()));
    }
    const std::size_t oh = h + 2 * padding - kh + 1, ow = w + 2 * padding - kw + 1;
    const std::size_t k = cin * kh * kw, ohw = oh * ow;

    std::vector<T> out(n * cout * ohw);
    std::vector<T> col(k * ohw);
    ConstMapMat<T> wm(weight.data().data(), static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(k));
    auto b = bias.data();
    for (std::size_t i = 0; i < n; ++i) {
        im2col(input.data().data() + i * cin * h * w, cin, h, w, kh, kw, padding, oh, ow, col.data());
        ConstMapMat<T> cm(col.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(ohw));
        MapMat<T> om(out.data() + i * cout * ohw, static_cast<Eigen::Index>(cout),
                  static_cast<Eigen::Index>(ohw));
        om.noalias() = wm * cm;
        for (std::size_t o = 0; o < cout; ++o) {
            T* row = out.data() + (i * cout + o) * ohw;
            for (std::size_t p = 0; p < ohw; ++p) row[p] += b[o];
        }
    }

    auto fn = [input, weight, n, cin, h, w, cout, kh, kw, padding, oh, ow, k, ohw](
                  std::span<const T> g, std::span<std::vector<T>* const> gin) {
        std::vector<T> col(k * ohw);
        std::vector<T> dcol;
        ConstMapMat<T> wm(weight.data().data(), static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(k));
        for (std::size_t i = 0; i < n; ++i) {
            ConstMapMat<T> gm(g.data() + i * cout * ohw, static_cast<Eigen::Index>(cout),
                           static_cast<Eigen::Index>(ohw));
            if (gin[1]) {
                im2col(input.data().data() + i * cin * h * w, cin, h, w, kh, kw, padding, oh, ow,
                       col.data());
                ConstMapMat<T> cm(col.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(ohw));
                MapMat<T> dw(gin[1]->data(), static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(k));
                dw.noalias() += gm * cm.transpose();
            }
            if (gin[2]) {
                for (std::size_t o = 0; o < cout; ++o) {
                    const T* row = g.data() + (i * cout + o) * ohw;
                    double acc = 0.0;
                    for (std::size_t p = 0; p < ohw; ++p) acc += row[p];
                    (*gin[2])[o] += static_cast<T>(acc);
                }
            }
            if (gin[0]) {
                dcol.resize(k * ohw);
                MapMat<T> dc(dcol.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(ohw));
                dc.noalias() = wm.transpose() * gm;
                col2im_add(dcol.data(), cin, h, w, kh, kw, padding, oh, ow,
                           gin[0]->data() + i * cin * h * w);
            }
        }
    };
    return make<T>(Shape{n, cout, oh, ow}, std::move(out), {input, weight, bias}, std::move(fn), "conv2d");
}

template <typename T>
BasicTensor<T> max_pool2(const BasicTensor<T>& x) {
    require_rank4(x, "max_pool2");
    const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (h % 2 != 0 || w % 2 != 0) {
        throw std::invalid_argument("max_pool2: spatial size " + std::to_string(h) + "x" +
                                    std::to_string(w) + " is odd; pad the input to even dimensions");
    }
    const std::size_t oh = h / 2, ow = w / 2;
    std::vector<T> out(n * c * oh * ow);
    std::vector<std::size_t> argmax(out.size());
    auto in = x.data();
    for (std::size_t p = 0; p < n * c; ++p) {
        const std::size_t base = p * h * w;
        for (std::size_t oy = 0; oy < oh; ++oy)
            for (std::size_t ox = 0; ox < ow; ++ox) {
                std::size_t best = base + 2 * oy * w + 2 * ox;
                const std::size_t cand[3] = {best + 1, best + w, best + w + 1};
                for (std::size_t idx : cand)
                    if (in[idx] > in[best]) best = idx;
                const std::size_t o = (p * oh + oy) * ow + ox;
                out[o] = in[best];
                argmax[o] = best;
            }
    }
    if (auto* trace = BranchTrace::current()) {
        for (std::size_t a : argmax) trace->mix(a);
    }
    return make<T>(Shape{n, c, oh, ow}, std::move(out), {x},
                [argmax = std::move(argmax)](std::span<const T> g,
                                             std::span<std::vector<T>* const> gin) {
                    if (!gin[0]) return;
                    for (std::size_t o = 0; o < g.size(); ++o) (*gin[0])[argmax[o]] += g[o];
                },
                "max_pool2");
}

template <typename T>
BasicTensor<T> nearest_upsample2(const BasicTensor<T>& x) {
    require_rank4(x, "nearest_upsample2");
    const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::size_t oh = 2 * h, ow = 2 * w;
    std::vector<T> out(n * c * oh * ow);
    auto in = x.data();
    for (std::size_t p = 0; p < n * c; ++p)
        for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t xx = 0; xx < ow; ++xx)
                out[(p * oh + y) * ow + xx] = in[(p * h + y / 2) * w + xx / 2];
    return make<T>(Shape{n, c, oh, ow}, std::move(out), {x},
                [n, c, h, w](std::span<const T> g, std::span<std::vector<T>* const> gin) {
                    if (!gin[0]) return;
                    const std::size_t oh = 2 * h, ow = 2 * w;
                    for (std::size_t p = 0; p < n * c; ++p)
                        for (std::size_t y = 0; y < oh; ++y)
                            for (std::size_t xx = 0; xx < ow; ++xx)
                                (*gin[0])[(p * h + y / 2) * w + xx / 2] += g[(p * oh + y) * ow + xx];
                },
                "nearest_upsample2");
}

namespace {

// Index of the shuffled output element fed by input element (n, ci, y, x).
struct ShuffleMap {
    std::size_t n, c, h, w, r;
    std::size_t out_index(std::size_t b, std::size_t ci, std::size_t y, std::size_t x) const {
        const std::size_t co = ci / (r * r), sub = ci % (r * r);
        const std::size_t i = sub / r, j = sub % r;
        return ((b * c + co) * h * r + y * r + i) * w * r + x * r + j;
    }
};

std::vector<std::size_t> shuffle_indices(const ShuffleMap& m) {
    std::vector<std::size_t> idx(m.n * m.c * m.r * m.r * m.h * m.w);
    std::size_t k = 0;
    for (std::size_t b = 0; b < m.n; ++b)
        for (std::size_t ci = 0; ci < m.c * m.r * m.r; ++ci)
            for (std::size_t y = 0; y < m.h; ++y)
                for (std::size_t x = 0; x < m.w; ++x) idx[k++] = m.out_index(b, ci, y, x);
    return idx;
}

}  // namespace

template <typename T>
BasicTensor<T> pixel_shuffle(const BasicTensor<T>& x, std::size_t r) {
    require_rank4(x, "pixel_shuffle");
    if (r == 0 || x.dim(1) % (r * r) != 0) {
        throw std::invalid_argument("pixel_shuffle: " + std::to_string(x.dim(1)) +
                                    " channels not divisible by r^2 = " + std::to_string(r * r));
    }
    const ShuffleMap m{x.dim(0), x.dim(1) / (r * r), x.dim(2), x.dim(3), r};
    auto idx = shuffle_indices(m);
    std::vector<T> out(x.numel());
    auto in = x.data();
    for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = in[k];
    return make<T>(Shape{m.n, m.c, m.h * r, m.w * r}, std::move(out), {x},
                [idx = std::move(idx)](std::span<const T> g, std::span<std::vector<T>* const> gin) {
                    if (!gin[0]) return;
                    for (std::size_t k = 0; k < idx.size(); ++k) (*gin[0])[k] += g[idx[k]];
                },
                "pixel_shuffle");
}

template <typename T>
BasicTensor<T> pixel_unshuffle(const BasicTensor<T>& x, std::size_t r) {
    require_rank4(x, "pixel_unshuffle");
    if (r == 0 || x.dim(2) % r != 0 || x.dim(3) % r != 0) {
        throw std::invalid_argument("pixel_unshuffle: spatial size " + shape_str(x.shape()) +
                                    " not divisible by " + std::to_string(r));
    }
    const ShuffleMap m{x.dim(0), x.dim(1), x.dim(2) / r, x.dim(3) / r, r};
    auto idx = shuffle_indices(m);
    std::vector<T> out(x.numel());
    auto in = x.data();
    for (std::size_t k = 0; k < idx.size(); ++k) out[k] = in[idx[k]];
    return make<T>(Shape{m.n, m.c * r * r, m.h, m.w}, std::move(out), {x},
                [idx = std::move(idx)](std::span<const T> g, std::span<std::vector<T>* const> gin) {
                    if (!gin[0]) return;
                    for (std::size_t k = 0; k < idx.size(); ++k) (*gin[0])[idx[k]] += g[k];
                },
                "pixel_unshuffle");
}

template <typename T>
BasicTensor<T> weight_norm(const BasicTensor<T>& v, const BasicTensor<T>& g) {
    if (v.rank() < 1) throw std::invalid_argument("weight_norm: direction tensor must have rank >= 1");
    const std::size_t cout = v.dim(0);
    if (g.numel() != cout) {
        throw std::invalid_argument("weight_norm: gain has " + std::to_string(g.numel()) +
                                    " entries for " + std::to_string(cout) + " output channels");
    }
    const std::size_t per = v.numel() / cout;
    auto vd = v.data();
    auto gd = g.data();
    std::vector<double> norms(cout);
    std::vector<T> out(v.numel());
    for (std::size_t o = 0; o < cout; ++o) {
        double ss = 0.0;
        for (std::size_t i = 0; i < per; ++i) ss += double(vd[o * per + i]) * vd[o * per + i];
        if (ss == 0.0) {
            throw std::invalid_argument("weight_norm: output channel " + std::to_string(o) +
                                        " has a zero direction vector");
        }
        norms[o] = std::sqrt(ss);
        const double s = gd[o] / norms[o];
        for (std::size_t i = 0; i < per; ++i) out[o * per + i] = static_cast<T>(s * vd[o * per + i]);
    }
    auto fn = [v, g, norms = std::move(norms), cout, per](std::span<const T> gw,
                                                           std::span<std::vector<T>* const> gin) {
        auto vd = v.data();
        auto gd = g.data();
        for (std::size_t o = 0; o < cout; ++o) {
            // u = v/|v|; dg = <gw,u>; dv = g/|v| (gw - dg u)
            double dot = 0.0;
            for (std::size_t i = 0; i < per; ++i) dot += double(gw[o * per + i]) * vd[o * per + i];
            dot /= norms[o];
            if (gin[1]) (*gin[1])[o] += static_cast<T>(dot);
            if (gin[0]) {
                const double s = gd[o] / norms[o];
                for (std::size_t i = 0; i < per; ++i) {
                    const double u = vd[o * per + i] / norms[o];
                    (*gin[0])[o * per + i] += static_cast<T>(s * (gw[o * per + i] - dot * u));
                }
            }
        }
    };
    return make<T>(v.shape(), std::move(out), {v, g}, std::move(fn), "weight_norm");
}

template <typename T>
BasicTensor<T> mae_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target) {
    require_same_shape(pred, target, "mae_loss");
    auto p = pred.data(), t = target.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(double(p[i]) - double(t[i]));
    const double count = static_cast<double>(p.size());
    return make<T>(Shape{}, {static_cast<T>(acc / count)}, {pred, target},
                [pred, target, count](std::span<const T> g, std::span<std::vector<T>* const> gin) {
                    auto p = pred.data(), t = target.data();
                    const T s = static_cast<T>(g[0] / count);
                    for (std::size_t i = 0; i < p.size(); ++i) {
                        const T d = p[i] > t[i] ? s : (p[i] < t[i] ? -s : T(0));
                        if (gin[0]) (*gin[0])[i] += d;
                        if (gin[1]) (*gin[1])[i] -= d;
                    }
                },
                "mae_loss");
}

template <typename T>
BasicTensor<T> mse_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target) {
    require_same_shape(pred, target, "mse_loss");
    auto p = pred.data(), t = target.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = double(p[i]) - double(t[i]);
        acc += d * d;
    }
    const double count = static_cast<double>(p.size());
    return make<T>(Shape{}, {static_cast<T>(acc / count)}, {pred, target},
                [pred, target, count](std::span<const T> g, std::span<std::vector<T>* const> gin) {
                    auto p = pred.data(), t = target.data();
                    const double s = 2.0 * g[0] / count;
                    for (std::size_t i = 0; i < p.size(); ++i) {
                        const T d = static_cast<T>(s * (double(p[i]) - double(t[i])));
                        if (gin[0]) (*gin[0])[i] += d;
                        if (gin[1]) (*gin[1])[i] -= d;
                    }
                },
                "mse_loss");
}

#define NSR_INSTANTIATE_OPS(T)                                                                          \
    template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);                          \
    template BasicTensor<T> sub(const BasicTensor<T>&, const BasicTensor<T>&);                          \
    template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);                          \
    template BasicTensor<T> scale(const BasicTensor<T>&, T);                                            \
    template BasicTensor<T> add_channel(const BasicTensor<T>&, std::span<const T>);                     \
    template BasicTensor<T> sum(const BasicTensor<T>&);                                                 \
    template BasicTensor<T> relu(const BasicTensor<T>&);                                                \
    template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&, \
                                   std::size_t);                                                        \
    template BasicTensor<T> max_pool2(const BasicTensor<T>&);                                           \
    template BasicTensor<T> nearest_upsample2(const BasicTensor<T>&);                                   \
    template BasicTensor<T> pixel_shuffle(const BasicTensor<T>&, std::size_t);                          \
    template BasicTensor<T> pixel_unshuffle(const BasicTensor<T>&, std::size_t);                        \
    template BasicTensor<T> weight_norm(const BasicTensor<T>&, const BasicTensor<T>&);                  \
    template BasicTensor<T> mae_loss(const BasicTensor<T>&, const BasicTensor<T>&);                     \
    template BasicTensor<T> mse_loss(const BasicTensor<T>&, const BasicTensor<T>&);                     \
    template void check_finite(const BasicTensor<T>&, const char*);

NSR_INSTANTIATE_OPS(float)
NSR_INSTANTIATE_OPS(double)

}  // namespace nsr::ops
