#pragma once

// Dense rank-4 tensor with a reverse-mode tape. Every op records a closure
// that scatters the output gradient into its parents; backward() runs the
// closures in reverse topological order. Ops that do not touch a
// requires_grad tensor record nothing, so inference builds no graph.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

#include "cawm/error.hpp"

namespace cawm {

struct Shape {
    int64_t b = 0, c = 0, h = 0, w = 0;

    int64_t numel() const { return b * c * h * w; }
    bool operator==(const Shape& o) const = default;
    std::string str() const {
        return "(" + std::to_string(b) + "," + std::to_string(c) + "," +
               std::to_string(h) + "," + std::to_string(w) + ")";
    }
};

template <typename T>
struct Node {
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad;  // sized lazily by backward()
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    // Accumulates d(loss)/d(parent) given this->grad. Empty for leaves.
    std::function<void(Node&)> backprop;

    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), T(0));
    }
};

template <typename T>
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape s, bool requires_grad = false) {
        return filled(s, T(0), requires_grad);
    }
    static Tensor filled(Shape s, T v, bool requires_grad = false) {
        check_shape(s);
        Tensor t;
        t.n = std::make_shared<Node<T>>();
        t.n->shape = s;
        t.n->value.assign(static_cast<size_t>(s.numel()), v);
        t.n->requires_grad = requires_grad;
        return t;
    }
    static Tensor from(Shape s, std::vector<T> data, bool requires_grad = false) {
        check_shape(s);
        if (static_cast<int64_t>(data.size()) != s.numel())
            throw ConfigError("tensor data length " + std::to_string(data.size()) +
                              " does not match shape " + s.str());
        Tensor t;
        t.n = std::make_shared<Node<T>>();
        t.n->shape = s;
        t.n->value = std::move(data);
        t.n->requires_grad = requires_grad;
        return t;
    }
    static Tensor scalar(T v, bool requires_grad = false) {
        return from({1, 1, 1, 1}, {v}, requires_grad);
    }

    bool defined() const { return n != nullptr; }
    const Shape& shape() const { return n->shape; }
    int64_t numel() const { return n->shape.numel(); }
    bool requires_grad() const { return n->requires_grad; }
    void set_requires_grad(bool rg) { n->requires_grad = rg; }

    std::vector<T>& data() { return n->value; }
    const std::vector<T>& data() const { return n->value; }
    std::vector<T>& grad() { return n->grad; }
    const std::vector<T>& grad() const { return n->grad; }

    T& at(int64_t b, int64_t c, int64_t h, int64_t w) {
        const Shape& s = n->shape;
        return n->value[((b * s.c + c) * s.h + h) * s.w + w];
    }
    T at(int64_t b, int64_t c, int64_t h, int64_t w) const {
        const Shape& s = n->shape;
        return n->value[((b * s.c + c) * s.h + h) * s.w + w];
    }
    T item() const {
        if (numel() != 1) throw UsageError("item() on tensor of shape " + shape().str());
        return n->value[0];
    }

    bool all_finite() const {
        for (T v : n->value)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void zero_grad() { n->grad.clear(); }

    // Value copy with the graph detached.
    Tensor detach() const {
        Tensor t;
        t.n = std::make_shared<Node<T>>();
        t.n->shape = n->shape;
        t.n->value = n->value;
        return t;
    }

    template <typename U>
    Tensor<U> cast() const {
        std::vector<U> d(n->value.begin(), n->value.end());
        return Tensor<U>::from(n->shape, std::move(d), false);
    }

    std::shared_ptr<Node<T>> n;

private:
    static void check_shape(const Shape& s) {
        if (s.b < 0 || s.c < 0 || s.h < 0 || s.w < 0)
            throw ConfigError("negative dimension in shape " + s.str());
    }
};

namespace detail {

// Builds the output node. Parents and the backprop closure are attached only
// if some parent needs gradients.
template <typename T>
Tensor<T> make_node(Shape s, std::vector<T> value,
                    std::initializer_list<Tensor<T>> parents,
                    std::function<void(Node<T>&)> backprop) {
    Tensor<T> out;
    out.n = std::make_shared<Node<T>>();
    out.n->shape = s;
    out.n->value = std::move(value);
    bool rg = false;
    for (const auto& p : parents) rg = rg || (p.defined() && p.requires_grad());
    if (rg) {
        out.n->requires_grad = true;
        for (const auto& p : parents)
            if (p.defined()) out.n->parents.push_back(p.n);
        out.n->backprop = std::move(backprop);
    }
    return out;
}

inline int64_t bcast_index(const Shape& full, const Shape& small, int64_t b, int64_t c,
                           int64_t h, int64_t w) {
    int64_t bb = small.b == 1 ? 0 : b;
    int64_t cc = small.c == 1 ? 0 : c;
    int64_t hh = small.h == 1 ? 0 : h;
    int64_t ww = small.w == 1 ? 0 : w;
    (void)full;
    return ((bb * small.c + cc) * small.h + hh) * small.w + ww;
}

inline bool bcast_compatible(const Shape& full, const Shape& small) {
    auto ok = [](int64_t f, int64_t s) { return s == f || s == 1; };
    return ok(full.b, small.b) && ok(full.c, small.c) && ok(full.h, small.h) &&
           ok(full.w, small.w);
}

}  // namespace detail

// ---- elementwise binary ops (rhs may broadcast: each dim equal or 1) ----

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    const Shape sa = a.shape(), sb = b.shape();
    if (!detail::bcast_compatible(sa, sb))
        throw ConfigError("add: shape " + sb.str() + " does not broadcast to " + sa.str());
    std::vector<T> v(a.numel());
    const auto& av = a.data();
    const auto& bv = b.data();
    int64_t i = 0;
    for (int64_t bb = 0; bb < sa.b; ++bb)
        for (int64_t c = 0; c < sa.c; ++c)
            for (int64_t h = 0; h < sa.h; ++h)
                for (int64_t w = 0; w < sa.w; ++w, ++i)
                    v[i] = av[i] + bv[detail::bcast_index(sa, sb, bb, c, h, w)];
    auto an = a.n;
    auto bn = b.n;
    return detail::make_node<T>(
        sa, std::move(v), {a, b}, [an, bn, sa, sb](Node<T>& out) {
            if (an->requires_grad) {
                an->ensure_grad();
                for (size_t i = 0; i < out.grad.size(); ++i) an->grad[i] += out.grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                int64_t i = 0;
                for (int64_t bb = 0; bb < sa.b; ++bb)
                    for (int64_t c = 0; c < sa.c; ++c)
                        for (int64_t h = 0; h < sa.h; ++h)
                            for (int64_t w = 0; w < sa.w; ++w, ++i)
                                bn->grad[detail::bcast_index(sa, sb, bb, c, h, w)] +=
                                    out.grad[i];
            }
        });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    const Shape sa = a.shape(), sb = b.shape();
    if (!detail::bcast_compatible(sa, sb))
        throw ConfigError("mul: shape " + sb.str() + " does not broadcast to " + sa.str());
    std::vector<T> v(a.numel());
    const auto& av = a.data();
    const auto& bv = b.data();
    int64_t i = 0;
    for (int64_t bb = 0; bb < sa.b; ++bb)
        for (int64_t c = 0; c < sa.c; ++c)
            for (int64_t h = 0; h < sa.h; ++h)
                for (int64_t w = 0; w < sa.w; ++w, ++i)
                    v[i] = av[i] * bv[detail::bcast_index(sa, sb, bb, c, h, w)];
    auto an = a.n;
    auto bn = b.n;
    return detail::make_node<T>(
        sa, std::move(v), {a, b}, [an, bn, sa, sb](Node<T>& out) {
            int64_t i = 0;
            for (int64_t bb = 0; bb < sa.b; ++bb)
                for (int64_t c = 0; c < sa.c; ++c)
                    for (int64_t h = 0; h < sa.h; ++h)
                        for (int64_t w = 0; w < sa.w; ++w, ++i) {
                            int64_t j = detail::bcast_index(sa, sb, bb, c, h, w);
                            if (an->requires_grad) {
                                an->ensure_grad();
                                an->grad[i] += out.grad[i] * bn->value[j];
                            }
                            if (bn->requires_grad) {
                                bn->ensure_grad();
                                bn->grad[j] += out.grad[i] * an->value[i];
                            }
                        }
        });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    return add(a, scale(b, T(-1)));
}

// Elementwise a/b, same shapes.
template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b) {
    if (!(a.shape() == b.shape()))
        throw ConfigError("div: shape mismatch " + a.shape().str() + " vs " +
                          b.shape().str());
    std::vector<T> v(a.numel());
    const auto& av = a.data();
    const auto& bv = b.data();
    for (size_t i = 0; i < v.size(); ++i) v[i] = av[i] / bv[i];
    auto an = a.n;
    auto bn = b.n;
    return detail::make_node<T>(a.shape(), std::move(v), {a, b}, [an, bn](Node<T>& out) {
        for (size_t i = 0; i < out.grad.size(); ++i) {
            const T inv = T(1) / bn->value[i];
            if (an->requires_grad) {
                an->ensure_grad();
                an->grad[i] += out.grad[i] * inv;
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                bn->grad[i] -= out.grad[i] * out.value[i] * inv;
            }
        }
    });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
    std::vector<T> v(a.numel());
    const auto& av = a.data();
    for (size_t i = 0; i < v.size(); ++i) v[i] = av[i] * s;
    auto an = a.n;
    return detail::make_node<T>(a.shape(), std::move(v), {a}, [an, s](Node<T>& out) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (size_t i = 0; i < out.grad.size(); ++i) an->grad[i] += out.grad[i] * s;
    });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T s) {
    std::vector<T> v(a.numel());
    const auto& av = a.data();
    for (size_t i = 0; i < v.size(); ++i) v[i] = av[i] + s;
    auto an = a.n;
    return detail::make_node<T>(a.shape(), std::move(v), {a}, [an](Node<T>& out) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (size_t i = 0; i < out.grad.size(); ++i) an->grad[i] += out.grad[i];
    });
}

// Elementwise max; ties route the gradient to the first argument.
template <typename T>
Tensor<T> maximum(const Tensor<T>& a, const Tensor<T>& b) {
    if (!(a.shape() == b.shape()))
        throw ConfigError("maximum: shape mismatch " + a.shape().str() + " vs " +
                          b.shape().str());
    std::vector<T> v(a.numel());
    const auto& av = a.data();
    const auto& bv = b.data();
    for (size_t i = 0; i < v.size(); ++i) v[i] = av[i] >= bv[i] ? av[i] : bv[i];
    auto an = a.n;
    auto bn = b.n;
    return detail::make_node<T>(a.shape(), std::move(v), {a, b}, [an, bn](Node<T>& out) {
        for (size_t i = 0; i < out.grad.size(); ++i) {
            bool first = an->value[i] >= bn->value[i];
            if (first && an->requires_grad) {
                an->ensure_grad();
                an->grad[i] += out.grad[i];
            } else if (!first && bn->requires_grad) {
                bn->ensure_grad();
                bn->grad[i] += out.grad[i];
            }
        }
    });
}

// ---- elementwise unary ops ----

namespace detail {
template <typename T, typename F, typename G>
Tensor<T> unary(const Tensor<T>& a, F f, G dfdx) {
    std::vector<T> v(a.numel());
    const auto& av = a.data();
    for (size_t i = 0; i < v.size(); ++i) v[i] = f(av[i]);
    auto an = a.n;
    return make_node<T>(a.shape(), std::move(v), {a}, [an, dfdx](Node<T>& out) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (size_t i = 0; i < out.grad.size(); ++i)
            an->grad[i] += out.grad[i] * dfdx(an->value[i], out.value[i]);
    });
}
}  // namespace detail

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
    return detail::unary(
        a, [](T x) { return x > T(0) ? x : T(0); },
        [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a) {
    return detail::unary(
        a, [](T x) { return T(1) / (T(1) + std::exp(-x)); },
        [](T, T y) { return y * (T(1) - y); });
}

// Numerically safe softplus: log1p(exp(-|x|)) + max(x, 0).
template <typename T>
Tensor<T> softplus(const Tensor<T>& a) {
    return detail::unary(
        a,
        [](T x) { return std::log1p(std::exp(-std::abs(x))) + (x > T(0) ? x : T(0)); },
        [](T x, T) { return T(1) / (T(1) + std::exp(-x)); });
}

template <typename T>
Tensor<T> abs_t(const Tensor<T>& a) {
    return detail::unary(
        a, [](T x) { return std::abs(x); },
        [](T x, T) { return x >= T(0) ? T(1) : T(-1); });
}

template <typename T>
Tensor<T> exp_t(const Tensor<T>& a) {
    return detail::unary(a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Tensor<T> sqrt_t(const Tensor<T>& a) {
    return detail::unary(
        a, [](T x) { return std::sqrt(x); },
        [](T, T y) { return T(0.5) / y; });
}

template <typename T>
Tensor<T> square(const Tensor<T>& a) {
    return mul(a, a);
}

// ---- reductions ----

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
    T s = T(0);
    for (T v : a.data()) s += v;
    auto an = a.n;
    return detail::make_node<T>({1, 1, 1, 1}, {s}, {a}, [an](Node<T>& out) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (auto& g : an->grad) g += out.grad[0];
    });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
    if (a.numel() == 0) throw DegenerateInputError("mean of empty tensor");
    T inv = T(1) / static_cast<T>(a.numel());
    T s = T(0);
    for (T v : a.data()) s += v;
    s *= inv;
    auto an = a.n;
    return detail::make_node<T>({1, 1, 1, 1}, {s}, {a}, [an, inv](Node<T>& out) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (auto& g : an->grad) g += out.grad[0] * inv;
    });
}

template <typename T>
Tensor<T> mean_abs(const Tensor<T>& a) {
    return mean(abs_t(a));
}

// ---- softmax ----

enum class SoftmaxAxis { Spatial, Channel };

// Spatial: normalizes over H*W jointly for each (b,c). Channel: over C for
// each (b,h,w). Max-subtracted for stability.
template <typename T>
Tensor<T> softmax(const Tensor<T>& a, SoftmaxAxis axis) {
    const Shape s = a.shape();
    std::vector<T> v(a.numel());
    const auto& av = a.data();
    auto run_group = [&](const std::vector<int64_t>& idx) {
        T mx = av[idx[0]];
        for (int64_t i : idx) mx = std::max(mx, av[i]);
        T denom = T(0);
        for (int64_t i : idx) {
            v[i] = std::exp(av[i] - mx);
            denom += v[i];
        }
        for (int64_t i : idx) v[i] /= denom;
    };
    std::vector<std::vector<int64_t>> groups;
    if (axis == SoftmaxAxis::Spatial) {
        for (int64_t b = 0; b < s.b; ++b)
            for (int64_t c = 0; c < s.c; ++c) {
                std::vector<int64_t> idx;
                idx.reserve(s.h * s.w);
                for (int64_t h = 0; h < s.h; ++h)
                    for (int64_t w = 0; w < s.w; ++w)
                        idx.push_back(((b * s.c + c) * s.h + h) * s.w + w);
                groups.push_back(std::move(idx));
            }
    } else {
        for (int64_t b = 0; b < s.b; ++b)
            for (int64_t h = 0; h < s.h; ++h)
                for (int64_t w = 0; w < s.w; ++w) {
                    std::vector<int64_t> idx;
                    idx.reserve(s.c);
                    for (int64_t c = 0; c < s.c; ++c)
                        idx.push_back(((b * s.c + c) * s.h + h) * s.w + w);
                    groups.push_back(std::move(idx));
                }
    }
    for (const auto& g : groups) run_group(g);
    auto an = a.n;
    return detail::make_node<T>(
        s, std::move(v), {a}, [an, groups](Node<T>& out) {
            if (!an->requires_grad) return;
            an->ensure_grad();
            for (const auto& g : groups) {
                T dot = T(0);
                for (int64_t i : g) dot += out.grad[i] * out.value[i];
                for (int64_t i : g)
                    an->grad[i] += out.value[i] * (out.grad[i] - dot);
            }
        });
}

// ---- channel concat / slice ----

template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& parts) {
    if (parts.empty()) throw UsageError("concat_channels: no inputs");
    Shape s0 = parts[0].shape();
    int64_t ctot = 0;
    for (const auto& p : parts) {
        const Shape sp = p.shape();
        if (sp.b != s0.b || sp.h != s0.h || sp.w != s0.w)
            throw ConfigError("concat_channels: incompatible shape " + sp.str());
        ctot += sp.c;
    }
    Shape so{s0.b, ctot, s0.h, s0.w};
    std::vector<T> v(so.numel());
    int64_t plane = s0.h * s0.w;
    int64_t coff = 0;
    for (const auto& p : parts) {
        const Shape sp = p.shape();
        const auto& pv = p.data();
        for (int64_t b = 0; b < sp.b; ++b)
            for (int64_t c = 0; c < sp.c; ++c)
                std::copy_n(pv.begin() + (b * sp.c + c) * plane, plane,
                            v.begin() + (b * ctot + coff + c) * plane);
        coff += sp.c;
    }
    Tensor<T> out;
    out.n = std::make_shared<Node<T>>();
    out.n->shape = so;
    out.n->value = std::move(v);
    bool rg = false;
    for (const auto& p : parts) rg = rg || p.requires_grad();
    if (rg) {
        out.n->requires_grad = true;
        std::vector<std::shared_ptr<Node<T>>> pn;
        std::vector<Shape> shapes;
        for (const auto& p : parts) {
            out.n->parents.push_back(p.n);
            pn.push_back(p.n);
            shapes.push_back(p.shape());
        }
        out.n->backprop = [pn, shapes, so, plane](Node<T>& o) {
            int64_t coff = 0;
            for (size_t k = 0; k < pn.size(); ++k) {
                const Shape sp = shapes[k];
                if (pn[k]->requires_grad) {
                    pn[k]->ensure_grad();
                    for (int64_t b = 0; b < sp.b; ++b)
                        for (int64_t c = 0; c < sp.c; ++c) {
                            auto src = o.grad.begin() + (b * so.c + coff + c) * plane;
                            auto dst = pn[k]->grad.begin() + (b * sp.c + c) * plane;
                            for (int64_t i = 0; i < plane; ++i) dst[i] += src[i];
                        }
                }
                coff += sp.c;
            }
        };
    }
    return out;
}

// Channels [c0, c1).
template <typename T>
Tensor<T> slice_channels(const Tensor<T>& a, int64_t c0, int64_t c1) {
    const Shape s = a.shape();
    if (c0 < 0 || c1 > s.c || c0 >= c1)
        throw ConfigError("slice_channels: bad range [" + std::to_string(c0) + "," +
                          std::to_string(c1) + ") for C=" + std::to_string(s.c));
    Shape so{s.b, c1 - c0, s.h, s.w};
    std::vector<T> v(so.numel());
    int64_t plane = s.h * s.w;
    const auto& av = a.data();
    for (int64_t b = 0; b < s.b; ++b)
        for (int64_t c = c0; c < c1; ++c)
            std::copy_n(av.begin() + (b * s.c + c) * plane, plane,
                        v.begin() + (b * so.c + (c - c0)) * plane);
    auto an = a.n;
    return detail::make_node<T>(
        so, std::move(v), {a}, [an, s, so, c0, plane](Node<T>& out) {
            if (!an->requires_grad) return;
            an->ensure_grad();
            for (int64_t b = 0; b < s.b; ++b)
                for (int64_t c = 0; c < so.c; ++c) {
                    auto src = out.grad.begin() + (b * so.c + c) * plane;
                    auto dst = an->grad.begin() + (b * s.c + c0 + c) * plane;
                    for (int64_t i = 0; i < plane; ++i) dst[i] += src[i];
                }
        });
}

// ---- backward ----

// Reverse-mode pass from a scalar loss. Iterative topological order; grads
// of every reachable node are reset before accumulation.
template <typename T>
void backward(const Tensor<T>& loss) {
    if (loss.numel() != 1)
        throw UsageError("backward requires a scalar loss, got shape " +
                         loss.shape().str());
    if (!loss.requires_grad()) return;

    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> seen;
    std::vector<std::pair<Node<T>*, size_t>> stack;
    stack.push_back({loss.n.get(), 0});
    seen.insert(loss.n.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node<T>* p = node->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    for (Node<T>* node : order) node->grad.assign(node->value.size(), T(0));
    loss.n->grad[0] = T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backprop) (*it)->backprop(**it);
}

}  // namespace cawm
