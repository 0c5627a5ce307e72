#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mgrnet/errors.hpp"

namespace mgrnet {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

inline std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
    os << "]";
    return os.str();
}

template <typename S>
class TapeT;

// Dense row-major tensor. `tape`/`node` link the value into a gradient
// recording; both stay unset for plain (immutable, shareable) values.
template <typename S>
struct TensorT {
    Shape shape;
    std::vector<S> data;
    TapeT<S>* tape = nullptr;
    int node = -1;

    TensorT() = default;
    explicit TensorT(Shape s, S fill = S(0)) : shape(std::move(s)), data(numel(shape), fill) {}
    TensorT(Shape s, std::vector<S> values) : shape(std::move(s)), data(std::move(values)) {
        if (numel(shape) != data.size())
            throw_structural("tensor", "shape " + shape_str(shape) + " does not match value count " +
                                           std::to_string(data.size()));
    }

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    bool on_tape() const { return tape != nullptr; }

    S& operator[](std::size_t i) { return data[i]; }
    const S& operator[](std::size_t i) const { return data[i]; }

    void detach() {
        tape = nullptr;
        node = -1;
    }

    template <typename T>
    TensorT<T> cast() const {
        TensorT<T> out(shape);
        for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<T>(data[i]);
        return out;
    }
};

using Tensor = TensorT<float>;
using Tensor64 = TensorT<double>;

// Reverse-mode recording. Nodes are appended in evaluation order, so the
// list is topologically sorted and one reverse sweep visits each node once.
// Leaf (watched) gradients persist and accumulate across backward() calls;
// interior gradients are scratch per pass.
template <typename S>
class TapeT {
  public:
    using GradSinks = std::vector<std::vector<S>*>;
    using BackwardFn = std::function<void(const std::vector<S>& upstream, const GradSinks& sinks)>;

    TapeT() = default;
    TapeT(const TapeT&) = delete;
    TapeT& operator=(const TapeT&) = delete;

    // Marks `t` as a differentiable leaf of this tape.
    int watch(TensorT<S>& t) {
        if (t.tape != nullptr && t.tape != this)
            throw_usage("tape", "tensor is already attached to a different tape");
        if (t.tape == this) return t.node;
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back(Node{{}, t.size(), true, nullptr});
        t.tape = this;
        t.node = id;
        return id;
    }

    int record(std::vector<int> inputs, std::size_t out_size, BackwardFn fn) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back(Node{std::move(inputs), out_size, false, std::move(fn)});
        return id;
    }

    // Populates leaf gradients with d(loss)/d(leaf). Repeated calls without
    // zero_grad() accumulate.
    void backward(const TensorT<S>& loss) {
        if (loss.tape != this) throw_usage("tape", "backward() on a tensor that is not on this tape");
        if (loss.size() != 1) throw_structural("tape", "backward() requires a scalar loss");
        std::vector<std::vector<S>> work(nodes_.size());
        work[static_cast<std::size_t>(loss.node)].assign(1, S(1));
        for (int id = loss.node; id >= 0; --id) {
            auto& g = work[static_cast<std::size_t>(id)];
            if (g.empty()) continue;
            const Node& n = nodes_[static_cast<std::size_t>(id)];
            if (n.leaf) continue;
            GradSinks sinks(n.inputs.size(), nullptr);
            for (std::size_t i = 0; i < n.inputs.size(); ++i) {
                const int in = n.inputs[i];
                if (in < 0) continue;
                auto& buf = work[static_cast<std::size_t>(in)];
                if (buf.empty()) buf.assign(nodes_[static_cast<std::size_t>(in)].out_size, S(0));
                sinks[i] = &buf;
            }
            n.backward(g, sinks);
            g.clear();
            g.shrink_to_fit();
        }
        if (leaf_grads_.size() < nodes_.size()) leaf_grads_.resize(nodes_.size());
        for (std::size_t id = 0; id < nodes_.size(); ++id) {
            if (!nodes_[id].leaf || work[id].empty()) continue;
            auto& acc = leaf_grads_[id];
            if (acc.empty()) acc.assign(nodes_[id].out_size, S(0));
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += work[id][i];
        }
    }

    const std::vector<S>& grad(const TensorT<S>& t) {
        if (t.tape != this || t.node < 0) throw_usage("tape", "grad() of a tensor not on this tape");
        const std::size_t id = static_cast<std::size_t>(t.node);
        if (!nodes_[id].leaf) throw_usage("tape", "grad() is only tracked for watched leaves");
        if (leaf_grads_.size() < nodes_.size()) leaf_grads_.resize(nodes_.size());
        if (leaf_grads_[id].empty()) leaf_grads_[id].assign(nodes_[id].out_size, S(0));
        return leaf_grads_[id];
    }

    void zero_grad() {
        for (auto& g : leaf_grads_) g.clear();
    }

    std::size_t node_count() const { return nodes_.size(); }

  private:
    struct Node {
        std::vector<int> inputs;
        std::size_t out_size;
        bool leaf;
        BackwardFn backward;
    };

    std::vector<Node> nodes_;
    std::vector<std::vector<S>> leaf_grads_;
};

using Tape = TapeT<float>;
using Tape64 = TapeT<double>;

namespace detail {

template <typename S>
TapeT<S>* common_tape(std::initializer_list<const TensorT<S>*> ts) {
    TapeT<S>* tape = nullptr;
    for (const TensorT<S>* t : ts) {
        if (!t->tape) continue;
        if (tape && tape != t->tape) throw_usage("tape", "operation mixes tensors from two tapes");
        tape = t->tape;
    }
    return tape;
}

template <typename S>
int node_of(const TensorT<S>& t) {
    return t.tape ? t.node : -1;
}

}  // namespace detail

enum class Padding { Same, Valid };

// out[o,y,x] = bias[o] + sum_{c,dy,dx} input[c, y+dy-pad, x+dx-pad] * kernel[o,c,dy,dx]
// `Same` zero-pads so the spatial extents are preserved; `Valid` shrinks to H-k+1.
template <typename S>
TensorT<S> conv2d(const TensorT<S>& input, const TensorT<S>& kernel, const TensorT<S>& bias,
                  Padding padding) {
    if (input.rank() != 3) throw_structural("conv2d", "input must be [C,H,W], got " + shape_str(input.shape));
    if (kernel.rank() != 4)
        throw_structural("conv2d", "kernel must be [O,C,k,k], got " + shape_str(kernel.shape));
    if (bias.rank() != 1 || bias.shape[0] != kernel.shape[0])
        throw_structural("conv2d", "bias must be [O] matching kernel output channels");
    if (kernel.shape[1] != input.shape[0])
        throw_structural("conv2d", "input channels " + std::to_string(input.shape[0]) +
                                       " != kernel input channels " + std::to_string(kernel.shape[1]));
    if (kernel.shape[2] != kernel.shape[3]) throw_structural("conv2d", "kernel must be square");
    const std::size_t k = kernel.shape[2];
    if (k % 2 == 0) throw_config("conv2d", "kernel extent must be odd, got " + std::to_string(k));
    const std::size_t cin = input.shape[0], h = input.shape[1], w = input.shape[2];
    const std::size_t cout = kernel.shape[0];
    if (padding == Padding::Valid && k > std::min(h, w))
        throw_config("conv2d", "valid padding requires k <= min(H,W)");
    const std::size_t pad = padding == Padding::Same ? k / 2 : 0;
    const std::size_t oh = padding == Padding::Same ? h : h - k + 1;
    const std::size_t ow = padding == Padding::Same ? w : w - k + 1;

    TensorT<S> out(Shape{cout, oh, ow});
    const std::ptrdiff_t ip = static_cast<std::ptrdiff_t>(pad);
    for (std::size_t o = 0; o < cout; ++o) {
        S* outc = out.data.data() + o * oh * ow;
        std::fill(outc, outc + oh * ow, bias.data[o]);
        for (std::size_t c = 0; c < cin; ++c) {
            const S* inc = input.data.data() + c * h * w;
            const S* kc = kernel.data.data() + (o * cin + c) * k * k;
            for (std::size_t dy = 0; dy < k; ++dy) {
                const std::ptrdiff_t oy = static_cast<std::ptrdiff_t>(dy) - ip;
                const std::size_t ylo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -oy));
                const std::size_t yhi =
                    std::min(oh, static_cast<std::size_t>(std::max<std::ptrdiff_t>(
                                     0, static_cast<std::ptrdiff_t>(h) - oy)));
                for (std::size_t dx = 0; dx < k; ++dx) {
                    const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(dx) - ip;
                    const std::size_t xlo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -ox));
                    const std::size_t xhi =
                        std::min(ow, static_cast<std::size_t>(std::max<std::ptrdiff_t>(
                                         0, static_cast<std::ptrdiff_t>(w) - ox)));
                    const S wv = kc[dy * k + dx];
                    if (wv == S(0)) continue;
                    for (std::size_t y = ylo; y < yhi; ++y) {
                        const S* irow = inc + (static_cast<std::size_t>(static_cast<std::ptrdiff_t>(y) + oy)) * w;
                        S* orow = outc + y * ow;
                        for (std::size_t x = xlo; x < xhi; ++x)
                            orow[x] += wv * irow[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(x) + ox)];
                    }
                }
            }
        }
    }

    if (TapeT<S>* tape = detail::common_tape<S>({&input, &kernel, &bias})) {
        auto in_data = input.data;
        auto k_data = kernel.data;
        out.node = tape->record(
            {detail::node_of(input), detail::node_of(kernel), detail::node_of(bias)}, out.size(),
            [in_data, k_data, cin, cout, h, w, k, oh, ow, ip](const std::vector<S>& up,
                                                              const typename TapeT<S>::GradSinks& sinks) {
                std::vector<S>* din = sinks[0];
                std::vector<S>* dk = sinks[1];
                std::vector<S>* db = sinks[2];
                if (db) {
                    for (std::size_t o = 0; o < cout; ++o) {
                        S acc = S(0);
                        const S* upc = up.data() + o * oh * ow;
                        for (std::size_t i = 0; i < oh * ow; ++i) acc += upc[i];
                        (*db)[o] += acc;
                    }
                }
                if (!din && !dk) return;
                for (std::size_t o = 0; o < cout; ++o) {
                    const S* upc = up.data() + o * oh * ow;
                    for (std::size_t c = 0; c < cin; ++c) {
                        const S* inc = in_data.data() + c * h * w;
                        const S* kc = k_data.data() + (o * cin + c) * k * k;
                        S* dinc = din ? din->data() + c * h * w : nullptr;
                        S* dkc = dk ? dk->data() + (o * cin + c) * k * k : nullptr;
                        for (std::size_t dy = 0; dy < k; ++dy) {
                            const std::ptrdiff_t oy = static_cast<std::ptrdiff_t>(dy) - ip;
                            const std::size_t ylo =
                                static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -oy));
                            const std::size_t yhi =
                                std::min(oh, static_cast<std::size_t>(std::max<std::ptrdiff_t>(
                                                 0, static_cast<std::ptrdiff_t>(h) - oy)));
                            for (std::size_t dx = 0; dx < k; ++dx) {
                                const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(dx) - ip;
                                const std::size_t xlo =
                                    static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -ox));
                                const std::size_t xhi =
                                    std::min(ow, static_cast<std::size_t>(std::max<std::ptrdiff_t>(
                                                     0, static_cast<std::ptrdiff_t>(w) - ox)));
                                const S wv = kc[dy * k + dx];
                                S wacc = S(0);
                                for (std::size_t y = ylo; y < yhi; ++y) {
                                    const std::size_t iy =
                                        static_cast<std::size_t>(static_cast<std::ptrdiff_t>(y) + oy);
                                    const S* urow = upc + y * ow;
                                    const S* irow = inc + iy * w;
                                    S* drow = dinc ? dinc + iy * w : nullptr;
                                    for (std::size_t x = xlo; x < xhi; ++x) {
                                        const std::size_t ix =
                                            static_cast<std::size_t>(static_cast<std::ptrdiff_t>(x) + ox);
                                        if (dkc) wacc += urow[x] * irow[ix];
                                        if (drow) drow[ix] += wv * urow[x];
                                    }
                                }
                                if (dkc) dkc[dy * k + dx] += wacc;
                            }
                        }
                    }
                }
            });
        out.tape = tape;
    }
    return out;
}

// Elementwise max(0, x); gradient is 0 at x == 0 (left subgradient).
template <typename S>
TensorT<S> relu(const TensorT<S>& x) {
    TensorT<S> out(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) out.data[i] = x.data[i] > S(0) ? x.data[i] : S(0);
    if (TapeT<S>* tape = x.tape) {
        auto xd = x.data;
        out.node = tape->record({x.node}, out.size(),
                                [xd](const std::vector<S>& up, const typename TapeT<S>::GradSinks& sinks) {
                                    if (!sinks[0]) return;
                                    auto& g = *sinks[0];
                                    for (std::size_t i = 0; i < up.size(); ++i)
                                        if (xd[i] > S(0)) g[i] += up[i];
                                });
        out.tape = tape;
    }
    return out;
}

// Numerically stable softmax over a 1-d tensor.
template <typename S>
TensorT<S> softmax(const TensorT<S>& x) {
    if (x.rank() != 1 || x.size() == 0)
        throw_structural("softmax", "expects a non-empty 1-d tensor, got " + shape_str(x.shape));
    TensorT<S> out(x.shape);
    const S mx = *std::max_element(x.data.begin(), x.data.end());
    S total = S(0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        out.data[i] = std::exp(x.data[i] - mx);
        total += out.data[i];
    }
    for (auto& v : out.data) v /= total;
    if (TapeT<S>* tape = x.tape) {
        auto y = out.data;
        out.node = tape->record({x.node}, out.size(),
                                [y](const std::vector<S>& up, const typename TapeT<S>::GradSinks& sinks) {
                                    if (!sinks[0]) return;
                                    S dot = S(0);
                                    for (std::size_t i = 0; i < up.size(); ++i) dot += up[i] * y[i];
                                    auto& g = *sinks[0];
                                    for (std::size_t i = 0; i < up.size(); ++i)
                                        g[i] += (up[i] - dot) * y[i];
                                });
        out.tape = tape;
    }
    return out;
}

namespace detail {
inline std::pair<std::size_t, std::size_t> pool_window(std::size_t i, std::size_t g, std::size_t og) {
    return {(i * g) / og, ((i + 1) * g + og - 1) / og};
}
}  // namespace detail

// Adaptive average pooling on [C, g, g]; window i spans
// [floor(i*g/out_g), ceil((i+1)*g/out_g)) per axis.
template <typename S>
TensorT<S> adaptive_avg_pool(const TensorT<S>& input, std::size_t out_g) {
    if (input.rank() != 3 || input.shape[1] != input.shape[2])
        throw_structural("pool", "expects [C,g,g], got " + shape_str(input.shape));
    const std::size_t c = input.shape[0], g = input.shape[1];
    if (out_g == 0 || out_g > g)
        throw_config("pool", "output extent " + std::to_string(out_g) + " exceeds input extent " +
                                 std::to_string(g));
    TensorT<S> out(Shape{c, out_g, out_g});
    for (std::size_t ch = 0; ch < c; ++ch) {
        const S* inc = input.data.data() + ch * g * g;
        S* outc = out.data.data() + ch * out_g * out_g;
        for (std::size_t i = 0; i < out_g; ++i) {
            const auto [y0, y1] = detail::pool_window(i, g, out_g);
            for (std::size_t j = 0; j < out_g; ++j) {
                const auto [x0, x1] = detail::pool_window(j, g, out_g);
                S acc = S(0);
                for (std::size_t y = y0; y < y1; ++y)
                    for (std::size_t x = x0; x < x1; ++x) acc += inc[y * g + x];
                outc[i * out_g + j] = acc / static_cast<S>((y1 - y0) * (x1 - x0));
            }
        }
    }
    if (TapeT<S>* tape = input.tape) {
        out.node = tape->record(
            {input.node}, out.size(),
            [c, g, out_g](const std::vector<S>& up, const typename TapeT<S>::GradSinks& sinks) {
                if (!sinks[0]) return;
                auto& din = *sinks[0];
                for (std::size_t ch = 0; ch < c; ++ch) {
                    S* dc = din.data() + ch * g * g;
                    const S* upc = up.data() + ch * out_g * out_g;
                    for (std::size_t i = 0; i < out_g; ++i) {
                        const auto [y0, y1] = detail::pool_window(i, g, out_g);
                        for (std::size_t j = 0; j < out_g; ++j) {
                            const auto [x0, x1] = detail::pool_window(j, g, out_g);
                            const S share = upc[i * out_g + j] / static_cast<S>((y1 - y0) * (x1 - x0));
                            for (std::size_t y = y0; y < y1; ++y)
                                for (std::size_t x = x0; x < x1; ++x) dc[y * g + x] += share;
                        }
                    }
                }
            });
        out.tape = tape;
    }
    return out;
}

// Concatenation along axis 0; trailing dims must agree.
template <typename S>
TensorT<S> concat_channels(std::span<const TensorT<S>> parts) {
    if (parts.empty()) throw_structural("concat", "needs at least one part");
    const Shape& ref = parts[0].shape;
    if (ref.empty()) throw_structural("concat", "parts must have rank >= 1");
    std::size_t channels = 0;
    for (const auto& p : parts) {
        if (p.rank() != ref.size() ||
            !std::equal(p.shape.begin() + 1, p.shape.end(), ref.begin() + 1))
            throw_structural("concat", "trailing dims mismatch: " + shape_str(p.shape) + " vs " +
                                           shape_str(ref));
        channels += p.shape[0];
    }
    Shape out_shape = ref;
    out_shape[0] = channels;
    TensorT<S> out(out_shape);
    std::size_t off = 0;
    for (const auto& p : parts) {
        std::copy(p.data.begin(), p.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(off));
        off += p.size();
    }

    TapeT<S>* tape = nullptr;
    for (const auto& p : parts) {
        if (!p.tape) continue;
        if (tape && tape != p.tape) throw_usage("tape", "operation mixes tensors from two tapes");
        tape = p.tape;
    }
    if (tape) {
        std::vector<int> ids;
        std::vector<std::size_t> sizes;
        for (const auto& p : parts) {
            ids.push_back(detail::node_of(p));
            sizes.push_back(p.size());
        }
        out.node = tape->record(std::move(ids), out.size(),
                                [sizes](const std::vector<S>& up, const typename TapeT<S>::GradSinks& sinks) {
                                    std::size_t off = 0;
                                    for (std::size_t i = 0; i < sizes.size(); ++i) {
                                        if (sinks[i]) {
                                            auto& g = *sinks[i];
                                            for (std::size_t j = 0; j < sizes[i]; ++j) g[j] += up[off + j];
                                        }
                                        off += sizes[i];
                                    }
                                });
        out.tape = tape;
    }
    return out;
}

template <typename S>
TensorT<S> matmul(const TensorT<S>& a, const TensorT<S>& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.shape[1] != b.shape[0])
        throw_structural("matmul", "incompatible shapes " + shape_str(a.shape) + " * " + shape_str(b.shape));
    const std::size_t n = a.shape[0], k = a.shape[1], m = b.shape[1];
    TensorT<S> out(Shape{n, m});
    for (std::size_t i = 0; i < n; ++i) {
        const S* arow = a.data.data() + i * k;
        S* orow = out.data.data() + i * m;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const S av = arow[kk];
            if (av == S(0)) continue;
            const S* brow = b.data.data() + kk * m;
            for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
    if (TapeT<S>* tape = detail::common_tape<S>({&a, &b})) {
        auto ad = a.data;
        auto bd = b.data;
        out.node = tape->record(
            {detail::node_of(a), detail::node_of(b)}, out.size(),
            [ad, bd, n, k, m](const std::vector<S>& up, const typename TapeT<S>::GradSinks& sinks) {
                if (sinks[0]) {  // dA = up * B^T
                    auto& da = *sinks[0];
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t kk = 0; kk < k; ++kk) {
                            S acc = S(0);
                            const S* urow = up.data() + i * m;
                            const S* brow = bd.data() + kk * m;
                            for (std::size_t j = 0; j < m; ++j) acc += urow[j] * brow[j];
                            da[i * k + kk] += acc;
                        }
                }
                if (sinks[1]) {  // dB = A^T * up
                    auto& db = *sinks[1];
                    for (std::size_t kk = 0; kk < k; ++kk)
                        for (std::size_t i = 0; i < n; ++i) {
                            const S av = ad[i * k + kk];
                            if (av == S(0)) continue;
                            const S* urow = up.data() + i * m;
                            S* drow = db.data() + kk * m;
                            for (std::size_t j = 0; j < m; ++j) drow[j] += av * urow[j];
                        }
                }
            });
        out.tape = tape;
    }
    return out;
}

template <typename S>
TensorT<S> transpose2d(const TensorT<S>& x) {
    if (x.rank() != 2) throw_structural("transpose", "expects rank-2 tensor, got " + shape_str(x.shape));
    const std::size_t n = x.shape[0], m = x.shape[1];
    TensorT<S> out(Shape{m, n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) out.data[j * n + i] = x.data[i * m + j];
    if (TapeT<S>* tape = x.tape) {
        out.node = tape->record({x.node}, out.size(),
                                [n, m](const std::vector<S>& up, const typename TapeT<S>::GradSinks& sinks) {
                                    if (!sinks[0]) return;
                                    auto& g = *sinks[0];
                                    for (std::size_t j = 0; j < m; ++j)
                                        for (std::size_t i = 0; i < n; ++i)
                                            g[i * m + j] += up[j * n + i];
                                });
        out.tape = tape;
    }
    return out;
}

template <typename S>
TensorT<S> reshape(const TensorT<S>& x, Shape new_shape) {
    if (numel(new_shape) != x.size())
        throw_structural("reshape", shape_str(x.shape) + " cannot reshape to " + shape_str(new_shape));
    TensorT<S> out(std::move(new_shape), x.data);
    if (TapeT<S>* tape = x.tape) {
        out.node = tape->record({x.node}, out.size(),
                                [](const std::vector<S>& up, const typename TapeT<S>::GradSinks& sinks) {
                                    if (!sinks[0]) return;
                                    auto& g = *sinks[0];
                                    for (std::size_t i = 0; i < up.size(); ++i) g[i] += up[i];
                                });
        out.tape = tape;
    }
    return out;
}

template <typename S>
TensorT<S> add(const TensorT<S>& a, const TensorT<S>& b) {
    if (a.shape != b.shape)
        throw_structural("add", "shape mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
    TensorT<S> out(a.shape);
    for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = a.data[i] + b.data[i];
    if (TapeT<S>* tape = detail::common_tape<S>({&a, &b})) {
        out.node = tape->record({detail::node_of(a), detail::node_of(b)}, out.size(),
                                [](const std::vector<S>& up, const typename TapeT<S>::GradSinks& sinks) {
                                    for (auto* s : sinks) {
                                        if (!s) continue;
                                        for (std::size_t i = 0; i < up.size(); ++i) (*s)[i] += up[i];
                                    }
                                });
        out.tape = tape;
    }
    return out;
}

// Broadcast-add a row vector onto every row of a matrix.
template <typename S>
TensorT<S> add_rows(const TensorT<S>& x, const TensorT<S>& row) {
    if (x.rank() != 2 || row.rank() != 1 || row.shape[0] != x.shape[1])
        throw_structural("add_rows", "expects [n,m] + [m], got " + shape_str(x.shape) + " + " +
                                         shape_str(row.shape));
    const std::size_t n = x.shape[0], m = x.shape[1];
    TensorT<S> out(x.shape);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) out.data[i * m + j] = x.data[i * m + j] + row.data[j];
    if (TapeT<S>* tape = detail::common_tape<S>({&x, &row})) {
        out.node = tape->record({detail::node_of(x), detail::node_of(row)}, out.size(),
                                [n, m](const std::vector<S>& up, const typename TapeT<S>::GradSinks& sinks) {
                                    if (sinks[0]) {
                                        auto& g = *sinks[0];
                                        for (std::size_t i = 0; i < up.size(); ++i) g[i] += up[i];
                                    }
                                    if (sinks[1]) {
                                        auto& g = *sinks[1];
                                        for (std::size_t i = 0; i < n; ++i)
                                            for (std::size_t j = 0; j < m; ++j) g[j] += up[i * m + j];
                                    }
                                });
        out.tape = tape;
    }
    return out;
}

template <typename S>
TensorT<S> mul(const TensorT<S>& a, const TensorT<S>& b) {
    if (a.shape != b.shape)
        throw_structural("mul", "shape mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
    TensorT<S> out(a.shape);
    for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = a.data[i] * b.data[i];
    if (TapeT<S>* tape = detail::common_tape<S>({&a, &b})) {
        auto ad = a.data;
        auto bd = b.data;
        out.node = tape->record({detail::node_of(a), detail::node_of(b)}, out.size(),
                                [ad, bd](const std::vector<S>& up, const typename TapeT<S>::GradSinks& sinks) {
                                    if (sinks[0]) {
                                        auto& g = *sinks[0];
                                        for (std::size_t i = 0; i < up.size(); ++i) g[i] += up[i] * bd[i];
                                    }
                                    if (sinks[1]) {
                                        auto& g = *sinks[1];
                                        for (std::size_t i = 0; i < up.size(); ++i) g[i] += up[i] * ad[i];
                                    }
                                });
        out.tape = tape;
    }
    return out;
}

template <typename S>
TensorT<S> scale(const TensorT<S>& x, S factor) {
    TensorT<S> out(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) out.data[i] = x.data[i] * factor;
    if (TapeT<S>* tape = x.tape) {
        out.node = tape->record({x.node}, out.size(),
                                [factor](const std::vector<S>& up, const typename TapeT<S>::GradSinks& sinks) {
                                    if (!sinks[0]) return;
                                    auto& g = *sinks[0];
                                    for (std::size_t i = 0; i < up.size(); ++i) g[i] += up[i] * factor;
                                });
        out.tape = tape;
    }
    return out;
}

template <typename S>
TensorT<S> sum_all(const TensorT<S>& x) {
    TensorT<S> out(Shape{1});
    S acc = S(0);
    for (S v : x.data) acc += v;
    out.data[0] = acc;
    if (TapeT<S>* tape = x.tape) {
        const std::size_t n = x.size();
        out.node = tape->record({x.node}, 1,
                                [n](const std::vector<S>& up, const typename TapeT<S>::GradSinks& sinks) {
                                    if (!sinks[0]) return;
                                    auto& g = *sinks[0];
                                    for (std::size_t i = 0; i < n; ++i) g[i] += up[0];
                                });
        out.tape = tape;
    }
    return out;
}

// y = W x + b with W [m,n], x [n], b [m].
template <typename S>
TensorT<S> affine(const TensorT<S>& weight, const TensorT<S>& x, const TensorT<S>& bias) {
    if (weight.rank() != 2 || x.rank() != 1 || bias.rank() != 1 || weight.shape[1] != x.shape[0] ||
        weight.shape[0] != bias.shape[0])
        throw_structural("affine", "incompatible shapes " + shape_str(weight.shape) + ", " +
                                       shape_str(x.shape) + ", " + shape_str(bias.shape));
    const std::size_t m = weight.shape[0], n = weight.shape[1];
    TensorT<S> out(Shape{m});
    for (std::size_t i = 0; i < m; ++i) {
        S acc = bias.data[i];
        const S* wrow = weight.data.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) acc += wrow[j] * x.data[j];
        out.data[i] = acc;
    }
    if (TapeT<S>* tape = detail::common_tape<S>({&weight, &x, &bias})) {
        auto wd = weight.data;
        auto xd = x.data;
        out.node = tape->record(
            {detail::node_of(weight), detail::node_of(x), detail::node_of(bias)}, out.size(),
            [wd, xd, m, n](const std::vector<S>& up, const typename TapeT<S>::GradSinks& sinks) {
                if (sinks[0]) {
                    auto& g = *sinks[0];
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += up[i] * xd[j];
                }
                if (sinks[1]) {
                    auto& g = *sinks[1];
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t j = 0; j < n; ++j) g[j] += up[i] * wd[i * n + j];
                }
                if (sinks[2]) {
                    auto& g = *sinks[2];
                    for (std::size_t i = 0; i < m; ++i) g[i] += up[i];
                }
            });
        out.tape = tape;
    }
    return out;
}

// -log(p[target] + eps); the cross-entropy tail after softmax.
template <typename S>
TensorT<S> pick_neg_log(const TensorT<S>& probs, std::size_t target, S eps = S(1e-12)) {
    if (probs.rank() != 1) throw_structural("loss", "expects a 1-d probability vector");
    if (target >= probs.shape[0])
        throw_usage("loss", "target " + std::to_string(target) + " out of range [0," +
                                std::to_string(probs.shape[0]) + ")");
    TensorT<S> out(Shape{1});
    out.data[0] = -std::log(probs.data[target] + eps);
    if (TapeT<S>* tape = probs.tape) {
        const S p = probs.data[target];
        out.node = tape->record({probs.node}, 1,
                                [p, target, eps](const std::vector<S>& up,
                                                 const typename TapeT<S>::GradSinks& sinks) {
                                    if (!sinks[0]) return;
                                    (*sinks[0])[target] += up[0] * (S(-1) / (p + eps));
                                });
        out.tape = tape;
    }
    return out;
}

}  // namespace mgrnet
