#include "tsf/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "tsf/kernels.hpp"

namespace tsf {

namespace {

enum BinaryKind { kAdd = 0, kSub = 1, kMul = 2 };

// Per-output-dimension source strides; 0 marks a broadcast dimension.
std::vector<std::size_t> bc_strides(const Shape& src, const Shape& out) {
    const int ro = static_cast<int>(out.size());
    const int rs = static_cast<int>(src.size());
    std::vector<std::size_t> st(ro, 0);
    std::size_t run = 1;
    for (int i = 0; i < rs; ++i) {
        const int ds = rs - 1 - i;
        const int dode = ro - 1 - i;
        st[dode] = (src[ds] == 1 && out[dode] != 1) ? 0 : run;
        run *= static_cast<std::size_t>(src[ds]);
    }
    return st;
}

// Visits every output element once: f(flat_out_index, offset_a, offset_b).
template <class F>
void bc_for_each(const Shape& out, const std::vector<std::size_t>& sa,
                 const std::vector<std::size_t>& sb, F&& f) {
    const std::size_t n = numel(out);
    const int rank = static_cast<int>(out.size());
    std::vector<int> idx(rank, 0);
    std::size_t oa = 0, ob = 0;
    for (std::size_t i = 0; i < n; ++i) {
        f(i, oa, ob);
        for (int d = rank - 1; d >= 0; --d) {
            ++idx[d];
            oa += sa[d];
            ob += sb[d];
            if (idx[d] < out[d]) break;
            oa -= sa[d] * static_cast<std::size_t>(out[d]);
            ob -= sb[d] * static_cast<std::size_t>(out[d]);
            idx[d] = 0;
        }
    }
}

void transpose(const double* src, std::size_t rows, std::size_t cols, double* dst) {
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * cols + j];
}

}  // namespace

Tape::Node& Tape::node(Var v) {
    if (v < 0 || v >= static_cast<Var>(nodes_.size())) throw UsageError("invalid tape var");
    return nodes_[static_cast<std::size_t>(v)];
}

const Tape::Node& Tape::node(Var v) const {
    if (v < 0 || v >= static_cast<Var>(nodes_.size())) throw UsageError("invalid tape var");
    return nodes_[static_cast<std::size_t>(v)];
}

Var Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<Var>(nodes_.size() - 1);
}

double Tape::scalar_val(Var v) const {
    const Node& n = node(v);
    if (n.val.size() != 1) throw UsageError("scalar_val on non-scalar node " + shape_str(n.shape));
    return n.val[0];
}

Tensor Tape::to_tensor(Var v) const {
    const Node& n = node(v);
    return Tensor(n.shape, n.val);
}

Var Tape::leaf(Tensor& param) {
    param.ensure_grad();
    Node n;
    n.shape = param.shape;
    n.val = param.data;
    n.bound = &param;
    n.needs_grad = true;
    return push(std::move(n));
}

Var Tape::input(Tensor value) {
    Node n;
    n.shape = std::move(value.shape);
    n.val = std::move(value.data);
    return push(std::move(n));
}

Var Tape::input(Shape shape, std::span<const double> values) {
    if (numel(shape) != values.size()) {
        throw ShapeError("input data length does not match shape " + shape_str(shape));
    }
    Node n;
    n.shape = std::move(shape);
    n.val.assign(values.begin(), values.end());
    return push(std::move(n));
}

Var Tape::binary_broadcast(Var a, Var b, int kind) {
    const Node& na = node(a);
    const Node& nb = node(b);
    Node n;
    n.parents = {a, b};
    n.needs_grad = na.needs_grad || nb.needs_grad;

    const auto& ops = kernels::active();
    if (na.shape == nb.shape) {
        n.shape = na.shape;
        n.val.resize(na.val.size());
        switch (kind) {
            case kAdd: ops.add(n.val.data(), na.val.data(), nb.val.data(), n.val.size()); break;
            case kSub: ops.sub(n.val.data(), na.val.data(), nb.val.data(), n.val.size()); break;
            case kMul: ops.mul(n.val.data(), na.val.data(), nb.val.data(), n.val.size()); break;
        }
        Var out = push(std::move(n));
        node(out).back = [a, b, out, kind](Tape& t) {
            const auto& go = t.node(out).grad;
            Node& pa = t.node(a);
            Node& pb = t.node(b);
            const std::size_t len = go.size();
            switch (kind) {
                case kAdd:
                    if (pa.needs_grad)
                        for (std::size_t i = 0; i < len; ++i) pa.grad[i] += go[i];
                    if (pb.needs_grad)
                        for (std::size_t i = 0; i < len; ++i) pb.grad[i] += go[i];
                    break;
                case kSub:
                    if (pa.needs_grad)
                        for (std::size_t i = 0; i < len; ++i) pa.grad[i] += go[i];
                    if (pb.needs_grad)
                        for (std::size_t i = 0; i < len; ++i) pb.grad[i] -= go[i];
                    break;
                case kMul:
                    if (pa.needs_grad)
                        for (std::size_t i = 0; i < len; ++i) pa.grad[i] += pb.val[i] * go[i];
                    if (pb.needs_grad)
                        for (std::size_t i = 0; i < len; ++i) pb.grad[i] += pa.val[i] * go[i];
                    break;
            }
        };
        return out;
    }

    n.shape = broadcast_shape(na.shape, nb.shape);
    n.val.resize(numel(n.shape));
    const auto sa = bc_strides(na.shape, n.shape);
    const auto sb = bc_strides(nb.shape, n.shape);
    double* outp = n.val.data();
    const double* ap = na.val.data();
    const double* bp = nb.val.data();
    switch (kind) {
        case kAdd:
            bc_for_each(n.shape, sa, sb,
                        [&](std::size_t i, std::size_t oa, std::size_t ob) { outp[i] = ap[oa] + bp[ob]; });
            break;
        case kSub:
            bc_for_each(n.shape, sa, sb,
                        [&](std::size_t i, std::size_t oa, std::size_t ob) { outp[i] = ap[oa] - bp[ob]; });
            break;
        case kMul:
            bc_for_each(n.shape, sa, sb,
                        [&](std::size_t i, std::size_t oa, std::size_t ob) { outp[i] = ap[oa] * bp[ob]; });
            break;
    }
    Var out = push(std::move(n));
    node(out).back = [a, b, out, kind, sa, sb](Tape& t) {
        Node& no = t.node(out);
        Node& pa = t.node(a);
        Node& pb = t.node(b);
        const double* go = no.grad.data();
        // Gradients sum-reduce over broadcast dimensions (stride 0 revisits).
        bc_for_each(no.shape, sa, sb, [&](std::size_t i, std::size_t oa, std::size_t ob) {
            switch (kind) {
                case kAdd:
                    if (pa.needs_grad) pa.grad[oa] += go[i];
                    if (pb.needs_grad) pb.grad[ob] += go[i];
                    break;
                case kSub:
                    if (pa.needs_grad) pa.grad[oa] += go[i];
                    if (pb.needs_grad) pb.grad[ob] -= go[i];
                    break;
                case kMul:
                    if (pa.needs_grad) pa.grad[oa] += pb.val[ob] * go[i];
                    if (pb.needs_grad) pb.grad[ob] += pa.val[oa] * go[i];
                    break;
            }
        });
    };
    return out;
}

Var Tape::add(Var a, Var b) { return binary_broadcast(a, b, kAdd); }
Var Tape::sub(Var a, Var b) { return binary_broadcast(a, b, kSub); }
Var Tape::mul(Var a, Var b) { return binary_broadcast(a, b, kMul); }

Var Tape::relu(Var a) {
    const Node& na = node(a);
    Node n;
    n.shape = na.shape;
    n.val.resize(na.val.size());
    kernels::active().relu(n.val.data(), na.val.data(), n.val.size());
    n.parents = {a};
    n.needs_grad = na.needs_grad;
    Var out = push(std::move(n));
    node(out).back = [a, out](Tape& t) {
        Node& pa = t.node(a);
        if (!pa.needs_grad) return;
        const Node& no = t.node(out);
        kernels::active().relu_bwd(pa.grad.data(), pa.val.data(), no.grad.data(), no.grad.size());
    };
    return out;
}

Var Tape::tanh(Var a) {
    const Node& na = node(a);
    Node n;
    n.shape = na.shape;
    n.val.resize(na.val.size());
    for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] = std::tanh(na.val[i]);
    n.parents = {a};
    n.needs_grad = na.needs_grad;
    Var out = push(std::move(n));
    node(out).back = [a, out](Tape& t) {
        Node& pa = t.node(a);
        if (!pa.needs_grad) return;
        const Node& no = t.node(out);
        for (std::size_t i = 0; i < no.grad.size(); ++i) {
            pa.grad[i] += (1.0 - no.val[i] * no.val[i]) * no.grad[i];
        }
    };
    return out;
}

Var Tape::scale(Var a, double c) {
    const Node& na = node(a);
    Node n;
    n.shape = na.shape;
    n.val.resize(na.val.size());
    for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] = c * na.val[i];
    n.parents = {a};
    n.needs_grad = na.needs_grad;
    Var out = push(std::move(n));
    node(out).back = [a, out, c](Tape& t) {
        Node& pa = t.node(a);
        if (!pa.needs_grad) return;
        const Node& no = t.node(out);
        for (std::size_t i = 0; i < no.grad.size(); ++i) pa.grad[i] += c * no.grad[i];
    };
    return out;
}

Var Tape::matmul(Var a, Var b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    if (na.shape.size() != 2 || nb.shape.size() != 2) {
        throw ShapeError("matmul expects rank-2 operands, got " + shape_str(na.shape) + " and " +
                         shape_str(nb.shape));
    }
    if (na.shape[1] != nb.shape[0]) {
        throw ShapeError("matmul inner extents differ: " + shape_str(na.shape) + " vs " +
                         shape_str(nb.shape));
    }
    const std::size_t r = static_cast<std::size_t>(na.shape[0]);
    const std::size_t k = static_cast<std::size_t>(na.shape[1]);
    const std::size_t c = static_cast<std::size_t>(nb.shape[1]);
    Node n;
    n.shape = {na.shape[0], nb.shape[1]};
    n.val.assign(r * c, 0.0);
    kernels::active().gemm_nn(n.val.data(), na.val.data(), nb.val.data(), r, k, c);
    n.parents = {a, b};
    n.needs_grad = na.needs_grad || nb.needs_grad;
    Var out = push(std::move(n));
    node(out).back = [a, b, out, r, k, c](Tape& t) {
        const Node& no = t.node(out);
        Node& pa = t.node(a);
        Node& pb = t.node(b);
        const auto& ops = kernels::active();
        if (pa.needs_grad) {
            // dA += G * B^T
            std::vector<double> bt(c * k);
            transpose(pb.val.data(), k, c, bt.data());
            ops.gemm_nn(pa.grad.data(), no.grad.data(), bt.data(), r, c, k);
        }
        if (pb.needs_grad) {
            // dB += A^T * G
            std::vector<double> at(k * r);
            transpose(pa.val.data(), r, k, at.data());
            ops.gemm_nn(pb.grad.data(), at.data(), no.grad.data(), k, r, c);
        }
    };
    return out;
}

Var Tape::conv1d_causal(Var in, Var kernels_v, int dilation) {
    const Node& ni = node(in);
    const Node& nk = node(kernels_v);
    if (dilation < 1) throw ParamError("conv1d_causal: dilation must be >= 1");
    if (ni.shape.size() != 3) {
        throw ShapeError("conv1d_causal expects input [batch, channels, time], got " +
                         shape_str(ni.shape));
    }
    if (nk.shape.size() != 3) {
        throw ShapeError("conv1d_causal expects kernels [c_out, c_in, k], got " +
                         shape_str(nk.shape));
    }
    if (nk.shape[1] != ni.shape[1]) {
        throw ShapeError("conv1d_causal channel mismatch: input " + shape_str(ni.shape) +
                         " vs kernels " + shape_str(nk.shape));
    }
    if (nk.shape[2] < 1) throw ParamError("conv1d_causal: kernel width must be >= 1");
    const std::size_t batch = static_cast<std::size_t>(ni.shape[0]);
    const std::size_t c_in = static_cast<std::size_t>(ni.shape[1]);
    const std::size_t t_len = static_cast<std::size_t>(ni.shape[2]);
    const std::size_t c_out = static_cast<std::size_t>(nk.shape[0]);
    const std::size_t k = static_cast<std::size_t>(nk.shape[2]);
    const std::size_t dil = static_cast<std::size_t>(dilation);

    Node n;
    n.shape = {ni.shape[0], nk.shape[0], ni.shape[2]};
    n.val.assign(batch * c_out * t_len, 0.0);
    const auto& ops = kernels::active();
    for (std::size_t b = 0; b < batch; ++b) {
        ops.conv1d_causal(n.val.data() + b * c_out * t_len, ni.val.data() + b * c_in * t_len,
                          nk.val.data(), c_in, c_out, t_len, k, dil);
    }
    n.parents = {in, kernels_v};
    n.needs_grad = ni.needs_grad || nk.needs_grad;
    Var out = push(std::move(n));
    node(out).back = [in, kernels_v, out, batch, c_in, c_out, t_len, k, dil](Tape& t) {
        const Node& no = t.node(out);
        Node& pi = t.node(in);
        Node& pk = t.node(kernels_v);
        for (std::size_t b = 0; b < batch; ++b) {
            const double* go = no.grad.data() + b * c_out * t_len;
            const double* xv = pi.val.data() + b * c_in * t_len;
            for (std::size_t co = 0; co < c_out; ++co) {
                const double* gorow = go + co * t_len;
                for (std::size_t ci = 0; ci < c_in; ++ci) {
                    const std::size_t kbase = (co * c_in + ci) * k;
                    for (std::size_t j = 0; j < k; ++j) {
                        const std::size_t lag = (k - 1 - j) * dil;
                        if (lag >= t_len) continue;
                        if (pi.needs_grad) {
                            double* gx = pi.grad.data() + b * c_in * t_len + ci * t_len;
                            const double w = pk.val[kbase + j];
                            for (std::size_t tt = lag; tt < t_len; ++tt) {
                                gx[tt - lag] += w * gorow[tt];
                            }
                        }
                        if (pk.needs_grad) {
                            const double* xrow = xv + ci * t_len;
                            double acc = 0.0;
                            for (std::size_t tt = lag; tt < t_len; ++tt) {
                                acc += gorow[tt] * xrow[tt - lag];
                            }
                            pk.grad[kbase + j] += acc;
                        }
                    }
                }
            }
        }
    };
    return out;
}

Var Tape::concat(std::span<const Var> parts, int axis) {
    if (parts.empty()) throw ParamError("concat: no parts");
    const Shape& first = node(parts[0]).shape;
    const int rank = static_cast<int>(first.size());
    if (axis < 0 || axis >= rank) throw ParamError("concat: axis out of range");
    int total = 0;
    bool needs = false;
    for (Var p : parts) {
        const Shape& s = node(p).shape;
        if (static_cast<int>(s.size()) != rank) {
            throw ShapeError("concat: rank mismatch " + shape_str(first) + " vs " + shape_str(s));
        }
        for (int d = 0; d < rank; ++d) {
            if (d != axis && s[d] != first[d]) {
                throw ShapeError("concat: extent mismatch off axis: " + shape_str(first) + " vs " +
                                 shape_str(s));
            }
        }
        total += s[axis];
        needs = needs || node(p).needs_grad;
    }
    Shape out_shape = first;
    out_shape[axis] = total;

    std::size_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= static_cast<std::size_t>(first[d]);
    for (int d = axis + 1; d < rank; ++d) inner *= static_cast<std::size_t>(first[d]);

    Node n;
    n.shape = std::move(out_shape);
    n.val.resize(numel(n.shape));
    const std::size_t out_row = static_cast<std::size_t>(total) * inner;
    std::size_t col_off = 0;
    for (Var p : parts) {
        const Node& np = node(p);
        const std::size_t part_row = static_cast<std::size_t>(np.shape[axis]) * inner;
        for (std::size_t o = 0; o < outer; ++o) {
            std::memcpy(n.val.data() + o * out_row + col_off, np.val.data() + o * part_row,
                        part_row * sizeof(double));
        }
        col_off += part_row;
    }
    n.parents.assign(parts.begin(), parts.end());
    n.needs_grad = needs;
    Var out = push(std::move(n));
    std::vector<Var> part_ids(parts.begin(), parts.end());
    node(out).back = [part_ids, out, outer, inner, out_row, axis](Tape& t) {
        const Node& no = t.node(out);
        std::size_t col_off = 0;
        for (Var p : part_ids) {
            Node& np = t.node(p);
            const std::size_t part_row = static_cast<std::size_t>(np.shape[axis]) * inner;
            if (np.needs_grad) {
                for (std::size_t o = 0; o < outer; ++o) {
                    const double* src = no.grad.data() + o * out_row + col_off;
                    double* dst = np.grad.data() + o * part_row;
                    for (std::size_t i = 0; i < part_row; ++i) dst[i] += src[i];
                }
            }
            col_off += part_row;
        }
    };
    return out;
}

Var Tape::slice_cols(Var x, int col_begin, int col_end) {
    const Node& nx = node(x);
    if (nx.shape.size() != 2) throw ShapeError("slice_cols expects rank-2, got " + shape_str(nx.shape));
    if (col_begin < 0 || col_end > nx.shape[1] || col_begin >= col_end) {
        throw ParamError("slice_cols: bad column range [" + std::to_string(col_begin) + "," +
                         std::to_string(col_end) + ") for " + shape_str(nx.shape));
    }
    const std::size_t rows = static_cast<std::size_t>(nx.shape[0]);
    const std::size_t cols = static_cast<std::size_t>(nx.shape[1]);
    const std::size_t width = static_cast<std::size_t>(col_end - col_begin);
    Node n;
    n.shape = {nx.shape[0], col_end - col_begin};
    n.val.resize(rows * width);
    for (std::size_t r = 0; r < rows; ++r) {
        std::memcpy(n.val.data() + r * width, nx.val.data() + r * cols + col_begin,
                    width * sizeof(double));
    }
    n.parents = {x};
    n.needs_grad = nx.needs_grad;
    Var out = push(std::move(n));
    node(out).back = [x, out, rows, cols, width, col_begin](Tape& t) {
        Node& px = t.node(x);
        if (!px.needs_grad) return;
        const Node& no = t.node(out);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* src = no.grad.data() + r * width;
            double* dst = px.grad.data() + r * cols + col_begin;
            for (std::size_t i = 0; i < width; ++i) dst[i] += src[i];
        }
    };
    return out;
}

Var Tape::last_timestep(Var x) {
    const Node& nx = node(x);
    if (nx.shape.size() != 3) {
        throw ShapeError("last_timestep expects [batch, channels, time], got " + shape_str(nx.shape));
    }
    const std::size_t batch = static_cast<std::size_t>(nx.shape[0]);
    const std::size_t chans = static_cast<std::size_t>(nx.shape[1]);
    const std::size_t t_len = static_cast<std::size_t>(nx.shape[2]);
    Node n;
    n.shape = {nx.shape[0], nx.shape[1]};
    n.val.resize(batch * chans);
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t c = 0; c < chans; ++c) {
            n.val[b * chans + c] = nx.val[(b * chans + c) * t_len + t_len - 1];
        }
    }
    n.parents = {x};
    n.needs_grad = nx.needs_grad;
    Var out = push(std::move(n));
    node(out).back = [x, out, batch, chans, t_len](Tape& t) {
        Node& px = t.node(x);
        if (!px.needs_grad) return;
        const Node& no = t.node(out);
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t c = 0; c < chans; ++c) {
                px.grad[(b * chans + c) * t_len + t_len - 1] += no.grad[b * chans + c];
            }
        }
    };
    return out;
}

Var Tape::sum(Var a) {
    const Node& na = node(a);
    Node n;
    n.shape = {1};
    n.val = {kernels::sum(na.val.data(), na.val.size())};
    n.parents = {a};
    n.needs_grad = na.needs_grad;
    Var out = push(std::move(n));
    node(out).back = [a, out](Tape& t) {
        Node& pa = t.node(a);
        if (!pa.needs_grad) return;
        const double g = t.node(out).grad[0];
        for (double& gi : pa.grad) gi += g;
    };
    return out;
}

Var Tape::mse(Var pred, Var target) {
    const Node& np = node(pred);
    const Node& nt = node(target);
    if (np.shape != nt.shape) {
        throw ShapeError("mse shape mismatch: " + shape_str(np.shape) + " vs " + shape_str(nt.shape));
    }
    const std::size_t count = np.val.size();
    Node n;
    n.shape = {1};
    n.val = {kernels::sq_diff_sum(np.val.data(), nt.val.data(), count) / static_cast<double>(count)};
    n.parents = {pred, target};
    n.needs_grad = np.needs_grad || nt.needs_grad;
    Var out = push(std::move(n));
    node(out).back = [pred, target, out, count](Tape& t) {
        const double g = t.node(out).grad[0];
        Node& pp = t.node(pred);
        Node& pt = t.node(target);
        const double s = 2.0 * g / static_cast<double>(count);
        for (std::size_t i = 0; i < count; ++i) {
            const double d = s * (pp.val[i] - pt.val[i]);
            if (pp.needs_grad) pp.grad[i] += d;
            if (pt.needs_grad) pt.grad[i] -= d;
        }
    };
    return out;
}

void Tape::backward(Var loss) {
    Node& ln = node(loss);
    if (ln.val.size() != 1) {
        throw UsageError("backward target must be scalar, got " + shape_str(ln.shape));
    }
    for (Var i = 0; i <= loss; ++i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (n.needs_grad) n.grad.assign(n.val.size(), 0.0);
    }
    if (!ln.needs_grad) return;  // nothing tracked below the loss
    ln.grad[0] = 1.0;
    for (Var i = loss; i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (n.needs_grad && n.back) n.back(*this);
    }
    for (Var i = 0; i <= loss; ++i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (n.bound) {
            for (std::size_t j = 0; j < n.grad.size(); ++j) n.bound->grad[j] += n.grad[j];
        }
    }
}

}  // namespace tsf
