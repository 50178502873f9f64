#pragma once

#include <functional>
#include <span>
#include <vector>

#include "tsf/tensor.hpp"

namespace tsf {

// Handle to a node on a Tape.
using Var = int;

// Dynamic reverse-mode tape, rebuilt per forward pass. Values are computed
// eagerly as ops are recorded; backward() walks the record in reverse and
// accumulates gradients into every bound parameter's grad buffer.
//
// A Tape is single-threaded and non-relocatable. Parameters are attached with
// leaf(); their values are copied onto the tape, so optimizer updates between
// passes never alias recorded state.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Attach an external parameter. backward() accumulates into param.grad.
    Var leaf(Tensor& param);

    // Record a constant (no gradient tracking).
    Var input(Tensor value);
    Var input(Shape shape, std::span<const double> values);

    // Elementwise with trailing-dimension broadcast.
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var relu(Var a);
    Var tanh(Var a);
    Var scale(Var a, double c);

    // [r x k] * [k x c] -> [r x c]
    Var matmul(Var a, Var b);

    // input [B, C_in, T], kernels [C_out, C_in, k] -> [B, C_out, T].
    // Left-padded so output index t depends only on input indices <= t.
    Var conv1d_causal(Var in, Var kernels, int dilation);

    Var concat(std::span<const Var> parts, int axis);
    Var slice_cols(Var x, int col_begin, int col_end);  // [B, F] -> [B, e-b]
    Var last_timestep(Var x);                           // [B, C, T] -> [B, C]

    Var sum(Var a);                 // -> scalar [1]
    Var mse(Var pred, Var target);  // mean of squared differences -> [1]

    // Loss must be scalar. Fills grads for every tracked node up to `loss`
    // and scatters leaf gradients into their bound tensors (accumulating).
    void backward(Var loss);

    const Shape& shape(Var v) const { return node(v).shape; }
    std::span<const double> val(Var v) const { return node(v).val; }
    double scalar_val(Var v) const;
    // Gradient of a node after backward(); empty span if the node is
    // untracked or backward has not run.
    std::span<const double> grad(Var v) const { return node(v).grad; }
    Tensor to_tensor(Var v) const;

    int node_count() const { return static_cast<int>(nodes_.size()); }
    std::span<const Var> parents(Var v) const { return node(v).parents; }

private:
    struct Node {
        Shape shape;
        std::vector<double> val;
        std::vector<double> grad;
        Tensor* bound = nullptr;
        bool needs_grad = false;
        std::vector<Var> parents;
        std::function<void(Tape&)> back;
    };

    Node& node(Var v);
    const Node& node(Var v) const;
    Var push(Node n);
    bool tracked(Var v) const { return node(v).needs_grad; }

    Var binary_broadcast(Var a, Var b, int kind);

    std::vector<Node> nodes_;
};

}  // namespace tsf
