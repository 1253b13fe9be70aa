#pragma once

#include <cstddef>
#include <vector>

#include "focalcount/tensor.hpp"

namespace focalcount {

class Graph;

// Handle to a tape node. Only meaningful with the Graph that produced it.
struct Var {
    std::size_t id = 0;
};

// Reverse-mode tape over the fixed operator set the toy counter needs.
// Typical use: record leaves and ops, call backward once on a downstream
// scalar (or seed a non-scalar node with an externally computed gradient),
// then read grad() off the leaves. clear() resets the tape between steps.
class Graph {
public:
    // requires_grad=false marks data that never needs a gradient (inputs).
    Var leaf(Tensor value, bool requires_grad = true);

    Var conv2d(Var input, Var kernel, std::size_t padding);
    Var channel_bias(Var input, Var bias);
    Var relu(Var x);
    Var sigmoid(Var x);
    Var add(Var a, Var b);
    Var mul(Var a, Var b);
    Var sum(Var x);   // shape [1]
    Var mean(Var x);  // shape [1]

    const Tensor& value(Var v) const;

    // Gradient of the last backward() target w.r.t. v. Zero tensor if v did
    // not participate; contract error if backward has not run.
    const Tensor& grad(Var v) const;

    // Seeds d(out)/d(out) = 1; out must hold a single element.
    void backward(Var out);
    // Seeds an arbitrary gradient of some external scalar w.r.t. out.
    void backward(Var out, const Tensor& seed);

    std::size_t node_count() const { return nodes_.size(); }
    void clear();

private:
    enum class Op { Leaf, Conv2d, ChannelBias, Relu, Sigmoid, Add, Mul, Sum, Mean };

    struct Node {
        Op op = Op::Leaf;
        std::size_t args[2] = {0, 0};
        std::size_t padding = 0;
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
    };

    Var push(Node node);
    Node& checked(Var v);
    const Node& checked(Var v) const;
    void accumulate(std::size_t id, const Tensor& g);

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

} // namespace focalcount
