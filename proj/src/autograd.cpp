#include "focalcount/autograd.hpp"

#include <string>
#include <utility>

#include "focalcount/errors.hpp"

namespace focalcount {

Var Graph::push(Node node) {
    nodes_.push_back(std::move(node));
    return Var{nodes_.size() - 1};
}

Graph::Node& Graph::checked(Var v) {
    if (v.id >= nodes_.size()) {
        throw contract_error("Graph: node id " + std::to_string(v.id) + " out of range");
    }
    return nodes_[v.id];
}

const Graph::Node& Graph::checked(Var v) const {
    if (v.id >= nodes_.size()) {
        throw contract_error("Graph: node id " + std::to_string(v.id) + " out of range");
    }
    return nodes_[v.id];
}

Var Graph::leaf(Tensor value, bool requires_grad) {
    require_finite(value, "Graph::leaf");
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    return push(std::move(n));
}

Var Graph::conv2d(Var input, Var kernel, std::size_t padding) {
    Node n;
    n.op = Op::Conv2d;
    n.args[0] = input.id;
    n.args[1] = kernel.id;
    n.padding = padding;
    n.value = focalcount::conv2d(checked(input).value, checked(kernel).value, padding);
    n.requires_grad = checked(input).requires_grad || checked(kernel).requires_grad;
    return push(std::move(n));
}

Var Graph::channel_bias(Var input, Var bias) {
    Node n;
    n.op = Op::ChannelBias;
    n.args[0] = input.id;
    n.args[1] = bias.id;
    n.value = focalcount::channel_bias(checked(input).value, checked(bias).value);
    n.requires_grad = checked(input).requires_grad || checked(bias).requires_grad;
    return push(std::move(n));
}

Var Graph::relu(Var x) {
    Node n;
    n.op = Op::Relu;
    n.args[0] = x.id;
    n.value = focalcount::relu(checked(x).value);
    n.requires_grad = checked(x).requires_grad;
    return push(std::move(n));
}

Var Graph::sigmoid(Var x) {
    Node n;
    n.op = Op::Sigmoid;
    n.args[0] = x.id;
    n.value = focalcount::sigmoid(checked(x).value);
    n.requires_grad = checked(x).requires_grad;
    return push(std::move(n));
}

Var Graph::add(Var a, Var b) {
    Node n;
    n.op = Op::Add;
    n.args[0] = a.id;
    n.args[1] = b.id;
    n.value = focalcount::add(checked(a).value, checked(b).value);
    n.requires_grad = checked(a).requires_grad || checked(b).requires_grad;
    return push(std::move(n));
}

Var Graph::mul(Var a, Var b) {
    Node n;
    n.op = Op::Mul;
    n.args[0] = a.id;
    n.args[1] = b.id;
    n.value = focalcount::mul(checked(a).value, checked(b).value);
    n.requires_grad = checked(a).requires_grad || checked(b).requires_grad;
    return push(std::move(n));
}

Var Graph::sum(Var x) {
    Node n;
    n.op = Op::Sum;
    n.args[0] = x.id;
    n.value = Tensor({1}, {focalcount::sum(checked(x).value)});
    n.requires_grad = checked(x).requires_grad;
    return push(std::move(n));
}

Var Graph::mean(Var x) {
    Node n;
    n.op = Op::Mean;
    n.args[0] = x.id;
    n.value = Tensor({1}, {focalcount::mean(checked(x).value)});
    n.requires_grad = checked(x).requires_grad;
    return push(std::move(n));
}

const Tensor& Graph::value(Var v) const {
    return checked(v).value;
}

const Tensor& Graph::grad(Var v) const {
    if (!backward_done_) throw contract_error("Graph::grad: backward has not run");
    const Node& n = checked(v);
    if (n.grad.empty()) {
        throw contract_error("Graph::grad: node " + std::to_string(v.id) +
                             " has no gradient (requires_grad false or unreachable)");
    }
    return n.grad;
}

void Graph::accumulate(std::size_t id, const Tensor& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.empty()) {
        n.grad = g;
    } else {
        n.grad = focalcount::add(n.grad, g);
    }
}

void Graph::backward(Var out) {
    const Node& o = checked(out);
    if (o.value.size() != 1) {
        throw contract_error("Graph::backward: output must be scalar, has " +
                             std::to_string(o.value.size()) + " elements");
    }
    backward(out, Tensor::full(o.value.shape(), 1.0));
}

void Graph::backward(Var out, const Tensor& seed) {
    Node& o = checked(out);
    if (!seed.same_shape(o.value)) {
        throw dimension_error("Graph::backward: seed shape " + shape_string(seed.shape()) +
                              " does not match output shape " + shape_string(o.value.shape()));
    }
    require_finite(seed, "Graph::backward seed");
    if (!o.requires_grad) {
        throw contract_error("Graph::backward: output does not require grad");
    }
    for (Node& n : nodes_) n.grad = Tensor();
    o.grad = seed;

    for (std::size_t i = out.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.requires_grad || n.grad.empty()) continue;
        const Tensor& g = n.grad;
        switch (n.op) {
            case Op::Leaf:
                break;
            case Op::Conv2d: {
                const Node& in = nodes_[n.args[0]];
                const Node& k = nodes_[n.args[1]];
                if (in.requires_grad) {
                    accumulate(n.args[0], conv2d_grad_input(g, k.value, n.padding));
                }
                if (k.requires_grad) {
                    accumulate(n.args[1], conv2d_grad_kernel(g, in.value, k.value.shape(), n.padding));
                }
                break;
            }
            case Op::ChannelBias: {
                accumulate(n.args[0], g);
                const Node& b = nodes_[n.args[1]];
                if (b.requires_grad) {
                    const std::size_t c = g.dim(0), plane = g.dim(1) * g.dim(2);
                    Tensor gb({c});
                    for (std::size_t ci = 0; ci < c; ++ci) {
                        double acc = 0.0;
                        const double* src = g.data() + ci * plane;
                        for (std::size_t j = 0; j < plane; ++j) acc += src[j];
                        gb.at(ci) = acc;
                    }
                    accumulate(n.args[1], gb);
                }
                break;
            }
            case Op::Relu: {
                const Tensor& x = nodes_[n.args[0]].value;
                Tensor gx(x.shape());
                for (std::size_t j = 0; j < x.size(); ++j) {
                    gx.at(j) = x.at(j) > 0.0 ? g.at(j) : 0.0;
                }
                accumulate(n.args[0], gx);
                break;
            }
            case Op::Sigmoid: {
                const Tensor& s = n.value;
                Tensor gx(s.shape());
                for (std::size_t j = 0; j < s.size(); ++j) {
                    gx.at(j) = g.at(j) * s.at(j) * (1.0 - s.at(j));
                }
                accumulate(n.args[0], gx);
                break;
            }
            case Op::Add: {
                accumulate(n.args[0], g);
                accumulate(n.args[1], g);
                break;
            }
            case Op::Mul: {
                const Node& a = nodes_[n.args[0]];
                const Node& b = nodes_[n.args[1]];
                if (a.requires_grad) accumulate(n.args[0], focalcount::mul(g, b.value));
                if (b.requires_grad) accumulate(n.args[1], focalcount::mul(g, a.value));
                break;
            }
            case Op::Sum: {
                const Tensor& x = nodes_[n.args[0]].value;
                accumulate(n.args[0], Tensor::full(x.shape(), g.at(0)));
                break;
            }
            case Op::Mean: {
                const Tensor& x = nodes_[n.args[0]].value;
                accumulate(n.args[0],
                           Tensor::full(x.shape(), g.at(0) / static_cast<double>(x.size())));
                break;
            }
        }
        // Once a node's grad has been propagated to its inputs it is dead
        // weight; only leaves (and the seeded output) stay readable.
        if (n.op != Op::Leaf && i != out.id) n.grad = Tensor();
    }
    backward_done_ = true;
}

void Graph::clear() {
    nodes_.clear();
    backward_done_ = false;
}

} // namespace focalcount
