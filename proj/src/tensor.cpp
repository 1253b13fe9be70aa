#include "focalcount/tensor.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "focalcount/errors.hpp"

namespace focalcount {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {
    if (shape_.empty()) throw contract_error("Tensor: shape must have at least one axis");
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_.empty()) throw contract_error("Tensor: shape must have at least one axis");
    if (data_.size() != shape_product(shape_)) {
        throw dimension_error("Tensor: data length " + std::to_string(data_.size()) +
                              " does not match shape " + shape_string(shape_));
    }
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t.at(i) = value;
    return t;
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw dimension_error("Tensor::dim: axis " + std::to_string(axis) +
                              " out of range for shape " + shape_string(shape_));
    }
    return shape_[axis];
}

Tensor Tensor::reshaped(std::vector<std::size_t> new_shape) const {
    if (shape_product(new_shape) != size()) {
        throw dimension_error("Tensor::reshaped: cannot view " + shape_string(shape_) +
                              " as " + shape_string(new_shape));
    }
    return Tensor(std::move(new_shape), data_);
}

void require_finite(const Tensor& t, const char* context) {
    const double* p = t.data();
    for (std::size_t i = 0, n = t.size(); i < n; ++i) {
        if (!std::isfinite(p[i])) {
            throw finite_value_error(std::string(context) + ": non-finite value at flat index " +
                                     std::to_string(i));
        }
    }
}

namespace {

// Copies a [C,H,W] image into a zero-padded [C,H+2P,W+2P] buffer so the
// convolution loops below need no boundary tests.
std::vector<double> pad_image(const double* src, std::size_t c, std::size_t h, std::size_t w,
                              std::size_t p) {
    const std::size_t hp = h + 2 * p;
    const std::size_t wp = w + 2 * p;
    std::vector<double> out(c * hp * wp, 0.0);
    for (std::size_t ci = 0; ci < c; ++ci) {
        for (std::size_t hi = 0; hi < h; ++hi) {
            double* dst = out.data() + (ci * hp + hi + p) * wp + p;
            const double* row = src + (ci * h + hi) * w;
            for (std::size_t wi = 0; wi < w; ++wi) dst[wi] = row[wi];
        }
    }
    return out;
}

void check_conv_shapes(const std::vector<std::size_t>& in_shape,
                       const std::vector<std::size_t>& k_shape, std::size_t padding) {
    if (in_shape.size() != 3) {
        throw dimension_error("conv2d: input must be [C,H,W], got " + shape_string(in_shape));
    }
    if (k_shape.size() != 4) {
        throw dimension_error("conv2d: kernel must be [C_out,C_in,k,k], got " +
                              shape_string(k_shape));
    }
    if (k_shape[2] != k_shape[3]) {
        throw dimension_error("conv2d: kernel axes 2 and 3 must agree, got " +
                              shape_string(k_shape));
    }
    if (k_shape[1] != in_shape[0]) {
        throw dimension_error("conv2d: kernel axis 1 (" + std::to_string(k_shape[1]) +
                              ") must equal input axis 0 (" + std::to_string(in_shape[0]) + ")");
    }
    const std::size_t k = k_shape[2];
    if (k % 2 == 0) throw contract_error("conv2d: kernel size must be odd");
    if (padding != (k - 1) / 2) {
        throw contract_error("conv2d: padding must be (k-1)/2 = " + std::to_string((k - 1) / 2) +
                             ", got " + std::to_string(padding));
    }
}

} // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, std::size_t padding) {
    check_conv_shapes(input.shape(), kernel.shape(), padding);
    const std::size_t ci_n = input.dim(0), h = input.dim(1), w = input.dim(2);
    const std::size_t co_n = kernel.dim(0), k = kernel.dim(2);
    const std::size_t hp = h + 2 * padding, wp = w + 2 * padding;

    const std::vector<double> ip = pad_image(input.data(), ci_n, h, w, padding);
    Tensor out({co_n, h, w});
    double* od = out.data();
    const double* kd = kernel.data();

    for (std::size_t co = 0; co < co_n; ++co) {
        double* oc = od + co * h * w;
        for (std::size_t ci = 0; ci < ci_n; ++ci) {
            const double* icp = ip.data() + ci * hp * wp;
            const double* kc = kd + (co * ci_n + ci) * k * k;
            for (std::size_t u = 0; u < k; ++u) {
                for (std::size_t v = 0; v < k; ++v) {
                    const double kv = kc[u * k + v];
                    if (kv == 0.0) continue;
                    for (std::size_t hi = 0; hi < h; ++hi) {
                        const double* irow = icp + (hi + u) * wp + v;
                        double* orow = oc + hi * w;
                        for (std::size_t wi = 0; wi < w; ++wi) orow[wi] += kv * irow[wi];
                    }
                }
            }
        }
    }
    require_finite(out, "conv2d");
    return out;
}

Tensor conv2d_grad_input(const Tensor& grad_out, const Tensor& kernel, std::size_t padding) {
    if (grad_out.rank() != 3 || kernel.rank() != 4) {
        throw dimension_error("conv2d_grad_input: grad_out must be [C_out,H,W] and kernel [C_out,C_in,k,k]");
    }
    if (grad_out.dim(0) != kernel.dim(0)) {
        throw dimension_error("conv2d_grad_input: grad_out axis 0 (" +
                              std::to_string(grad_out.dim(0)) + ") must equal kernel axis 0 (" +
                              std::to_string(kernel.dim(0)) + ")");
    }
    const std::size_t co_n = kernel.dim(0), ci_n = kernel.dim(1), k = kernel.dim(2);
    const std::size_t h = grad_out.dim(1), w = grad_out.dim(2);
    const std::size_t hp = h + 2 * padding, wp = w + 2 * padding;

    // Scatter into a padded gradient buffer, then crop the padding away.
    std::vector<double> gip(ci_n * hp * wp, 0.0);
    const double* gd = grad_out.data();
    const double* kd = kernel.data();
    for (std::size_t co = 0; co < co_n; ++co) {
        const double* gc = gd + co * h * w;
        for (std::size_t ci = 0; ci < ci_n; ++ci) {
            double* gcp = gip.data() + ci * hp * wp;
            const double* kc = kd + (co * ci_n + ci) * k * k;
            for (std::size_t u = 0; u < k; ++u) {
                for (std::size_t v = 0; v < k; ++v) {
                    const double kv = kc[u * k + v];
                    if (kv == 0.0) continue;
                    for (std::size_t hi = 0; hi < h; ++hi) {
                        double* irow = gcp + (hi + u) * wp + v;
                        const double* grow = gc + hi * w;
                        for (std::size_t wi = 0; wi < w; ++wi) irow[wi] += kv * grow[wi];
                    }
                }
            }
        }
    }

    Tensor gin({ci_n, h, w});
    double* gid = gin.data();
    for (std::size_t ci = 0; ci < ci_n; ++ci) {
        for (std::size_t hi = 0; hi < h; ++hi) {
            const double* src = gip.data() + (ci * hp + hi + padding) * wp + padding;
            double* dst = gid + (ci * h + hi) * w;
            for (std::size_t wi = 0; wi < w; ++wi) dst[wi] = src[wi];
        }
    }
    require_finite(gin, "conv2d_grad_input");
    return gin;
}

Tensor conv2d_grad_kernel(const Tensor& grad_out, const Tensor& input,
                          const std::vector<std::size_t>& kernel_shape, std::size_t padding) {
    check_conv_shapes(input.shape(), kernel_shape, padding);
    if (grad_out.rank() != 3 || grad_out.dim(0) != kernel_shape[0] ||
        grad_out.dim(1) != input.dim(1) || grad_out.dim(2) != input.dim(2)) {
        throw dimension_error("conv2d_grad_kernel: grad_out shape " +
                              shape_string(grad_out.shape()) + " does not match output of " +
                              shape_string(input.shape()) + " * " + shape_string(kernel_shape));
    }
    const std::size_t ci_n = input.dim(0), h = input.dim(1), w = input.dim(2);
    const std::size_t co_n = kernel_shape[0], k = kernel_shape[2];
    const std::size_t hp = h + 2 * padding, wp = w + 2 * padding;

    const std::vector<double> ip = pad_image(input.data(), ci_n, h, w, padding);
    Tensor gk(kernel_shape);
    double* gkd = gk.data();
    const double* gd = grad_out.data();

    for (std::size_t co = 0; co < co_n; ++co) {
        const double* gc = gd + co * h * w;
        for (std::size_t ci = 0; ci < ci_n; ++ci) {
            const double* icp = ip.data() + ci * hp * wp;
            for (std::size_t u = 0; u < k; ++u) {
                for (std::size_t v = 0; v < k; ++v) {
                    double acc = 0.0;
                    for (std::size_t hi = 0; hi < h; ++hi) {
                        const double* irow = icp + (hi + u) * wp + v;
                        const double* grow = gc + hi * w;
                        for (std::size_t wi = 0; wi < w; ++wi) acc += grow[wi] * irow[wi];
                    }
                    gkd[(co * ci_n + ci) * k * k + u * k + v] = acc;
                }
            }
        }
    }
    require_finite(gk, "conv2d_grad_kernel");
    return gk;
}

Tensor channel_bias(const Tensor& input, const Tensor& bias) {
    if (input.rank() != 3) {
        throw dimension_error("channel_bias: input must be [C,H,W], got " +
                              shape_string(input.shape()));
    }
    if (bias.rank() != 1 || bias.dim(0) != input.dim(0)) {
        throw dimension_error("channel_bias: bias shape " + shape_string(bias.shape()) +
                              " does not match input channel axis 0 (" +
                              std::to_string(input.dim(0)) + ")");
    }
    const std::size_t c = input.dim(0), plane = input.dim(1) * input.dim(2);
    Tensor out(input.shape());
    const double* in = input.data();
    double* od = out.data();
    for (std::size_t ci = 0; ci < c; ++ci) {
        const double b = bias.at(ci);
        const double* src = in + ci * plane;
        double* dst = od + ci * plane;
        for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i] + b;
    }
    require_finite(out, "channel_bias");
    return out;
}

Tensor relu(const Tensor& x) {
    Tensor out(x.shape());
    const double* in = x.data();
    double* od = out.data();
    for (std::size_t i = 0, n = x.size(); i < n; ++i) od[i] = in[i] > 0.0 ? in[i] : 0.0;
    require_finite(out, "relu");
    return out;
}

Tensor sigmoid(const Tensor& x) {
    Tensor out(x.shape());
    const double* in = x.data();
    double* od = out.data();
    for (std::size_t i = 0, n = x.size(); i < n; ++i) {
        // Split on sign so exp never overflows.
        const double v = in[i];
        if (v >= 0.0) {
            od[i] = 1.0 / (1.0 + std::exp(-v));
        } else {
            const double e = std::exp(v);
            od[i] = e / (1.0 + e);
        }
    }
    require_finite(out, "sigmoid");
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw dimension_error("add: shape mismatch " + shape_string(a.shape()) + " vs " +
                              shape_string(b.shape()));
    }
    Tensor out(a.shape());
    for (std::size_t i = 0, n = a.size(); i < n; ++i) out.at(i) = a.at(i) + b.at(i);
    require_finite(out, "add");
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw dimension_error("mul: shape mismatch " + shape_string(a.shape()) + " vs " +
                              shape_string(b.shape()));
    }
    Tensor out(a.shape());
    for (std::size_t i = 0, n = a.size(); i < n; ++i) out.at(i) = a.at(i) * b.at(i);
    require_finite(out, "mul");
    return out;
}

double sum(const Tensor& x) {
    double acc = 0.0;
    const double* p = x.data();
    for (std::size_t i = 0, n = x.size(); i < n; ++i) acc += p[i];
    return acc;
}

double mean(const Tensor& x) {
    if (x.size() == 0) throw contract_error("mean: tensor is empty");
    return sum(x) / static_cast<double>(x.size());
}

} // namespace focalcount
