#include "focalcount/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "focalcount/errors.hpp"
#include "focalcount/rng.hpp"

namespace focalcount {

namespace {

Tensor uniform_kernel(std::vector<std::size_t> shape, std::uint64_t seed) {
    Tensor t(std::move(shape));
    // fan_in of a conv kernel: input channels times window area.
    const double fan_in =
        static_cast<double>(t.dim(1)) * static_cast<double>(t.dim(2)) * static_cast<double>(t.dim(3));
    const double a = std::sqrt(1.0 / fan_in);
    Rng rng(seed);
    for (std::size_t i = 0; i < t.size(); ++i) t.at(i) = rng.uniform_in(-a, a);
    return t;
}

void check_image(const Tensor& image) {
    if (image.rank() != 3 || image.dim(0) != 4) {
        throw dimension_error("forward: image must be [4,H,W], got " +
                              shape_string(image.shape()));
    }
    if (image.dim(1) < 8 || image.dim(2) < 8) {
        throw contract_error("forward: spatial size must be >= 8, got " +
                             shape_string(image.shape()));
    }
}

} // namespace

CounterParams init_params(std::uint64_t seed) {
    CounterParams p;
    p.conv1_kernel = uniform_kernel({8, 4, 3, 3}, mix_seed(seed, 0));
    p.conv1_bias = Tensor({8});
    p.conv2_kernel = uniform_kernel({8, 8, 3, 3}, mix_seed(seed, 1));
    p.conv2_bias = Tensor({8});
    p.head_kernel = uniform_kernel({1, 8, 1, 1}, mix_seed(seed, 2));
    p.head_bias = Tensor({1});
    return p;
}

ForwardResult forward(const CounterParams& params, const Tensor& image) {
    check_image(image);
    Tensor h1 = relu(channel_bias(conv2d(image, params.conv1_kernel, 1), params.conv1_bias));
    Tensor f = sigmoid(channel_bias(conv2d(h1, params.conv2_kernel, 1), params.conv2_bias));
    Tensor head = sigmoid(channel_bias(conv2d(f, params.head_kernel, 0), params.head_bias));
    ForwardResult r;
    r.features = std::move(f);
    r.pred_density = head.reshaped({image.dim(1), image.dim(2)});
    return r;
}

TapeForward forward_on_tape(Graph& g, const CounterParams& params, const Tensor& image) {
    check_image(image);
    TapeForward t;
    Var img = g.leaf(image, false);
    t.conv1_kernel = g.leaf(params.conv1_kernel);
    t.conv1_bias = g.leaf(params.conv1_bias);
    t.conv2_kernel = g.leaf(params.conv2_kernel);
    t.conv2_bias = g.leaf(params.conv2_bias);
    t.head_kernel = g.leaf(params.head_kernel);
    t.head_bias = g.leaf(params.head_bias);

    Var h1 = g.relu(g.channel_bias(g.conv2d(img, t.conv1_kernel, 1), t.conv1_bias));
    t.features = g.sigmoid(g.channel_bias(g.conv2d(h1, t.conv2_kernel, 1), t.conv2_bias));
    t.pred = g.sigmoid(g.channel_bias(g.conv2d(t.features, t.head_kernel, 0), t.head_bias));
    return t;
}

double predict_count(const Tensor& pred_density) {
    for (std::size_t i = 0; i < pred_density.size(); ++i) {
        if (pred_density.at(i) < 0.0) {
            throw contract_error("predict_count: negative density at flat index " +
                                 std::to_string(i));
        }
    }
    return sum(pred_density);
}

namespace {

void write_record(std::ostream& os, const char* name, const Tensor& t) {
    os << name;
    for (std::size_t d : t.shape()) os << ' ' << d;
    os << '\n';
    char buf[32];
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", t.at(i));
        os << buf << (i + 1 == t.size() ? '\n' : ' ');
    }
}

Tensor read_record(std::istream& is, const std::string& expect_name) {
    std::string line;
    if (!std::getline(is, line)) {
        throw parse_error("checkpoint: missing record for " + expect_name);
    }
    std::istringstream head(line);
    std::string name;
    head >> name;
    if (name != expect_name) {
        throw parse_error("checkpoint: expected record " + expect_name + ", found " + name);
    }
    std::vector<std::size_t> shape;
    std::size_t d;
    while (head >> d) shape.push_back(d);
    if (!std::getline(is, line)) {
        throw parse_error("checkpoint: missing values for " + expect_name);
    }
    std::istringstream vals(line);
    std::vector<double> data;
    double v;
    while (vals >> v) data.push_back(v);
    if (data.size() != shape_product(shape)) {
        throw parse_error("checkpoint: record " + expect_name + " holds " +
                          std::to_string(data.size()) + " values for shape " +
                          shape_string(shape));
    }
    return Tensor(std::move(shape), std::move(data));
}

} // namespace

void save_checkpoint(const CounterParams& params, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw parse_error("save_checkpoint: cannot open " + path);
    write_record(os, "conv1_kernel", params.conv1_kernel);
    write_record(os, "conv1_bias", params.conv1_bias);
    write_record(os, "conv2_kernel", params.conv2_kernel);
    write_record(os, "conv2_bias", params.conv2_bias);
    write_record(os, "head_kernel", params.head_kernel);
    write_record(os, "head_bias", params.head_bias);
}

CounterParams load_checkpoint(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw parse_error("load_checkpoint: cannot open " + path);
    CounterParams p;
    p.conv1_kernel = read_record(is, "conv1_kernel");
    p.conv1_bias = read_record(is, "conv1_bias");
    p.conv2_kernel = read_record(is, "conv2_kernel");
    p.conv2_bias = read_record(is, "conv2_bias");
    p.head_kernel = read_record(is, "head_kernel");
    p.head_bias = read_record(is, "head_bias");
    return p;
}

} // namespace focalcount
