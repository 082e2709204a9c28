#include "tfa/tensor.hpp"

#include <atomic>
#include <cmath>

namespace tfa {

namespace {
std::atomic<std::uint64_t> g_next_id{1};
}

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) {
        if (e == 0) throw DimensionError("tensor extents must be positive, got " + shape_str(shape));
        n *= e;
    }
    return n;
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)),
      data_(std::make_shared<std::vector<double>>(shape_numel(shape_), 0.0)),
      id_(g_next_id.fetch_add(1)) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)),
      data_(std::make_shared<std::vector<double>>(std::move(data))),
      id_(g_next_id.fetch_add(1)) {
    if (data_->size() != shape_numel(shape_)) {
        throw DimensionError("data length " + std::to_string(data_->size()) +
                             " does not match shape " + shape_str(shape_));
    }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
    Tensor t(std::move(shape));
    for (double& v : t.values()) v = value;
    return t;
}

Tensor Tensor::from(std::vector<std::size_t> shape, std::vector<double> data) {
    return Tensor(std::move(shape), std::move(data));
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::clone() const {
    Tensor t(shape_, *data_);
    t.requires_grad_ = requires_grad_;
    return t;
}

void ensure_finite(const Tensor& t, const char* op) {
    for (double v : t.values()) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string(op) + " produced a non-finite value");
        }
    }
}

}  // namespace tfa
