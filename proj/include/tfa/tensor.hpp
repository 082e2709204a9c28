#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "tfa/common.hpp"

namespace tfa {

/// Dense row-major tensor of doubles. Copies are shallow: they share the
/// underlying buffer and the tensor identity used by the autodiff tape.
/// Operations never mutate their inputs; the only sanctioned in-place
/// mutation is an optimizer updating leaf parameters between tapes.
class Tensor {
  public:
    Tensor() : Tensor(std::vector<std::size_t>{}) {}

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor full(std::vector<std::size_t> shape, double value);
    static Tensor from(std::vector<std::size_t> shape, std::vector<double> data);
    static Tensor scalar(double value);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
    std::size_t numel() const { return data_->size(); }

    std::vector<double>& values() { return *data_; }
    const std::vector<double>& values() const { return *data_; }
    double* data() { return data_->data(); }
    const double* data() const { return data_->data(); }

    double& at(std::size_t i) { return (*data_)[i]; }
    double at(std::size_t i) const { return (*data_)[i]; }
    /// 2-D accessors; row-major.
    double& at(std::size_t r, std::size_t c) { return (*data_)[r * shape_[1] + c]; }
    double at(std::size_t r, std::size_t c) const { return (*data_)[r * shape_[1] + c]; }
    /// 3-D accessor for H×W×C maps.
    double& at(std::size_t y, std::size_t x, std::size_t c) {
        return (*data_)[(y * shape_[1] + x) * shape_[2] + c];
    }
    double at(std::size_t y, std::size_t x, std::size_t c) const {
        return (*data_)[(y * shape_[1] + x) * shape_[2] + c];
    }

    std::uint64_t id() const { return id_; }
    bool requires_grad() const { return requires_grad_; }
    Tensor& set_requires_grad(bool v) {
        requires_grad_ = v;
        return *this;
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    /// Deep copy with a fresh identity.
    Tensor clone() const;

  private:
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    std::vector<std::size_t> shape_;
    std::shared_ptr<std::vector<double>> data_;
    std::uint64_t id_ = 0;
    bool requires_grad_ = false;
};

/// Throws NumericError naming `op` if any element is NaN or infinite.
void ensure_finite(const Tensor& t, const char* op);

std::size_t shape_numel(const std::vector<std::size_t>& shape);

}  // namespace tfa
