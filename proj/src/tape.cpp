#include "tfa/tape.hpp"

namespace tfa {

std::vector<double>& Tape::grad_slot(const Tensor& t) {
    auto it = grads_.find(t.id());
    if (it == grads_.end()) {
        it = grads_.emplace(t.id(), std::vector<double>(t.numel(), 0.0)).first;
    }
    return it->second;
}

const std::vector<double>* Tape::find_grad(std::uint64_t id) const {
    auto it = grads_.find(id);
    return it == grads_.end() ? nullptr : &it->second;
}

void Tape::reset() {
    nodes_.clear();
    grads_.clear();
}

Tensor GradientMap::grad_of(const Tensor& t) const {
    auto it = grads_.find(t.id());
    if (it == grads_.end()) return Tensor::zeros(t.shape());
    return Tensor::from(t.shape(), it->second);
}

GradientMap backward(const Tensor& loss, Tape& tape) {
    if (loss.numel() != 1) {
        throw ContractError("backward requires a scalar loss, got shape " + shape_str(loss.shape()));
    }
    tape.grad_slot(loss)[0] = 1.0;
    for (auto it = tape.nodes_.rbegin(); it != tape.nodes_.rend(); ++it) {
        (*it)();
    }
    GradientMap out;
    out.grads_ = std::move(tape.grads_);
    tape.reset();
    return out;
}

}  // namespace tfa
