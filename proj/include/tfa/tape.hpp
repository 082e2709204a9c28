#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "tfa/tensor.hpp"

namespace tfa {

class Tape;
class GradientMap;
GradientMap backward(const Tensor& loss, Tape& tape);

/// Records primitive operations during a forward pass and accumulates
/// gradients keyed by tensor identity during the backward sweep. A tape is
/// confined to one logical thread; it may be handed off but never shared.
class Tape {
  public:
    using BackwardFn = std::function<void()>;

    void record(BackwardFn fn) { nodes_.push_back(std::move(fn)); }
    std::size_t size() const { return nodes_.size(); }

    /// Gradient buffer for `t`, created zero-filled on first access.
    std::vector<double>& grad_slot(const Tensor& t);

    /// Gradient buffer if any op accumulated into it, else nullptr.
    const std::vector<double>* find_grad(std::uint64_t id) const;

    void reset();

  private:
    friend class GradientMap;
    friend GradientMap backward(const Tensor& loss, Tape& tape);

    std::vector<BackwardFn> nodes_;
    std::unordered_map<std::uint64_t, std::vector<double>> grads_;
};

/// Result of backward(): gradients of the loss w.r.t. every tensor that
/// participated. backward replays the tape in exact reverse recording order,
/// seeds d(loss)/d(loss)=1, and clears the tape. Tensors off the loss path
/// report exact zeros.
class GradientMap {
  public:
    Tensor grad_of(const Tensor& t) const;
    bool has(const Tensor& t) const { return grads_.count(t.id()) != 0; }

  private:
    friend GradientMap backward(const Tensor& loss, Tape& tape);
    std::unordered_map<std::uint64_t, std::vector<double>> grads_;
};

}  // namespace tfa
