#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "tfa/rng.hpp"
#include "tfa/tensor.hpp"

namespace tfa::test {

inline Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.values()) v = rng.normal() * scale;
    return t;
}

/// Central finite differences of a scalar-valued function w.r.t. one
/// parameter tensor. The function must be re-evaluable; `param` is restored
/// on exit.
inline std::vector<double> finite_diff(const std::function<double()>& f, Tensor& param,
                                       double h = 1e-5) {
    std::vector<double> g(param.numel());
    for (std::size_t i = 0; i < param.numel(); ++i) {
        const double orig = param.at(i);
        param.at(i) = orig + h;
        const double fp = f();
        param.at(i) = orig - h;
        const double fm = f();
        param.at(i) = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

/// Max over elements of |a-b| / max(|a|, |b|, floor).
inline double max_rel_err(const std::vector<double>& a, const std::vector<double>& b,
                          double floor_ = 1e-6) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), floor_});
        worst = std::max(worst, std::fabs(a[i] - b[i]) / denom);
    }
    return worst;
}

}  // namespace tfa::test
