#include "tfa/ops.hpp"

#include <algorithm>
#include <cmath>

namespace tfa {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
    }
}

bool grads_wanted(Tape* tape, const Tensor& a) { return tape && a.requires_grad(); }
bool grads_wanted(Tape* tape, const Tensor& a, const Tensor& b) {
    return tape && (a.requires_grad() || b.requires_grad());
}

void accumulate(Tape* tape, const Tensor& t, const std::vector<double>& g) {
    auto& slot = tape->grad_slot(t);
    for (std::size_t i = 0; i < g.size(); ++i) slot[i] += g[i];
}

/// Shared guts of elementwise binary ops: out = f(a, b), da = dfa*gout, db = dfb*gout.
template <typename F, typename DA, typename DB>
Tensor binary_op(const char* name, const Tensor& a, const Tensor& b, Tape* tape, F f, DA dfa,
                 DB dfb) {
    require_same_shape(a, b, name);
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = a.numel();
    for (std::size_t i = 0; i < n; ++i) out.at(i) = f(a.at(i), b.at(i));
    ensure_finite(out, name);
    out.set_requires_grad(a.requires_grad() || b.requires_grad());
    if (grads_wanted(tape, a, b)) {
        tape->record([a, b, out, tape, dfa, dfb]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            const std::size_t n = a.numel();
            if (a.requires_grad()) {
                auto& ga = tape->grad_slot(a);
                for (std::size_t i = 0; i < n; ++i) ga[i] += dfa(a.at(i), b.at(i)) * (*go)[i];
            }
            if (b.requires_grad()) {
                auto& gb = tape->grad_slot(b);
                for (std::size_t i = 0; i < n; ++i) gb[i] += dfb(a.at(i), b.at(i)) * (*go)[i];
            }
        });
    }
    return out;
}

template <typename F, typename DF>
Tensor unary_op(const char* name, const Tensor& a, Tape* tape, F f, DF df) {
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = a.numel();
    for (std::size_t i = 0; i < n; ++i) out.at(i) = f(a.at(i));
    ensure_finite(out, name);
    out.set_requires_grad(a.requires_grad());
    if (grads_wanted(tape, a)) {
        tape->record([a, out, tape, df]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            auto& ga = tape->grad_slot(a);
            for (std::size_t i = 0; i < a.numel(); ++i) ga[i] += df(a.at(i)) * (*go)[i];
        });
    }
    return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b, Tape* tape) {
    return binary_op(
        "add", a, b, tape, [](double x, double y) { return x + y; },
        [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b, Tape* tape) {
    return binary_op(
        "sub", a, b, tape, [](double x, double y) { return x - y; },
        [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b, Tape* tape) {
    return binary_op(
        "mul", a, b, tape, [](double x, double y) { return x * y; },
        [](double, double y) { return y; }, [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b, Tape* tape) {
    return binary_op(
        "div", a, b, tape, [](double x, double y) { return x / y; },
        [](double, double y) { return 1.0 / y; },
        [](double x, double y) { return -x / (y * y); });
}

Tensor add_scalar(const Tensor& a, double c, Tape* tape) {
    return unary_op(
        "add_scalar", a, tape, [c](double x) { return x + c; }, [](double) { return 1.0; });
}

Tensor mul_scalar(const Tensor& a, double c, Tape* tape) {
    return unary_op(
        "mul_scalar", a, tape, [c](double x) { return x * c; }, [c](double) { return c; });
}

Tensor add_bias(const Tensor& x, const Tensor& b, Tape* tape) {
    if (x.rank() < 1 || b.rank() != 1 || x.shape().back() != b.extent(0)) {
        throw DimensionError("add_bias: shape mismatch " + shape_str(x.shape()) + " vs " +
                             shape_str(b.shape()));
    }
    const std::size_t d = b.extent(0);
    const std::size_t rows = x.numel() / d;
    Tensor out = Tensor::zeros(x.shape());
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < d; ++j) out.at(r * d + j) = x.at(r * d + j) + b.at(j);
    ensure_finite(out, "add_bias");
    out.set_requires_grad(x.requires_grad() || b.requires_grad());
    if (grads_wanted(tape, x, b)) {
        tape->record([x, b, out, tape, rows, d]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            if (x.requires_grad()) accumulate(tape, x, *go);
            if (b.requires_grad()) {
                auto& gb = tape->grad_slot(b);
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t j = 0; j < d; ++j) gb[j] += (*go)[r * d + j];
            }
        });
    }
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b, Tape* tape) {
    if (a.rank() != 2 || b.rank() != 2 || a.extent(1) != b.extent(0)) {
        throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
                             shape_str(b.shape()));
    }
    const std::size_t m = a.extent(0), k = a.extent(1), p = b.extent(1);
    Tensor out = Tensor::zeros({m, p});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t t = 0; t < k; ++t) {
            const double av = pa[i * k + t];
            if (av == 0.0) continue;
            const double* brow = pb + t * p;
            double* orow = po + i * p;
            for (std::size_t j = 0; j < p; ++j) orow[j] += av * brow[j];
        }
    }
    ensure_finite(out, "matmul");
    out.set_requires_grad(a.requires_grad() || b.requires_grad());
    if (grads_wanted(tape, a, b)) {
        tape->record([a, b, out, tape, m, k, p]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            if (a.requires_grad()) {
                auto& ga = tape->grad_slot(a);
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < p; ++j) {
                        const double g = (*go)[i * p + j];
                        if (g == 0.0) continue;
                        for (std::size_t t = 0; t < k; ++t) ga[i * k + t] += g * b.at(t, j);
                    }
            }
            if (b.requires_grad()) {
                auto& gb = tape->grad_slot(b);
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t t = 0; t < k; ++t) {
                        const double av = a.at(i, t);
                        if (av == 0.0) continue;
                        for (std::size_t j = 0; j < p; ++j) gb[t * p + j] += av * (*go)[i * p + j];
                    }
            }
        });
    }
    return out;
}

Tensor transpose(const Tensor& a, Tape* tape) {
    if (a.rank() != 2) throw DimensionError("transpose expects rank 2, got " + shape_str(a.shape()));
    const std::size_t m = a.extent(0), n = a.extent(1);
    Tensor out = Tensor::zeros({n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out.at(j, i) = a.at(i, j);
    out.set_requires_grad(a.requires_grad());
    if (grads_wanted(tape, a)) {
        tape->record([a, out, tape, m, n]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            auto& ga = tape->grad_slot(a);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += (*go)[j * m + i];
        });
    }
    return out;
}

Tensor softmax_lastdim(const Tensor& x, Tape* tape) {
    if (x.rank() < 1) throw DimensionError("softmax_lastdim expects rank >= 1");
    const std::size_t d = x.shape().back();
    const std::size_t rows = x.numel() / d;
    Tensor out = Tensor::zeros(x.shape());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xi = x.data() + r * d;
        double* oi = out.data() + r * d;
        double mx = xi[0];
        for (std::size_t j = 1; j < d; ++j) mx = std::max(mx, xi[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            oi[j] = std::exp(xi[j] - mx);
            sum += oi[j];
        }
        for (std::size_t j = 0; j < d; ++j) oi[j] /= sum;
    }
    ensure_finite(out, "softmax_lastdim");
    out.set_requires_grad(x.requires_grad());
    if (grads_wanted(tape, x)) {
        tape->record([x, out, tape, rows, d]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            auto& gx = tape->grad_slot(x);
            for (std::size_t r = 0; r < rows; ++r) {
                const double* y = out.data() + r * d;
                const double* g = go->data() + r * d;
                double dot = 0.0;
                for (std::size_t j = 0; j < d; ++j) dot += g[j] * y[j];
                for (std::size_t j = 0; j < d; ++j) gx[r * d + j] += (g[j] - dot) * y[j];
            }
        });
    }
    return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps,
                  Tape* tape) {
    if (x.rank() < 1 || gamma.rank() != 1 || beta.rank() != 1 ||
        x.shape().back() != gamma.extent(0) || gamma.extent(0) != beta.extent(0)) {
        throw DimensionError("layer_norm: shape mismatch " + shape_str(x.shape()) + " vs gamma " +
                             shape_str(gamma.shape()) + " vs beta " + shape_str(beta.shape()));
    }
    const std::size_t d = x.shape().back();
    const std::size_t rows = x.numel() / d;
    Tensor out = Tensor::zeros(x.shape());
    std::vector<double> inv_std(rows), means(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xi = x.data() + r * d;
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) mean += xi[j];
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) var += (xi[j] - mean) * (xi[j] - mean);
        var /= static_cast<double>(d);
        const double is = 1.0 / std::sqrt(var + eps);
        means[r] = mean;
        inv_std[r] = is;
        for (std::size_t j = 0; j < d; ++j)
            out.at(r * d + j) = (xi[j] - mean) * is * gamma.at(j) + beta.at(j);
    }
    ensure_finite(out, "layer_norm");
    out.set_requires_grad(x.requires_grad() || gamma.requires_grad() || beta.requires_grad());
    if (tape && out.requires_grad()) {
        tape->record([x, gamma, beta, out, tape, rows, d, means, inv_std]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            for (std::size_t r = 0; r < rows; ++r) {
                const double* xi = x.data() + r * d;
                const double* g = go->data() + r * d;
                const double is = inv_std[r];
                const double mean = means[r];
                if (x.requires_grad()) {
                    // dx = is * (dyg - mean(dyg) - xhat * mean(dyg * xhat))
                    double s1 = 0.0, s2 = 0.0;
                    for (std::size_t j = 0; j < d; ++j) {
                        const double xhat = (xi[j] - mean) * is;
                        const double dyg = g[j] * gamma.at(j);
                        s1 += dyg;
                        s2 += dyg * xhat;
                    }
                    s1 /= static_cast<double>(d);
                    s2 /= static_cast<double>(d);
                    auto& gx = tape->grad_slot(x);
                    for (std::size_t j = 0; j < d; ++j) {
                        const double xhat = (xi[j] - mean) * is;
                        gx[r * d + j] += is * (g[j] * gamma.at(j) - s1 - xhat * s2);
                    }
                }
                if (gamma.requires_grad()) {
                    auto& gg = tape->grad_slot(gamma);
                    for (std::size_t j = 0; j < d; ++j)
                        gg[j] += g[j] * (xi[j] - mean) * is;
                }
                if (beta.requires_grad()) {
                    auto& gb = tape->grad_slot(beta);
                    for (std::size_t j = 0; j < d; ++j) gb[j] += g[j];
                }
            }
        });
    }
    return out;
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Tensor gelu(const Tensor& x, Tape* tape) {
    return unary_op(
        "gelu", x, tape,
        [](double v) {
            const double u = kGeluC * (v + kGeluA * v * v * v);
            return 0.5 * v * (1.0 + std::tanh(u));
        },
        [](double v) {
            const double u = kGeluC * (v + kGeluA * v * v * v);
            const double t = std::tanh(u);
            const double du = kGeluC * (1.0 + 3.0 * kGeluA * v * v);
            return 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * du;
        });
}

Tensor relu(const Tensor& x, Tape* tape) {
    return unary_op(
        "relu", x, tape, [](double v) { return v > 0.0 ? v : 0.0; },
        [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sqrt_elem(const Tensor& x, Tape* tape) {
    return unary_op(
        "sqrt", x, tape, [](double v) { return std::sqrt(v); },
        [](double v) { return 0.5 / std::max(std::sqrt(v), 1e-12); });
}

Tensor clamp_min(const Tensor& x, double lo, Tape* tape) {
    return unary_op(
        "clamp_min", x, tape, [lo](double v) { return v < lo ? lo : v; },
        [lo](double v) { return v < lo ? 0.0 : 1.0; });
}

Tensor conv2d(const Tensor& x, const Tensor& kernel, std::size_t stride, std::size_t padding,
              Tape* tape) {
    if (x.rank() != 3 || kernel.rank() != 4 || x.extent(2) != kernel.extent(2)) {
        throw DimensionError("conv2d: incompatible shapes input " + shape_str(x.shape()) +
                             " kernel " + shape_str(kernel.shape()));
    }
    if (kernel.extent(0) != kernel.extent(1)) {
        throw DimensionError("conv2d: kernel must be square, got " + shape_str(kernel.shape()));
    }
    if (stride == 0) throw ContractError("conv2d: stride must be positive");
    const std::size_t h = x.extent(0), w = x.extent(1), cin = x.extent(2);
    const std::size_t k = kernel.extent(0), cout = kernel.extent(3);
    const long long oh_l = (static_cast<long long>(h) + 2 * static_cast<long long>(padding) -
                            static_cast<long long>(k)) /
                               static_cast<long long>(stride) +
                           1;
    const long long ow_l = (static_cast<long long>(w) + 2 * static_cast<long long>(padding) -
                            static_cast<long long>(k)) /
                               static_cast<long long>(stride) +
                           1;
    if (oh_l < 1 || ow_l < 1 ||
        static_cast<long long>(h) + 2 * static_cast<long long>(padding) < static_cast<long long>(k)) {
        throw DimensionError("conv2d: output extent < 1 for input " + shape_str(x.shape()) +
                             " kernel " + shape_str(kernel.shape()) + " stride " +
                             std::to_string(stride) + " padding " + std::to_string(padding));
    }
    const std::size_t oh = static_cast<std::size_t>(oh_l), ow = static_cast<std::size_t>(ow_l);
    Tensor out = Tensor::zeros({oh, ow, cout});
    for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
            for (std::size_t ky = 0; ky < k; ++ky) {
                const long long iy = static_cast<long long>(oy * stride + ky) -
                                     static_cast<long long>(padding);
                if (iy < 0 || iy >= static_cast<long long>(h)) continue;
                for (std::size_t kx = 0; kx < k; ++kx) {
                    const long long ix = static_cast<long long>(ox * stride + kx) -
                                         static_cast<long long>(padding);
                    if (ix < 0 || ix >= static_cast<long long>(w)) continue;
                    const double* xv = x.data() + (static_cast<std::size_t>(iy) * w +
                                                   static_cast<std::size_t>(ix)) *
                                                      cin;
                    const double* kv = kernel.data() + (ky * k + kx) * cin * cout;
                    double* ov = out.data() + (oy * ow + ox) * cout;
                    for (std::size_t ci = 0; ci < cin; ++ci) {
                        const double xl = xv[ci];
                        if (xl == 0.0) continue;
                        const double* kc = kv + ci * cout;
                        for (std::size_t co = 0; co < cout; ++co) ov[co] += xl * kc[co];
                    }
                }
            }
        }
    }
    ensure_finite(out, "conv2d");
    out.set_requires_grad(x.requires_grad() || kernel.requires_grad());
    if (grads_wanted(tape, x, kernel)) {
        tape->record([x, kernel, out, tape, stride, padding, h, w, cin, k, cout, oh, ow]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            std::vector<double>* gx = x.requires_grad() ? &tape->grad_slot(x) : nullptr;
            std::vector<double>* gk = kernel.requires_grad() ? &tape->grad_slot(kernel) : nullptr;
            for (std::size_t oy = 0; oy < oh; ++oy) {
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    const double* g = go->data() + (oy * ow + ox) * cout;
                    for (std::size_t ky = 0; ky < k; ++ky) {
                        const long long iy = static_cast<long long>(oy * stride + ky) -
                                             static_cast<long long>(padding);
                        if (iy < 0 || iy >= static_cast<long long>(h)) continue;
                        for (std::size_t kx = 0; kx < k; ++kx) {
                            const long long ix = static_cast<long long>(ox * stride + kx) -
                                                 static_cast<long long>(padding);
                            if (ix < 0 || ix >= static_cast<long long>(w)) continue;
                            const std::size_t xoff = (static_cast<std::size_t>(iy) * w +
                                                      static_cast<std::size_t>(ix)) *
                                                     cin;
                            const std::size_t koff = (ky * k + kx) * cin * cout;
                            for (std::size_t ci = 0; ci < cin; ++ci) {
                                for (std::size_t co = 0; co < cout; ++co) {
                                    const double gv = g[co];
                                    if (gv == 0.0) continue;
                                    if (gx)
                                        (*gx)[xoff + ci] += gv * kernel.at(koff + ci * cout + co);
                                    if (gk) (*gk)[koff + ci * cout + co] += gv * x.at(xoff + ci);
                                }
                            }
                        }
                    }
                }
            }
        });
    }
    return out;
}

namespace {

struct ResizeAxis {
    std::size_t i0, i1;
    double w0, w1;
};

std::vector<ResizeAxis> resize_plan(std::size_t src, std::size_t dst) {
    std::vector<ResizeAxis> plan(dst);
    const double scale = static_cast<double>(src) / static_cast<double>(dst);
    for (std::size_t j = 0; j < dst; ++j) {
        double pos = (static_cast<double>(j) + 0.5) * scale - 0.5;
        pos = std::clamp(pos, 0.0, static_cast<double>(src - 1));
        const std::size_t i0 = static_cast<std::size_t>(pos);
        const std::size_t i1 = std::min(i0 + 1, src - 1);
        const double f = pos - static_cast<double>(i0);
        plan[j] = {i0, i1, 1.0 - f, f};
    }
    return plan;
}

}  // namespace

Tensor bilinear_resize(const Tensor& x, std::size_t target_h, std::size_t target_w, Tape* tape) {
    if (x.rank() != 3) {
        throw DimensionError("bilinear_resize expects H×W×C, got " + shape_str(x.shape()));
    }
    if (target_h == 0 || target_w == 0) {
        throw DimensionError("bilinear_resize: target extents must be positive");
    }
    const std::size_t h = x.extent(0), w = x.extent(1), c = x.extent(2);
    if (target_h == h && target_w == w) {
        Tensor out = x.clone();
        out.set_requires_grad(x.requires_grad());
        if (grads_wanted(tape, x)) {
            tape->record([x, out, tape]() {
                const auto* go = tape->find_grad(out.id());
                if (!go) return;
                accumulate(tape, x, *go);
            });
        }
        return out;
    }
    const auto rows = resize_plan(h, target_h);
    const auto cols = resize_plan(w, target_w);
    Tensor out = Tensor::zeros({target_h, target_w, c});
    for (std::size_t y = 0; y < target_h; ++y) {
        const auto& ry = rows[y];
        for (std::size_t xx = 0; xx < target_w; ++xx) {
            const auto& cx = cols[xx];
            for (std::size_t ch = 0; ch < c; ++ch) {
                out.at(y, xx, ch) = ry.w0 * (cx.w0 * x.at(ry.i0, cx.i0, ch) +
                                             cx.w1 * x.at(ry.i0, cx.i1, ch)) +
                                    ry.w1 * (cx.w0 * x.at(ry.i1, cx.i0, ch) +
                                             cx.w1 * x.at(ry.i1, cx.i1, ch));
            }
        }
    }
    ensure_finite(out, "bilinear_resize");
    out.set_requires_grad(x.requires_grad());
    if (grads_wanted(tape, x)) {
        tape->record([x, out, tape, rows, cols, target_h, target_w, w, c]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            auto& gx = tape->grad_slot(x);
            for (std::size_t y = 0; y < target_h; ++y) {
                const auto& ry = rows[y];
                for (std::size_t xx = 0; xx < target_w; ++xx) {
                    const auto& cx = cols[xx];
                    for (std::size_t ch = 0; ch < c; ++ch) {
                        const double g = (*go)[(y * target_w + xx) * c + ch];
                        if (g == 0.0) continue;
                        gx[(ry.i0 * w + cx.i0) * c + ch] += ry.w0 * cx.w0 * g;
                        gx[(ry.i0 * w + cx.i1) * c + ch] += ry.w0 * cx.w1 * g;
                        gx[(ry.i1 * w + cx.i0) * c + ch] += ry.w1 * cx.w0 * g;
                        gx[(ry.i1 * w + cx.i1) * c + ch] += ry.w1 * cx.w1 * g;
                    }
                }
            }
        });
    }
    return out;
}

Tensor reshape(const Tensor& x, std::vector<std::size_t> shape, Tape* tape) {
    if (shape_numel(shape) != x.numel()) {
        throw DimensionError("reshape: element count mismatch " + shape_str(x.shape()) + " -> " +
                             shape_str(shape));
    }
    Tensor out = Tensor::from(std::move(shape), x.values());
    out.set_requires_grad(x.requires_grad());
    if (grads_wanted(tape, x)) {
        tape->record([x, out, tape]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            accumulate(tape, x, *go);
        });
    }
    return out;
}

Tensor concat_rows(const Tensor& a, const Tensor& b, Tape* tape) {
    if (a.rank() != 2 || b.rank() != 2 || a.extent(1) != b.extent(1)) {
        throw DimensionError("concat_rows: incompatible shapes " + shape_str(a.shape()) + " and " +
                             shape_str(b.shape()));
    }
    const std::size_t na = a.extent(0), nb = b.extent(0), d = a.extent(1);
    Tensor out = Tensor::zeros({na + nb, d});
    std::copy(a.values().begin(), a.values().end(), out.values().begin());
    std::copy(b.values().begin(), b.values().end(), out.values().begin() + na * d);
    out.set_requires_grad(a.requires_grad() || b.requires_grad());
    if (grads_wanted(tape, a, b)) {
        tape->record([a, b, out, tape, na, nb, d]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            if (a.requires_grad()) {
                auto& ga = tape->grad_slot(a);
                for (std::size_t i = 0; i < na * d; ++i) ga[i] += (*go)[i];
            }
            if (b.requires_grad()) {
                auto& gb = tape->grad_slot(b);
                for (std::size_t i = 0; i < nb * d; ++i) gb[i] += (*go)[na * d + i];
            }
        });
    }
    return out;
}

Tensor slice_rows(const Tensor& x, std::size_t r0, std::size_t r1, Tape* tape) {
    if (x.rank() != 2 || r0 >= r1 || r1 > x.extent(0)) {
        throw DimensionError("slice_rows: bad range [" + std::to_string(r0) + ", " +
                             std::to_string(r1) + ") for " + shape_str(x.shape()));
    }
    const std::size_t d = x.extent(1);
    Tensor out = Tensor::zeros({r1 - r0, d});
    std::copy(x.values().begin() + r0 * d, x.values().begin() + r1 * d, out.values().begin());
    out.set_requires_grad(x.requires_grad());
    if (grads_wanted(tape, x)) {
        tape->record([x, out, tape, r0, d]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            auto& gx = tape->grad_slot(x);
            for (std::size_t i = 0; i < go->size(); ++i) gx[r0 * d + i] += (*go)[i];
        });
    }
    return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts, Tape* tape) {
    if (parts.empty()) throw ContractError("concat_cols: no parts");
    const std::size_t n = parts[0].extent(0);
    std::size_t d = 0;
    bool ng = false;
    for (const auto& p : parts) {
        if (p.rank() != 2 || p.extent(0) != n) {
            throw DimensionError("concat_cols: incompatible part " + shape_str(p.shape()));
        }
        d += p.extent(1);
        ng = ng || p.requires_grad();
    }
    Tensor out = Tensor::zeros({n, d});
    std::size_t off = 0;
    for (const auto& p : parts) {
        const std::size_t pd = p.extent(1);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t j = 0; j < pd; ++j) out.at(r, off + j) = p.at(r, j);
        off += pd;
    }
    out.set_requires_grad(ng);
    if (tape && ng) {
        tape->record([parts, out, tape, n, d]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            std::size_t off = 0;
            for (const auto& p : parts) {
                const std::size_t pd = p.extent(1);
                if (p.requires_grad()) {
                    auto& gp = tape->grad_slot(p);
                    for (std::size_t r = 0; r < n; ++r)
                        for (std::size_t j = 0; j < pd; ++j) gp[r * pd + j] += (*go)[r * d + off + j];
                }
                off += pd;
            }
        });
    }
    return out;
}

Tensor slice_cols(const Tensor& x, std::size_t c0, std::size_t c1, Tape* tape) {
    if (x.rank() != 2 || c0 >= c1 || c1 > x.extent(1)) {
        throw DimensionError("slice_cols: bad range [" + std::to_string(c0) + ", " +
                             std::to_string(c1) + ") for " + shape_str(x.shape()));
    }
    const std::size_t n = x.extent(0), d = x.extent(1), w = c1 - c0;
    Tensor out = Tensor::zeros({n, w});
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < w; ++j) out.at(r, j) = x.at(r, c0 + j);
    out.set_requires_grad(x.requires_grad());
    if (grads_wanted(tape, x)) {
        tape->record([x, out, tape, n, d, w, c0]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            auto& gx = tape->grad_slot(x);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t j = 0; j < w; ++j) gx[r * d + c0 + j] += (*go)[r * w + j];
        });
    }
    return out;
}

Tensor select_rows(const Tensor& x, const std::vector<std::size_t>& idx, Tape* tape) {
    if (x.rank() != 2) throw DimensionError("select_rows expects rank 2");
    const std::size_t d = x.extent(1);
    for (std::size_t i : idx) {
        if (i >= x.extent(0)) throw DimensionError("select_rows: index out of range");
    }
    Tensor out = Tensor::zeros({idx.size(), d});
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t j = 0; j < d; ++j) out.at(r, j) = x.at(idx[r], j);
    out.set_requires_grad(x.requires_grad());
    if (grads_wanted(tape, x)) {
        tape->record([x, out, tape, idx, d]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            auto& gx = tape->grad_slot(x);
            for (std::size_t r = 0; r < idx.size(); ++r)
                for (std::size_t j = 0; j < d; ++j) gx[idx[r] * d + j] += (*go)[r * d + j];
        });
    }
    return out;
}

Tensor replace_rows(const Tensor& x, const std::vector<std::size_t>& idx, const Tensor& rep,
                    Tape* tape) {
    if (x.rank() != 2 || rep.rank() != 2 || rep.extent(0) != idx.size() ||
        rep.extent(1) != x.extent(1)) {
        throw DimensionError("replace_rows: incompatible shapes " + shape_str(x.shape()) +
                             " and " + shape_str(rep.shape()));
    }
    const std::size_t d = x.extent(1);
    std::vector<bool> replaced(x.extent(0), false);
    Tensor out = x.clone();
    for (std::size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] >= x.extent(0)) throw DimensionError("replace_rows: index out of range");
        replaced[idx[r]] = true;
        for (std::size_t j = 0; j < d; ++j) out.at(idx[r], j) = rep.at(r, j);
    }
    out.set_requires_grad(x.requires_grad() || rep.requires_grad());
    if (grads_wanted(tape, x, rep)) {
        tape->record([x, rep, out, tape, idx, d, replaced]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            if (x.requires_grad()) {
                auto& gx = tape->grad_slot(x);
                for (std::size_t r = 0; r < x.extent(0); ++r) {
                    if (replaced[r]) continue;
                    for (std::size_t j = 0; j < d; ++j) gx[r * d + j] += (*go)[r * d + j];
                }
            }
            if (rep.requires_grad()) {
                auto& gr = tape->grad_slot(rep);
                for (std::size_t r = 0; r < idx.size(); ++r)
                    for (std::size_t j = 0; j < d; ++j) gr[r * d + j] += (*go)[idx[r] * d + j];
            }
        });
    }
    return out;
}

Tensor tile_row(const Tensor& v, std::size_t n, Tape* tape) {
    if (v.rank() != 1) throw DimensionError("tile_row expects rank 1, got " + shape_str(v.shape()));
    const std::size_t d = v.extent(0);
    Tensor out = Tensor::zeros({n, d});
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < d; ++j) out.at(r, j) = v.at(j);
    out.set_requires_grad(v.requires_grad());
    if (grads_wanted(tape, v)) {
        tape->record([v, out, tape, n, d]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            auto& gv = tape->grad_slot(v);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t j = 0; j < d; ++j) gv[j] += (*go)[r * d + j];
        });
    }
    return out;
}

Tensor sum_all(const Tensor& x, Tape* tape) {
    double s = 0.0;
    for (double v : x.values()) s += v;
    Tensor out = Tensor::scalar(s);
    ensure_finite(out, "sum_all");
    out.set_requires_grad(x.requires_grad());
    if (grads_wanted(tape, x)) {
        tape->record([x, out, tape]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            auto& gx = tape->grad_slot(x);
            for (double& g : gx) g += (*go)[0];
        });
    }
    return out;
}

Tensor mean_all(const Tensor& x, Tape* tape) {
    const double inv = 1.0 / static_cast<double>(x.numel());
    double s = 0.0;
    for (double v : x.values()) s += v;
    Tensor out = Tensor::scalar(s * inv);
    ensure_finite(out, "mean_all");
    out.set_requires_grad(x.requires_grad());
    if (grads_wanted(tape, x)) {
        tape->record([x, out, tape, inv]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            auto& gx = tape->grad_slot(x);
            for (double& g : gx) g += (*go)[0] * inv;
        });
    }
    return out;
}

Tensor sum_lastdim(const Tensor& x, Tape* tape) {
    if (x.rank() < 1) throw DimensionError("sum_lastdim expects rank >= 1");
    const std::size_t d = x.shape().back();
    const std::size_t rows = x.numel() / d;
    std::vector<std::size_t> oshape(x.shape().begin(), x.shape().end() - 1);
    Tensor out = Tensor::zeros(oshape);
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += x.at(r * d + j);
        out.at(r) = s;
    }
    ensure_finite(out, "sum_lastdim");
    out.set_requires_grad(x.requires_grad());
    if (grads_wanted(tape, x)) {
        tape->record([x, out, tape, rows, d]() {
            const auto* go = tape->find_grad(out.id());
            if (!go) return;
            auto& gx = tape->grad_slot(x);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t j = 0; j < d; ++j) gx[r * d + j] += (*go)[r];
        });
    }
    return out;
}

double scalar_value(const Tensor& t) {
    if (t.numel() != 1) {
        throw ContractError("scalar_value: tensor has " + std::to_string(t.numel()) + " elements");
    }
    return t.at(0);
}

}  // namespace tfa
