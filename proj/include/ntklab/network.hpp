#pragma once

#include "ntklab/common.hpp"
#include "ntklab/model.hpp"
#include "ntklab/rng.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace ntklab {

enum class Activation { ReLU, Tanh };

inline const char* to_string(Activation a) {
    return a == Activation::ReLU ? "relu" : "tanh";
}

// Fully-connected feed-forward shape: widths m_0 (input) .. m_L (output).
// Hidden layers 1..L-1 apply the activation; the output layer is affine.
struct Architecture {
    std::vector<int> widths;
    Activation activation = Activation::ReLU;
    bool last_layer_bias = true;

    int depth() const { return static_cast<int>(widths.size()) - 1; }  // L
    int input_dim() const { return widths.front(); }
    int output_dim() const { return widths.back(); }

    void validate() const {
        if (widths.size() < 2) throw ConfigError("architecture needs at least input and output widths");
        for (int w : widths)
            if (w < 1) throw ConfigError("all layer widths must be >= 1");
    }

    bool layer_has_bias(int l) const {  // l in 1..L
        return l < depth() || last_layer_bias;
    }

    std::string to_label() const {
        std::string s;
        for (std::size_t i = 0; i < widths.size(); ++i) {
            if (i) s += '-';
            s += std::to_string(widths[i]);
        }
        return s;
    }
};

struct InitSpec {
    double v_std = 1.0;
    std::uint64_t seed = 0;
};

// Flat parameter layout: for l = 1..L, W[l] in row-major order (m_l x m_{l-1})
// followed by b[l]. Total length M.
class ParamLayout {
public:
    explicit ParamLayout(const Architecture& arch) : arch_(arch) {
        arch.validate();
        Index off = 0;
        const int L = arch.depth();
        weight_off_.resize(L + 1);
        bias_off_.resize(L + 1);
        for (int l = 1; l <= L; ++l) {
            weight_off_[l] = off;
            off += static_cast<Index>(arch.widths[l]) * arch.widths[l - 1];
            bias_off_[l] = off;
            if (arch.layer_has_bias(l)) off += arch.widths[l];
        }
        total_ = off;
    }

    Index total() const { return total_; }
    Index weight_offset(int l) const { return weight_off_[l]; }
    Index weight_size(int l) const {
        return static_cast<Index>(arch_.widths[l]) * arch_.widths[l - 1];
    }
    Index bias_offset(int l) const { return bias_off_[l]; }
    Index bias_size(int l) const { return arch_.layer_has_bias(l) ? arch_.widths[l] : 0; }

    using WeightMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using WeightMapMut = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

    WeightMap weights(const Vec& params, int l) const {
        return WeightMap(params.data() + weight_offset(l), arch_.widths[l], arch_.widths[l - 1]);
    }
    WeightMapMut weights(Vec& params, int l) const {
        return WeightMapMut(params.data() + weight_offset(l), arch_.widths[l], arch_.widths[l - 1]);
    }
    Eigen::Map<const Vec> bias(const Vec& params, int l) const {
        return Eigen::Map<const Vec>(params.data() + bias_offset(l), bias_size(l));
    }
    Eigen::Map<Vec> bias(Vec& params, int l) const {
        return Eigen::Map<Vec>(params.data() + bias_offset(l), bias_size(l));
    }

    std::vector<ParamGroup> groups() const {
        std::vector<ParamGroup> g;
        for (int l = 1; l <= arch_.depth(); ++l) {
            g.push_back({"W" + std::to_string(l), weight_offset(l), weight_size(l)});
            if (bias_size(l) > 0) g.push_back({"b" + std::to_string(l), bias_offset(l), bias_size(l)});
        }
        return g;
    }

private:
    Architecture arch_;
    Index total_ = 0;
    std::vector<Index> weight_off_, bias_off_;
};

inline Index param_count(const Architecture& arch) { return ParamLayout(arch).total(); }

// Gaussian init, std v_std * sqrt(2 / (m_in + m_out)) per layer, where m_in
// and m_out are the layer's input and output widths. Biases use their layer's
// std. Entries are drawn in flat-layout order from one GaussianRng stream, so
// (arch, spec) pins every bit.
inline Vec init_params(const Architecture& arch, const InitSpec& spec) {
    if (spec.v_std < 0) throw ConfigError("v_std must be nonnegative");
    ParamLayout layout(arch);
    Vec params(layout.total());
    GaussianRng rng(spec.seed);
    for (int l = 1; l <= arch.depth(); ++l) {
        const double std_l = spec.v_std * std::sqrt(2.0 / (arch.widths[l - 1] + arch.widths[l]));
        double* w = params.data() + layout.weight_offset(l);
        for (Index i = 0; i < layout.weight_size(l); ++i) w[i] = std_l * rng.next();
        double* b = params.data() + layout.bias_offset(l);
        for (Index i = 0; i < layout.bias_size(l); ++i) b[i] = std_l * rng.next();
    }
    return params;
}

namespace detail {

inline void apply_activation(Activation act, Mat& z) {
    if (act == Activation::ReLU)
        z = z.cwiseMax(0.0);
    else
        z = z.array().tanh().matrix();
}

// Derivative evaluated at the pre-activation; ReLU'(0) is taken as 0.
inline Mat activation_slope(Activation act, const Mat& z) {
    if (act == Activation::ReLU) return (z.array() > 0.0).cast<double>().matrix();
    return (1.0 - z.array().tanh().square()).matrix();
}

}  // namespace detail

// Layer-by-layer evaluation for a batch held as columns (m_0 x n).
// If keep != nullptr, stores post-activation outputs per layer (index 0 holds
// the inputs) and the activation slopes of hidden layers for reuse in
// backward passes.
struct ForwardWork {
    std::vector<Mat> outputs;  // h[0..L], h[l] is m_l x n
    std::vector<Mat> slopes;   // slopes[l] for l = 1..L-1 (index 0 unused)
};

inline Mat forward_columns(const Architecture& arch, const ParamLayout& layout, const Vec& params,
                           const Mat& xs, ForwardWork* keep = nullptr) {
    const int L = arch.depth();
    Mat h = xs;
    if (keep) {
        keep->outputs.assign(static_cast<std::size_t>(L) + 1, Mat());
        keep->slopes.assign(static_cast<std::size_t>(L), Mat());
        keep->outputs[0] = h;
    }
    for (int l = 1; l <= L; ++l) {
        Mat z = layout.weights(params, l) * h;
        if (layout.bias_size(l) > 0) z.colwise() += layout.bias(params, l);
        if (l < L) {
            if (keep) keep->slopes[l] = detail::activation_slope(arch.activation, z);
            detail::apply_activation(arch.activation, z);
        }
        h = std::move(z);
        if (keep) keep->outputs[l] = h;
    }
    return h;
}

inline Vec forward(const Architecture& arch, const Vec& params, const Vec& x) {
    ParamLayout layout(arch);
    if (x.size() != arch.input_dim()) throw ShapeError("forward: input dimension mismatch");
    if (params.size() != layout.total()) throw ShapeError("forward: parameter length mismatch");
    return forward_columns(arch, layout, params, x);
}

// Exact reverse accumulation; returns M x m_L with column j = grad of h_j.
inline Mat param_jacobian(const Architecture& arch, const Vec& params, const Vec& x) {
    ParamLayout layout(arch);
    if (x.size() != arch.input_dim()) throw ShapeError("param_jacobian: input dimension mismatch");
    if (params.size() != layout.total()) throw ShapeError("param_jacobian: parameter length mismatch");

    const int L = arch.depth();
    ForwardWork work;
    forward_columns(arch, layout, params, x, &work);

    const int m_L = arch.output_dim();
    Mat jac = Mat::Zero(layout.total(), m_L);
    for (int j = 0; j < m_L; ++j) {
        Vec delta = Vec::Unit(m_L, j);
        for (int l = L; l >= 1; --l) {
            const Mat& below = work.outputs[static_cast<std::size_t>(l) - 1];
            // W[l] is row-major, so the (i,k) gradient delta_i * h_k lands at
            // offset + i*m_{l-1} + k; as a column-major matrix view that is
            // the outer product below * delta^T of shape m_{l-1} x m_l.
            Eigen::Map<Mat>(jac.col(j).data() + layout.weight_offset(l), below.rows(), delta.size()) =
                below * delta.transpose();
            if (layout.bias_size(l) > 0)
                jac.col(j).segment(layout.bias_offset(l), layout.bias_size(l)) = delta;
            if (l > 1)
                delta = (layout.weights(params, l).transpose() * delta)
                            .cwiseProduct(work.slopes[static_cast<std::size_t>(l) - 1].col(0));
        }
    }
    return jac;
}

// Batched loss-gradient pullback: sum_i J(x_i) G_i with one GEMM pass per
// layer. X rows are samples, G is n x m_L.
inline Vec grad_accumulate(const Architecture& arch, const Vec& params, const Mat& X, const Mat& G) {
    ParamLayout layout(arch);
    if (X.cols() != arch.input_dim()) throw ShapeError("grad_accumulate: input dimension mismatch");
    if (G.rows() != X.rows() || G.cols() != arch.output_dim())
        throw ShapeError("grad_accumulate: gradient shape mismatch");

    const int L = arch.depth();
    ForwardWork work;
    forward_columns(arch, layout, params, X.transpose(), &work);

    Vec acc(layout.total());
    Mat delta = G.transpose();  // m_L x n
    for (int l = L; l >= 1; --l) {
        const Mat& below = work.outputs[static_cast<std::size_t>(l) - 1];
        ParamLayout::WeightMapMut(acc.data() + layout.weight_offset(l), delta.rows(), below.rows()) =
            delta * below.transpose();
        if (layout.bias_size(l) > 0)
            Eigen::Map<Vec>(acc.data() + layout.bias_offset(l), delta.rows()) = delta.rowwise().sum();
        if (l > 1)
            delta = (layout.weights(params, l).transpose() * delta)
                        .cwiseProduct(work.slopes[static_cast<std::size_t>(l) - 1]);
    }
    return acc;
}

// Plain fully-connected network as a Model.
class Network : public Model {
public:
    explicit Network(Architecture arch) : arch_(std::move(arch)), layout_(arch_) {}

    const Architecture& architecture() const { return arch_; }
    const ParamLayout& layout() const { return layout_; }

    int input_dim() const override { return arch_.input_dim(); }
    int output_dim() const override { return arch_.output_dim(); }
    Index param_count() const override { return layout_.total(); }

    Vec forward(const Vec& params, const Vec& x) const override {
        check_params(params);
        check_input(x);
        return forward_columns(arch_, layout_, params, x);
    }

    Mat forward_batch(const Vec& params, const Mat& X) const override {
        check_params(params);
        if (X.cols() != arch_.input_dim()) throw ShapeError("forward_batch: input dimension mismatch");
        return forward_columns(arch_, layout_, params, X.transpose()).transpose();
    }

    Mat param_jacobian(const Vec& params, const Vec& x) const override {
        return ntklab::param_jacobian(arch_, params, x);
    }

    Vec grad_accumulate(const Vec& params, const Mat& X, const Mat& G) const override {
        return ntklab::grad_accumulate(arch_, params, X, G);
    }

    std::vector<ParamGroup> param_groups() const override { return layout_.groups(); }

private:
    Architecture arch_;
    ParamLayout layout_;
};

}  // namespace ntklab
