#pragma once

#include "ntklab/common.hpp"
#include "ntklab/network.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace ntklab {

// Weighted sum of independent branch networks sharing input/output shape.
// The flat parameter layout is the branch concatenation; both halves train
// freely after t = 0.
class CompositeModel : public Model {
public:
    struct Branch {
        double scale;
        Architecture arch;
    };

    explicit CompositeModel(std::vector<Branch> branches) : branches_(std::move(branches)) {
        if (branches_.empty()) throw ConfigError("composite model needs at least one branch");
        for (const auto& b : branches_) {
            b.arch.validate();
            if (b.arch.input_dim() != branches_[0].arch.input_dim() ||
                b.arch.output_dim() != branches_[0].arch.output_dim())
                throw ShapeError("composite branches must share input and output dimensions");
            layouts_.emplace_back(b.arch);
        }
        offsets_.resize(branches_.size());
        Index off = 0;
        for (std::size_t b = 0; b < branches_.size(); ++b) {
            offsets_[b] = off;
            off += layouts_[b].total();
        }
        total_ = off;
    }

    std::size_t branch_count() const { return branches_.size(); }
    const Branch& branch(std::size_t b) const { return branches_[b]; }
    Index branch_offset(std::size_t b) const { return offsets_[b]; }
    Index branch_size(std::size_t b) const { return layouts_[b].total(); }

    int input_dim() const override { return branches_[0].arch.input_dim(); }
    int output_dim() const override { return branches_[0].arch.output_dim(); }
    Index param_count() const override { return total_; }

    Vec forward(const Vec& params, const Vec& x) const override {
        check_params(params);
        check_input(x);
        Vec out = Vec::Zero(output_dim());
        for (std::size_t b = 0; b < branches_.size(); ++b)
            out += branches_[b].scale *
                   forward_columns(branches_[b].arch, layouts_[b], branch_params(params, b), x);
        return out;
    }

    Mat forward_batch(const Vec& params, const Mat& X) const override {
        check_params(params);
        if (X.cols() != input_dim()) throw ShapeError("forward_batch: input dimension mismatch");
        Mat out = Mat::Zero(X.rows(), output_dim());
        Mat xs = X.transpose();
        for (std::size_t b = 0; b < branches_.size(); ++b)
            out += branches_[b].scale *
                   forward_columns(branches_[b].arch, layouts_[b], branch_params(params, b), xs).transpose();
        return out;
    }

    Mat param_jacobian(const Vec& params, const Vec& x) const override {
        check_params(params);
        check_input(x);
        Mat jac(total_, output_dim());
        for (std::size_t b = 0; b < branches_.size(); ++b)
            jac.middleRows(offsets_[b], layouts_[b].total()) =
                branches_[b].scale *
                ntklab::param_jacobian(branches_[b].arch, branch_params(params, b), x);
        return jac;
    }

    Vec grad_accumulate(const Vec& params, const Mat& X, const Mat& G) const override {
        check_params(params);
        Vec acc(total_);
        for (std::size_t b = 0; b < branches_.size(); ++b)
            acc.segment(offsets_[b], layouts_[b].total()) =
                branches_[b].scale *
                ntklab::grad_accumulate(branches_[b].arch, branch_params(params, b), X, G);
        return acc;
    }

    std::vector<ParamGroup> param_groups() const override {
        std::vector<ParamGroup> all;
        for (std::size_t b = 0; b < branches_.size(); ++b)
            for (const ParamGroup& g : layouts_[b].groups())
                all.push_back({"branch" + std::to_string(b) + "/" + g.name, offsets_[b] + g.offset, g.size});
        return all;
    }

private:
    Vec branch_params(const Vec& params, std::size_t b) const {
        return params.segment(offsets_[b], layouts_[b].total());
    }

    std::vector<Branch> branches_;
    std::vector<ParamLayout> layouts_;
    std::vector<Index> offsets_;
    Index total_ = 0;
};

// A model together with the parameter vector it starts from.
struct InitializedModel {
    std::shared_ptr<Model> model;
    Vec params;
};

// Antisymmetric twin: sqrt(2)/2 * h(theta) - sqrt(2)/2 * h(theta'), both
// branches starting at the same theta0. Output is zero at init while the
// tangent kernel equals the original network's.
inline InitializedModel asi_wrap(const Architecture& arch, const Vec& theta0) {
    const double s = std::sqrt(2.0) / 2.0;
    auto composite = std::make_shared<CompositeModel>(
        std::vector<CompositeModel::Branch>{{s, arch}, {-s, arch}});
    Vec params(2 * theta0.size());
    params << theta0, theta0;
    return {composite, std::move(params)};
}

// Last-hidden-layer duplication with negated output weights. Layers below
// L-1 are shared, the duplicated half copies W[L-1], b[L-1], and the output
// row is (W[L], -W[L]). The result drops any last-layer bias.
inline InitializedModel doubling_wrap(const Architecture& arch, const Vec& theta0) {
    const int L = arch.depth();
    if (L < 2) throw ConfigError("doubling trick needs at least one hidden layer");
    ParamLayout layout(arch);
    if (theta0.size() != layout.total()) throw ShapeError("doubling_wrap: parameter length mismatch");

    Architecture doubled = arch;
    doubled.widths[L - 1] *= 2;
    doubled.last_layer_bias = false;
    ParamLayout dlayout(doubled);

    Vec params = Vec::Zero(dlayout.total());
    for (int l = 1; l <= L; ++l) {
        auto w_src = layout.weights(theta0, l);
        auto w_dst = dlayout.weights(params, l);
        if (l < L - 1) {
            w_dst = w_src;
        } else if (l == L - 1) {
            w_dst.topRows(w_src.rows()) = w_src;
            w_dst.bottomRows(w_src.rows()) = w_src;
        } else {
            w_dst.leftCols(w_src.cols()) = w_src;
            w_dst.rightCols(w_src.cols()) = -w_src;
        }
        if (dlayout.bias_size(l) > 0) {
            auto b_src = layout.bias(theta0, l);
            auto b_dst = dlayout.bias(params, l);
            if (l == L - 1) {
                b_dst.head(b_src.size()) = b_src;
                b_dst.tail(b_src.size()) = b_src;
            } else {
                b_dst = b_src;
            }
        }
    }
    return {std::make_shared<Network>(doubled), std::move(params)};
}

// Control construction: same twin shape as ASI but the two branches draw
// independent initializations, so the initial output does not cancel.
// allow_equal_seeds exists only so tests can confirm the degeneration to ASI.
inline InitializedModel rnd_wrap(const Architecture& arch, const InitSpec& spec1, const InitSpec& spec2,
                                 bool allow_equal_seeds = false) {
    if (spec1.seed == spec2.seed && !allow_equal_seeds)
        throw ConfigError("rnd_wrap: branch seeds must differ (equal seeds degenerate to ASI)");
    const double s = std::sqrt(2.0) / 2.0;
    auto composite = std::make_shared<CompositeModel>(
        std::vector<CompositeModel::Branch>{{s, arch}, {-s, arch}});
    Vec a = init_params(arch, spec1);
    Vec b = init_params(arch, spec2);
    Vec params(a.size() + b.size());
    params << a, b;
    return {composite, std::move(params)};
}

}  // namespace ntklab
