#pragma once

#include "ntklab/common.hpp"

#include <cmath>
#include <string>

namespace ntklab {

// The distance family used for training: L^p with 1 < p < inf (the class for
// which the min-norm equivalences hold), plus softmax cross-entropy for the
// non-kernel classification baseline. Cross-entropy is rejected by every
// solver that relies on the min-norm equivalence.
class LossSpec {
public:
    enum class Kind { Lp, CrossEntropySoftmax };

    static LossSpec lp(double p) {
        if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("Lp loss requires 1 < p < inf");
        return LossSpec(Kind::Lp, p);
    }
    static LossSpec mse() { return lp(2.0); }
    static LossSpec cross_entropy() { return LossSpec(Kind::CrossEntropySoftmax, 0.0); }

    Kind kind() const { return kind_; }
    double p() const { return p_; }
    bool in_min_norm_class() const { return kind_ == Kind::Lp; }

    std::string label() const {
        if (kind_ == Kind::CrossEntropySoftmax) return "xent";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "lp:%g", p_);
        return buf;
    }

private:
    LossSpec(Kind k, double p) : kind_(k), p_(p) {}
    Kind kind_;
    double p_;
};

namespace detail {

inline void check_loss_shapes(const Mat& h, const Mat& y) {
    if (h.rows() != y.rows() || h.cols() != y.cols())
        throw ShapeError("loss: prediction and target shapes differ");
    if (h.rows() == 0) throw ShapeError("loss: empty batch");
}

inline Mat softmax_rows(const Mat& logits) {
    Mat p = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp().matrix();
    return p.array().colwise() / p.rowwise().sum().array();
}

}  // namespace detail

inline double loss_value(const LossSpec& spec, const Mat& h, const Mat& y) {
    detail::check_loss_shapes(h, y);
    const double n = static_cast<double>(h.rows());
    if (spec.kind() == LossSpec::Kind::Lp)
        return (h - y).array().abs().pow(spec.p()).sum() / n;
    // mean negative log-probability of the true class; y rows are one-hot.
    Mat p = detail::softmax_rows(h);
    double total = 0.0;
    for (Index i = 0; i < h.rows(); ++i) {
        Index cls;
        y.row(i).maxCoeff(&cls);
        total -= std::log(std::max(p(i, cls), 1e-300));
    }
    return total / n;
}

inline Mat loss_grad(const LossSpec& spec, const Mat& h, const Mat& y) {
    detail::check_loss_shapes(h, y);
    const double n = static_cast<double>(h.rows());
    if (spec.kind() == LossSpec::Kind::Lp) {
        const double p = spec.p();
        Mat diff = h - y;
        // |d|^(p-1) underflows to 0 for p < 2 only below ~1e-300; clamp so the
        // pow never produces NaN from a denormal base.
        Mat mag = diff.array().abs().max(0.0).matrix();
        Mat grad(h.rows(), h.cols());
        for (Index j = 0; j < h.cols(); ++j)
            for (Index i = 0; i < h.rows(); ++i) {
                const double m = mag(i, j);
                grad(i, j) = m < 1e-300 ? 0.0
                                        : (p / n) * std::pow(m, p - 1.0) * (diff(i, j) > 0 ? 1.0 : -1.0);
            }
        return grad;
    }
    return (detail::softmax_rows(h) - y) / n;
}

inline double loss_value(const LossSpec& spec, const Vec& h, const Vec& y) {
    return loss_value(spec, Mat(h), Mat(y));
}
inline Vec loss_grad(const LossSpec& spec, const Vec& h, const Vec& y) {
    return Vec(loss_grad(spec, Mat(h), Mat(y)).col(0));
}

}  // namespace ntklab
