#pragma once

#include "ntklab/common.hpp"

#include <string>
#include <vector>

namespace ntklab {

// A contiguous slice of the flat parameter vector (one weight matrix or one
// bias vector). Groups partition [0, param_count).
struct ParamGroup {
    std::string name;
    Index offset = 0;
    Index size = 0;
};

// Evaluation interface shared by plain networks and the composite models
// built by the initialization tricks, so kernels, flows and solvers operate
// on either without special cases.
class Model {
public:
    virtual ~Model() = default;

    virtual int input_dim() const = 0;
    virtual int output_dim() const = 0;
    virtual Index param_count() const = 0;

    virtual Vec forward(const Vec& params, const Vec& x) const = 0;

    // Outputs for a batch given as rows of X; returns n x m_L.
    virtual Mat forward_batch(const Vec& params, const Mat& X) const {
        Mat out(X.rows(), output_dim());
        for (Index i = 0; i < X.rows(); ++i) out.row(i) = forward(params, X.row(i).transpose()).transpose();
        return out;
    }

    // Column j holds the gradient of output j with respect to the flat
    // parameter vector; shape M x m_L.
    virtual Mat param_jacobian(const Vec& params, const Vec& x) const = 0;

    // sum_i J(x_i) * G.row(i)^T, i.e. the loss gradient pullback for a batch,
    // without materializing per-sample Jacobians.
    virtual Vec grad_accumulate(const Vec& params, const Mat& X, const Mat& G) const {
        Vec acc = Vec::Zero(param_count());
        for (Index i = 0; i < X.rows(); ++i)
            acc += param_jacobian(params, X.row(i).transpose()) * G.row(i).transpose();
        return acc;
    }

    virtual std::vector<ParamGroup> param_groups() const = 0;

    void check_input(const Vec& x) const {
        if (x.size() != input_dim())
            throw ShapeError("input dimension mismatch: got " + std::to_string(x.size()) +
                             ", expected " + std::to_string(input_dim()));
    }
    void check_params(const Vec& params) const {
        if (params.size() != param_count())
            throw ShapeError("parameter vector length mismatch: got " + std::to_string(params.size()) +
                             ", expected " + std::to_string(param_count()));
    }
};

// Gradient of a scalar-output model as a flat vector.
inline Vec gradient_vector(const Model& model, const Vec& params, const Vec& x) {
    if (model.output_dim() != 1)
        throw ShapeError("scalar-output model required (m_L = 1), got m_L = " +
                         std::to_string(model.output_dim()));
    return model.param_jacobian(params, x).col(0);
}

}  // namespace ntklab
