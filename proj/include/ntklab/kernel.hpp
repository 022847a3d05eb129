#pragma once

#include "ntklab/common.hpp"
#include "ntklab/model.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ntklab {

// Empirical tangent kernel on a fixed set of anchor inputs. The fingerprint
// records which parameter vector produced it; consumers compare fingerprints
// to flag stale kernels but never enforce them.
struct GramMatrix {
    Mat entries;       // n x n, symmetric PSD
    Mat anchors;       // the X it was evaluated on (rows are inputs)
    std::string source_fingerprint;

    Index size() const { return entries.rows(); }
};

// Rows k(q_i, X) for queries q_i against the anchor set of a Gram matrix.
struct KernelSlice {
    Mat rows;  // q x n
    std::string source_fingerprint;
};

inline void require_scalar_output(const Model& model) {
    if (model.output_dim() != 1)
        throw ShapeError("tangent kernel requires scalar output (m_L = 1), got m_L = " +
                         std::to_string(model.output_dim()));
}

inline double ntk_entry(const Model& model, const Vec& params, const Vec& x, const Vec& xp) {
    require_scalar_output(model);
    return gradient_vector(model, params, x).dot(gradient_vector(model, params, xp));
}

// Gradients of all samples stacked as columns (M x n); computed in parallel
// with one column per sample.
inline Mat jacobian_stack(const Model& model, const Vec& params, const Mat& X) {
    require_scalar_output(model);
    Mat stack(model.param_count(), X.rows());
    parallel_for(X.rows(), [&](Index i) {
        stack.col(i) = model.param_jacobian(params, X.row(i).transpose()).col(0);
    });
    return stack;
}

inline GramMatrix gram_from_stack(const Mat& stack, const Mat& X, const std::string& fp) {
    const Index n = stack.cols();
    Mat k(n, n);
    // Each entry is a single index-ordered dot product; the lower triangle
    // mirrors the upper so the matrix is symmetric by construction.
    parallel_for(n, [&](Index i) {
        for (Index j = i; j < n; ++j) k(i, j) = stack.col(i).dot(stack.col(j));
    });
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < i; ++j) k(i, j) = k(j, i);
    return GramMatrix{std::move(k), X, fp};
}

inline GramMatrix gram(const Model& model, const Vec& params, const Mat& X) {
    if (X.rows() < 1) throw ShapeError("gram: need at least one sample");
    return gram_from_stack(jacobian_stack(model, params, X), X, fingerprint(params));
}

// k(q, X) rows for query points, streaming one query gradient at a time so
// only the anchor stack is ever held in memory.
inline KernelSlice kernel_rows(const Model& model, const Vec& params, const Mat& anchor_stack,
                               const Mat& queries) {
    require_scalar_output(model);
    Mat rows(queries.rows(), anchor_stack.cols());
    parallel_for(queries.rows(), [&](Index q) {
        Vec g = model.param_jacobian(params, queries.row(q).transpose()).col(0);
        rows.row(q) = (g.transpose() * anchor_stack);
    });
    return KernelSlice{std::move(rows), fingerprint(params)};
}

// Kernel value split over the parameter groups (one weight matrix or bias
// vector each); the group values sum to the full kernel entry.
struct LayerKernelReport {
    std::vector<std::pair<std::string, double>> groups;
    double total = 0.0;

    double group_value(const std::string& name) const {
        for (const auto& [n, v] : groups)
            if (n == name) return v;
        throw ConfigError("no parameter group named " + name);
    }
};

inline LayerKernelReport layerwise_kernels(const Model& model, const Vec& params, const Vec& x,
                                           const Vec& xp) {
    require_scalar_output(model);
    Vec gx = gradient_vector(model, params, x);
    Vec gxp = gradient_vector(model, params, xp);
    LayerKernelReport report;
    for (const ParamGroup& g : model.param_groups()) {
        double v = gx.segment(g.offset, g.size).dot(gxp.segment(g.offset, g.size));
        report.groups.emplace_back(g.name, v);
        report.total += v;
    }
    return report;
}

}  // namespace ntklab
