#pragma once

#include <Eigen/Dense>

namespace mmsk {

struct PcaResult {
    Eigen::MatrixXd scores;      // N x k projected coordinates
    Eigen::VectorXd explained;   // fraction of total variance per component
    Eigen::MatrixXd components;  // d x k principal directions
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;       // per-feature divisor (ones unless standardized)
};

// Principal components of the rows of `samples` (N x d) from the eigen
// decomposition of the sample covariance. With `standardize` every feature is
// scaled to unit variance first (correlation PCA); constant features are left
// as they are. Each direction is signed so its largest-magnitude entry is
// positive.
PcaResult pca_project(const Eigen::MatrixXd& samples, int components = 2, bool standardize = false);

}  // namespace mmsk
