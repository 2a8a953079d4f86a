#include "mmsk/pca.hpp"

#include "mmsk/error.hpp"

namespace mmsk {

PcaResult pca_project(const Eigen::MatrixXd& samples, int components, bool standardize) {
    const auto n = samples.rows();
    const auto d = samples.cols();
    if (n < 2) throw Error("PCA needs at least two samples");
    if (components < 1 || components > d) throw Error("component count out of range");

    PcaResult out;
    out.mean = samples.colwise().mean().transpose();
    Eigen::MatrixXd centered = samples.rowwise() - out.mean.transpose();
    out.scale = Eigen::VectorXd::Ones(d);
    if (standardize) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double sd = std::sqrt(centered.col(j).squaredNorm() / static_cast<double>(n - 1));
            if (sd > 0.0) out.scale[j] = sd;
        }
        centered = centered.array().rowwise() / out.scale.transpose().array();
    }
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw Error("eigen decomposition failed");

    const double total = cov.trace();
    out.components.resize(d, components);
    out.explained.resize(components);
    for (int k = 0; k < components; ++k) {
        const Eigen::Index idx = d - 1 - k;  // eigenvalues ascend
        Eigen::VectorXd v = eig.eigenvectors().col(idx);
        Eigen::Index big = 0;
        v.cwiseAbs().maxCoeff(&big);
        if (v[big] < 0.0) v = -v;
        out.components.col(k) = v;
        out.explained[k] = total > 0.0 ? std::max(0.0, eig.eigenvalues()[idx]) / total : 0.0;
    }
    out.scores = centered * out.components;
    return out;
}

}  // namespace mmsk
