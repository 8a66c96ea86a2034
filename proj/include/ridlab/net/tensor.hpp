#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace ridlab::net {

using MatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Activation tensor for one sample, laid out channel-major (C x H x W).
struct Tensor {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int c, int h, int w, double fill = 0.0)
        : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, fill) {}

    std::size_t size() const { return data.size(); }
    int plane() const { return height * width; }
    double& at(int c, int y, int x) { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
    double at(int c, int y, int x) const { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }

    bool same_shape(const Tensor& o) const {
        return channels == o.channels && height == o.height && width == o.width;
    }

    /// C x (H*W) view.
    Eigen::Map<MatD> matrix() { return {data.data(), channels, plane()}; }
    Eigen::Map<const MatD> matrix() const { return {data.data(), channels, plane()}; }

    static Tensor from_matrix(const MatD& m, int h, int w) {
        Tensor t(static_cast<int>(m.rows()), h, w);
        t.matrix() = m;
        return t;
    }
};

}  // namespace ridlab::net
