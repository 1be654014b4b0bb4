#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "mrl/errors.hpp"

namespace mrl {

// Tensor-product evaluation grid on [0,1]^d. Points are enumerated row-major
// with axis 0 slowest, so the last axis cycles fastest.
class EvalGrid {
  public:
    EvalGrid() = default;

    explicit EvalGrid(std::vector<std::vector<double>> axes) : axes_(std::move(axes)) {
        if (axes_.empty()) throw ArgumentError("EvalGrid: need at least one axis");
        size_ = 1;
        for (const auto& ax : axes_) {
            if (ax.empty()) throw ArgumentError("EvalGrid: empty axis");
            double prev = -1.0;
            for (double x : ax) {
                if (!(x >= 0.0 && x <= 1.0))
                    throw ArgumentError("EvalGrid: coordinate outside [0,1]");
                if (x <= prev)
                    throw ArgumentError("EvalGrid: axis coordinates must be strictly increasing");
                prev = x;
            }
            size_ *= ax.size();
        }
    }

    /// res equispaced points per axis covering [lo, hi]; res == 1 gives {hi}.
    static EvalGrid uniform(std::size_t d, std::size_t res, double lo = 0.0, double hi = 1.0) {
        if (d < 1 || res < 1) throw ArgumentError("EvalGrid::uniform: need d >= 1, res >= 1");
        std::vector<double> ax(res);
        for (std::size_t j = 0; j < res; ++j)
            ax[j] = res == 1 ? hi
                             : lo + (hi - lo) * static_cast<double>(j) /
                                        static_cast<double>(res - 1);
        return EvalGrid(std::vector<std::vector<double>>(d, ax));
    }

    static EvalGrid single(const std::vector<double>& point) {
        std::vector<std::vector<double>> axes;
        axes.reserve(point.size());
        for (double x : point) axes.push_back({x});
        return EvalGrid(std::move(axes));
    }

    std::size_t dim() const { return axes_.size(); }
    std::size_t size() const { return size_; }
    const std::vector<double>& axis(std::size_t i) const { return axes_[i]; }

    /// Per-axis coordinate index of the flat point index.
    std::size_t axis_index(std::size_t flat, std::size_t ax) const {
        std::size_t stride = 1;
        for (std::size_t j = axes_.size(); j-- > ax + 1;) stride *= axes_[j].size();
        return (flat / stride) % axes_[ax].size();
    }

    std::vector<double> point(std::size_t flat) const {
        std::vector<double> p(axes_.size());
        for (std::size_t i = axes_.size(); i-- > 0;) {
            const auto& ax = axes_[i];
            p[i] = ax[flat % ax.size()];
            flat /= ax.size();
        }
        return p;
    }

    bool operator==(const EvalGrid& o) const { return axes_ == o.axes_; }

  private:
    std::vector<std::vector<double>> axes_;
    std::size_t size_ = 0;
};

}  // namespace mrl
