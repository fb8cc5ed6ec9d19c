/// @file bundle.hpp
/// @brief Trajectories launched from several (time, position) starts on one shared time grid.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace harris {

struct Start {
    double s = 0.0;
    double x = 0.0;
};

/// values(j, k) is trajectory j at times[k]; before s_j it holds the value at s_j.
struct TrajectoryBundle {
    std::vector<double> times;
    std::vector<Start> starts;
    std::vector<double> values;
    std::uint64_t shared_seed = 0;
    /// True when `times` is the reversed clock of a dual construction.
    bool reversed = false;

    std::size_t num_paths() const noexcept { return starts.size(); }
    std::size_t num_times() const noexcept { return times.size(); }
    double horizon() const noexcept { return times.empty() ? 0.0 : times.back(); }
    double value(std::size_t j, std::size_t k) const { return values[j * times.size() + k]; }
    double& value(std::size_t j, std::size_t k) { return values[j * times.size() + k]; }
    std::span<const double> path(std::size_t j) const {
        return std::span<const double>(values).subspan(j * times.size(), times.size());
    }

    /// Index of the grid time within 1e-9 * horizon of t; throws std::invalid_argument otherwise.
    std::size_t time_index(double t) const;

    /// Bundle restricted to the given start indices (same grid).
    TrajectoryBundle subset(std::span<const std::size_t> indices) const;
};

}  // namespace harris
