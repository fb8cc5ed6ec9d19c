/// @file config.hpp
/// @brief Experiment configuration: JSON files and compact command-line spellings of phi and a.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "harris/covariance.hpp"
#include "harris/drift.hpp"
#include "harris/splitting.hpp"

namespace harris {

struct ExperimentConfig {
    /// Compact spellings, e.g. "gaussian", "exp:1.5", "indicator", "cosine:0.5,0.5,200".
    std::string phi = "gaussian";
    /// "zero", "affine:c0,c1", "lipschitz:sin", "modulus:beta,C_rho", "one_sided:neg_sqrt".
    std::string drift = "affine:0,-1";
    std::vector<double> particles{0.0};
    double T = 1.0;
    std::vector<std::size_t> partitions{8, 16, 32, 64, 128, 256, 512, 1024};
    double dt_fine = 1.0 / 16384.0;
    std::size_t reps = 200;
    std::uint64_t seed = 20240601;
    std::string coupling = "shared_field";
    double tol_merge = 1e-10;
    double jitter = 0.0;
    bool bridge_crossing = true;
    std::optional<double> epsilon;
    /// Start grid size for pushforward measures.
    std::size_t grid_points = 16;
    /// Number of check times for sup-in-time Wasserstein metrics.
    std::size_t check_times = 64;
    /// KS experiments.
    std::size_t trials = 20;
    std::size_t null_trials = 100;
    /// Coalescence experiments.
    std::vector<double> gaps{0.01, 0.02, 0.04, 0.08};
    std::vector<std::size_t> n_grids{16, 64, 256};
    double interval_lo = 0.0;
    double interval_hi = 1.0;
    /// Dual experiments: dyadic level of the start grid.
    int dyadic_level = 3;
    std::string output;
    std::string format = "csv";
};

CovarianceSpec parse_phi(const std::string& text);
DriftSpec parse_drift(const std::string& text);
CouplingMode parse_coupling(const std::string& text);

/// Throws std::invalid_argument when a field is malformed, reps < 2, or dt_fine does not divide T/N.
void validate(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Unknown keys are rejected; missing keys keep the values of `base`.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// FNV-1a 64-bit hash of the canonical JSON form without the output and format fields.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::uint64_t fnv1a64(const std::string& bytes);

SimConfig sim_config(const ExperimentConfig& cfg);

/// Comma-separated numbers, e.g. "8,16,32".
std::vector<double> parse_number_list(const std::string& text);

}  // namespace harris
