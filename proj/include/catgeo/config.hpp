#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "catgeo/pags.hpp"
#include "catgeo/sinkhorn.hpp"

namespace catgeo {

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 4;
    double lr = 0.24;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    double epsilon = 0.9999;  // momentum of the embedding matrix
    sinkhorn::SinkhornConfig sinkhorn;
    std::size_t num_props = 8;                          // M
    std::vector<std::size_t> widths = {4, 64, 64, 32};  // input .. D
    double lambda1 = 1.0;                               // weight of L_GPL
    double lambda2 = 1.0;                               // weight of L_GCL
    bool seg_on_augmented = false;
    bool standard_augment = true;
    pags::AugmentationConfig augment;
    std::vector<double> tta_angles_deg = {0.0, 90.0, 180.0, 270.0};
    std::vector<double> tta_scales = {0.95, 1.0, 1.05};
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "run";

    void validate() const;
};

/// `key = value` per line; `#` starts a comment. Returns the raw pairs.
std::map<std::string, std::string> parse_key_values(const std::string& text);
std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path);

/// Applies every pair to `cfg`. Throws std::invalid_argument on an unknown
/// key or a malformed value.
void apply_config(TrainConfig& cfg, const std::map<std::string, std::string>& values);

/// Every key understood by apply_config.
const std::vector<std::string>& config_keys();

/// Round-trips through parse_key_values + apply_config.
std::string to_text(const TrainConfig& cfg);

}  // namespace catgeo
