#pragma once

#include <filesystem>
#include <string>

namespace foggen {

// Pipeline constants. Defaults follow the fog-simulation configuration used
// to build the foggy dataset versions; every value can be overridden from a
// JSON config file or CLI flags.
struct PipelineParams {
    double epsilon = 12.0 / 255.0;     // photo-consistency RGB distance bound
    int k_hat = 2048;                  // target superpixel count
    double compactness = 10.0;         // SLIC range/spatial weight m
    int min_valid = 20;                // reliability floor P
    double valid_fraction = 0.6;       // reliability fraction lambda
    int ransac_max_iters = 2000;
    double ransac_p = 0.99;            // pure-inlier-sample probability bound
    double theta_factor = 0.01;        // inlier threshold = factor * median depth
    double theta_hat = 50.0;           // outlier replacement threshold, meters
    double depth_floor = 0.1;          // minimum completed depth, meters
    int guided_radius = 20;            // guided filter window radius r
    double guided_mu = 1e-3;           // guided filter regularization
    int dark_channel_patch = 15;       // atmospheric light min-filter patch
    double light_top_fraction = 0.001; // candidate fraction of brightest dark-channel pixels
    double transmission_floor = 1e-6;  // clamp after refinement

    std::string to_json() const;
    // Overwrites only the fields present in the JSON object; unknown keys
    // are an error.
    void merge_json(const std::string& json_text);
    static PipelineParams from_json_file(const std::filesystem::path& path);

    // SHA-256 of the canonical JSON serialization, lowercase hex.
    std::string sha256() const;
};

}  // namespace foggen
