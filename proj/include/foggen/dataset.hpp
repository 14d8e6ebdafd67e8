#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "foggen/fog.hpp"
#include "foggen/params.hpp"

namespace foggen {

// Cityscapes trainId class table: ids 0-18 plus 255 for void.
inline constexpr int kNumClasses = 19;
inline constexpr std::uint8_t kVoidId = 255;
inline constexpr std::uint8_t kSkyId = 10;

// Classes carrying per-object instances (person..bicycle).
inline constexpr std::uint8_t kFirstInstanceClass = 11;
inline constexpr std::uint8_t kLastInstanceClass = 18;

// Classes with ample support in real foggy test data: road, sidewalk,
// building, pole, traffic light, traffic sign, vegetation, sky, person, car.
inline constexpr std::array<std::uint8_t, 10> kFrequentClasses = {0, 1, 2,  5,  6,
                                                                  7, 8, 10, 11, 13};

const char* class_name(int id);  // "void" for 255; throws on other invalid ids

struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> ids;  // trainIds, row-major

    LabelMap() = default;
    LabelMap(int w, int h, std::uint8_t fill = kVoidId)
        : width(w), height(h), ids(static_cast<std::size_t>(w) * h, fill) {}
    std::uint8_t at(int x, int y) const {
        return ids[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) { return ids[static_cast<std::size_t>(y) * width + x]; }
};

// Instance rasters encode class*1000 + per-class index for instances of the
// eight instance classes; values below 1000 carry no instance.
struct InstanceMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> ids;

    InstanceMap() = default;
    InstanceMap(int w, int h)
        : width(w), height(h), ids(static_cast<std::size_t>(w) * h, 0) {}
    std::uint16_t at(int x, int y) const {
        return ids[static_cast<std::size_t>(y) * width + x];
    }
    std::uint16_t& at(int x, int y) {
        return ids[static_cast<std::size_t>(y) * width + x];
    }
};

struct BBox {
    int class_id = 0;
    int x_min = 0, y_min = 0, x_max = 0, y_max = 0;  // inclusive
    bool operator==(const BBox&) const = default;
};

// True iff the atmospheric-light pixel carries the sky label.
bool sky_criterion(const AtmosphericLight& atm, const LabelMap& labels);

// Tight axis-aligned hull per instance id, ordered by instance id.
std::vector<BBox> instances_to_bboxes(const InstanceMap& inst);

struct DatasetStats {
    std::array<std::uint64_t, kNumClasses> pixel_counts{};
    std::uint64_t void_pixels = 0;
    std::array<std::uint64_t, kNumClasses> instance_counts{};
};

DatasetStats dataset_stats(std::span<const LabelMap> labels,
                           std::span<const InstanceMap> instances);

struct SslEntry {
    std::string image_path;
    std::string label_path;
    bool transferred = false;  // false: human label, true: pseudo label
};

struct SslManifest {
    double w = 0.0;
    double lambda = 0.0;  // (labeled/unlabeled) * w
    std::vector<SslEntry> entries;
};

// Interleaves each labeled pair once with pseudo-labeled pairs at a 1:w
// stream ratio; pseudo entries are drawn without replacement and the pool is
// reshuffled per epoch. Deterministic given seed.
SslManifest build_ssl_manifest(
    const std::vector<std::pair<std::string, std::string>>& labeled,
    const std::vector<std::pair<std::string, std::string>>& pseudo, double w,
    std::uint64_t seed);

// Canonical per-image sidecar document (pretty-printed JSON).
std::string sidecar_json(double beta, const AtmosphericLight& light, std::uint64_t seed,
                         const std::string& params_sha256);

struct BuildReport {
    int stems_found = 0;
    int images_written = 0;
    std::vector<std::string> errors;                          // "<stem>: <what>"
    std::vector<std::pair<std::string, std::string>> rejects;  // stem, reason
    bool ok() const { return errors.empty(); }
};

// Builds one output subtree per beta from a clear-weather input tree.
// Annotations are copied byte-identically; images failing the selection
// criteria are recorded in rejects.txt but still processed. The per-image
// seed is derived from `seed` and the stem, so results do not depend on
// `threads` or on the beta list ordering.
BuildReport build_dataset(const std::filesystem::path& input_root,
                          const std::filesystem::path& output_root,
                          std::span<const double> betas, const PipelineParams& params,
                          std::uint64_t seed, int threads,
                          const std::optional<std::set<std::string>>& overcast_allowlist);

}  // namespace foggen
