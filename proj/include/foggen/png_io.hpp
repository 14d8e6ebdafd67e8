#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "foggen/dataset.hpp"
#include "foggen/image.hpp"

namespace foggen {

// 8-bit color PNG; palette/gray/alpha inputs are normalized to RGB.
Image read_image_rgb8(const std::filesystem::path& path);
void write_image_rgb8(const std::filesystem::path& path, const Image& image);

// Raw 16-bit and 8-bit grayscale rasters (exact sample values).
struct Gray16 {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> values;
};
Gray16 read_gray16(const std::filesystem::path& path);
void write_gray16(const std::filesystem::path& path, const Gray16& gray);

struct Gray8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> values;
};
Gray8 read_gray8(const std::filesystem::path& path);
void write_gray8(const std::filesystem::path& path, const Gray8& gray);

// Disparity convention: sample 0 marks a hole, otherwise D = (sample-1)/256.
ScalarField read_disparity(const std::filesystem::path& path);
void write_disparity(const std::filesystem::path& path, const ScalarField& disparity);

// Transmission convention: sample = round(t * 65535).
ScalarField read_transmission(const std::filesystem::path& path);
void write_transmission(const std::filesystem::path& path, const ScalarField& t);

// Depth/distance convention: sample = round(meters * 256), saturating.
ScalarField read_meters(const std::filesystem::path& path);
void write_meters(const std::filesystem::path& path, const ScalarField& meters);

// Label maps are 8-bit trainIds (255 = void); instance maps are 16-bit
// class*1000+index values.
LabelMap read_label_map(const std::filesystem::path& path);
void write_label_map(const std::filesystem::path& path, const LabelMap& labels);
InstanceMap read_instance_map(const std::filesystem::path& path);
void write_instance_map(const std::filesystem::path& path, const InstanceMap& inst);

// Camera intrinsics JSON: {"fx","fy","cx","cy","baseline"}.
CameraRig read_camera_json(const std::filesystem::path& path);
void write_camera_json(const std::filesystem::path& path, const CameraRig& rig);

}  // namespace foggen
