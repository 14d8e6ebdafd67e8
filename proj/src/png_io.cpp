#include "foggen/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>

#include "json.hpp"

namespace foggen {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::filesystem::path& path, const char* what) {
    throw std::runtime_error(std::string(what) + ": " + path.string());
}

// Decodes any PNG into byte_depth-sized grayscale or RGB rows. All libpng
// resources are released before this returns or throws.
struct Decoded {
    int width = 0;
    int height = 0;
    int channels = 0;   // 1 or 3
    int byte_depth = 0;  // 1 or 2
    std::vector<std::uint8_t> rows;  // row-major, native-endian 16-bit
};

Decoded decode_png(const std::filesystem::path& path, bool want_rgb8) {
    FilePtr file(std::fopen(path.string().c_str(), "rb"));
    if (!file) fail(path, "cannot open PNG");

    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(path, "libpng init failed");
    }

    Decoded out;
    std::vector<png_bytep> row_ptrs;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "PNG decode error");
    }

    png_init_io(png, file.get());
    png_read_info(png, info);

    const png_byte color_type = png_get_color_type(png, info);
    png_byte bit_depth = png_get_bit_depth(png, info);

    if (want_rgb8) {
        if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
            png_set_expand_gray_1_2_4_to_8(png);
        if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
        if (bit_depth == 16) png_set_strip_16(png);
        if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
        if (color_type == PNG_COLOR_TYPE_GRAY ||
            color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
            png_set_gray_to_rgb(png);
        out.channels = 3;
        out.byte_depth = 1;
    } else {
        if (color_type != PNG_COLOR_TYPE_GRAY) {
            png_destroy_read_struct(&png, &info, nullptr);
            fail(path, "expected grayscale PNG");
        }
        if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (bit_depth == 16) png_set_swap(png);  // file is big-endian
        out.channels = 1;
        out.byte_depth = bit_depth == 16 ? 2 : 1;
    }
    png_read_update_info(png, info);

    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    const std::size_t expected = static_cast<std::size_t>(out.width) * out.channels *
                                 out.byte_depth;
    if (row_bytes != expected) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "unexpected PNG row layout");
    }

    out.rows.resize(row_bytes * out.height);
    row_ptrs.resize(out.height);
    for (int y = 0; y < out.height; ++y)
        row_ptrs[y] = out.rows.data() + static_cast<std::size_t>(y) * row_bytes;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void encode_png(const std::filesystem::path& path, int width, int height, int channels,
                int byte_depth, const std::uint8_t* data) {
    FilePtr file(std::fopen(path.string().c_str(), "wb"));
    if (!file) fail(path, "cannot create PNG");

    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(path, "libpng init failed");
    }

    std::vector<png_bytep> row_ptrs(height);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(path, "PNG encode error");
    }

    png_init_io(png, file.get());
    const int color_type =
        channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
    png_set_IHDR(png, info, static_cast<png_uint_32>(width),
                 static_cast<png_uint_32>(height), byte_depth * 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (byte_depth == 2) png_set_swap(png);

    const std::size_t row_bytes =
        static_cast<std::size_t>(width) * channels * byte_depth;
    for (int y = 0; y < height; ++y)
        row_ptrs[y] = const_cast<png_bytep>(data + static_cast<std::size_t>(y) * row_bytes);
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

std::uint16_t saturating_round_u16(double v) {
    if (!(v >= 0.0)) return 0;
    const double r = std::round(v);
    return r >= 65535.0 ? 65535 : static_cast<std::uint16_t>(r);
}

}  // namespace

Image read_image_rgb8(const std::filesystem::path& path) {
    const Decoded d = decode_png(path, true);
    Image img(d.width, d.height);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        img.data[i] = d.rows[i] / 255.0;
    return img;
}

void write_image_rgb8(const std::filesystem::path& path, const Image& image) {
    std::vector<std::uint8_t> bytes(image.data.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        const double v = std::clamp(image.data[i], 0.0, 1.0);
        bytes[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    encode_png(path, image.width, image.height, 3, 1, bytes.data());
}

Gray16 read_gray16(const std::filesystem::path& path) {
    const Decoded d = decode_png(path, false);
    if (d.byte_depth != 2) fail(path, "expected 16-bit grayscale PNG");
    Gray16 out{d.width, d.height, {}};
    out.values.resize(static_cast<std::size_t>(d.width) * d.height);
    std::memcpy(out.values.data(), d.rows.data(), d.rows.size());
    return out;
}

void write_gray16(const std::filesystem::path& path, const Gray16& gray) {
    encode_png(path, gray.width, gray.height, 1, 2,
               reinterpret_cast<const std::uint8_t*>(gray.values.data()));
}

Gray8 read_gray8(const std::filesystem::path& path) {
    const Decoded d = decode_png(path, false);
    if (d.byte_depth != 1) fail(path, "expected 8-bit grayscale PNG");
    Gray8 out{d.width, d.height, {}};
    out.values.assign(d.rows.begin(), d.rows.end());
    return out;
}

void write_gray8(const std::filesystem::path& path, const Gray8& gray) {
    encode_png(path, gray.width, gray.height, 1, 1, gray.values.data());
}

ScalarField read_disparity(const std::filesystem::path& path) {
    const Gray16 g = read_gray16(path);
    ScalarField out(g.width, g.height);
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        if (g.values[i] == 0) continue;
        out.values[i] = (g.values[i] - 1) / 256.0;
        out.valid[i] = 1;
    }
    return out;
}

void write_disparity(const std::filesystem::path& path, const ScalarField& disparity) {
    Gray16 g{disparity.width, disparity.height, {}};
    g.values.resize(disparity.values.size());
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        g.values[i] = disparity.valid[i]
                          ? std::max<std::uint16_t>(
                                1, saturating_round_u16(disparity.values[i] * 256.0 + 1.0))
                          : 0;
    }
    write_gray16(path, g);
}

ScalarField read_transmission(const std::filesystem::path& path) {
    const Gray16 g = read_gray16(path);
    ScalarField out = ScalarField::complete(g.width, g.height);
    for (std::size_t i = 0; i < g.values.size(); ++i)
        out.values[i] = g.values[i] / 65535.0;
    return out;
}

void write_transmission(const std::filesystem::path& path, const ScalarField& t) {
    if (!t.all_valid()) throw std::invalid_argument("write_transmission: holes");
    Gray16 g{t.width, t.height, {}};
    g.values.resize(t.values.size());
    for (std::size_t i = 0; i < g.values.size(); ++i)
        g.values[i] = saturating_round_u16(t.values[i] * 65535.0);
    write_gray16(path, g);
}

ScalarField read_meters(const std::filesystem::path& path) {
    const Gray16 g = read_gray16(path);
    ScalarField out = ScalarField::complete(g.width, g.height);
    for (std::size_t i = 0; i < g.values.size(); ++i)
        out.values[i] = g.values[i] / 256.0;
    return out;
}

void write_meters(const std::filesystem::path& path, const ScalarField& meters) {
    if (!meters.all_valid()) throw std::invalid_argument("write_meters: holes");
    Gray16 g{meters.width, meters.height, {}};
    g.values.resize(meters.values.size());
    for (std::size_t i = 0; i < g.values.size(); ++i)
        g.values[i] = saturating_round_u16(meters.values[i] * 256.0);
    write_gray16(path, g);
}

LabelMap read_label_map(const std::filesystem::path& path) {
    const Gray8 g = read_gray8(path);
    LabelMap out(g.width, g.height);
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        const std::uint8_t id = g.values[i];
        if (id >= kNumClasses && id != kVoidId) fail(path, "invalid class id in label map");
        out.ids[i] = id;
    }
    return out;
}

void write_label_map(const std::filesystem::path& path, const LabelMap& labels) {
    Gray8 g{labels.width, labels.height, labels.ids};
    write_gray8(path, g);
}

InstanceMap read_instance_map(const std::filesystem::path& path) {
    const Gray16 g = read_gray16(path);
    InstanceMap out(g.width, g.height);
    out.ids = g.values;
    return out;
}

void write_instance_map(const std::filesystem::path& path, const InstanceMap& inst) {
    write_gray16(path, Gray16{inst.width, inst.height, inst.ids});
}

CameraRig read_camera_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open camera file");
    nlohmann::json j;
    try {
        in >> j;
        return CameraRig{j.at("fx").get<double>(), j.at("fy").get<double>(),
                         j.at("cx").get<double>(), j.at("cy").get<double>(),
                         j.at("baseline").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("bad camera file " + path.string() + ": " + e.what());
    }
}

void write_camera_json(const std::filesystem::path& path, const CameraRig& rig) {
    nlohmann::json j{{"fx", rig.fx},
                     {"fy", rig.fy},
                     {"cx", rig.cx},
                     {"cy", rig.cy},
                     {"baseline", rig.baseline}};
    std::ofstream out(path);
    if (!out) fail(path, "cannot create camera file");
    out << j.dump(2) << '\n';
}

}  // namespace foggen
