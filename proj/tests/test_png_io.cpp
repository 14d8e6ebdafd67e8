#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "foggen/png_io.hpp"
#include "foggen/rng.hpp"

using namespace foggen;
namespace fs = std::filesystem;

namespace {

fs::path temp_png(const std::string& tag) {
    static SplitMix64 rng(0xBADC0DE);
    return fs::temp_directory_path() /
           ("foggen_io_" + tag + "_" + std::to_string(rng.next()) + ".png");
}

struct FileGuard {
    fs::path path;
    ~FileGuard() { fs::remove(path); }
};

}  // namespace

TEST_SUITE("png_io") {
    TEST_CASE("rgb8 images round-trip at 8-bit precision") {
        Image img(7, 5);
        SplitMix64 rng(1);
        for (double& v : img.data)
            v = static_cast<double>(rng.next_below(256)) / 255.0;  // exactly representable
        const FileGuard f{temp_png("rgb")};
        write_image_rgb8(f.path, img);
        const Image back = read_image_rgb8(f.path);
        REQUIRE(back.width == 7);
        REQUIRE(back.height == 5);
        CHECK(back.data == img.data);
    }

    TEST_CASE("rgb8 write quantizes by rounding") {
        Image img(1, 1, {0.5, 0.0, 1.0});
        const FileGuard f{temp_png("quant")};
        write_image_rgb8(f.path, img);
        const Image back = read_image_rgb8(f.path);
        CHECK(back.at(0, 0, 0) == 128.0 / 255.0);  // round(0.5*255) = 128
        CHECK(back.at(0, 0, 1) == 0.0);
        CHECK(back.at(0, 0, 2) == 1.0);
    }

    TEST_CASE("gray16 keeps exact sample values above one byte") {
        Gray16 g;
        g.width = 4;
        g.height = 3;
        g.values = {0, 1, 255, 256, 300, 1000, 13007, 32768, 65535, 2, 3, 4};
        const FileGuard f{temp_png("g16")};
        write_gray16(f.path, g);
        const Gray16 back = read_gray16(f.path);
        CHECK(back.width == 4);
        CHECK(back.height == 3);
        CHECK(back.values == g.values);
    }

    TEST_CASE("gray8 round-trips") {
        Gray8 g;
        g.width = 3;
        g.height = 2;
        g.values = {0, 17, 128, 200, 254, 255};
        const FileGuard f{temp_png("g8")};
        write_gray8(f.path, g);
        const Gray8 back = read_gray8(f.path);
        CHECK(back.values == g.values);
    }

    TEST_CASE("disparity encoding: holes at sample 0, quarter-pixel steps") {
        ScalarField d = ScalarField::complete(3, 1);
        d.at(0, 0) = 2.5;
        d.at(1, 0) = 0.0;
        d.set_valid(2, 0, false);
        const FileGuard f{temp_png("disp")};
        write_disparity(f.path, d);

        const Gray16 raw = read_gray16(f.path);
        CHECK(raw.values[0] == 641);  // 2.5*256 + 1
        CHECK(raw.values[1] == 1);    // valid zero disparity
        CHECK(raw.values[2] == 0);    // hole marker

        const ScalarField back = read_disparity(f.path);
        CHECK(back.at(0, 0) == 2.5);
        CHECK(back.at(1, 0) == 0.0);
        CHECK(back.is_valid(1, 0));
        CHECK_FALSE(back.is_valid(2, 0));
    }

    TEST_CASE("disparity saturates at the 16-bit ceiling") {
        ScalarField d = ScalarField::complete(1, 1, 1e9);
        const FileGuard f{temp_png("dsat")};
        write_disparity(f.path, d);
        const Gray16 raw = read_gray16(f.path);
        CHECK(raw.values[0] == 65535);
    }

    TEST_CASE("transmission encoding uses the full 16-bit range") {
        ScalarField t = ScalarField::complete(4, 1);
        t.at(0, 0) = 0.0;
        t.at(1, 0) = 1.0;
        t.at(2, 0) = 0.5;
        t.at(3, 0) = 1e-6;
        const FileGuard f{temp_png("trans")};
        write_transmission(f.path, t);
        const Gray16 raw = read_gray16(f.path);
        CHECK(raw.values[0] == 0);
        CHECK(raw.values[1] == 65535);
        CHECK(raw.values[2] == 32768);  // round(0.5*65535)
        const ScalarField back = read_transmission(f.path);
        for (int x = 0; x < 4; ++x)
            CHECK(std::abs(back.at(x, 0) - t.at(x, 0)) <= 0.5 / 65535.0);
    }

    TEST_CASE("meters encoding holds 1/256 m resolution and saturates") {
        ScalarField m = ScalarField::complete(3, 1);
        m.at(0, 0) = 100.0;
        m.at(1, 0) = 0.1;
        m.at(2, 0) = 1e7;
        const FileGuard f{temp_png("meters")};
        write_meters(f.path, m);
        const Gray16 raw = read_gray16(f.path);
        CHECK(raw.values[0] == 25600);
        CHECK(raw.values[1] == 26);  // round(0.1*256)
        CHECK(raw.values[2] == 65535);
        const ScalarField back = read_meters(f.path);
        CHECK(back.at(0, 0) == 100.0);
        CHECK(std::abs(back.at(1, 0) - 0.1) <= 0.5 / 256.0);
    }

    TEST_CASE("label maps round-trip and reject invalid ids on read") {
        LabelMap labels(5, 4, kVoidId);
        labels.at(0, 0) = 0;
        labels.at(1, 0) = 10;
        labels.at(2, 0) = 18;
        const FileGuard f{temp_png("label")};
        write_label_map(f.path, labels);
        const LabelMap back = read_label_map(f.path);
        CHECK(back.ids == labels.ids);

        Gray8 bogus;
        bogus.width = 2;
        bogus.height = 1;
        bogus.values = {19, 0};  // not a trainId
        const FileGuard g{temp_png("badlabel")};
        write_gray8(g.path, bogus);
        CHECK_THROWS_AS(read_label_map(g.path), std::runtime_error);
    }

    TEST_CASE("instance maps round-trip 16-bit ids") {
        InstanceMap inst(4, 2);
        inst.at(0, 0) = 13007;
        inst.at(3, 1) = 18999;
        inst.at(1, 0) = 500;
        const FileGuard f{temp_png("inst")};
        write_instance_map(f.path, inst);
        const InstanceMap back = read_instance_map(f.path);
        CHECK(back.ids == inst.ids);
    }

    TEST_CASE("reading an RGB file as grayscale fails loudly") {
        const FileGuard f{temp_png("mixed")};
        write_image_rgb8(f.path, Image(4, 4, 0.5));
        CHECK_THROWS_WITH_AS(read_gray16(f.path),
                             doctest::Contains("expected grayscale"), std::runtime_error);
    }

    TEST_CASE("a missing file error names the path") {
        const fs::path missing = temp_png("nonexistent");
        CHECK_THROWS_WITH_AS(read_image_rgb8(missing),
                             doctest::Contains(missing.string().c_str()),
                             std::runtime_error);
        CHECK_THROWS_WITH_AS(read_camera_json(missing),
                             doctest::Contains(missing.string().c_str()),
                             std::runtime_error);
    }

    TEST_CASE("camera JSON round-trips and rejects malformed documents") {
        const CameraRig rig{2262.52, 2265.3017905988554, 1096.98, 513.137, 0.209313};
        FileGuard f{temp_png("cam")};
        f.path.replace_extension(".json");
        write_camera_json(f.path, rig);
        const CameraRig back = read_camera_json(f.path);
        CHECK(back.fx == rig.fx);
        CHECK(back.fy == rig.fy);
        CHECK(back.cx == rig.cx);
        CHECK(back.cy == rig.cy);
        CHECK(back.baseline == rig.baseline);

        FileGuard g{temp_png("badcam")};
        g.path.replace_extension(".json");
        {
            std::ofstream out(g.path);
            out << "{\"fx\": 100.0}";  // missing fields
        }
        CHECK_THROWS_WITH_AS(read_camera_json(g.path),
                             doctest::Contains(g.path.string().c_str()),
                             std::runtime_error);
    }
}
