#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "foggen/geometry.hpp"

using namespace foggen;

TEST_SUITE("geometry") {
    TEST_CASE("disparity to depth follows fx*baseline/D") {
        CameraRig rig{1000.0, 1000.0, 1.0, 1.0, 0.5};
        ScalarField disp = ScalarField::complete(2, 2, 100.0);
        const ScalarField depth = disparity_to_depth(disp, rig);
        CHECK(depth.at(0, 0) == doctest::Approx(5.0));
        CHECK(depth.all_valid());

        CameraRig rig2{2000.0, 2000.0, 1.0, 1.0, 0.2};
        ScalarField disp2 = ScalarField::complete(2, 2, 8.0);
        CHECK(disparity_to_depth(disp2, rig2).at(0, 0) == doctest::Approx(50.0));
    }

    TEST_CASE("holes and non-positive disparity propagate as invalid") {
        CameraRig rig{1000.0, 1000.0, 1.0, 0.0, 0.5};
        ScalarField disp = ScalarField::complete(3, 1, 10.0);
        disp.set_valid(0, 0, false);
        disp.at(1, 0) = 0.0;
        disp.at(2, 0) = -4.0;
        const ScalarField depth = disparity_to_depth(disp, rig);
        CHECK_FALSE(depth.is_valid(0, 0));
        CHECK_FALSE(depth.is_valid(1, 0));
        CHECK_FALSE(depth.is_valid(2, 0));
        CHECK(depth.valid_count() == 0);
    }

    TEST_CASE("distance equals depth on the optical axis") {
        CameraRig rig{500.0, 500.0, 2.0, 1.0, 0.3};
        ScalarField depth = ScalarField::complete(5, 3, 12.0);
        const ScalarField dist = depth_to_distance(depth, rig);
        CHECK(dist.at(2, 1) == doctest::Approx(12.0));
        // Off-axis pixels are strictly farther along the ray.
        CHECK(dist.at(0, 0) > 12.0);
        CHECK(dist.at(4, 2) > 12.0);
    }

    TEST_CASE("distance matches the back-projected ray length") {
        CameraRig rig{800.0, 600.0, 3.0, 2.0, 0.4};
        ScalarField depth = ScalarField::complete(7, 5, 0.0);
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 7; ++x) depth.at(x, y) = 5.0 + x + 2.0 * y;

        const ScalarField dist = depth_to_distance(depth, rig);
        for (int y = 0; y < 5; ++y) {
            for (int x = 0; x < 7; ++x) {
                const double xn = (x - rig.cx) / rig.fx;
                const double yn = (y - rig.cy) / rig.fy;
                const double expected =
                    depth.at(x, y) * std::sqrt(xn * xn + yn * yn + 1.0);
                CHECK(dist.at(x, y) == doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("distance rejects depth maps with holes") {
        CameraRig rig{500.0, 500.0, 1.0, 1.0, 0.3};
        ScalarField depth = ScalarField::complete(2, 2, 4.0);
        depth.set_valid(1, 1, false);
        CHECK_THROWS_AS(depth_to_distance(depth, rig), std::invalid_argument);
    }

    TEST_CASE("camera validation rejects unusable rigs") {
        CHECK_THROWS_AS((CameraRig{0.0, 1.0, 0.0, 0.0, 0.5}.validate(4, 4)),
                        std::invalid_argument);
        CHECK_THROWS_AS((CameraRig{1.0, 1.0, 0.0, 0.0, -0.5}.validate(4, 4)),
                        std::invalid_argument);
        CHECK_THROWS_AS((CameraRig{1.0, 1.0, 9.0, 0.0, 0.5}.validate(4, 4)),
                        std::invalid_argument);
        CHECK_NOTHROW((CameraRig{1.0, 1.0, 2.0, 2.0, 0.5}.validate(4, 4)));
    }
}
