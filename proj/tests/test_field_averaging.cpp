#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "boilnet/averaging.hpp"
#include "boilnet/field.hpp"
#include "boilnet/rng.hpp"

using namespace boilnet;

namespace {

Field4D make_field(std::size_t nx, std::size_t ny, std::size_t nz, std::size_t nt, double dx = 1.0,
                   double dt = 1.0, double fill = 0.0) {
    Field4D f;
    f.nx = nx;
    f.ny = ny;
    f.nz = nz;
    f.nt = nt;
    f.dx = dx;
    f.dt = dt;
    f.name = "test";
    f.values.assign(f.size(), fill);
    return f;
}

Field4D random_field(std::size_t nx, std::size_t ny, std::size_t nz, std::size_t nt,
                     std::uint64_t seed) {
    Field4D f = make_field(nx, ny, nz, nt);
    Rng rng(seed);
    for (double& v : f.values) v = rng.uniform(-2.0, 5.0);
    return f;
}

}  // namespace

TEST_CASE("blfd round trip is bit exact") {
    Field4D f = random_field(6, 5, 4, 3, 99);
    f.dx = 0.25e-3 / 3.0;
    f.dt = 0.0125;
    f.name = "pressure";

    const auto path = std::filesystem::temp_directory_path() / "boilnet_blfd_test.blfd";
    write_blfd(path, f);
    const Field4D g = read_blfd_field(path);
    CHECK(g.nx == f.nx);
    CHECK(g.ny == f.ny);
    CHECK(g.nz == f.nz);
    CHECK(g.nt == f.nt);
    CHECK(g.dx == f.dx);
    CHECK(g.dt == f.dt);
    CHECK(g.name == f.name);
    CHECK(g.values == f.values);
    std::filesystem::remove(path);
}

TEST_CASE("surface series round trips through nz=1") {
    SurfaceSeries s;
    s.nx = 4;
    s.ny = 3;
    s.nt = 2;
    s.dx = 0.5;
    s.dt = 0.1;
    s.name = "q_evap";
    s.values.resize(s.size());
    Rng rng(4);
    for (double& v : s.values) v = rng.uniform(0.0, 1e6);

    const auto path = std::filesystem::temp_directory_path() / "boilnet_surf_test.blfd";
    write_blfd(path, s);
    const SurfaceSeries t = read_blfd_surface(path);
    CHECK(t.nx == s.nx);
    CHECK(t.ny == s.ny);
    CHECK(t.nt == s.nt);
    CHECK(t.values == s.values);
    std::filesystem::remove(path);
}

TEST_CASE("malformed blfd errors carry a byte offset") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto path = dir / "boilnet_blfd_bad.blfd";

    Field4D f = random_field(4, 4, 2, 2, 5);
    write_blfd(path, f);

    // truncate inside the value block
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 24);
    try {
        read_blfd_field(path);
        FAIL("expected format error");
    } catch (const Error& e) {
        CHECK(e.category() == "format");
        CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }

    {
        std::ofstream os(path, std::ios::binary);
        os << "NOPE";
    }
    CHECK_THROWS_AS(read_blfd_field(path), Error);
    std::filesystem::remove(path);
}

TEST_CASE("csv field alternative") {
    const auto path = std::filesystem::temp_directory_path() / "boilnet_field.csv";
    {
        std::ofstream os(path);
        os << "x_index,y_index,z_index,t_index,value\n";
        for (int t = 0; t < 2; ++t) {
            for (int z = 0; z < 1; ++z) {
                for (int y = 0; y < 2; ++y) {
                    for (int x = 0; x < 3; ++x) {
                        os << x << ',' << y << ',' << z << ',' << t << ','
                           << (x + 10 * y + 100 * t) << '\n';
                    }
                }
            }
        }
    }
    const Field4D f = read_field_csv(path, 0.5, 0.1, "demo");
    CHECK(f.nx == 3);
    CHECK(f.ny == 2);
    CHECK(f.nz == 1);
    CHECK(f.nt == 2);
    CHECK(f.at(2, 1, 0, 1) == 112.0);

    {
        std::ofstream os(path);
        os << "x_index,y_index,z,t_index,value\n0,0,0,0,1\n";
    }
    try {
        read_field_csv(path, 1.0, 1.0, "demo");
        FAIL("expected format error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("'z'") != std::string::npos);
    }

    {
        std::ofstream os(path);
        os << "x_index,y_index,z_index,t_index,value\n0,0,0,0,1\n2,0,0,0,3\n";
    }
    CHECK_THROWS_AS(read_field_csv(path, 1.0, 1.0, "demo"), Error);  // missing cells
    std::filesystem::remove(path);
}

TEST_CASE("constant fields are averaging fixed points") {
    Field4D f = make_field(9, 9, 9, 4, 1.0, 1.0, 3.7);
    const Field4D a = average4d(f, AvgSpec{3.0, 2.0});
    CHECK(a.nx == 3);
    CHECK(a.ny == 3);
    CHECK(a.nz == 3);
    CHECK(a.nt == 2);
    CHECK(a.dx == 3.0);
    CHECK(a.dt == 2.0);
    for (double v : a.values) CHECK(v == Catch::Approx(3.7).margin(1e-13));
}

TEST_CASE("checkerboard averages to one half") {
    Field4D f = make_field(6, 6, 6, 4);
    for (std::size_t t = 0; t < f.nt; ++t) {
        for (std::size_t z = 0; z < f.nz; ++z) {
            for (std::size_t y = 0; y < f.ny; ++y) {
                for (std::size_t x = 0; x < f.nx; ++x) {
                    f.at(x, y, z, t) = static_cast<double>((x + y + z + t) % 2);
                }
            }
        }
    }
    // 3x3x3 spatial box over 2 frames: each spatial cell contributes one 0 and
    // one 1 across the two frames
    const Field4D a = average4d(f, AvgSpec{3.0, 2.0});
    for (double v : a.values) CHECK(v == Catch::Approx(0.5).margin(1e-14));
}

TEST_CASE("box mean of a linear ramp recovers the center value") {
    Field4D f = make_field(9, 3, 3, 1);
    for (std::size_t t = 0; t < f.nt; ++t) {
        for (std::size_t z = 0; z < f.nz; ++z) {
            for (std::size_t y = 0; y < f.ny; ++y) {
                for (std::size_t x = 0; x < f.nx; ++x) {
                    f.at(x, y, z, t) = static_cast<double>(x);
                }
            }
        }
    }
    const Field4D a = average4d(f, AvgSpec{3.0, 1.0});
    REQUIRE(a.nx == 3);
    CHECK(a.at(0, 0, 0, 0) == Catch::Approx(1.0).margin(1e-13));  // center of {0,1,2}
    CHECK(a.at(1, 0, 0, 0) == Catch::Approx(4.0).margin(1e-13));
    CHECK(a.at(2, 0, 0, 0) == Catch::Approx(7.0).margin(1e-13));
}

TEST_CASE("averaging rejects bad windows") {
    Field4D f = make_field(8, 8, 8, 4);
    CHECK_THROWS_AS(average4d(f, AvgSpec{9.0, 1.0}), Error);   // window larger than domain
    CHECK_THROWS_AS(average4d(f, AvgSpec{4.0, 1.0}), Error);   // even multiple
    CHECK_THROWS_AS(average4d(f, AvgSpec{2.5, 1.0}), Error);   // not an integer multiple
    CHECK_THROWS_AS(average4d(f, AvgSpec{3.0, 0.8}), Error);   // tau not a multiple of dt
    CHECK_THROWS_AS(average4d(f, AvgSpec{3.0, 5.0}), Error);   // time window too long
    CHECK_NOTHROW(average4d(f, AvgSpec{3.0, 4.0}));
}

TEST_CASE("direct block mean equals box kernel convolution") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Field4D f = random_field(16, 16, 16, 8, 1000 + seed);
        const AvgSpec spec{3.0, 2.0};
        const Field4D a = average4d(f, spec);
        const Field4D b = average4d_conv(f, spec);
        REQUIRE(a.values.size() == b.values.size());
        for (std::size_t i = 0; i < a.values.size(); ++i) {
            CHECK(a.values[i] == Catch::Approx(b.values[i]).margin(1e-12));
        }
    }
}

TEST_CASE("box kernel weights sum to one") {
    const Kernel4 k = box_kernel(3, 3, 3, 2);
    // compensated sum so the check measures the kernel, not accumulation error
    double sum = 0.0, carry = 0.0;
    for (double w : k.weights) {
        const double y = w - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-15);
}

TEST_CASE("convolving an impulse reproduces the kernel weight") {
    Field4D f = make_field(9, 9, 9, 2);
    f.at(4, 4, 4, 1) = 1.0;  // spike inside the middle block
    const Kernel4 k = box_kernel(3, 3, 3, 2);
    const Field4D out = convolve_blocks(f, k);
    for (std::size_t t = 0; t < out.nt; ++t) {
        for (std::size_t z = 0; z < out.nz; ++z) {
            for (std::size_t y = 0; y < out.ny; ++y) {
                for (std::size_t x = 0; x < out.nx; ++x) {
                    const double expected = (x == 1 && y == 1 && z == 1) ? k.weights[0] : 0.0;
                    CHECK(out.at(x, y, z, t) == Catch::Approx(expected).margin(1e-15));
                }
            }
        }
    }
}

TEST_CASE("surface averaging") {
    SurfaceSeries s;
    s.nx = 150;
    s.ny = 150;
    s.nt = 8;
    s.dx = 0.25e-3 / 3.0;
    s.dt = 0.0125;
    s.name = "t_sup";
    s.values.assign(s.size(), 1.25);

    const SurfaceSeries a = average_surface(s, AvgSpec{0.25e-3, 0.1});
    CHECK(a.nx == 50);
    CHECK(a.ny == 50);
    CHECK(a.nt == 1);
    for (double v : a.values) CHECK(v == Catch::Approx(1.25).margin(1e-13));

    // single frame with tau = dt degenerates to a pure spatial average
    SurfaceSeries one;
    one.nx = 3;
    one.ny = 3;
    one.nt = 1;
    one.dx = 1.0;
    one.dt = 1.0;
    one.name = "x";
    one.values = {0, 1, 2, 3, 4, 5, 6, 7, 8};
    const SurfaceSeries b = average_surface(one, AvgSpec{3.0, 1.0});
    REQUIRE(b.size() == 1);
    CHECK(b.values[0] == Catch::Approx(4.0).margin(1e-13));
}

TEST_CASE("averaging preserves range, linearity, and mass") {
    Rng rng(2222);
    const Field4D f = random_field(9, 9, 9, 4, 77);
    const Field4D g = random_field(9, 9, 9, 4, 78);
    const AvgSpec spec{3.0, 2.0};

    const Field4D af = average4d(f, spec);
    double lo = f.values[0], hi = f.values[0];
    for (double v : f.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : af.values) {
        CHECK(v >= lo - 1e-12);
        CHECK(v <= hi + 1e-12);
    }

    // linearity
    const double a = 2.5, b = -1.25;
    Field4D combo = f;
    for (std::size_t i = 0; i < combo.values.size(); ++i) {
        combo.values[i] = a * f.values[i] + b * g.values[i];
    }
    const Field4D avg_combo = average4d(combo, spec);
    const Field4D ag = average4d(g, spec);
    for (std::size_t i = 0; i < avg_combo.values.size(); ++i) {
        CHECK(avg_combo.values[i] ==
              Catch::Approx(a * af.values[i] + b * ag.values[i]).margin(1e-12));
    }

    // mass consistency on an exactly tiled domain
    double in_mean = 0.0;
    for (double v : f.values) in_mean += v;
    in_mean /= static_cast<double>(f.values.size());
    double out_mean = 0.0;
    for (double v : af.values) out_mean += v;
    out_mean /= static_cast<double>(af.values.size());
    CHECK(out_mean == Catch::Approx(in_mean).margin(1e-12));
    (void)rng;
}

TEST_CASE("void fraction conventions and validation") {
    Field4D phi = make_field(2, 2, 1, 1, 1.0, 1.0, 1.0);
    const Field4D alpha_liquid = void_fraction(phi);
    for (double v : alpha_liquid.values) CHECK(v == 0.0);

    Field4D vapor = make_field(2, 2, 1, 1, 1.0, 1.0, 0.0);
    const Field4D alpha_all = void_fraction(vapor);
    for (double v : alpha_all.values) CHECK(v == 1.0);

    Field4D half = make_field(2, 2, 1, 1, 1.0, 1.0, 0.5);
    CHECK(void_fraction(half).values[0] == Catch::Approx(0.5).margin(1e-15));
    CHECK(void_fraction(half, PhaseConvention::Vapor).values[0] ==
          Catch::Approx(0.5).margin(1e-15));

    // vapor convention mirrors the liquid one
    Field4D mixed = make_field(2, 1, 1, 1);
    mixed.values = {0.25, 1.0};
    CHECK(void_fraction(mixed).values[0] == Catch::Approx(0.75).margin(1e-15));
    CHECK(void_fraction(mixed, PhaseConvention::Vapor).values[0] ==
          Catch::Approx(0.25).margin(1e-15));

    Field4D bad = make_field(2, 1, 1, 1);
    bad.values = {0.5, 1.5};
    CHECK_THROWS_AS(void_fraction(bad), Error);

    // tiny numerical overshoot is clamped into [0, 1]
    Field4D edge = make_field(2, 1, 1, 1);
    edge.values = {-0.5e-9, 1.0 + 0.5e-9};
    const Field4D clamped = void_fraction(edge);
    for (double v : clamped.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}
