#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "boilnet/common.hpp"
#include "boilnet/dataset.hpp"

namespace boilnet {

/// A scalar quantity sampled on a regular space-time grid, x-fastest layout.
/// Spacing is uniform: dx applies to all three spatial axes.
struct Field4D {
    std::size_t nx = 0, ny = 0, nz = 0, nt = 0;
    double dx = 0.0, dt = 0.0;
    std::string name;
    std::vector<double> values;

    std::size_t size() const { return nx * ny * nz * nt; }
    std::size_t index(std::size_t x, std::size_t y, std::size_t z, std::size_t t) const {
        return ((t * nz + z) * ny + y) * nx + x;
    }
    double at(std::size_t x, std::size_t y, std::size_t z, std::size_t t) const {
        return values[index(x, y, z, t)];
    }
    double& at(std::size_t x, std::size_t y, std::size_t z, std::size_t t) {
        return values[index(x, y, z, t)];
    }

    void validate() const {
        if (nx == 0 || ny == 0 || nz == 0 || nt == 0) fail("dimension", "field '" + name + "': zero dimension");
        if (dx <= 0.0 || dt <= 0.0) fail("value", "field '" + name + "': non-positive spacing");
        if (values.size() != size()) {
            fail("dimension", "field '" + name + "': value count " + std::to_string(values.size()) +
                                  " != " + std::to_string(size()));
        }
        for (double v : values) {
            if (!std::isfinite(v)) fail("value", "field '" + name + "': non-finite value");
        }
    }
};

/// A scalar quantity on the heating surface over time (no z axis).
struct SurfaceSeries {
    std::size_t nx = 0, ny = 0, nt = 0;
    double dx = 0.0, dt = 0.0;
    std::string name;
    std::vector<double> values;

    std::size_t size() const { return nx * ny * nt; }
    std::size_t index(std::size_t x, std::size_t y, std::size_t t) const {
        return (t * ny + y) * nx + x;
    }
    double at(std::size_t x, std::size_t y, std::size_t t) const { return values[index(x, y, t)]; }
    double& at(std::size_t x, std::size_t y, std::size_t t) { return values[index(x, y, t)]; }

    void validate() const {
        if (nx == 0 || ny == 0 || nt == 0) fail("dimension", "surface '" + name + "': zero dimension");
        if (dx <= 0.0 || dt <= 0.0) fail("value", "surface '" + name + "': non-positive spacing");
        if (values.size() != size()) {
            fail("dimension", "surface '" + name + "': value count mismatch");
        }
        for (double v : values) {
            if (!std::isfinite(v)) fail("value", "surface '" + name + "': non-finite value");
        }
    }
};

inline Field4D surface_to_field(const SurfaceSeries& s) {
    Field4D f;
    f.nx = s.nx;
    f.ny = s.ny;
    f.nz = 1;
    f.nt = s.nt;
    f.dx = s.dx;
    f.dt = s.dt;
    f.name = s.name;
    f.values = s.values;  // identical layout when nz == 1
    return f;
}

inline SurfaceSeries field_to_surface(const Field4D& f) {
    if (f.nz != 1) fail("dimension", "field_to_surface: field '" + f.name + "' has nz != 1");
    SurfaceSeries s;
    s.nx = f.nx;
    s.ny = f.ny;
    s.nt = f.nt;
    s.dx = f.dx;
    s.dt = f.dt;
    s.name = f.name;
    s.values = f.values;
    return s;
}

/// Extracts one z layer of a volume field as a surface series.
inline SurfaceSeries slice_z(const Field4D& f, std::size_t z) {
    if (z >= f.nz) fail("dimension", "slice_z: layer out of range");
    SurfaceSeries s;
    s.nx = f.nx;
    s.ny = f.ny;
    s.nt = f.nt;
    s.dx = f.dx;
    s.dt = f.dt;
    s.name = f.name;
    s.values.resize(s.size());
    for (std::size_t t = 0; t < f.nt; ++t) {
        for (std::size_t y = 0; y < f.ny; ++y) {
            for (std::size_t x = 0; x < f.nx; ++x) {
                s.at(x, y, t) = f.at(x, y, z, t);
            }
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// BLFD v1 binary format (little-endian):
//   "BLFD"  u32 version=1  u32 nx ny nz nt  f64 dx dt
//   u32 name_len  name bytes (UTF-8)  nx*ny*nz*nt f64 values, x-fastest.
// Surface series are stored with nz = 1.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_f64(std::ostream& os, double d) {
    std::uint64_t v = 0;
    std::memcpy(&v, &d, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

class BlfdReader {
public:
    BlfdReader(std::istream& is, std::string path) : is_(is), path_(std::move(path)) {}

    void read_bytes(void* dst, std::size_t n, const char* what) {
        is_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(is_.gcount()) != n) {
            fail("format", path_ + ": truncated " + what + " at byte " + std::to_string(offset_));
        }
        offset_ += n;
    }

    std::uint32_t read_u32(const char* what) {
        unsigned char b[4];
        read_bytes(b, 4, what);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }

    double read_f64(const char* what) {
        unsigned char b[8];
        read_bytes(b, 8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        double d = 0.0;
        std::memcpy(&d, &v, 8);
        return d;
    }

    std::size_t offset() const { return offset_; }
    const std::string& path() const { return path_; }

private:
    std::istream& is_;
    std::string path_;
    std::size_t offset_ = 0;
};

}  // namespace detail

inline void write_blfd(const std::filesystem::path& path, const Field4D& f) {
    f.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) fail("io", "cannot open for writing: " + path.string());
    os.write("BLFD", 4);
    detail::put_u32(os, 1);
    detail::put_u32(os, static_cast<std::uint32_t>(f.nx));
    detail::put_u32(os, static_cast<std::uint32_t>(f.ny));
    detail::put_u32(os, static_cast<std::uint32_t>(f.nz));
    detail::put_u32(os, static_cast<std::uint32_t>(f.nt));
    detail::put_f64(os, f.dx);
    detail::put_f64(os, f.dt);
    detail::put_u32(os, static_cast<std::uint32_t>(f.name.size()));
    os.write(f.name.data(), static_cast<std::streamsize>(f.name.size()));
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(f.values.data()),
                 static_cast<std::streamsize>(f.values.size() * 8));
    } else {
        for (double v : f.values) detail::put_f64(os, v);
    }
    if (!os) fail("io", "write failed: " + path.string());
}

inline void write_blfd(const std::filesystem::path& path, const SurfaceSeries& s) {
    write_blfd(path, surface_to_field(s));
}

inline Field4D read_blfd_field(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail("io", "cannot open: " + path.string());
    detail::BlfdReader r(is, path.string());

    char magic[4];
    r.read_bytes(magic, 4, "magic");
    if (std::memcmp(magic, "BLFD", 4) != 0) {
        fail("format", path.string() + ": bad magic at byte 0");
    }
    const std::uint32_t version = r.read_u32("version");
    if (version != 1) {
        fail("format", path.string() + ": unsupported version " + std::to_string(version) +
                           " at byte 4");
    }

    Field4D f;
    f.nx = r.read_u32("nx");
    f.ny = r.read_u32("ny");
    f.nz = r.read_u32("nz");
    f.nt = r.read_u32("nt");
    f.dx = r.read_f64("dx");
    f.dt = r.read_f64("dt");
    if (f.nx == 0 || f.ny == 0 || f.nz == 0 || f.nt == 0) {
        fail("format", path.string() + ": zero dimension in header at byte 8");
    }
    const std::uint32_t name_len = r.read_u32("name length");
    if (name_len > 4096) {
        fail("format", path.string() + ": implausible name length " + std::to_string(name_len) +
                           " at byte " + std::to_string(r.offset() - 4));
    }
    f.name.resize(name_len);
    if (name_len > 0) r.read_bytes(f.name.data(), name_len, "name");

    const std::size_t count = f.nx * f.ny * f.nz * f.nt;
    f.values.resize(count);
    const std::size_t data_offset = r.offset();
    if constexpr (std::endian::native == std::endian::little) {
        r.read_bytes(f.values.data(), count * 8, "values");
    } else {
        for (std::size_t i = 0; i < count; ++i) f.values[i] = r.read_f64("values");
    }
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::isfinite(f.values[i])) {
            fail("format", path.string() + ": non-finite value at byte " +
                               std::to_string(data_offset + 8 * i));
        }
    }
    if (f.dx <= 0.0 || f.dt <= 0.0) {
        fail("format", path.string() + ": non-positive spacing at byte 24");
    }
    return f;
}

inline SurfaceSeries read_blfd_surface(const std::filesystem::path& path) {
    return field_to_surface(read_blfd_field(path));
}

/// Text alternative for small fields: header x_index,y_index,z_index,t_index,value.
/// Grid dimensions are inferred from the indices; every cell must be present.
/// Spacing and name are not part of the text format and are supplied here.
inline Field4D read_field_csv(const std::filesystem::path& path, double dx, double dt,
                              const std::string& name) {
    std::ifstream is(path);
    if (!is) fail("io", "cannot open: " + path.string());
    std::string line;
    if (!std::getline(is, line)) fail("format", path.string() + ": missing header");
    const std::vector<std::string> header = split_csv_line(line);
    const std::vector<std::string> expected = {"x_index", "y_index", "z_index", "t_index", "value"};
    if (header.size() != expected.size()) {
        fail("format", path.string() + ": expected 5 columns, found " +
                           std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < expected.size(); ++c) {
        if (header[c] != expected[c]) {
            fail("format", path.string() + ": unexpected column '" + header[c] + "' at position " +
                               std::to_string(c) + " (expected '" + expected[c] + "')");
        }
    }

    struct Entry {
        std::size_t x, y, z, t;
        double value;
    };
    std::vector<Entry> entries;
    std::size_t max_x = 0, max_y = 0, max_z = 0, max_t = 0;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        const std::string ctx = path.string() + ":" + std::to_string(line_no);
        if (fields.size() != 5) fail("format", ctx + ": expected 5 fields");
        Entry e;
        e.x = static_cast<std::size_t>(parse_double(fields[0], ctx));
        e.y = static_cast<std::size_t>(parse_double(fields[1], ctx));
        e.z = static_cast<std::size_t>(parse_double(fields[2], ctx));
        e.t = static_cast<std::size_t>(parse_double(fields[3], ctx));
        e.value = parse_double(fields[4], ctx);
        max_x = std::max(max_x, e.x);
        max_y = std::max(max_y, e.y);
        max_z = std::max(max_z, e.z);
        max_t = std::max(max_t, e.t);
        entries.push_back(e);
        if (entries.size() > 1000000) {
            fail("format", path.string() + ": text field format is limited to 10^6 values");
        }
    }
    if (entries.empty()) fail("format", path.string() + ": no data rows");

    Field4D f;
    f.nx = max_x + 1;
    f.ny = max_y + 1;
    f.nz = max_z + 1;
    f.nt = max_t + 1;
    f.dx = dx;
    f.dt = dt;
    f.name = name;
    if (entries.size() != f.size()) {
        fail("format", path.string() + ": " + std::to_string(entries.size()) + " rows do not fill a " +
                           std::to_string(f.nx) + "x" + std::to_string(f.ny) + "x" +
                           std::to_string(f.nz) + "x" + std::to_string(f.nt) + " grid");
    }
    f.values.assign(f.size(), std::numeric_limits<double>::quiet_NaN());
    for (const Entry& e : entries) {
        double& slot = f.at(e.x, e.y, e.z, e.t);
        if (!std::isnan(slot)) fail("format", path.string() + ": duplicate cell index");
        slot = e.value;
    }
    f.validate();
    return f;
}

}  // namespace boilnet
