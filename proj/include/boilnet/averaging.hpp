#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "boilnet/common.hpp"
#include "boilnet/field.hpp"

namespace boilnet {

/// Space-time averaging scales: a centered cubic box of side l in space and
/// a trailing window of length tau in time.
struct AvgSpec {
    double l = 0.0;
    double tau = 0.0;
};

namespace detail {

/// l must be an odd integer multiple of the grid spacing so the spatial box
/// has a center cell; rejected with an error rather than silently rounded.
inline std::size_t spatial_factor(double l, double dx) {
    if (l <= 0.0 || dx <= 0.0) fail("value", "averaging: l and dx must be positive");
    const double ratio = l / dx;
    const long long k = std::llround(ratio);
    if (k < 1 || std::abs(ratio - static_cast<double>(k)) > 1e-9 * std::max(1.0, ratio)) {
        fail("value", "averaging length l = " + format_double(l) +
                          " is not an integer multiple of dx = " + format_double(dx));
    }
    if (k % 2 == 0) {
        fail("value", "averaging length l must be an odd multiple of dx, got factor " +
                          std::to_string(k));
    }
    return static_cast<std::size_t>(k);
}

inline std::size_t time_factor(double tau, double dt) {
    if (tau <= 0.0 || dt <= 0.0) fail("value", "averaging: tau and dt must be positive");
    const double ratio = tau / dt;
    const long long k = std::llround(ratio);
    if (k < 1 || std::abs(ratio - static_cast<double>(k)) > 1e-9 * std::max(1.0, ratio)) {
        fail("value", "averaging time tau = " + format_double(tau) +
                          " is not an integer multiple of dt = " + format_double(dt));
    }
    return static_cast<std::size_t>(k);
}

}  // namespace detail

/// Direct discretization of the space-time average: every output cell is the
/// arithmetic mean of one ks x ks x ks x kt block of input cells. Output
/// cells tile the domain (non-overlapping windows); trailing cells that do
/// not fill a complete window are dropped.
inline Field4D average4d(const Field4D& f, const AvgSpec& spec) {
    f.validate();
    const std::size_t ks = detail::spatial_factor(spec.l, f.dx);
    const std::size_t kt = detail::time_factor(spec.tau, f.dt);
    if (ks > f.nx || ks > f.ny || ks > f.nz || kt > f.nt) {
        fail("dimension", "averaging window larger than domain for field '" + f.name + "'");
    }

    Field4D out;
    out.nx = f.nx / ks;
    out.ny = f.ny / ks;
    out.nz = f.nz / ks;
    out.nt = f.nt / kt;
    out.dx = f.dx * static_cast<double>(ks);
    out.dt = f.dt * static_cast<double>(kt);
    out.name = f.name;
    out.values.resize(out.size());

    const double inv = 1.0 / static_cast<double>(ks * ks * ks * kt);
    for (std::size_t T = 0; T < out.nt; ++T) {
        for (std::size_t Z = 0; Z < out.nz; ++Z) {
            for (std::size_t Y = 0; Y < out.ny; ++Y) {
                for (std::size_t X = 0; X < out.nx; ++X) {
                    double acc = 0.0;
                    for (std::size_t t = T * kt; t < (T + 1) * kt; ++t) {
                        for (std::size_t z = Z * ks; z < (Z + 1) * ks; ++z) {
                            for (std::size_t y = Y * ks; y < (Y + 1) * ks; ++y) {
                                const double* row = &f.values[f.index(X * ks, y, z, t)];
                                for (std::size_t i = 0; i < ks; ++i) {
                                    acc += row[i];
                                }
                            }
                        }
                    }
                    out.at(X, Y, Z, T) = acc * inv;
                }
            }
        }
    }
    return out;
}

/// A 4D kernel applied at non-overlapping positions (stride = kernel size).
struct Kernel4 {
    std::size_t kx = 0, ky = 0, kz = 0, kt = 0;
    std::vector<double> weights;  // x-fastest, same layout as Field4D

    std::size_t size() const { return kx * ky * kz * kt; }
    std::size_t index(std::size_t x, std::size_t y, std::size_t z, std::size_t t) const {
        return ((t * kz + z) * ky + y) * kx + x;
    }
};

/// Normalized box kernel: all weights equal and summing to one.
inline Kernel4 box_kernel(std::size_t kx, std::size_t ky, std::size_t kz, std::size_t kt) {
    if (kx == 0 || ky == 0 || kz == 0 || kt == 0) fail("dimension", "box_kernel: zero extent");
    Kernel4 k;
    k.kx = kx;
    k.ky = ky;
    k.kz = kz;
    k.kt = kt;
    k.weights.assign(k.size(), 1.0 / static_cast<double>(k.size()));
    return k;
}

/// Discrete convolution with an arbitrary kernel, evaluated at the same
/// tiling positions as average4d.
inline Field4D convolve_blocks(const Field4D& f, const Kernel4& kernel) {
    f.validate();
    if (kernel.size() == 0 || kernel.weights.size() != kernel.size()) {
        fail("dimension", "convolve_blocks: malformed kernel");
    }
    if (kernel.kx > f.nx || kernel.ky > f.ny || kernel.kz > f.nz || kernel.kt > f.nt) {
        fail("dimension", "convolution kernel larger than domain for field '" + f.name + "'");
    }

    Field4D out;
    out.nx = f.nx / kernel.kx;
    out.ny = f.ny / kernel.ky;
    out.nz = f.nz / kernel.kz;
    out.nt = f.nt / kernel.kt;
    out.dx = f.dx * static_cast<double>(kernel.kx);
    out.dt = f.dt * static_cast<double>(kernel.kt);
    out.name = f.name;
    out.values.resize(out.size());

    for (std::size_t T = 0; T < out.nt; ++T) {
        for (std::size_t Z = 0; Z < out.nz; ++Z) {
            for (std::size_t Y = 0; Y < out.ny; ++Y) {
                for (std::size_t X = 0; X < out.nx; ++X) {
                    double acc = 0.0;
                    for (std::size_t t = 0; t < kernel.kt; ++t) {
                        for (std::size_t z = 0; z < kernel.kz; ++z) {
                            for (std::size_t y = 0; y < kernel.ky; ++y) {
                                const double* row =
                                    &f.values[f.index(X * kernel.kx, Y * kernel.ky + y,
                                                      Z * kernel.kz + z, T * kernel.kt + t)];
                                const double* w = &kernel.weights[kernel.index(0, y, z, t)];
                                for (std::size_t x = 0; x < kernel.kx; ++x) {
                                    acc += w[x] * row[x];
                                }
                            }
                        }
                    }
                    out.at(X, Y, Z, T) = acc;
                }
            }
        }
    }
    return out;
}

/// Independent second path for average4d, via the box-kernel convolution.
inline Field4D average4d_conv(const Field4D& f, const AvgSpec& spec) {
    const std::size_t ks = detail::spatial_factor(spec.l, f.dx);
    const std::size_t kt = detail::time_factor(spec.tau, f.dt);
    return convolve_blocks(f, box_kernel(ks, ks, ks, kt));
}

/// Same box-mean semantics over (x, y, t) only, for surface quantities.
inline SurfaceSeries average_surface(const SurfaceSeries& s, const AvgSpec& spec) {
    s.validate();
    const std::size_t ks = detail::spatial_factor(spec.l, s.dx);
    const std::size_t kt = detail::time_factor(spec.tau, s.dt);
    if (ks > s.nx || ks > s.ny || kt > s.nt) {
        fail("dimension", "averaging window larger than domain for surface '" + s.name + "'");
    }

    SurfaceSeries out;
    out.nx = s.nx / ks;
    out.ny = s.ny / ks;
    out.nt = s.nt / kt;
    out.dx = s.dx * static_cast<double>(ks);
    out.dt = s.dt * static_cast<double>(kt);
    out.name = s.name;
    out.values.resize(out.size());

    const double inv = 1.0 / static_cast<double>(ks * ks * kt);
    for (std::size_t T = 0; T < out.nt; ++T) {
        for (std::size_t Y = 0; Y < out.ny; ++Y) {
            for (std::size_t X = 0; X < out.nx; ++X) {
                double acc = 0.0;
                for (std::size_t t = T * kt; t < (T + 1) * kt; ++t) {
                    for (std::size_t y = Y * ks; y < (Y + 1) * ks; ++y) {
                        const double* row = &s.values[s.index(X * ks, y, t)];
                        for (std::size_t i = 0; i < ks; ++i) {
                            acc += row[i];
                        }
                    }
                }
                out.at(X, Y, T) = acc * inv;
            }
        }
    }
    return out;
}

enum class PhaseConvention { Liquid, Vapor };

/// Converts an averaged color function to void fraction. Under the default
/// liquid convention (phi = 1 means all liquid) alpha = 1 - <phi>.
inline Field4D void_fraction(const Field4D& phi, PhaseConvention convention = PhaseConvention::Liquid) {
    Field4D alpha = phi;
    alpha.name = "alpha";
    for (double& v : alpha.values) {
        if (!(v >= -1e-9 && v <= 1.0 + 1e-9)) {
            fail("value", "void_fraction: color function value " + format_double(v) +
                              " outside [0,1], field '" + phi.name + "' is corrupt");
        }
        const double clamped = std::min(1.0, std::max(0.0, v));
        v = convention == PhaseConvention::Liquid ? 1.0 - clamped : clamped;
    }
    return alpha;
}

}  // namespace boilnet
