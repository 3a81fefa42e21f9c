#pragma once

#include <array>
#include <string>
#include <vector>

#include "boilnet/averaging.hpp"
#include "boilnet/common.hpp"
#include "boilnet/dataset.hpp"
#include "boilnet/field.hpp"

namespace boilnet {

enum class Axis { X, Y, Z };

inline const char* axis_name(Axis a) {
    switch (a) {
        case Axis::X: return "x";
        case Axis::Y: return "y";
        default: return "z";
    }
}

/// Finite-difference gradient along one spatial axis, applied per time frame.
/// Interior cells use central differences; boundary cells fall back to
/// one-sided first-order differences. The spacing is the field's own dx.
inline Field4D central_gradient(const Field4D& f, Axis axis) {
    f.validate();
    const std::size_t n = axis == Axis::X ? f.nx : axis == Axis::Y ? f.ny : f.nz;
    if (n < 3) {
        fail("dimension", "central_gradient: need at least 3 cells along " +
                              std::string(axis_name(axis)) + ", field '" + f.name + "' has " +
                              std::to_string(n));
    }

    Field4D out = f;
    out.name = "d(" + f.name + ")/d" + axis_name(axis);
    const double inv2 = 1.0 / (2.0 * f.dx);
    const double inv1 = 1.0 / f.dx;

    auto value = [&](std::size_t x, std::size_t y, std::size_t z, std::size_t t, std::size_t i) {
        switch (axis) {
            case Axis::X: return f.at(i, y, z, t);
            case Axis::Y: return f.at(x, i, z, t);
            default: return f.at(x, y, i, t);
        }
    };

    for (std::size_t t = 0; t < f.nt; ++t) {
        for (std::size_t z = 0; z < f.nz; ++z) {
            for (std::size_t y = 0; y < f.ny; ++y) {
                for (std::size_t x = 0; x < f.nx; ++x) {
                    const std::size_t i = axis == Axis::X ? x : axis == Axis::Y ? y : z;
                    double g;
                    if (i == 0) {
                        g = (value(x, y, z, t, 1) - value(x, y, z, t, 0)) * inv1;
                    } else if (i + 1 == n) {
                        g = (value(x, y, z, t, n - 1) - value(x, y, z, t, n - 2)) * inv1;
                    } else {
                        g = (value(x, y, z, t, i + 1) - value(x, y, z, t, i - 1)) * inv2;
                    }
                    out.at(x, y, z, t) = g;
                }
            }
        }
    }
    return out;
}

/// Void-fraction-weighted mixture of per-phase values.
inline double phase_mix(double f_liquid, double f_vapor, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        fail("value", "phase_mix: alpha = " + format_double(alpha) + " outside [0,1]");
    }
    return alpha * f_vapor + (1.0 - alpha) * f_liquid;
}

namespace detail {

inline void require_coregistered(const Field4D& a, const Field4D& b) {
    if (a.nx != b.nx || a.ny != b.ny || a.nz != b.nz || a.nt != b.nt || a.dx != b.dx ||
        a.dt != b.dt) {
        fail("dimension", "fields '" + a.name + "' and '" + b.name + "' are not co-registered");
    }
}

inline Field4D cellwise_product(const Field4D& a, const Field4D& b, const Field4D& c,
                                const std::string& name) {
    require_coregistered(a, b);
    require_coregistered(a, c);
    Field4D out = a;
    out.name = name;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = a.values[i] * b.values[i] * c.values[i];
    }
    return out;
}

}  // namespace detail

/// The twelve convective transport features: derivatives of the averaged
/// products rho*u_i*u_j (nine momentum terms) and rho*h*u_i (three energy
/// terms), in the canonical feature order.
inline std::array<Field4D, 12> build_convection_terms(const Field4D& rho, const Field4D& u,
                                                      const Field4D& v, const Field4D& w,
                                                      const Field4D& h) {
    detail::require_coregistered(rho, u);
    detail::require_coregistered(rho, v);
    detail::require_coregistered(rho, w);
    detail::require_coregistered(rho, h);

    const Field4D ruu = detail::cellwise_product(rho, u, u, "ruu");
    const Field4D ruv = detail::cellwise_product(rho, u, v, "ruv");
    const Field4D ruw = detail::cellwise_product(rho, u, w, "ruw");
    const Field4D rvv = detail::cellwise_product(rho, v, v, "rvv");
    const Field4D rvw = detail::cellwise_product(rho, v, w, "rvw");
    const Field4D rww = detail::cellwise_product(rho, w, w, "rww");
    const Field4D rhu = detail::cellwise_product(rho, h, u, "rhu");
    const Field4D rhv = detail::cellwise_product(rho, h, v, "rhv");
    const Field4D rhw = detail::cellwise_product(rho, h, w, "rhw");

    return {central_gradient(ruu, Axis::X), central_gradient(ruv, Axis::X),
            central_gradient(ruw, Axis::X), central_gradient(ruv, Axis::Y),
            central_gradient(rvv, Axis::Y), central_gradient(rvw, Axis::Y),
            central_gradient(ruw, Axis::Z), central_gradient(rvw, Axis::Z),
            central_gradient(rww, Axis::Z), central_gradient(rhu, Axis::X),
            central_gradient(rhv, Axis::Y), central_gradient(rhw, Axis::Z)};
}

/// The four surface target series, in the canonical target order.
struct SurfaceTargetSet {
    SurfaceSeries q_evap;
    SurfaceSeries q_single;
    SurfaceSeries alpha_wall;
    SurfaceSeries t_sup;
};

/// Pairs near-wall volume features (the z = 0 averaged layer) with co-located
/// surface features and targets. One sample per (i, j, t), emitted row-major
/// over i, then j, then t.
inline Dataset extract_near_wall(const std::vector<Field4D>& volume_features,
                                 const std::vector<SurfaceSeries>& surface_features,
                                 const SurfaceTargetSet& targets, double case_label) {
    if (volume_features.empty() && surface_features.empty()) {
        fail("dimension", "extract_near_wall: no feature fields");
    }

    const std::size_t nx = targets.q_evap.nx;
    const std::size_t ny = targets.q_evap.ny;
    const std::size_t nt = targets.q_evap.nt;

    auto check_surface = [&](const SurfaceSeries& s) {
        if (s.nx != nx || s.ny != ny || s.nt != nt) {
            fail("dimension", "extract_near_wall: surface '" + s.name + "' has dims (" +
                                  std::to_string(s.nx) + "," + std::to_string(s.ny) + "," +
                                  std::to_string(s.nt) + "), expected (" + std::to_string(nx) +
                                  "," + std::to_string(ny) + "," + std::to_string(nt) + ")");
        }
    };
    check_surface(targets.q_single);
    check_surface(targets.alpha_wall);
    check_surface(targets.t_sup);
    for (const SurfaceSeries& s : surface_features) check_surface(s);
    for (const Field4D& f : volume_features) {
        if (f.nx != nx || f.ny != ny || f.nt != nt) {
            fail("dimension", "extract_near_wall: volume field '" + f.name +
                                  "' does not match the surface grid");
        }
        if (f.nz < 1) fail("dimension", "extract_near_wall: empty volume field");
    }

    Dataset data;
    data.samples.reserve(nx * ny * nt);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            for (std::size_t t = 0; t < nt; ++t) {
                Sample s;
                s.features.reserve(volume_features.size() + surface_features.size());
                for (const Field4D& f : volume_features) {
                    s.features.push_back(f.at(i, j, 0, t));  // first layer above the wall
                }
                for (const SurfaceSeries& sf : surface_features) {
                    s.features.push_back(sf.at(i, j, t));
                }
                s.targets = {targets.q_evap.at(i, j, t), targets.q_single.at(i, j, t),
                             targets.alpha_wall.at(i, j, t), targets.t_sup.at(i, j, t)};
                s.case_label = case_label;
                data.samples.push_back(std::move(s));
            }
        }
    }
    return data;
}

/// All averaged fields of one heat-flux case.
struct AveragedCase {
    Field4D phi, p, u, v, w, rho, h, mu_t;
    SurfaceSeries q_evap, q_single, t_sup, n_site, t_act, q_total;
    double case_label = 0.0;
};

/// Assembles the full 19-feature / 4-target dataset of one case from its
/// averaged fields: pressure gradients, convection terms, turbulent
/// viscosity, surface features, and the void fraction derived from the
/// averaged color function.
inline Dataset build_case_dataset(const AveragedCase& c) {
    std::vector<Field4D> volume;
    volume.reserve(16);
    volume.push_back(central_gradient(c.p, Axis::X));
    volume.push_back(central_gradient(c.p, Axis::Y));
    volume.push_back(central_gradient(c.p, Axis::Z));
    for (Field4D& term : build_convection_terms(c.rho, c.u, c.v, c.w, c.h)) {
        volume.push_back(std::move(term));
    }
    volume.push_back(c.mu_t);

    const std::vector<SurfaceSeries> surface = {c.q_total, c.n_site, c.t_act};

    SurfaceTargetSet targets;
    targets.q_evap = c.q_evap;
    targets.q_single = c.q_single;
    targets.alpha_wall = slice_z(void_fraction(c.phi), 0);
    targets.t_sup = c.t_sup;

    Dataset data = extract_near_wall(volume, surface, targets, c.case_label);
    if (data.n_features() != kFeatureNames.size()) {
        fail("dimension", "build_case_dataset: expected 19 features, got " +
                              std::to_string(data.n_features()));
    }
    return data;
}

}  // namespace boilnet
