#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "boilnet/averaging.hpp"
#include "boilnet/common.hpp"
#include "boilnet/features.hpp"
#include "boilnet/field.hpp"
#include "boilnet/rng.hpp"

namespace boilnet {

/// Constants of the embedded feature-to-QoI closure. The cubic superheat
/// dependence is a deliberate nonlinearity so linear baselines underfit; it
/// makes no claim of physical fidelity.
struct ClosureConstants {
    double c1 = 0.45;            // K per (W/m^2)^0.25, superheat scale
    double c2 = 0.02;            // evaporation flux scale
    double n_ref = 0.9e5;        // 1/m^2, site-density scale of the proximity factor
    double site_radius = 1.2e-3; // m, footprint of one nucleation site
    double alpha_max = 0.55;     // void-fraction saturation level
    double q_alpha_ref = 3.0e5;  // W/m^2, void-fraction response scale
    double evap_cap = 0.95;      // q_evap never exceeds this fraction of the local flux
    double q_variation = 0.25;   // relative spread of the local surface heat flux
};

/// Local surface QoIs as a deterministic function of the local surface
/// features (applied heat flux, site density, activation temperature).
struct ClosurePoint {
    double t_sup = 0.0;
    double q_evap = 0.0;
    double q_single = 0.0;
    double alpha = 0.0;
};

inline ClosurePoint closure_eval(const ClosureConstants& c, double q_total, double n_site,
                                 double t_act) {
    ClosurePoint p;
    const double prox = n_site / (n_site + c.n_ref);
    p.t_sup = c.c1 * std::pow(q_total, 0.25) * prox;
    const double excess = std::max(p.t_sup - t_act, 0.0);
    p.q_evap = std::min(c.c2 * n_site * excess * excess * excess, c.evap_cap * q_total);
    p.q_single = q_total - p.q_evap;
    p.alpha = c.alpha_max * (1.0 - std::exp(-p.q_evap / c.q_alpha_ref));
    return p;
}

struct GenConfig {
    double q_total = 600e3;  // W/m^2
    std::size_t nx = 150, ny = 150, nz = 9, nt = 8;
    double dx = 0.25e-3 / 3.0;  // m; three cells per 0.25 mm averaging block
    double dt = 0.0125;         // s; eight frames per 0.1 s averaging window
    std::size_t block = 3;      // spatial averaging factor the surface maps align to
    std::size_t t_window = 8;   // frames per averaging window
    std::size_t n_sites = 0;    // 0 -> derived from q_total
    double t_act_lo = 1.5, t_act_hi = 6.5;  // K
    double noise_sigma = 0.05;
    std::uint64_t seed = 1;
    std::optional<std::uint64_t> site_seed;  // defaults to a stream derived from seed
    ClosureConstants closure;

    void validate() const {
        if (q_total <= 0.0) fail("value", "generator: q_total must be positive");
        if (nx == 0 || ny == 0 || nz == 0 || nt == 0) fail("dimension", "generator: zero grid dimension");
        if (dx <= 0.0 || dt <= 0.0) fail("value", "generator: non-positive spacing");
        if (block < 1 || block % 2 == 0) fail("value", "generator: block must be odd");
        if (t_window < 2) fail("value", "generator: t_window must be at least 2");
        if (nx % block != 0 || ny % block != 0) {
            fail("dimension", "generator: grid too small or misaligned for the averaging window");
        }
        if (nz < block || nt % t_window != 0) {
            fail("dimension", "generator: grid too small or misaligned for the averaging window");
        }
        if (noise_sigma < 0.0) fail("value", "generator: noise_sigma must be non-negative");
        if (t_act_lo > t_act_hi) fail("value", "generator: empty activation temperature range");
    }
};

/// One generated heat-flux case: fine-grid volume fields plus the surface
/// series, all co-registered and reproducible from the config.
struct CaseBundle {
    Field4D phi, p, u, v, w, rho, h, mu_t;
    SurfaceSeries q_evap, q_single, t_sup, n_site, t_act, q_total;
    double case_label = 0.0;
    GenConfig config;
};

namespace detail {

struct Site {
    double x, y, t_act;
};

struct Bump {
    double cx, cy, cz, radius, amp, omega, phase;
};

inline std::vector<Bump> draw_bumps(Rng& rng, std::size_t count, double lx, double ly, double lz,
                                    double amp) {
    std::vector<Bump> bumps(count);
    for (Bump& b : bumps) {
        b.cx = rng.uniform(0.0, lx);
        b.cy = rng.uniform(0.0, ly);
        b.cz = rng.uniform(0.0, lz);
        b.radius = rng.uniform(1.0e-3, 4.0e-3);
        b.amp = rng.uniform(-amp, amp);
        b.omega = 2.0 * std::numbers::pi * rng.uniform(0.5, 2.0);
        b.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    return bumps;
}

/// Sum of smooth random bumps, evaluated as separable space maps modulated in
/// time. Adds amp * exp(-d^2/2r^2) * cos(omega*t + phase) per bump.
inline void add_bump_field(Field4D& f, const std::vector<Bump>& bumps) {
    const std::size_t cells = f.nx * f.ny * f.nz;
    std::vector<double> space(cells);
    for (const Bump& b : bumps) {
        const double inv = 1.0 / (2.0 * b.radius * b.radius);
        std::size_t idx = 0;
        for (std::size_t z = 0; z < f.nz; ++z) {
            const double dz = (static_cast<double>(z) + 0.5) * f.dx - b.cz;
            for (std::size_t y = 0; y < f.ny; ++y) {
                const double dy = (static_cast<double>(y) + 0.5) * f.dx - b.cy;
                for (std::size_t x = 0; x < f.nx; ++x) {
                    const double dxv = (static_cast<double>(x) + 0.5) * f.dx - b.cx;
                    space[idx++] = b.amp * std::exp(-(dxv * dxv + dy * dy + dz * dz) * inv);
                }
            }
        }
        for (std::size_t t = 0; t < f.nt; ++t) {
            const double mod = std::cos(b.omega * static_cast<double>(t) * f.dt + b.phase);
            double* frame = &f.values[t * cells];
            for (std::size_t i = 0; i < cells; ++i) {
                frame[i] += space[i] * mod;
            }
        }
    }
}

inline Field4D blank_field(const GenConfig& cfg, const std::string& name, double fill = 0.0) {
    Field4D f;
    f.nx = cfg.nx;
    f.ny = cfg.ny;
    f.nz = cfg.nz;
    f.nt = cfg.nt;
    f.dx = cfg.dx;
    f.dt = cfg.dt;
    f.name = name;
    f.values.assign(f.size(), fill);
    return f;
}

inline SurfaceSeries blank_surface(const GenConfig& cfg, const std::string& name, double fill = 0.0) {
    SurfaceSeries s;
    s.nx = cfg.nx;
    s.ny = cfg.ny;
    s.nt = cfg.nt;
    s.dx = cfg.dx;
    s.dt = cfg.dt;
    s.name = name;
    s.values.assign(s.size(), fill);
    return s;
}

}  // namespace detail

inline std::size_t default_site_count(double q_total) {
    return static_cast<std::size_t>(std::max(4.0, std::round(q_total * 3.0e-5)));
}

/// Generates one case. Nucleation sites are placed uniformly at random with
/// per-site activation temperatures; the surface feature maps are piecewise
/// constant over the averaging blocks so the space-time averaging pipeline
/// reproduces them exactly, and the color function is carved so the averaged
/// near-wall void fraction realizes the closure's alpha map. Deterministic
/// for a given seed; the site layout only depends on the site stream.
inline CaseBundle generate_case(const GenConfig& cfg) {
    cfg.validate();

    Rng site_rng(cfg.site_seed.value_or(derive_seed(cfg.seed, 1)));
    Rng field_rng(derive_seed(cfg.seed, 2));
    Rng noise_rng(derive_seed(cfg.seed, 3));

    const double lx = static_cast<double>(cfg.nx) * cfg.dx;
    const double ly = static_cast<double>(cfg.ny) * cfg.dx;
    const double lz = static_cast<double>(cfg.nz) * cfg.dx;

    const std::size_t n_sites = cfg.n_sites > 0 ? cfg.n_sites : default_site_count(cfg.q_total);
    std::vector<detail::Site> sites(n_sites);
    for (detail::Site& s : sites) {
        s.x = site_rng.uniform(0.0, lx);
        s.y = site_rng.uniform(0.0, ly);
        s.t_act = site_rng.uniform(cfg.t_act_lo, cfg.t_act_hi);
    }

    // Local surface heat flux: the applied flux modulated by a smooth
    // low-frequency pattern (conjugate heat transfer makes the flux on the
    // liquid contact surface vary around the applied value). Part of the
    // surface layout, so it is drawn from the site stream.
    struct QMode {
        double fx, fy, phase, amp;
    };
    std::vector<QMode> q_modes(4);
    {
        double amp_sum = 0.0;
        for (QMode& m : q_modes) {
            m.fx = site_rng.uniform(0.5, 2.0);
            m.fy = site_rng.uniform(0.5, 2.0);
            m.phase = site_rng.uniform(0.0, 2.0 * std::numbers::pi);
            m.amp = site_rng.uniform(0.25, 1.0);
            amp_sum += m.amp;
        }
        for (QMode& m : q_modes) m.amp /= amp_sum;  // |pattern| <= 1
    }
    auto local_q = [&](double x, double y) {
        double s = 0.0;
        for (const QMode& m : q_modes) {
            s += m.amp * std::cos(2.0 * std::numbers::pi * (m.fx * x / lx + m.fy * y / ly) +
                                  m.phase);
        }
        return cfg.q_total * (1.0 + cfg.closure.q_variation * s);
    };

    // Coarse surface maps at averaging-block resolution.
    const std::size_t nxc = cfg.nx / cfg.block;
    const std::size_t nyc = cfg.ny / cfg.block;
    const double r2 = cfg.closure.site_radius * cfg.closure.site_radius;
    const double splat_norm = 1.0 / (2.0 * std::numbers::pi * r2);
    const double ta_mean = 0.5 * (cfg.t_act_lo + cfg.t_act_hi);

    std::vector<double> n_map(nxc * nyc), ta_map(nxc * nyc), q_map(nxc * nyc);
    std::vector<ClosurePoint> closure_map(nxc * nyc);
    for (std::size_t j = 0; j < nyc; ++j) {
        const double yc = (static_cast<double>(j) + 0.5) * static_cast<double>(cfg.block) * cfg.dx;
        for (std::size_t i = 0; i < nxc; ++i) {
            const double xc =
                (static_cast<double>(i) + 0.5) * static_cast<double>(cfg.block) * cfg.dx;
            double density = 0.0;
            double ta_weighted = ta_mean * 1e-9;
            double weight_sum = 1e-9;
            for (const detail::Site& s : sites) {
                const double d2 = (xc - s.x) * (xc - s.x) + (yc - s.y) * (yc - s.y);
                const double w = std::exp(-d2 / (2.0 * r2));
                density += w * splat_norm;
                ta_weighted += w * s.t_act;
                weight_sum += w;
            }
            const std::size_t idx = j * nxc + i;
            n_map[idx] = density;
            ta_map[idx] = ta_weighted / weight_sum;
            q_map[idx] = local_q(xc, yc);
            closure_map[idx] = closure_eval(cfg.closure, q_map[idx], density, ta_map[idx]);
        }
    }

    // Per-block, per-window multiplicative noise on the closure QoIs. Noise
    // is constant within each averaging block so it survives the averaging
    // unattenuated. Draws are clamped to +-3 sigma, which bounds the energy
    // split error by 3*sigma*q_total.
    const std::size_t n_windows = cfg.nt / cfg.t_window;
    std::vector<double> tsup_n(nxc * nyc * n_windows), qevap_n(nxc * nyc * n_windows),
        qsingle_n(nxc * nyc * n_windows);
    for (std::size_t w = 0; w < n_windows; ++w) {
        for (std::size_t j = 0; j < nyc; ++j) {
            for (std::size_t i = 0; i < nxc; ++i) {
                const std::size_t cell = j * nxc + i;
                const ClosurePoint& cp = closure_map[cell];
                double f_tsup = 1.0, f_qevap = 1.0, f_qsingle = 1.0;
                if (cfg.noise_sigma > 0.0) {
                    auto draw = [&]() {
                        return 1.0 + cfg.noise_sigma * std::clamp(noise_rng.normal(), -3.0, 3.0);
                    };
                    f_tsup = draw();
                    f_qevap = draw();
                    f_qsingle = draw();
                }
                const std::size_t idx = (w * nyc + j) * nxc + i;
                tsup_n[idx] = std::max(0.0, cp.t_sup * f_tsup);
                qevap_n[idx] = std::max(0.0, cp.q_evap * f_qevap);
                qsingle_n[idx] = std::max(0.0, cp.q_single * f_qsingle);
            }
        }
    }

    CaseBundle bundle;
    bundle.case_label = cfg.q_total;
    bundle.config = cfg;

    // Surface series: block-constant broadcasts of the coarse maps.
    bundle.q_total = detail::blank_surface(cfg, "q_total");
    bundle.n_site = detail::blank_surface(cfg, "n_site");
    bundle.t_act = detail::blank_surface(cfg, "t_act");
    bundle.t_sup = detail::blank_surface(cfg, "t_sup");
    bundle.q_evap = detail::blank_surface(cfg, "q_evap");
    bundle.q_single = detail::blank_surface(cfg, "q_single");
    for (std::size_t t = 0; t < cfg.nt; ++t) {
        const std::size_t w = t / cfg.t_window;
        for (std::size_t y = 0; y < cfg.ny; ++y) {
            const std::size_t j = y / cfg.block;
            for (std::size_t x = 0; x < cfg.nx; ++x) {
                const std::size_t i = x / cfg.block;
                const std::size_t cell = j * nxc + i;
                const std::size_t noised = (w * nyc + j) * nxc + i;
                bundle.q_total.at(x, y, t) = q_map[cell];
                bundle.n_site.at(x, y, t) = n_map[cell];
                bundle.t_act.at(x, y, t) = ta_map[cell];
                bundle.t_sup.at(x, y, t) = tsup_n[noised];
                bundle.q_evap.at(x, y, t) = qevap_n[noised];
                bundle.q_single.at(x, y, t) = qsingle_n[noised];
            }
        }
    }

    // Color function: vapor occupancy as an amplitude map times a rising wave
    // profile. The wave completes an integer number of cycles per averaging
    // window, so the window average of the near-wall band reproduces the
    // closure's alpha map exactly (up to rounding).
    const double z_decay = 4.0;
    double band_mean = 0.0;
    for (std::size_t z = 0; z < cfg.block; ++z) {
        band_mean += std::exp(-static_cast<double>(z) / z_decay);
    }
    band_mean = 0.75 * band_mean / static_cast<double>(cfg.block);
    if (cfg.closure.alpha_max > band_mean) {
        fail("value", "generator: alpha_max exceeds the realizable near-wall band mean " +
                          format_double(band_mean));
    }

    const std::size_t frames_per_cycleset = cfg.nt / cfg.t_window;
    const std::size_t cyc_base =
        1 + static_cast<std::size_t>(cfg.q_total / 400e3) % (cfg.t_window - 1);
    const double cycles = static_cast<double>(frames_per_cycleset * cyc_base);

    bundle.phi = detail::blank_field(cfg, "phi");
    for (std::size_t t = 0; t < cfg.nt; ++t) {
        const double tphase = cycles * static_cast<double>(t) / static_cast<double>(cfg.nt);
        for (std::size_t z = 0; z < cfg.nz; ++z) {
            const double zprof = std::exp(-static_cast<double>(z) / z_decay);
            const double wave =
                0.75 + 0.25 * std::sin(2.0 * std::numbers::pi *
                                       (tphase - static_cast<double>(z) / static_cast<double>(cfg.nz)));
            for (std::size_t y = 0; y < cfg.ny; ++y) {
                const std::size_t j = y / cfg.block;
                for (std::size_t x = 0; x < cfg.nx; ++x) {
                    const std::size_t i = x / cfg.block;
                    const double amplitude = closure_map[j * nxc + i].alpha / band_mean;
                    const double vapor = amplitude * zprof * wave;
                    bundle.phi.at(x, y, z, t) = 1.0 - vapor;
                }
            }
        }
    }

    // Mixture density and enthalpy from per-phase constants and the local
    // vapor occupancy.
    const double rho_l = 958.4, rho_v = 0.5978;
    const double h_l = 4.19e5, h_v = 2.676e6;
    bundle.rho = detail::blank_field(cfg, "rho");
    bundle.h = detail::blank_field(cfg, "h");
    for (std::size_t idx = 0; idx < bundle.phi.values.size(); ++idx) {
        const double vapor = 1.0 - bundle.phi.values[idx];
        bundle.rho.values[idx] = phase_mix(rho_l, rho_v, vapor);
        bundle.h.values[idx] = phase_mix(h_l, h_v, vapor);
    }

    // Pressure: hydrostatic head plus smooth random bumps.
    bundle.p = detail::blank_field(cfg, "p");
    for (std::size_t t = 0; t < cfg.nt; ++t) {
        for (std::size_t z = 0; z < cfg.nz; ++z) {
            const double head = 101325.0 + rho_l * 9.81 * (lz - (static_cast<double>(z) + 0.5) * cfg.dx);
            for (std::size_t y = 0; y < cfg.ny; ++y) {
                for (std::size_t x = 0; x < cfg.nx; ++x) {
                    bundle.p.at(x, y, z, t) = head;
                }
            }
        }
    }
    detail::add_bump_field(bundle.p, detail::draw_bumps(field_rng, 6, lx, ly, lz, 500.0));

    // Velocities: site-driven rising plumes in w, bump turbulence in u and v.
    const double vel_amp = 0.05 * (1.0 + cfg.q_total / 1.0e6);
    bundle.u = detail::blank_field(cfg, "u");
    bundle.v = detail::blank_field(cfg, "v");
    detail::add_bump_field(bundle.u, detail::draw_bumps(field_rng, 6, lx, ly, lz, vel_amp));
    detail::add_bump_field(bundle.v, detail::draw_bumps(field_rng, 6, lx, ly, lz, vel_amp));

    bundle.w = detail::blank_field(cfg, "w");
    {
        const double plume_r2 = 2.0e-3 * 2.0e-3;
        const double w_amp = 0.15 * cfg.q_total / 600e3;
        std::vector<double> plume(cfg.nx * cfg.ny, 0.0);
        for (const detail::Site& s : sites) {
            for (std::size_t y = 0; y < cfg.ny; ++y) {
                const double dy = (static_cast<double>(y) + 0.5) * cfg.dx - s.y;
                for (std::size_t x = 0; x < cfg.nx; ++x) {
                    const double dxv = (static_cast<double>(x) + 0.5) * cfg.dx - s.x;
                    plume[y * cfg.nx + x] += std::exp(-(dxv * dxv + dy * dy) / (2.0 * plume_r2));
                }
            }
        }
        for (std::size_t t = 0; t < cfg.nt; ++t) {
            const double pulse =
                1.0 + 0.3 * std::sin(2.0 * std::numbers::pi * cycles * static_cast<double>(t) /
                                     static_cast<double>(cfg.nt));
            for (std::size_t z = 0; z < cfg.nz; ++z) {
                const double rise = (static_cast<double>(z) + 0.5) / static_cast<double>(cfg.nz);
                for (std::size_t y = 0; y < cfg.ny; ++y) {
                    for (std::size_t x = 0; x < cfg.nx; ++x) {
                        bundle.w.at(x, y, z, t) = w_amp * plume[y * cfg.nx + x] * rise * pulse;
                    }
                }
            }
        }
        detail::add_bump_field(bundle.w, detail::draw_bumps(field_rng, 6, lx, ly, lz, 0.02));
    }

    // Turbulent viscosity: positive base level modulated by squared bumps.
    bundle.mu_t = detail::blank_field(cfg, "mu_t");
    {
        Field4D bumps = detail::blank_field(cfg, "mu_t_bumps");
        detail::add_bump_field(bumps, detail::draw_bumps(field_rng, 6, lx, ly, lz, 1.0));
        const double base = 1.0e-4 * cfg.q_total / 600e3;
        for (std::size_t idx = 0; idx < bundle.mu_t.values.size(); ++idx) {
            bundle.mu_t.values[idx] = base * (1.0 + bumps.values[idx] * bumps.values[idx]);
        }
    }

    return bundle;
}

/// One bundle per heat flux; seeds are base_seed + case index so cases are
/// independent streams.
inline std::vector<CaseBundle> generate_suite(const std::vector<double>& q_list,
                                              std::uint64_t base_seed, GenConfig proto = {}) {
    if (q_list.empty()) fail("value", "generate_suite: empty heat flux list");
    for (std::size_t a = 0; a < q_list.size(); ++a) {
        for (std::size_t b = a + 1; b < q_list.size(); ++b) {
            if (q_list[a] == q_list[b]) {
                fail("value", "generate_suite: duplicate heat flux " + format_double(q_list[a]));
            }
        }
    }
    std::vector<CaseBundle> bundles;
    bundles.reserve(q_list.size());
    for (std::size_t i = 0; i < q_list.size(); ++i) {
        GenConfig cfg = proto;
        cfg.q_total = q_list[i];
        cfg.seed = base_seed + i;
        cfg.n_sites = proto.n_sites;  // 0 keeps the per-q default
        bundles.push_back(generate_case(cfg));
    }
    return bundles;
}

/// Runs the full space-time averaging over one bundle.
inline AveragedCase average_case(const CaseBundle& b, const AvgSpec& spec) {
    AveragedCase out;
    out.phi = average4d(b.phi, spec);
    out.p = average4d(b.p, spec);
    out.u = average4d(b.u, spec);
    out.v = average4d(b.v, spec);
    out.w = average4d(b.w, spec);
    out.rho = average4d(b.rho, spec);
    out.h = average4d(b.h, spec);
    out.mu_t = average4d(b.mu_t, spec);
    out.q_evap = average_surface(b.q_evap, spec);
    out.q_single = average_surface(b.q_single, spec);
    out.t_sup = average_surface(b.t_sup, spec);
    out.n_site = average_surface(b.n_site, spec);
    out.t_act = average_surface(b.t_act, spec);
    out.q_total = average_surface(b.q_total, spec);
    out.case_label = b.case_label;
    return out;
}

inline const std::vector<std::string>& volume_field_names() {
    static const std::vector<std::string> names = {"phi", "p", "u", "v", "w", "rho", "h", "mu_t"};
    return names;
}

inline const std::vector<std::string>& surface_field_names() {
    static const std::vector<std::string> names = {"q_evap", "q_single", "t_sup",
                                                   "n_site", "t_act",    "q_total"};
    return names;
}

inline nlohmann::json case_manifest(const CaseBundle& b) {
    nlohmann::json manifest;
    manifest["q_total"] = b.config.q_total;
    manifest["seed"] = b.config.seed;
    manifest["noise_sigma"] = b.config.noise_sigma;
    manifest["constants"] = {{"c1", b.config.closure.c1},
                             {"c2", b.config.closure.c2},
                             {"n_ref", b.config.closure.n_ref},
                             {"site_radius", b.config.closure.site_radius},
                             {"alpha_max", b.config.closure.alpha_max},
                             {"q_alpha_ref", b.config.closure.q_alpha_ref},
                             {"evap_cap", b.config.closure.evap_cap}};
    nlohmann::json files = nlohmann::json::array();
    for (const std::string& n : volume_field_names()) files.push_back(n + ".blfd");
    for (const std::string& n : surface_field_names()) files.push_back(n + ".blfd");
    manifest["fields"] = files;
    return manifest;
}

/// Writes the bundle as one BLFD file per field plus manifest.json.
inline void write_case_files(const std::filesystem::path& dir, const CaseBundle& b) {
    std::filesystem::create_directories(dir);
    write_blfd(dir / "phi.blfd", b.phi);
    write_blfd(dir / "p.blfd", b.p);
    write_blfd(dir / "u.blfd", b.u);
    write_blfd(dir / "v.blfd", b.v);
    write_blfd(dir / "w.blfd", b.w);
    write_blfd(dir / "rho.blfd", b.rho);
    write_blfd(dir / "h.blfd", b.h);
    write_blfd(dir / "mu_t.blfd", b.mu_t);
    write_blfd(dir / "q_evap.blfd", b.q_evap);
    write_blfd(dir / "q_single.blfd", b.q_single);
    write_blfd(dir / "t_sup.blfd", b.t_sup);
    write_blfd(dir / "n_site.blfd", b.n_site);
    write_blfd(dir / "t_act.blfd", b.t_act);
    write_blfd(dir / "q_total.blfd", b.q_total);
    std::ofstream os(dir / "manifest.json");
    if (!os) fail("io", "cannot open for writing: " + (dir / "manifest.json").string());
    os << case_manifest(b).dump(2) << '\n';
}

}  // namespace boilnet
