#include "qholo/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qholo {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string grid_text(const GridSpec& g) {
    if (g.ndim == 1) return std::to_string(g.nx) + " " + fmt(g.extent_x);
    return std::to_string(g.nx) + " " + std::to_string(g.ny) + " " + fmt(g.extent_x) +
           " " + fmt(g.extent_y);
}

std::string mask_text(const WallMaskSpec& m) {
    switch (m.kind) {
    case WallMaskSpec::Kind::Full: return "full";
    case WallMaskSpec::Kind::Interval: return "interval " + fmt(m.a) + " " + fmt(m.b);
    case WallMaskSpec::Kind::Disk:
        return "disk " + fmt(m.a) + " " + fmt(m.b) + " " + fmt(m.c);
    case WallMaskSpec::Kind::Rect:
        return "rect " + fmt(m.a) + " " + fmt(m.b) + " " + fmt(m.c) + " " + fmt(m.d);
    }
    return "full";
}

std::string pump_text(const PumpSpec& p) {
    switch (p.kind) {
    case PumpSpec::Kind::Gaussian:
        return "gaussian " + fmt(p.width) + " " + fmt(p.cx) + " " + fmt(p.cy);
    case PumpSpec::Kind::Uniform: return "uniform";
    case PumpSpec::Kind::Delta: return "delta " + fmt(p.cx) + " " + fmt(p.cy);
    }
    return "uniform";
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream os;
    os << "preset = " << preset << "\n";
    os << "wavelength = " << fmt(wavelength) << "\n";
    os << "source_grid = " << grid_text(source_grid) << "\n";
    os << "wall_grid = " << grid_text(wall_grid) << "\n";
    os << "detector_grid = " << grid_text(detector_grid) << "\n";
    os << "opening_distance = " << fmt(opening_distance) << "\n";
    os << "wall_distance = " << fmt(wall_distance) << "\n";
    os << "detector_distance = " << fmt(detector_distance) << "\n";
    os << "lens_focal = " << (lens_focal ? fmt(*lens_focal) : std::string("none")) << "\n";
    os << "lens_in_direct_path = " << (lens_in_direct_path ? "true" : "false") << "\n";
    os << "wall_mask = " << mask_text(wall_mask) << "\n";
    os << "pump = " << pump_text(pump) << "\n";
    // Drop any scatterers the preset line re-introduces on re-parse.
    os << "clear_scatterers = true\n";
    for (const auto& s : scatterers) {
        os << "scatterer = " << fmt(s.x) << " ";
        if (source_grid.ndim == 2) os << fmt(s.y) << " ";
        os << fmt(s.depth) << " " << fmt(s.eta.real()) << " " << fmt(s.eta.imag()) << "\n";
    }
    os << "mc_n = " << mc_n << "\n";
    os << "mc_seed = " << mc_seed << "\n";
    os << "rng = " << rng_name << "\n";
    os << "depths =";
    for (double d : depths) os << " " << fmt(d);
    os << "\n";
    os << "dc_mode = " << to_string(dc_mode) << "\n";
    os << "out_dir = " << out_dir << "\n";
    os << "threads = " << threads << "\n";
    os << "tolerance_scale = " << fmt(tolerance_scale) << "\n";
    return os.str();
}

ChamberGeometry ExperimentConfig::geometry() const {
    ChamberGeometry g;
    g.wavelength = wavelength;
    g.opening_distance = opening_distance;
    g.wall_distance = wall_distance;
    g.lens_focal = lens_focal;
    g.lens_in_direct_path = lens_in_direct_path;
    return g;
}

DomainMask ExperimentConfig::build_wall_mask() const {
    const WallMaskSpec& m = wall_mask;
    switch (m.kind) {
    case WallMaskSpec::Kind::Full:
        return DomainMask::full(wall_grid);
    case WallMaskSpec::Kind::Interval:
        if (wall_grid.ndim != 1)
            throw ParseError(0, "wall_mask interval applies to 1-D wall grids");
        return DomainMask::from_predicate(
            wall_grid, [&](double x, double) { return x >= m.a && x <= m.b; });
    case WallMaskSpec::Kind::Disk:
        if (wall_grid.ndim != 2)
            throw ParseError(0, "wall_mask disk applies to 2-D wall grids");
        return DomainMask::from_predicate(wall_grid, [&](double x, double y) {
            const double ux = x - m.b;
            const double uy = y - m.c;
            return ux * ux + uy * uy <= m.a * m.a;
        });
    case WallMaskSpec::Kind::Rect:
        if (wall_grid.ndim == 1)
            return DomainMask::from_predicate(
                wall_grid, [&](double x, double) { return x >= m.a && x <= m.b; });
        return DomainMask::from_predicate(wall_grid, [&](double x, double y) {
            return x >= m.a && x <= m.b && y >= m.c && y <= m.d;
        });
    }
    throw ParseError(0, "wall_mask: unknown kind");
}

PumpProfile ExperimentConfig::build_pump() const {
    const GridSpec& g = source_grid;
    ComplexField f(g);
    switch (pump.kind) {
    case PumpSpec::Kind::Gaussian: {
        if (!(pump.width > 0.0)) throw ParseError(0, "pump: gaussian width must be positive");
        const double inv2s2 = 1.0 / (2.0 * pump.width * pump.width);
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) {
                const double ux = g.coord_x(ix) - pump.cx;
                const double uy = g.coord_y(iy) - pump.cy;
                f.values[g.index(ix, iy)] = std::exp(-(ux * ux + uy * uy) * inv2s2);
            }
        break;
    }
    case PumpSpec::Kind::Uniform:
        f = ComplexField::ones(g);
        break;
    case PumpSpec::Kind::Delta: {
        bool clamped = false;
        const int cell = g.nearest_cell(pump.cx, pump.cy, &clamped);
        if (clamped) throw ParseError(0, "pump: delta center outside the source grid");
        f = ComplexField::delta(g, cell);
        break;
    }
    }
    return PumpProfile::from_field(std::move(f), true);
}

Scene ExperimentConfig::build_scene() const {
    return Scene::from_geometry(geometry(), source_grid, wall_grid, build_wall_mask(),
                                scatterers);
}

OpticalSystem ExperimentConfig::build_detector_arm() const {
    if (detector_grid == source_grid)
        return OpticalSystem::fresnel(source_grid, wavelength, detector_distance);
    return OpticalSystem::dense(
        fresnel_dense_kernel(detector_grid, source_grid, wavelength, detector_distance));
}

BackpropOptics ExperimentConfig::build_backprop_optics() const {
    BackpropOptics o;
    o.geometry = geometry();
    o.source_grid = source_grid;
    o.zeta = build_pump().zeta;
    o.h2 = build_detector_arm();
    return o;
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    c.preset = name;
    if (name == "fig1") {
        c.source_grid = GridSpec::line(64, 1.0);
        c.wall_grid = GridSpec::line(128, 1.0);
        c.detector_grid = GridSpec::line(128, 1.0);
        c.wavelength = 0.02;
        c.opening_distance = 0.35;
        c.wall_distance = 0.5;
        c.detector_distance = 0.45;
        c.lens_focal = 0.5;
        c.lens_in_direct_path = true;
        c.wall_mask = {WallMaskSpec::Kind::Interval, -0.45, 0.30, 0.0, 0.0};
        c.pump = {PumpSpec::Kind::Gaussian, 0.12, 0.0, 0.0};
        c.scatterers = {PointScatterer{0.1328125, 0.0, 0.25, Complex(0.3, 0.0)}};
        c.depths = {0.05, 0.15, 0.25, 0.35, 0.45};
        c.dc_mode = DcMode::SubtractP0;
        return c;
    }
    if (name == "recon2d") {
        c.source_grid = GridSpec::plane(64, 64, 1.0, 1.0);
        c.wall_grid = c.source_grid;
        c.detector_grid = c.source_grid;
        c.wavelength = 0.02;
        c.opening_distance = 0.25;
        c.wall_distance = 0.5;
        c.detector_distance = 0.6;
        c.lens_focal = 0.28;
        c.lens_in_direct_path = false;
        c.wall_mask = {WallMaskSpec::Kind::Disk, 0.42, 0.0, 0.0};
        c.pump = {PumpSpec::Kind::Gaussian, 0.30, 0.0, 0.0};
        c.scatterers = {
            PointScatterer{0.1015625, -0.0546875, 0.225, Complex(0.1, 0.0)}};
        c.depths = {0.075, 0.125, 0.175, 0.225, 0.275, 0.325, 0.375, 0.425};
        c.dc_mode = DcMode::SubtractP0;
        return c;
    }
    throw ParseError(0, "unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"fig1", "recon2d"}; }

namespace {

struct ValueParser {
    std::istringstream in;
    int line;

    ValueParser(const std::string& text, int line_no) : in(text), line(line_no) {}

    double number(const char* what) {
        double v = 0;
        if (!(in >> v)) throw ParseError(line, std::string("expected number for ") + what);
        return v;
    }
    std::uint64_t unsigned_number(const char* what) {
        std::uint64_t v = 0;
        if (!(in >> v))
            throw ParseError(line, std::string("expected unsigned integer for ") + what);
        return v;
    }
    int integer(const char* what) {
        int v = 0;
        if (!(in >> v)) throw ParseError(line, std::string("expected integer for ") + what);
        return v;
    }
    std::string word(const char* what) {
        std::string w;
        if (!(in >> w)) throw ParseError(line, std::string("expected token for ") + what);
        return w;
    }
    std::optional<double> maybe_number() {
        double v = 0;
        if (in >> v) return v;
        return std::nullopt;
    }
    void done(const char* what) {
        std::string extra;
        if (in >> extra)
            throw ParseError(line, std::string("unexpected trailing '") + extra + "' after " +
                                       what);
    }
};

GridSpec parse_grid(ValueParser& vp) {
    const double a = vp.number("grid");
    const double b = vp.number("grid");
    auto c = vp.maybe_number();
    if (!c) {
        vp.done("grid");
        return GridSpec::line(static_cast<int>(a), b);
    }
    const double d = vp.number("grid extent");
    vp.done("grid");
    return GridSpec::plane(static_cast<int>(a), static_cast<int>(b), *c, d);
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg = preset_config("fig1");
    bool saw_any_key = false;

    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(line_no, "expected 'key = value', got '" + trim(line) + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        ValueParser vp(value, line_no);

        if (key == "preset") {
            if (saw_any_key)
                throw ParseError(line_no, "preset must come before any other key");
            try {
                cfg = preset_config(vp.word("preset"));
            } catch (const ParseError& e) {
                throw ParseError(line_no, e.what());
            }
            vp.done("preset");
            continue;
        }
        saw_any_key = true;

        if (key == "wavelength") {
            cfg.wavelength = vp.number("wavelength");
            vp.done("wavelength");
        } else if (key == "source_grid") {
            cfg.source_grid = parse_grid(vp);
        } else if (key == "wall_grid") {
            cfg.wall_grid = parse_grid(vp);
        } else if (key == "detector_grid") {
            cfg.detector_grid = parse_grid(vp);
        } else if (key == "opening_distance") {
            cfg.opening_distance = vp.number(key.c_str());
            vp.done(key.c_str());
        } else if (key == "wall_distance") {
            cfg.wall_distance = vp.number(key.c_str());
            vp.done(key.c_str());
        } else if (key == "detector_distance") {
            cfg.detector_distance = vp.number(key.c_str());
            vp.done(key.c_str());
        } else if (key == "lens_focal") {
            const std::string w = vp.word("lens_focal");
            if (w == "none") {
                cfg.lens_focal.reset();
            } else {
                ValueParser vw(w, line_no);
                cfg.lens_focal = vw.number("lens_focal");
            }
            vp.done("lens_focal");
        } else if (key == "lens_in_direct_path") {
            const std::string w = vp.word("lens_in_direct_path");
            if (w != "true" && w != "false")
                throw ParseError(line_no, "lens_in_direct_path must be true or false");
            cfg.lens_in_direct_path = (w == "true");
            vp.done("lens_in_direct_path");
        } else if (key == "wall_mask") {
            const std::string kind = vp.word("wall_mask");
            if (kind == "full") {
                cfg.wall_mask = {WallMaskSpec::Kind::Full, 0, 0, 0, 0};
            } else if (kind == "interval") {
                cfg.wall_mask.kind = WallMaskSpec::Kind::Interval;
                cfg.wall_mask.a = vp.number("interval lo");
                cfg.wall_mask.b = vp.number("interval hi");
                cfg.wall_mask.c = cfg.wall_mask.d = 0;
            } else if (kind == "disk") {
                cfg.wall_mask.kind = WallMaskSpec::Kind::Disk;
                cfg.wall_mask.a = vp.number("disk radius");
                cfg.wall_mask.b = vp.maybe_number().value_or(0.0);
                cfg.wall_mask.c = vp.maybe_number().value_or(0.0);
                cfg.wall_mask.d = 0;
            } else if (kind == "rect") {
                cfg.wall_mask.kind = WallMaskSpec::Kind::Rect;
                cfg.wall_mask.a = vp.number("rect x0");
                cfg.wall_mask.b = vp.number("rect x1");
                cfg.wall_mask.c = vp.maybe_number().value_or(0.0);
                cfg.wall_mask.d = vp.maybe_number().value_or(0.0);
            } else {
                throw ParseError(line_no, "wall_mask: unknown kind '" + kind + "'");
            }
            vp.done("wall_mask");
        } else if (key == "pump") {
            const std::string kind = vp.word("pump");
            if (kind == "gaussian") {
                cfg.pump.kind = PumpSpec::Kind::Gaussian;
                cfg.pump.width = vp.number("gaussian width");
                cfg.pump.cx = vp.maybe_number().value_or(0.0);
                cfg.pump.cy = vp.maybe_number().value_or(0.0);
            } else if (kind == "uniform") {
                cfg.pump = {PumpSpec::Kind::Uniform, 0.0, 0.0, 0.0};
            } else if (kind == "delta") {
                cfg.pump.kind = PumpSpec::Kind::Delta;
                cfg.pump.width = 0.0;
                cfg.pump.cx = vp.maybe_number().value_or(0.0);
                cfg.pump.cy = vp.maybe_number().value_or(0.0);
            } else {
                throw ParseError(line_no, "pump: unknown kind '" + kind + "'");
            }
            vp.done("pump");
        } else if (key == "scatterer") {
            PointScatterer s;
            s.x = vp.number("scatterer x");
            if (cfg.source_grid.ndim == 2) s.y = vp.number("scatterer y");
            s.depth = vp.number("scatterer depth");
            const double re = vp.number("scatterer eta_re");
            const double im = vp.number("scatterer eta_im");
            s.eta = Complex(re, im);
            vp.done("scatterer");
            cfg.scatterers.push_back(s);
        } else if (key == "clear_scatterers") {
            const std::string w = vp.word("clear_scatterers");
            if (w != "true") throw ParseError(line_no, "clear_scatterers takes 'true'");
            vp.done("clear_scatterers");
            cfg.scatterers.clear();
        } else if (key == "mc_n") {
            cfg.mc_n = vp.unsigned_number("mc_n");
            vp.done("mc_n");
        } else if (key == "mc_seed") {
            cfg.mc_seed = vp.unsigned_number("mc_seed");
            vp.done("mc_seed");
        } else if (key == "rng") {
            cfg.rng_name = vp.word("rng");
            if (cfg.rng_name != "splitmix64")
                throw ParseError(line_no, "rng: only 'splitmix64' is available");
            vp.done("rng");
        } else if (key == "depths") {
            cfg.depths.clear();
            while (auto d = vp.maybe_number()) cfg.depths.push_back(*d);
            if (cfg.depths.empty()) throw ParseError(line_no, "depths: expected numbers");
        } else if (key == "dc_mode") {
            try {
                cfg.dc_mode = dc_mode_from_string(vp.word("dc_mode"));
            } catch (const DegenerateInputError& e) {
                throw ParseError(line_no, e.what());
            }
            vp.done("dc_mode");
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else if (key == "threads") {
            cfg.threads = vp.integer("threads");
            if (cfg.threads < 1) throw ParseError(line_no, "threads must be >= 1");
            vp.done("threads");
        } else if (key == "tolerance_scale") {
            cfg.tolerance_scale = vp.number("tolerance_scale");
            if (!(cfg.tolerance_scale > 0.0))
                throw ParseError(line_no, "tolerance_scale must be positive");
            vp.done("tolerance_scale");
        } else {
            throw ParseError(line_no, "unknown key '" + key + "'");
        }
    }

    // Semantic checks that do not need the full scene build.
    if (!(cfg.wavelength > 0.0)) throw ParseError(0, "wavelength: must be positive");
    if (!(cfg.opening_distance > 0.0))
        throw ParseError(0, "opening_distance: must be positive");
    if (!(cfg.wall_distance > 0.0)) throw ParseError(0, "wall_distance: must be positive");
    if (cfg.detector_distance == 0.0)
        throw ParseError(0, "detector_distance: must be nonzero");
    for (const auto& s : cfg.scatterers)
        if (!(s.depth > 0.0) || !(s.depth < cfg.wall_distance))
            throw ParseError(0, "scatterer: depth outside the chamber");
    for (double d : cfg.depths)
        if (!(d > 0.0) || !(d < cfg.wall_distance))
            throw ParseError(0, "depths: candidate depth outside the chamber");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config: " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return parse_config(os.str());
}

} // namespace qholo
