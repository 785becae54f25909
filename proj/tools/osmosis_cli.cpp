#include "osmosis/image_io.hpp"
#include "osmosis/osmosis.hpp"
#include "osmosis/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using namespace osmosis;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kUsage = 2, kConvergence = 3, kInvariant = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunOptions {
    std::string input;
    std::string output;
    std::string mask;
    std::string reference;
    std::string report;
    std::string dump_drift;
    std::string scheme = "semi-implicit";
    std::string solver = "stabilized-krylov";
    std::string positivity = "offset";
    double tau = 1e3;
    double p = 1.0;
    double epsilon = 1e-7;
    double tol = 1e-3;
    double omega = 1.5;
    double solver_tol = 1e-9;
    double edge_threshold = 0.1;
    std::size_t edge_dilate = 0;
    std::size_t max_steps = 100;
    std::uint64_t seed = 1;
    bool linear = false;
    bool adaptive = false;
    bool no_timing = false;
};

void add_scheme_options(CLI::App* app, RunOptions& o) {
    app->add_option("--tau", o.tau, "time step")->capture_default_str();
    app->add_option("--p", o.p, "diffusivity exponent in [1, 2)")->capture_default_str();
    app->add_option("--epsilon", o.epsilon, "flux regularisation")->capture_default_str();
    app->add_option("--scheme", o.scheme, "explicit | semi-implicit")
        ->check(CLI::IsMember({"explicit", "semi-implicit"}))
        ->capture_default_str();
    app->add_option("--max-steps", o.max_steps, "outer step limit")->capture_default_str();
    app->add_option("--tol", o.tol, "relative-change stopping tolerance")->capture_default_str();
    app->add_option("--solver", o.solver, "sor | gauss-seidel | stabilized-krylov")
        ->check(CLI::IsMember({"sor", "gauss-seidel", "gs", "stabilized-krylov", "bicgstab"}))
        ->capture_default_str();
    app->add_option("--omega", o.omega, "SOR relaxation in (0, 2)")->capture_default_str();
    app->add_option("--solver-tol", o.solver_tol, "linear solver relative residual")
        ->capture_default_str();
    app->add_flag("--linear", o.linear, "use g = 1 (linear osmosis)");
    app->add_flag("--adaptive", o.adaptive, "explicit scheme: clip tau to the stability bound");
    app->add_option("--positivity", o.positivity, "offset (+1) | floor (max/255)")
        ->check(CLI::IsMember({"offset", "floor"}))
        ->capture_default_str();
    app->add_option("--report", o.report, "write a JSON run report");
    app->add_flag("--no-timing", o.no_timing, "zero wall-clock fields in the report");
    app->add_option("--dump-drift", o.dump_drift, "write the drift field (binary)");
    app->add_option("--seed", o.seed, "random seed")->capture_default_str();
}

SchemeConfig scheme_config(const RunOptions& o) {
    SchemeConfig c;
    c.scheme = o.scheme == "explicit" ? Scheme::Explicit : Scheme::SemiImplicit;
    c.tau = o.tau;
    c.max_steps = o.max_steps;
    c.tol = o.tol;
    c.adaptive_explicit = o.adaptive;
    c.diffusivity.p = o.p;
    c.diffusivity.epsilon = o.epsilon;
    c.diffusivity.mode = o.linear ? DiffusivityMode::LinearBaseline : DiffusivityMode::Nonlinear;
    c.validate();
    return c;
}

SolverConfig solver_config(const RunOptions& o) {
    SolverConfig s;
    s.method = parse_solver_method(o.solver);
    s.omega = o.omega;
    s.tol = o.solver_tol;
    s.validate();
    return s;
}

Raster load(const std::string& path, const char* what) {
    if (path.empty()) throw UsageError(std::string("missing ") + what);
    if (!fs::exists(path)) throw UsageError(std::string(what) + " not found: " + path);
    return read_raster(path);
}

PositivityMode positivity(const RunOptions& o) {
    return o.positivity == "floor" ? PositivityMode::Floor : PositivityMode::Offset;
}

std::vector<Image> positive_channels(const Raster& r, PositivityMode mode) {
    std::vector<Image> out;
    for (const Image& c : r.channels) out.push_back(to_positive(c, mode, r.max_value()));
    return out;
}

void require_shape(const Raster& a, const Raster& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw UsageError(std::string(what) + " dimensions differ from the input image");
}

void write_json(const std::string& path, const json& j) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write report " + path);
    out << j.dump(2) << '\n';
}

void write_drift(const std::string& path, const DriftField& d) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write drift dump " + path);
    dump_drift(out, d);
}

/// Per-channel job: positive input channel (and reference) -> evolution.
using ChannelRun = std::function<Evolution(std::size_t channel, const Image& f)>;

json aggregate(const std::vector<Evolution>& runs, bool timing) {
    json j;
    std::size_t steps = 0;
    double wall = 0.0, drift = 0.0, minv = std::numeric_limits<double>::infinity(), change = 0.0;
    bool converged = true;
    json per = json::array();
    for (const auto& r : runs) {
        steps = std::max(steps, r.report.steps);
        wall = std::max(wall, r.report.wall_ms);
        drift = std::max(drift, std::abs(r.report.mass_drift()));
        minv = std::min(minv, r.report.final_min());
        change = std::max(change, r.report.final_relative_change());
        converged = converged && r.report.status == EvolutionStatus::Converged;
        per.push_back(to_json(r.report, timing));
    }
    j["steps"] = steps;
    j["wall_ms"] = timing ? wall : 0.0;
    j["mass_drift_relative"] = drift;
    j["min_value"] = minv;
    j["final_relative_change"] = change;
    j["converged"] = converged;
    j["channels"] = std::move(per);
    return j;
}

/// Shared driver: loads the input, runs every channel concurrently, writes image and report.
int run_pipeline(const std::string& name, const RunOptions& o, const Raster& input,
                 const ChannelRun& job, const std::optional<Raster>& truth, json extra = {}) {
    const SchemeConfig cfg = scheme_config(o);
    const SolverConfig scfg = solver_config(o);
    const PositivityMode mode = positivity(o);
    const std::vector<Image> chans = positive_channels(input, mode);

    json rep;
    rep["command"] = name;
    rep["config"] = to_json(cfg, scfg);
    rep["config"]["seed"] = o.seed;
    for (auto& [k, v] : extra.items()) rep[k] = v;

    std::vector<Evolution> runs;
    try {
        std::vector<std::future<Evolution>> futures;
        for (std::size_t c = 0; c < chans.size(); ++c)
            futures.push_back(std::async(std::launch::async, [&, c] { return job(c, chans[c]); }));
        for (auto& f : futures) runs.push_back(f.get());
    } catch (const ConvergenceError& e) {
        rep["error"] = e.what();
        rep["inner_iterations"] = e.iterations();
        rep["residual"] = e.residual();
        write_json(o.report, rep);
        std::cerr << "error: " << e.what() << '\n';
        return kConvergence;
    } catch (const StabilityError& e) {
        rep["error"] = e.what();
        write_json(o.report, rep);
        std::cerr << "error: " << e.what() << " (use --adaptive or a smaller --tau)\n";
        return kInvariant;
    }

    Raster out;
    out.bit_depth = input.bit_depth;
    for (const auto& r : runs) out.channels.push_back(from_positive(r.u, mode));
    rep["result"] = aggregate(runs, !o.no_timing);
    if (truth) {
        json s = json::array();
        SsimOptions so;
        so.dynamic_range = input.max_value();
        for (std::size_t c = 0; c < out.channels.size(); ++c)
            s.push_back(ssim(out.channels[c], truth->channels.at(std::min(c, truth->channels.size() - 1)), so));
        rep["ssim"] = s;
    }
    if (!o.output.empty()) write_raster(o.output, out);
    write_json(o.report, rep);
    const auto& res = rep["result"];
    std::cout << name << ": " << res["steps"] << " steps, mass drift " << res["mass_drift_relative"].get<double>()
              << ", final change " << res["final_relative_change"].get<double>();
    if (truth) std::cout << ", ssim " << rep["ssim"].dump();
    std::cout << '\n';
    if (!res["converged"].get<bool>()) std::cerr << "warning: step limit reached before tolerance\n";
    return kOk;
}

std::optional<Raster> optional_truth(const RunOptions& o, const Raster& input) {
    if (o.reference.empty()) return std::nullopt;
    Raster r = load(o.reference, "reference image");
    require_shape(r, input, "reference");
    return r;
}

int cmd_filter(const RunOptions& o) {
    const Raster input = load(o.input, "input image");
    const Raster ref = load(o.reference, "reference image (--reference)");
    require_shape(ref, input, "reference");
    const std::vector<Image> vs = positive_channels(ref, positivity(o));
    const SchemeConfig cfg = scheme_config(o);
    const SolverConfig scfg = solver_config(o);
    if (!o.dump_drift.empty()) write_drift(o.dump_drift, canonical_drift(vs.front()));
    return run_pipeline("filter", o, input,
                        [&](std::size_t c, const Image& f) {
                            return filter(f, vs.at(std::min(c, vs.size() - 1)), cfg, scfg);
                        },
                        std::nullopt);
}

int cmd_shadow(const std::string& name, const RunOptions& o) {
    const Raster input = load(o.input, "input image");
    const Raster mraster = load(o.mask, "mask (--mask)");
    require_shape(mraster, input, "mask");
    const Mask band = mask_from_raster(mraster);
    const SchemeConfig cfg = scheme_config(o);
    const SolverConfig scfg = solver_config(o);
    if (!o.dump_drift.empty())
        write_drift(o.dump_drift, shadow_drift(to_positive(input.channels[0], positivity(o), input.max_value()), band));
    json extra;
    extra["mask_pixels"] = band.count();
    return run_pipeline(name, o, input,
                        [&](std::size_t, const Image& f) { return shadow_remove(f, band, cfg, scfg); },
                        optional_truth(o, input), extra);
}

int cmd_cdr(const RunOptions& o) {
    const Raster input = load(o.input, "reference image");
    const std::vector<Image> vs = positive_channels(input, positivity(o));
    Mask edges;
    if (!o.mask.empty()) {
        const Raster m = load(o.mask, "edge mask");
        require_shape(m, input, "edge mask");
        edges = mask_from_raster(m);
    } else {
        edges = edge_mask(vs.front(), o.edge_threshold, o.edge_dilate);
    }
    const SchemeConfig cfg = scheme_config(o);
    const SolverConfig scfg = solver_config(o);
    if (!o.dump_drift.empty()) write_drift(o.dump_drift, cdr_drift(vs.front(), edges));
    json extra;
    extra["mask_pixels"] = edges.count();
    return run_pipeline("cdr", o, input,
                        [&](std::size_t c, const Image&) { return cdr(vs[c], edges, cfg, scfg); },
                        input, extra);
}

struct SynthOptions {
    std::string kind = "shadow";
    std::string spec;
    std::string output;
    std::string mask_out;
    std::string truth_out;
    std::string input;
    std::string size = "64x64";
    std::vector<std::size_t> rect;
    double c = 0.4;
    double sigma = 0.0;
    std::size_t mask_width = kThinMaskWidth;
    std::uint64_t seed = 1;
    int bit_depth = 8;
};

std::pair<std::size_t, std::size_t> parse_size(const std::string& s) {
    const auto x = s.find('x');
    try {
        if (x == std::string::npos) throw std::invalid_argument(s);
        return {std::stoul(s.substr(0, x)), std::stoul(s.substr(x + 1))};
    } catch (const std::exception&) {
        throw UsageError("size must look like ROWSxCOLS, got '" + s + "'");
    }
}

Raster single(const Image& img, int depth) {
    Raster r;
    r.bit_depth = depth;
    r.channels.push_back(img);
    return r;
}

int cmd_synth(const SynthOptions& o, const CLI::App& app) {
    if (o.output.empty()) throw UsageError("synth needs -o/--output");
    Image truth;
    if (!o.input.empty()) {
        Raster in = load(o.input, "input image");
        truth = in.channels.front();
    } else {
        const auto [rows, cols] = parse_size(o.size);
        const auto g = make_grid(rows, cols);
        truth = o.kind == "cartoon" ? cartoon_image(g) : textured_image(g, o.seed);
    }
    if (o.kind == "texture" || o.kind == "cartoon") {
        write_raster(o.output, single(truth, o.bit_depth));
        std::cout << "synth: wrote " << o.output << '\n';
        return kOk;
    }
    ShadowSpec spec;
    if (!o.spec.empty()) {
        std::ifstream in(o.spec);
        if (!in) throw UsageError("cannot open spec " + o.spec);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw UsageError(std::string("spec is not valid JSON: ") + e.what());
        }
        spec = shadow_spec_from_json(j);
    } else {
        const GridSpec& g = truth.grid();
        spec.rect = Rect{g.rows * 3 / 8, g.cols * 3 / 8, g.rows * 5 / 8, g.cols * 5 / 8};
        spec.c = o.kind == "light" ? 1.8 : 0.4;
    }
    if (o.rect.size() == 4) spec.rect = Rect{o.rect[0], o.rect[1], o.rect[2], o.rect[3]};
    else if (!o.rect.empty()) throw UsageError("--rect needs 4 values: row0 col0 row1 col1");
    if (app.count("--c")) spec.c = o.c;
    if (app.count("--sigma")) spec.sigma = o.sigma;
    if (app.count("--mask-width")) spec.mask_width = o.mask_width;
    // light spots brighten; keep 8-bit head-room by scaling the truth down
    const double maxv = o.bit_depth == 16 ? 65535.0 : 255.0;
    Image base = truth;
    if (spec.c > 1.0)
        for (double& x : base.values()) x /= spec.c;
    for (double& x : base.values()) x = std::max(x, 1.0);
    const auto sh = make_shadowed(base, spec);
    Image corrupted = sh.image;
    for (double& x : corrupted.values()) x = std::min(x, maxv);
    write_raster(o.output, single(corrupted, o.bit_depth));
    if (!o.mask_out.empty()) write_raster(o.mask_out, mask_to_raster(sh.mask));
    if (!o.truth_out.empty()) write_raster(o.truth_out, single(base, o.bit_depth));
    std::cout << "synth: wrote " << o.output << " (mask " << sh.mask.count() << " px)\n";
    return kOk;
}

struct VerifyOptions {
    std::uint64_t seed = 2024;
    std::string grid;
    bool dense = false;
    bool corrupt = false;
    std::size_t instances = 40;
    std::string export_coo;
};

struct Check {
    std::string name;
    bool pass = true;
    std::string detail;
};

std::string num(double x) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3e", x);
    return b;
}

int cmd_verify(const VerifyOptions& o) {
    std::vector<Check> checks;
    SplitMix64 rng(o.seed);
    const bool have_grid = !o.grid.empty();
    std::size_t grid_rows = 0, grid_cols = 0;
    if (have_grid) std::tie(grid_rows, grid_cols) = parse_size(o.grid);

    Check structure{"operator structure", true, ""}, annihilate{"A v = 0 (canonical drift)", true, ""},
        expl{"explicit step mass/sign at bound", true, ""}, semi{"semi-implicit mass/sign", true, ""},
        fixed{"reference is a fixed point", true, ""};
    double worst_av = 0, worst_mass_e = 0, worst_mass_s = 0, worst_fp = 0;
    for (std::size_t k = 0; k < o.instances; ++k) {
        const std::size_t rows = have_grid ? grid_rows : 2 + rng.next() % 15;
        const std::size_t cols = have_grid ? grid_cols : 2 + rng.next() % 15;
        const auto g = make_grid(rows, cols);
        const Image v = random_positive_image(g, rng, 1.0, 255.0);
        const Image u = random_positive_image(g, rng, 1.0, 255.0);
        Mask m(g);
        for (std::size_t p = 0; p < g.size(); ++p) m.set(p, rng.uniform() < 0.3);
        const int variant = static_cast<int>(k % 3);
        const DriftField d = variant == 0 ? canonical_drift(v)
                             : variant == 1 ? shadow_drift(v, m)
                                            : cdr_drift(v, m);
        StencilOperator op = assemble(pointwise_g(u, v, {}, &d), d, g);
        if (o.corrupt && k == o.instances / 2) {
            const std::size_t p = g.index(rows / 2, cols / 2 > 0 ? cols / 2 - 1 : 0);
            op.set(p, StencilOperator::Band::East, -std::abs(op.coefficient(p, Direction::East)) - 1.0);
        }
        if (k == 0 && !o.export_coo.empty()) {
            std::ofstream out(o.export_coo);
            export_coo(out, op);
        }
        const auto r = verify_structure(op);
        if (!r.ok() && structure.pass) {
            structure.pass = false;
            std::ostringstream s;
            s << "instance " << k << " (" << rows << "x" << cols << ")";
            if (!r.nonnegative_offdiagonal)
                s << ": negative off-diagonal a(" << r.worst_offdiagonal_row << "," << r.worst_offdiagonal_col
                  << ") = " << num(r.worst_offdiagonal);
            if (!r.zero_column_sums) s << ": column " << r.worst_column << " sums to " << num(r.worst_column_sum);
            if (!r.negative_diagonal) s << ": diagonal row " << r.max_diagonal_row << " not negative";
            if (!r.irreducible) s << ": zero neighbor coupling";
            structure.detail = s.str();
        }
        const double m0 = total_mass(u.values());
        if (variant == 0) {
            const Image av = apply(op, v);
            double a = 0, vm = 0;
            for (std::size_t p = 0; p < g.size(); ++p) {
                a = std::max(a, std::abs(av[p]));
                vm = std::max(vm, v[p]);
            }
            worst_av = std::max(worst_av, a / (vm * op.max_abs_entry()));
            const auto st = semi_implicit_step(v, op, 1e3, SolverConfig{});
            double e = 0, n = 0;
            for (std::size_t p = 0; p < g.size(); ++p) {
                e += (st.u[p] - v[p]) * (st.u[p] - v[p]);
                n += v[p] * v[p];
            }
            worst_fp = std::max(worst_fp, std::sqrt(e / n));
        }
        if (r.ok()) {
            const Image e = explicit_step(u, op, explicit_stability_bound(op));
            worst_mass_e = std::max(worst_mass_e, std::abs(total_mass(e.values()) - m0) / m0);
            if (*std::min_element(e.values().begin(), e.values().end()) < 0.0) expl.pass = false;
            const auto st = semi_implicit_step(u, op, 1e3, SolverConfig{});
            worst_mass_s = std::max(worst_mass_s, std::abs(total_mass(st.u.values()) - m0) / m0);
            if (st.quality_warning) semi.pass = false;
        }
    }
    annihilate.pass = worst_av <= 1e-12;
    annihilate.detail = "max |Av| / (|v| |A|) " + num(worst_av);
    expl.pass = expl.pass && worst_mass_e <= 1e-12;
    expl.detail = "max mass drift " + num(worst_mass_e);
    semi.pass = semi.pass && worst_mass_s <= 1e-7;
    semi.detail = "max mass drift " + num(worst_mass_s);
    fixed.pass = worst_fp <= 1e-8;
    fixed.detail = "max relative deviation " + num(worst_fp);
    if (structure.pass) structure.detail = std::to_string(o.instances) + " instances";
    checks = {structure, annihilate, expl, semi, fixed};

    if (o.dense || !have_grid) {
        const std::size_t rows = have_grid ? grid_rows : 3, cols = have_grid ? grid_cols : 3;
        const auto g = make_grid(rows, cols);
        const Image v = random_positive_image(g, rng, 1.0, 255.0);
        const Image u = random_positive_image(g, rng, 1.0, 255.0);
        const auto d = canonical_drift(v);
        StencilOperator op = assemble(pointwise_g(u, v, {}, &d), d, g);
        if (o.corrupt) op.set(0, StencilOperator::Band::Center, op.center(0) * 1.5);
        const auto rep = dense_spectrum(op, 1e3, Scheme::SemiImplicit, &v);
        Check spec{"dense spectrum (semi-implicit, tau=1e3)", rep.stable() && rep.eigenvector_positive &&
                                                             rep.cosine_with_reference >= 1.0 - 1e-10,
                   ""};
        spec.detail = "simple unit eigenvalue " + std::string(rep.unit_simple() ? "yes" : "no") +
                      ", max|other| " + num(rep.max_other_modulus);
        checks.push_back(spec);
        if (o.dense) {
            std::cout << "dense spectrum of P = (I - tau A)^-1 on " << rows << "x" << cols << ", tau = 1e3\n";
            std::cout << "  unit eigenvalues: " << rep.unit_eigenvalues << " (|lambda - 1| <= " << rep.unit_tol
                      << ")\n";
            std::cout << "  max |lambda| over the rest: " << rep.max_other_modulus << '\n';
            std::cout << "  unit eigenvector positive: " << (rep.eigenvector_positive ? "yes" : "no") << '\n';
            std::cout << "  cosine with v: " << std::setprecision(16) << rep.cosine_with_reference
                      << std::setprecision(6) << '\n';
            std::cout << "  min entry of P: " << rep.min_entry << ", max column-sum error "
                      << rep.max_column_sum_error << '\n';
            std::cout << "  eigenvalues:";
            for (const auto& l : rep.eigenvalues) std::cout << ' ' << l.real() << (l.imag() >= 0 ? "+" : "") << l.imag() << 'i';
            std::cout << '\n';
        }
    }

    int failed = 0;
    for (const auto& c : checks) {
        std::printf("%-44s %s  %s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL", c.detail.c_str());
        if (!c.pass) ++failed;
    }
    if (failed) std::printf("%d invariant check(s) failed\n", failed);
    return failed ? kInvariant : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlinear osmosis filtering: shadow and light-spot removal, compact data representation"};
    app.require_subcommand(1);

    RunOptions fo, so, lo, co;
    auto* filter_cmd = app.add_subcommand("filter", "evolve an image towards a rescaled reference");
    filter_cmd->add_option("input", fo.input, "initial image f")->required();
    filter_cmd->add_option("-o,--output", fo.output, "output image");
    filter_cmd->add_option("--reference", fo.reference, "reference image v")->required();
    add_scheme_options(filter_cmd, fo);

    auto add_removal = [&](const char* name, const char* help, RunOptions& o) {
        auto* cmd = app.add_subcommand(name, help);
        cmd->add_option("input", o.input, "corrupted image")->required();
        cmd->add_option("-o,--output", o.output, "output image");
        cmd->add_option("--mask", o.mask, "boundary mask image (0 = band)");
        cmd->add_option("--reference", o.reference, "ground truth for SSIM");
        add_scheme_options(cmd, o);
        return cmd;
    };
    auto* shadow_cmd = add_removal("shadow-remove", "remove a shadow given its boundary mask", so);
    auto* light_cmd = add_removal("light-remove", "remove a light spot given its boundary mask", lo);

    auto* cdr_cmd = app.add_subcommand("cdr", "reconstruct an image from drift on its edge set");
    cdr_cmd->add_option("input", co.input, "reference image v")->required();
    cdr_cmd->add_option("-o,--output", co.output, "reconstruction");
    cdr_cmd->add_option("--mask", co.mask, "edge mask image (0 = edge); default: gradient threshold");
    cdr_cmd->add_option("--edge-threshold", co.edge_threshold, "gradient threshold as a fraction of the range")
        ->capture_default_str();
    cdr_cmd->add_option("--edge-dilate", co.edge_dilate, "dilate the threshold mask")->capture_default_str();
    add_scheme_options(cdr_cmd, co);

    SynthOptions sy;
    auto* synth_cmd = app.add_subcommand("synth", "generate synthetic test data");
    synth_cmd->add_option("--kind", sy.kind, "shadow | light | texture | cartoon")
        ->check(CLI::IsMember({"shadow", "light", "texture", "cartoon"}))
        ->capture_default_str();
    synth_cmd->add_option("-o,--output", sy.output, "output image");
    synth_cmd->add_option("--mask-out", sy.mask_out, "boundary mask output");
    synth_cmd->add_option("--truth-out", sy.truth_out, "ground truth output");
    synth_cmd->add_option("--input", sy.input, "use this ground truth instead of a generated texture");
    synth_cmd->add_option("--spec", sy.spec, "JSON shadow/light spec");
    synth_cmd->add_option("--size", sy.size, "ROWSxCOLS")->capture_default_str();
    synth_cmd->add_option("--rect", sy.rect, "row0 col0 row1 col1")->expected(4);
    synth_cmd->add_option("--c", sy.c, "attenuation (< 1 shadow, > 1 light)");
    synth_cmd->add_option("--sigma", sy.sigma, "penumbra blur");
    synth_cmd->add_option("--mask-width", sy.mask_width, "boundary band width (2 thin, 6 wide)");
    synth_cmd->add_option("--seed", sy.seed, "texture seed")->capture_default_str();
    synth_cmd->add_option("--bit-depth", sy.bit_depth, "8 or 16")->check(CLI::IsMember({8, 16}))->capture_default_str();

    VerifyOptions vo;
    auto* verify_cmd = app.add_subcommand("verify", "check operator, stepper and spectral invariants");
    verify_cmd->add_option("--seed", vo.seed, "random seed")->capture_default_str();
    verify_cmd->add_option("--grid", vo.grid, "fix the grid size, ROWSxCOLS");
    verify_cmd->add_option("--instances", vo.instances, "random instances")->capture_default_str();
    verify_cmd->add_flag("--dense-spectrum", vo.dense, "print the dense eigenvalue report");
    verify_cmd->add_flag("--corrupt", vo.corrupt, "inject a fault to exercise the checks");
    verify_cmd->add_option("--export-coo", vo.export_coo, "write the first operator as row col value text");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*filter_cmd) return cmd_filter(fo);
        if (*shadow_cmd) return cmd_shadow("shadow-remove", so);
        if (*light_cmd) return cmd_shadow("light-remove", lo);
        if (*cdr_cmd) return cmd_cdr(co);
        if (*synth_cmd) return cmd_synth(sy, *synth_cmd);
        if (*verify_cmd) {
            if (vo.dense && vo.grid.empty()) vo.grid = "3x3";
            if (!vo.grid.empty()) {
                const auto [r, c] = parse_size(vo.grid);
                if (vo.dense && r * c > kDenseSpectrumMaxPixels)
                    throw UsageError("--dense-spectrum supports at most " +
                                     std::to_string(kDenseSpectrumMaxPixels) + " pixels");
            }
            return cmd_verify(vo);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConvergence;
    } catch (const StabilityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvariant;
    }
    return kUsage;
}
