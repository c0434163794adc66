#include "wkb/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "wkb/continuation.hpp"
#include "wkb/io.hpp"

namespace wkb {

namespace {

int exit_code_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::Parse: return 2;
        case ErrorKind::AssumptionViolation:
        case ErrorKind::NonTransversal: return 3;
        case ErrorKind::InvariantFailure: return 4;
        default: return 1;
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw WkbError(ErrorKind::Parse, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Config-file values; keys follow the RunConfig field names.
void apply_config(RunConfig& cfg, const json& j) {
    if (!j.is_object()) throw WkbError(ErrorKind::Parse, "config must be a JSON object");
    auto str = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        const json& v = it.value();
        try {
            if (k == "potential") {
                if (v.is_array()) {
                    std::string s;
                    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + str(v[i]);
                    cfg.potential = s;
                } else {
                    cfg.potential = str(v);
                }
            } else if (k == "alpha") cfg.alpha = str(v);
            else if (k == "x0") cfg.x0 = str(v);
            else if (k == "x_eval") cfg.x_eval = str(v);
            else if (k == "depth") cfg.depth = v.get<int>();
            else if (k == "window") cfg.window = v.get<std::array<double, 4>>();
            else if (k == "step") cfg.step = v.get<double>();
            else if (k == "escape_radius") cfg.escape_radius = v.get<double>();
            else if (k == "max_steps") cfg.max_steps = v.get<int>();
            else if (k == "tolerances") {
                if (v.contains("tol")) cfg.tol = v["tol"].get<double>();
                if (v.contains("quad_tol")) cfg.quad_tol = v["quad_tol"].get<double>();
            } else if (k == "output") cfg.output = v.get<std::string>();
            else if (k == "format") cfg.format = v.get<std::string>();
            else if (k == "force") cfg.force = v.get<bool>();
            else if (k == "u_center") cfg.u_center = str(v);
            else if (k == "u_radius") cfg.u_radius = v.get<double>();
            else if (k == "synthetic") cfg.synthetic = v.get<std::string>();
            else throw WkbError(ErrorKind::Parse, "unknown config key '" + k + "'");
        } catch (const json::exception& e) {
            throw WkbError(ErrorKind::Parse, "config key '" + k + "': " + e.what());
        }
    }
}

void validate(const RunConfig& cfg) {
    if (cfg.depth < 0) throw WkbError(ErrorKind::Parse, "depth must be non-negative");
    if (cfg.window) {
        const auto& w = *cfg.window;
        if (!(w[1] > w[0] && w[3] > w[2])) throw WkbError(ErrorKind::Parse, "window must satisfy xmin < xmax, ymin < ymax");
    }
    if (cfg.format != "json" && cfg.format != "svg" && cfg.format != "both")
        throw WkbError(ErrorKind::Parse, "format must be json, svg or both");
    if (cfg.format == "both" && cfg.output.empty())
        throw WkbError(ErrorKind::Parse, "--format both needs --out");
    if (!cfg.u_center.empty() && !(cfg.u_radius > 0))
        throw WkbError(ErrorKind::Parse, "--u-center needs a positive --u-radius");
    if (!(cfg.step > 0) || !(cfg.tol > 0) || !(cfg.quad_tol > 0) || cfg.escape_radius < 0 || cfg.max_steps < 1)
        throw WkbError(ErrorKind::Parse, "trace settings must be positive");
}

double parse_real(const std::string& s, const std::string& what) {
    cd z = parse_complex(s);
    if (z.imag() != 0.0) throw WkbError(ErrorKind::Parse, what + " must be real");
    return z.real();
}

/// A base point away from the turning points and from both curve families.
cd auto_base_point(const StokesGeometry& geom) {
    double scale = 1.0;
    for (const auto& t : geom.turning_points) scale = std::max(scale, 1.0 + std::abs(t.location));
    cd best = cd(0.5, 0.5) * scale;
    double best_clear = -1.0;
    for (double rf : {0.5, 1.0, 1.5}) {
        for (int k = 0; k < 16; ++k) {
            cd x = std::polar(rf * scale, 0.1 + 2.0 * kPi * k / 16.0);
            double clear = std::numeric_limits<double>::infinity();
            for (const auto& t : geom.turning_points) clear = std::min(clear, std::abs(x - t.location));
            for (Family f : {Family::PlusAlpha, Family::MinusAlpha})
                for (const auto& c : geom.curves(f))
                    for (cd y : c.samples) clear = std::min(clear, std::abs(x - y));
            if (clear > best_clear + 1e-12) {
                best_clear = clear;
                best = x;
            }
        }
    }
    return best;
}

/// Everything loaded for one run: a traced potential, a flat model or an explicit complex.
struct Inputs {
    std::optional<StokesGeometry> geom;
    Window window;
    cd x0 = 0.0, x_eval = 0.0;
    std::unique_ptr<NumericCover> cover;
    std::optional<FlatModel> flat;
    std::optional<SyntheticInput> syn;
    double alpha = 0.0;
};

Inputs load_inputs(const RunConfig& cfg, bool need_cover) {
    Inputs in;
    if (!cfg.synthetic.empty()) {
        std::string text = read_file(cfg.synthetic);
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw WkbError(ErrorKind::Parse, e.what());
        }
        if (j.is_object() && j.contains("punctures")) {
            // Flat model: C minus the listed punctures, z the identity.
            std::vector<cd> pts;
            try {
                in.alpha = parse_real(j.at("alpha").is_string() ? j.at("alpha").get<std::string>() : j.at("alpha").dump(), "alpha");
                for (const auto& p : j.at("punctures")) pts.push_back(parse_complex(p.get<std::string>()));
                in.x0 = parse_complex(j.value("x0", cfg.x0 == "auto" ? std::string("0") : cfg.x0));
                std::string xe = j.value("x_eval", cfg.x_eval);
                in.x_eval = xe.empty() ? in.x0 : parse_complex(xe);
            } catch (const json::exception& e) {
                throw WkbError(ErrorKind::Parse, e.what());
            }
            if (!(in.alpha > 0 && in.alpha < kPi / 2)) throw WkbError(ErrorKind::Parse, "alpha must lie in (0, pi/2)");
            in.flat.emplace(in.alpha, pts, in.x0);
        } else {
            in.syn = load_synthetic(text);
            in.alpha = in.syn->alpha;
        }
        return in;
    }
    if (cfg.potential.empty()) throw WkbError(ErrorKind::Parse, "no potential given");
    Polynomial V = Polynomial::parse(cfg.potential);
    TraceConfig tc;
    tc.step = cfg.step;
    tc.escape_radius = cfg.escape_radius;
    tc.max_steps = cfg.max_steps;
    tc.tol = cfg.tol;
    tc.quad_tol = cfg.quad_tol;
    if (cfg.alpha == "auto") {
        in.alpha = suggest_alpha(V, 16, tc);
    } else {
        in.alpha = parse_real(cfg.alpha, "alpha");
        if (!(in.alpha >= 0 && in.alpha < kPi / 2)) throw WkbError(ErrorKind::Parse, "alpha must lie in [0, pi/2)");
    }
    in.geom = trace_geometry(V, in.alpha, tc);
    in.window = cfg.window ? Window{(*cfg.window)[0], (*cfg.window)[1], (*cfg.window)[2], (*cfg.window)[3]}
                           : default_window(in.geom->turning_points);
    AssumptionReport rep = check_assumptions(*in.geom, in.window);
    in.geom->assumptions_ok = rep.ok || cfg.force;
    in.geom->violations = rep.violations;
    in.x0 = cfg.x0 == "auto" ? auto_base_point(*in.geom) : parse_complex(cfg.x0);
    in.x_eval = cfg.x_eval.empty() ? in.x0 : parse_complex(cfg.x_eval);
    if (need_cover) {
        if (!in.geom->assumptions_ok) {
            std::string msg = "standing assumptions fail";
            for (const auto& v : in.geom->violations) msg += "; " + v;
            throw WkbError(ErrorKind::AssumptionViolation, msg);
        }
        in.cover = std::make_unique<NumericCover>(*in.geom, in.x0);
    }
    return in;
}

std::shared_ptr<Pipeline> pipeline_for(const Inputs& in, int depth) {
    if (in.cover) return make_pipeline(*in.cover, in.x_eval, depth);
    if (in.flat) return make_pipeline(*in.flat, in.x_eval, depth);
    if (!in.syn->plus || !in.syn->minus)
        throw WkbError(ErrorKind::Parse, "synthetic input needs both families for this command");
    return make_pipeline(*in.syn, depth);
}

struct Emitter {
    const RunConfig& cfg;
    std::ostream& out;

    void write(const std::string& name, const std::string& json_text, const std::string& svg_text) const {
        bool want_json = cfg.format != "svg", want_svg = cfg.format != "json";
        if (cfg.output.empty()) {
            out << (want_json ? json_text : svg_text);
            return;
        }
        std::filesystem::create_directories(cfg.output);
        auto put = [&](const std::string& file, const std::string& text) {
            std::ofstream f(std::filesystem::path(cfg.output) / file, std::ios::binary);
            if (!f) throw WkbError(ErrorKind::Parse, "cannot write into '" + cfg.output + "'");
            f << text;
        };
        if (want_json) put(name + ".json", json_text);
        if (want_svg) put(name + ".svg", svg_text);
    }
};

// ---------------------------------------------------------------------------------------------

int cmd_geometry(const RunConfig& cfg, const Emitter& em) {
    Inputs in = load_inputs(cfg, false);
    json doc;
    std::string svg;
    if (in.geom) {
        std::optional<StripComplex> plus, minus;
        if (in.geom->assumptions_ok) {
            in.cover = std::make_unique<NumericCover>(*in.geom, in.x0);
            plus = in.cover->build(Family::PlusAlpha, cfg.depth);
            minus = in.cover->build(Family::MinusAlpha, cfg.depth);
        }
        doc = geometry_json(*in.geom, plus ? &*plus : nullptr, minus ? &*minus : nullptr);
        doc["x0"] = complex_json(in.x0);
        svg = geometry_svg(*in.geom, in.window);
    } else {
        StokesGeometry empty;
        empty.alpha = in.alpha;
        std::optional<StripComplex> plus, minus;
        if (in.flat) {
            plus = in.flat->build(Family::PlusAlpha, cfg.depth);
            minus = in.flat->build(Family::MinusAlpha, cfg.depth);
        } else {
            plus = in.syn->plus;
            minus = in.syn->minus;
        }
        doc = geometry_json(empty, plus ? &*plus : nullptr, minus ? &*minus : nullptr);
        Window w;
        if (in.flat) {
            std::vector<TurningPoint> tps;
            for (cd p : in.flat->punctures()) tps.push_back({p, 1});
            w = default_window(tps);
        }
        svg = geometry_svg(empty, w);
    }
    em.write("geometry", dump_json(doc), svg);
    return 0;
}

int cmd_words(const RunConfig& cfg, const Emitter& em) {
    Inputs in = load_inputs(cfg, true);
    std::vector<StripComplex> cxs;
    cd z_x0 = 0.0;
    if (in.cover) {
        cxs.push_back(in.cover->build(Family::PlusAlpha, cfg.depth));
        cxs.push_back(in.cover->build(Family::MinusAlpha, cfg.depth));
        z_x0 = in.cover->z_x0();
    } else if (in.flat) {
        cxs.push_back(in.flat->build(Family::PlusAlpha, cfg.depth));
        cxs.push_back(in.flat->build(Family::MinusAlpha, cfg.depth));
        z_x0 = in.x0;
    } else {
        if (in.syn->plus) cxs.push_back(*in.syn->plus);
        if (in.syn->minus) cxs.push_back(*in.syn->minus);
        z_x0 = in.syn->z_x0;
    }
    json words = json::array();
    for (const auto& cx : cxs) {
        json part = words_json(all_words(cx, cfg.depth), cx, z_x0);
        for (const auto& w : part["words"]) words.push_back(w);
    }
    json doc = {{"alpha", in.alpha}, {"depth", cfg.depth}, {"z_x0", complex_json(z_x0)}, {"words", words}};
    em.write("words", dump_json(doc), "");
    return 0;
}

int cmd_singularities(const RunConfig& cfg, const Emitter& em) {
    Inputs in = load_inputs(cfg, true);
    auto p = pipeline_for(in, cfg.depth);
    ContinuationOptions opt;
    if (!cfg.u_center.empty()) opt.U = Parallelogram{p->alpha, to_k(parse_complex(cfg.u_center), p->alpha), cfg.u_radius};
    ContinuationReport rep = compute_singularities(*p, opt);
    json doc = report_json(rep);
    Window w = in.window;
    if (in.flat) {
        std::vector<TurningPoint> tps;
        for (cd q : in.flat->punctures()) tps.push_back({q, 1});
        w = default_window(tps);
    }
    em.write("report", dump_json(doc), report_svg(in.geom ? &*in.geom : nullptr, w, rep));
    return 0;
}

// ---------------------------------------------------------------------------------------------

struct CheckTable {
    struct Row {
        std::string name, status, detail;
    };
    std::vector<Row> rows;
    bool failed = false;

    void add(const std::string& name, bool pass, const std::string& detail = "") {
        rows.push_back({name, pass ? "PASS" : "FAIL", detail});
        failed = failed || !pass;
    }
    void info(const std::string& name, const std::string& detail) { rows.push_back({name, "INFO", detail}); }
    void print(std::ostream& out) const {
        for (const auto& r : rows) {
            out << std::left << std::setw(34) << r.name << std::setw(6) << r.status;
            if (!r.detail.empty()) out << r.detail;
            out << "\n";
        }
    }
};

/// Gamma across every interior ray followed by Gamma back, on all words of length <= 1.
int involution_failures(const StripComplex& cx) {
    std::vector<Word> words = all_words(cx, 1);
    int fails = 0;
    for (const auto& r : cx.rays) {
        if (r.frontier()) continue;
        GluingMap there = gluing_map(cx, r.strips[0], r.strips[1], r.id);
        GluingMap back = gluing_map(cx, r.strips[1], r.strips[0], r.id);
        for (const auto& w : words) {
            Column c{{w, 1}};
            if (back.apply(there.apply(c)) != c) ++fails;
        }
    }
    return fails;
}

void check_complex(CheckTable& t, const StripComplex& cx) {
    std::string fam = family_name(cx.family);
    bool tree = is_tree(cx);
    t.add("tree (" + fam + ")", tree,
          std::to_string(cx.strips.size()) + " strips, " + std::to_string(cx.rays.size()) + " rays");
    if (!tree) return;
    auto diag = verify_complex(cx);
    t.add("strip invariants (" + fam + ")", diag.empty(), diag.empty() ? "" : diag.front());
    int inv = involution_failures(cx);
    t.add("gluing involution (" + fam + ")", inv == 0, std::to_string(inv) + " failures");
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
    CheckTable t;
    Inputs in = load_inputs(cfg, false);
    if (in.geom) {
        bool ok = in.geom->assumptions_ok;
        t.add("standing assumptions", ok,
              std::to_string(in.geom->turning_points.size()) + " turning points, " +
                  std::to_string(in.geom->curves_plus.size()) + "+" + std::to_string(in.geom->curves_minus.size()) +
                  " curves");
        for (const auto& v : in.geom->violations) t.info("  violation", v);
        if (!ok) {
            t.print(out);
            return 3;
        }
        in.cover = std::make_unique<NumericCover>(*in.geom, in.x0);
    }

    std::shared_ptr<Pipeline> p;
    if (in.syn) {
        bool trees = true;
        for (const auto* cx : {in.syn->plus ? &*in.syn->plus : nullptr, in.syn->minus ? &*in.syn->minus : nullptr}) {
            if (!cx) continue;
            check_complex(t, *cx);
            trees = trees && is_tree(*cx);
        }
        if (trees && in.syn->plus && in.syn->minus) p = make_pipeline(*in.syn, cfg.depth);
    } else {
        p = pipeline_for(in, cfg.depth);
        check_complex(t, p->plus);
        check_complex(t, p->minus);
    }

    if (p && !t.failed) {
        IPsiPhi ip(p->plus, p->minus, p->cells, p->z_x0, p->depth);
        // The transfer-matrix scan grows quickly with word length; it is capped at three letters here.
        int len = std::min(p->depth, 3);
        IpipReport r = check_ipip(ip, p->cells, all_words(p->minus, len));
        std::string counts = std::to_string(r.cells_checked) + " cells, " + std::to_string(r.words_checked) +
                             " words of length <= " + std::to_string(len);
        t.add("transfer diagonal = +1", r.diagonal_not_unit == 0,
              std::to_string(r.diagonal_not_unit) + " deviations over " + counts);
        t.add("strict off-diagonal inclusion", r.strictness_failures == 0,
              std::to_string(r.strictness_failures) + " failures");
        t.add("transfer consistency", r.transfer_mismatches == 0, std::to_string(r.transfer_mismatches) + " mismatches");
        t.info("diagonal = (-1)^|w|", std::to_string(r.diagonal_failures) + " words differ (printed sign law)");
        if (r.partial) t.info("truncation", "some entries depend on strips beyond the built depth");
        for (const auto& c : p->caveats) t.info("caveat", c);
    }
    t.print(out);
    return t.failed ? 4 : 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stokes geometry and Borel-plane singularities of WKB solutions"};
    RunConfig fl;
    std::string config_path;
    std::vector<double> window;
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> flags;
    auto opt = [&](CLI::Option* o, std::function<void(RunConfig&)> copy) { flags.emplace_back(o, std::move(copy)); };

    app.add_option("command", fl.command, "geometry | words | singularities | check")
        ->required()
        ->check(CLI::IsMember({"geometry", "words", "singularities", "check"}));
    opt(app.add_option("--potential", fl.potential, "coefficients in ascending degree, e.g. \"-1,0,1\""),
        [&](RunConfig& c) { c.potential = fl.potential; });
    opt(app.add_option("--alpha", fl.alpha, "angle in (0, pi/2) or auto"), [&](RunConfig& c) { c.alpha = fl.alpha; });
    opt(app.add_option("--x0", fl.x0, "base point or auto"), [&](RunConfig& c) { c.x0 = fl.x0; });
    opt(app.add_option("--x-eval", fl.x_eval, "evaluation point (default x0)"),
        [&](RunConfig& c) { c.x_eval = fl.x_eval; });
    opt(app.add_option("--depth", fl.depth, "word length and strip depth"), [&](RunConfig& c) { c.depth = fl.depth; });
    opt(app.add_option("--window", window, "xmin xmax ymin ymax")->expected(4),
        [&](RunConfig& c) { c.window = std::array<double, 4>{window[0], window[1], window[2], window[3]}; });
    opt(app.add_option("--step", fl.step), [&](RunConfig& c) { c.step = fl.step; });
    opt(app.add_option("--escape-radius", fl.escape_radius), [&](RunConfig& c) { c.escape_radius = fl.escape_radius; });
    opt(app.add_option("--max-steps", fl.max_steps), [&](RunConfig& c) { c.max_steps = fl.max_steps; });
    opt(app.add_option("--tol", fl.tol), [&](RunConfig& c) { c.tol = fl.tol; });
    opt(app.add_option("--quad-tol", fl.quad_tol), [&](RunConfig& c) { c.quad_tol = fl.quad_tol; });
    opt(app.add_option("--out", fl.output, "output directory"), [&](RunConfig& c) { c.output = fl.output; });
    opt(app.add_option("--format", fl.format, "json | svg | both"), [&](RunConfig& c) { c.format = fl.format; });
    opt(app.add_flag("--force", fl.force, "continue past failed assumption checks"),
        [&](RunConfig& c) { c.force = fl.force; });
    opt(app.add_option("--u-center", fl.u_center, "centre of the base parallelogram (s-plane)"),
        [&](RunConfig& c) { c.u_center = fl.u_center; });
    opt(app.add_option("--u-radius", fl.u_radius, "half-side of the base parallelogram in cone coordinates"),
        [&](RunConfig& c) { c.u_radius = fl.u_radius; });
    opt(app.add_option("--synthetic", fl.synthetic, "synthetic complex or flat model (JSON)"),
        [&](RunConfig& c) { c.synthetic = fl.synthetic; });
    app.add_option("--config", config_path, "JSON config; flags override its values");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << error_json("parse", e.what()).dump() << "\n";
        return 2;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) {
            json j;
            try {
                j = json::parse(read_file(config_path));
            } catch (const json::exception& e) {
                throw WkbError(ErrorKind::Parse, e.what());
            }
            apply_config(cfg, j);
        }
        for (auto& [o, copy] : flags)
            if (o->count() > 0) copy(cfg);
        cfg.command = fl.command;
        validate(cfg);
        Emitter em{cfg, out};
        if (cfg.command == "geometry") return cmd_geometry(cfg, em);
        if (cfg.command == "words") return cmd_words(cfg, em);
        if (cfg.command == "singularities") return cmd_singularities(cfg, em);
        return cmd_check(cfg, out);
    } catch (const WkbError& e) {
        err << error_json(error_kind_name(e.kind()), e.what()).dump() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << error_json("internal", e.what()).dump() << "\n";
        return 1;
    }
}

}  // namespace wkb
