#include "wkb/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace wkb {

json round_floats(const json& j) {
    if (j.is_number_float()) {
        double x = j.get<double>();
        if (!std::isfinite(x)) return nullptr;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", x);
        double r = std::strtod(buf, nullptr);
        if (r == 0.0) r = 0.0;  // drop negative zero
        return r;
    }
    if (j.is_array()) {
        json out = json::array();
        for (const auto& e : j) out.push_back(round_floats(e));
        return out;
    }
    if (j.is_object()) {
        json out = json::object();
        for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = round_floats(it.value());
        return out;
    }
    return j;
}

std::string dump_json(const json& j) { return round_floats(j).dump(2) + "\n"; }

json complex_json(cd z) { return json::array({z.real(), z.imag()}); }

json word_json(const Word& w) {
    return {{"family", family_name(w.family)},
            {"letters", w.letters},
            {"terminal", w.terminal == Terminal::L ? "L" : "R"},
            {"text", w.str()}};
}

json complex_summary_json(const StripComplex& cx) {
    json strips = json::array(), rays = json::array();
    for (const auto& s : cx.strips) {
        json band = json::object();
        band["lo"] = s.band.lo ? json(*s.band.lo) : json(nullptr);
        band["hi"] = s.band.hi ? json(*s.band.hi) : json(nullptr);
        strips.push_back({{"id", s.id},
                          {"family", family_name(s.family)},
                          {"depth", s.depth},
                          {"region", s.region},
                          {"band", band},
                          {"rays", s.rays}});
    }
    for (const auto& r : cx.rays) {
        json ends = json::array({r.strips[0]});
        ends.push_back(r.strips[1] >= 0 ? json(r.strips[1]) : json(nullptr));
        rays.push_back({{"id", r.id},
                        {"family", family_name(r.family)},
                        {"c_hat", complex_json(r.c_hat)},
                        {"handedness", handedness_name(r.handedness)},
                        {"strips", ends},
                        {"curve", r.curve}});
    }
    return {{"family", family_name(cx.family)}, {"root", cx.root}, {"depth", cx.depth}, {"strips", strips}, {"rays", rays}};
}

json geometry_json(const StokesGeometry& geom, const StripComplex* plus, const StripComplex* minus) {
    json tps = json::array();
    for (const auto& t : geom.turning_points)
        tps.push_back({{"location", complex_json(t.location)}, {"multiplicity", t.multiplicity}});
    json curves = json::array();
    for (Family f : {Family::PlusAlpha, Family::MinusAlpha}) {
        for (const auto& c : geom.curves(f)) {
            std::size_t stride = std::max<std::size_t>(1, c.samples.size() / 200);
            json pts = json::array();
            for (std::size_t k = 0; k < c.samples.size(); k += stride) pts.push_back(complex_json(c.samples[k]));
            if (!c.samples.empty() && (c.samples.size() - 1) % stride != 0) pts.push_back(complex_json(c.samples.back()));
            json dir = c.asymptotic_direction ? json(*c.asymptotic_direction) : json(nullptr);
            curves.push_back({{"family", family_name(f)},
                              {"origin", c.origin},
                              {"branch_index", c.branch_index},
                              {"launch_angle", c.launch_angle},
                              {"terminus", c.terminus == Terminus::Infinity ? "infinity" : "turning_point"},
                              {"target", c.target},
                              {"asymptotic_direction", dir},
                              {"points", pts}});
        }
    }
    json strips = json::array(), rays = json::array();
    for (const StripComplex* cx : {plus, minus}) {
        if (!cx) continue;
        json s = complex_summary_json(*cx);
        for (auto& e : s["strips"]) strips.push_back(e);
        for (auto& e : s["rays"]) rays.push_back(e);
    }
    return {{"alpha", geom.alpha},
            {"potential", [&] {
                 json cs = json::array();
                 for (cd c : geom.potential.coeffs()) cs.push_back(complex_json(c));
                 return cs;
             }()},
            {"turning_points", tps},
            {"curves", curves},
            {"strips", strips},
            {"rays", rays},
            {"assumptions", {{"ok", geom.assumptions_ok}, {"violations", geom.violations}}}};
}

json words_json(const std::vector<Word>& words, const StripComplex& cx, cd z_x0) {
    json out = json::array();
    for (const auto& w : words) {
        json j = word_json(w);
        j["sign"] = word_sign(w, cx) == Sign::Plus ? "plus" : "minus";
        j["c_hat"] = complex_json(c_hat_word(w, cx, z_x0));
        j["length"] = w.length();
        out.push_back(j);
    }
    return {{"family", family_name(cx.family)}, {"z_x0", complex_json(z_x0)}, {"words", out}};
}

json report_json(const ContinuationReport& rep) {
    const Parallelogram& U = rep.base_U;
    json base = {{"A", complex_json(U.A())},
                 {"B", complex_json(U.B())},
                 {"C", complex_json(U.C())},
                 {"D", complex_json(U.D())},
                 {"center_k", json::array({U.center.u, U.center.v})},
                 {"radius_k", U.radius}};
    json apexes = json::array(), cuts = json::array();
    for (const auto& g : rep.singular_apexes) {
        apexes.push_back({{"point", complex_json(g.point)}, {"word", word_json(g.word)}});
        cuts.push_back({{"apex", complex_json(g.point)}, {"direction", complex_json(rep.cut_direction())}});
    }
    json S = json::array(), W = json::array();
    for (const auto& w : rep.S) S.push_back(word_json(w));
    for (const auto& w : rep.section_support) W.push_back(word_json(w));
    return {{"alpha", rep.alpha},
            {"base_U", base},
            {"fiber_point", complex_json(rep.fiber_point)},
            {"singular_apexes", apexes},
            {"cuts", cuts},
            {"cut_direction", complex_json(rep.cut_direction())},
            {"depth", rep.depth},
            {"certified", rep.smallness_certified},
            {"disjoint", rep.disjoint},
            {"partial", rep.partial},
            {"caveats", rep.caveats},
            {"section_support", W},
            {"S", S}};
}

json error_json(const std::string& kind, const std::string& message) {
    return {{"error", kind}, {"message", message}};
}

namespace {

json complex_block_json(const StripComplex& cx) {
    auto point = [&](double t) {
        cd z = cx.family == Family::PlusAlpha ? from_k({0.0, t}, cx.alpha) : from_k({t, 0.0}, cx.alpha);
        return json{{"re", z.real()}, {"im", z.imag()}};
    };
    json strips = json::array(), rays = json::array();
    for (const auto& s : cx.strips) {
        // Larger v lies lower for the alpha family; larger u lies higher for the -alpha family.
        std::optional<double> lower = cx.family == Family::PlusAlpha ? s.band.hi : s.band.lo;
        std::optional<double> upper = cx.family == Family::PlusAlpha ? s.band.lo : s.band.hi;
        json shape;
        if (lower && upper) shape = {{"type", "strip"}, {"lower", point(*lower)}, {"upper", point(*upper)}};
        else if (lower) shape = {{"type", "half_plane_upper"}, {"lower", point(*lower)}};
        else if (upper) shape = {{"type", "half_plane_lower"}, {"upper", point(*upper)}};
        else shape = {{"type", "plane"}};
        strips.push_back({{"id", s.id}, {"shape", shape}});
    }
    for (const auto& r : cx.rays) {
        json ends = json::array({r.strips[0]});
        if (r.strips[1] >= 0) ends.push_back(r.strips[1]);
        rays.push_back({{"c_hat", {{"re", r.c_hat.real()}, {"im", r.c_hat.imag()}}},
                        {"handedness", handedness_name(r.handedness)},
                        {"strips", ends}});
    }
    return {{"root", cx.root}, {"strips", strips}, {"rays", rays}};
}

}  // namespace

json synthetic_json(double alpha, cd z_x0, const StripComplex* plus, const StripComplex* minus) {
    json j = {{"alpha", alpha}, {"z_x0", {{"re", z_x0.real()}, {"im", z_x0.imag()}}}};
    if (plus) j["plus"] = complex_block_json(*plus);
    if (minus) j["minus"] = complex_block_json(*minus);
    return j;
}

// ---------------------------------------------------------------------------------------------

namespace {

struct Frame {
    double x0, y0, size;           // panel origin and side in pixels
    double xmin, xmax, ymin, ymax;  // data window
    double px(cd z) const { return x0 + (z.real() - xmin) / (xmax - xmin) * size; }
    double py(cd z) const { return y0 + (ymax - z.imag()) / (ymax - ymin) * size; }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

void panel_frame(std::ostringstream& os, const Frame& f, const std::string& id, const std::string& title) {
    os << "<clipPath id=\"" << id << "\"><rect x=\"" << fmt(f.x0) << "\" y=\"" << fmt(f.y0) << "\" width=\""
       << fmt(f.size) << "\" height=\"" << fmt(f.size) << "\"/></clipPath>\n";
    os << "<rect class=\"frame\" x=\"" << fmt(f.x0) << "\" y=\"" << fmt(f.y0) << "\" width=\"" << fmt(f.size)
       << "\" height=\"" << fmt(f.size) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    os << "<text class=\"title\" x=\"" << fmt(f.x0 + 6) << "\" y=\"" << fmt(f.y0 - 6) << "\" font-size=\"13\">" << title
       << "</text>\n";
}

void stokes_panel(std::ostringstream& os, const StokesGeometry& geom, const Frame& f, const std::string& clip) {
    os << "<g clip-path=\"url(#" << clip << ")\">\n";
    for (Family fam : {Family::PlusAlpha, Family::MinusAlpha}) {
        const char* colour = fam == Family::PlusAlpha ? "#c0392b" : "#2471a3";
        for (const auto& c : geom.curves(fam)) {
            os << "<polyline class=\"curve " << family_name(fam) << "\" fill=\"none\" stroke=\"" << colour
               << "\" stroke-width=\"1.2\" points=\"";
            std::size_t stride = std::max<std::size_t>(1, c.samples.size() / 400);
            for (std::size_t k = 0; k < c.samples.size(); k += stride)
                os << fmt(f.px(c.samples[k])) << ',' << fmt(f.py(c.samples[k])) << ' ';
            os << "\"/>\n";
        }
    }
    os << "</g>\n";
    for (const auto& t : geom.turning_points)
        os << "<circle class=\"tp\" cx=\"" << fmt(f.px(t.location)) << "\" cy=\"" << fmt(f.py(t.location))
           << "\" r=\"3.5\" fill=\"#000\"/>\n";
}

Frame frame_for(double x0, double y0, double size, double xmin, double xmax, double ymin, double ymax) {
    double w = xmax - xmin, h = ymax - ymin, s = std::max(w, h);
    double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    if (s <= 0) s = 1.0;
    return {x0, y0, size, cx - s / 2, cx + s / 2, cy - s / 2, cy + s / 2};
}

}  // namespace

std::string geometry_svg(const StokesGeometry& geom, const Window& window) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"560\" height=\"560\" viewBox=\"0 0 560 560\">\n";
    Frame f = frame_for(30, 30, 500, window.xmin, window.xmax, window.ymin, window.ymax);
    panel_frame(os, f, "xplane", "x-plane");
    stokes_panel(os, geom, f, "xplane");
    os << "</svg>\n";
    return os.str();
}

std::string report_svg(const StokesGeometry* geom, const Window& window, const ContinuationReport& rep) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1090\" height=\"560\" viewBox=\"0 0 1090 560\">\n";
    Frame left = frame_for(30, 30, 500, window.xmin, window.xmax, window.ymin, window.ymax);
    panel_frame(os, left, "xplane", "x-plane");
    if (geom) stokes_panel(os, *geom, left, "xplane");

    std::vector<cd> pts{rep.fiber_point, rep.base_U.A(), rep.base_U.B(), rep.base_U.C(), rep.base_U.D()};
    for (const auto& g : rep.singular_apexes) pts.push_back(g.point);
    double xmin = pts[0].real(), xmax = xmin, ymin = pts[0].imag(), ymax = ymin;
    for (cd p : pts) {
        xmin = std::min(xmin, p.real());
        xmax = std::max(xmax, p.real());
        ymin = std::min(ymin, p.imag());
        ymax = std::max(ymax, p.imag());
    }
    double pad = 0.2 * std::max({xmax - xmin, ymax - ymin, 1.0});
    Frame right = frame_for(560, 30, 500, xmin - pad, xmax + pad, ymin - pad, ymax + pad);
    panel_frame(os, right, "splane", "s-plane");
    double reach = 2.0 * (right.xmax - right.xmin);
    os << "<g clip-path=\"url(#splane)\">\n";
    auto poly = [&](const Parallelogram& P, const char* cls, const char* fill) {
        os << "<polygon class=\"" << cls << "\" fill=\"" << fill << "\" fill-opacity=\"0.25\" stroke=\"#1e8449\" points=\"";
        for (cd v : {P.A(), P.B(), P.C(), P.D()}) os << fmt(right.px(v)) << ',' << fmt(right.py(v)) << ' ';
        os << "\"/>\n";
    };
    // Boundary of U + K: the two cone rays from A.
    cd A = rep.base_U.A();
    for (double sgn : {1.0, -1.0}) {
        cd e = A + reach * std::polar(1.0, sgn * rep.alpha);
        os << "<line class=\"cone\" x1=\"" << fmt(right.px(A)) << "\" y1=\"" << fmt(right.py(A)) << "\" x2=\""
           << fmt(right.px(e)) << "\" y2=\"" << fmt(right.py(e)) << "\" stroke=\"#1e8449\"/>\n";
    }
    poly(rep.base_U, "base-U", "#58d68d");
    poly(rep.sub_V, "sub-V", "#1e8449");
    for (const auto& g : rep.singular_apexes) {
        cd e = g.point + reach * rep.cut_direction();
        os << "<line class=\"cut\" x1=\"" << fmt(right.px(g.point)) << "\" y1=\"" << fmt(right.py(g.point)) << "\" x2=\""
           << fmt(right.px(e)) << "\" y2=\"" << fmt(right.py(e)) << "\" stroke=\"#7d3c98\" stroke-dasharray=\"5,4\"/>\n";
    }
    os << "</g>\n";
    for (const auto& g : rep.singular_apexes)
        os << "<circle class=\"apex\" cx=\"" << fmt(right.px(g.point)) << "\" cy=\"" << fmt(right.py(g.point))
           << "\" r=\"3\" fill=\"#7d3c98\"><title>" << g.word.str() << "</title></circle>\n";
    os << "<circle class=\"fiber\" cx=\"" << fmt(right.px(rep.fiber_point)) << "\" cy=\"" << fmt(right.py(rep.fiber_point))
       << "\" r=\"3\" fill=\"none\" stroke=\"#000\"/>\n";
    os << "</svg>\n";
    return os.str();
}

// ---------------------------------------------------------------------------------------------

namespace {

bool type_matches(const json& doc, const std::string& t) {
    if (t == "object") return doc.is_object();
    if (t == "array") return doc.is_array();
    if (t == "string") return doc.is_string();
    if (t == "number") return doc.is_number();
    if (t == "integer") return doc.is_number_integer();
    if (t == "boolean") return doc.is_boolean();
    if (t == "null") return doc.is_null();
    return false;
}

void validate_at(const json& doc, const json& schema, const std::string& path, std::vector<std::string>& out) {
    if (schema.contains("type")) {
        const json& t = schema["type"];
        bool ok = false;
        if (t.is_string()) ok = type_matches(doc, t.get<std::string>());
        else
            for (const auto& e : t) ok = ok || type_matches(doc, e.get<std::string>());
        if (!ok) {
            out.push_back(path + ": wrong type");
            return;
        }
    }
    if (schema.contains("enum")) {
        bool found = false;
        for (const auto& e : schema["enum"]) found = found || e == doc;
        if (!found) out.push_back(path + ": value not in enum");
    }
    if (schema.contains("minimum") && doc.is_number() && doc.get<double>() < schema["minimum"].get<double>())
        out.push_back(path + ": below minimum");
    if (doc.is_object()) {
        if (schema.contains("required"))
            for (const auto& k : schema["required"])
                if (!doc.contains(k.get<std::string>())) out.push_back(path + ": missing '" + k.get<std::string>() + "'");
        if (schema.contains("properties"))
            for (auto it = schema["properties"].begin(); it != schema["properties"].end(); ++it)
                if (doc.contains(it.key())) validate_at(doc[it.key()], it.value(), path + "/" + it.key(), out);
    }
    if (doc.is_array()) {
        if (schema.contains("items"))
            for (std::size_t k = 0; k < doc.size(); ++k)
                validate_at(doc[k], schema["items"], path + "/" + std::to_string(k), out);
        if (schema.contains("minItems") && doc.size() < schema["minItems"].get<std::size_t>())
            out.push_back(path + ": too few items");
        if (schema.contains("maxItems") && doc.size() > schema["maxItems"].get<std::size_t>())
            out.push_back(path + ": too many items");
    }
}

}  // namespace

std::vector<std::string> validate_schema(const json& doc, const json& schema) {
    std::vector<std::string> out;
    validate_at(doc, schema, "", out);
    return out;
}

}  // namespace wkb
