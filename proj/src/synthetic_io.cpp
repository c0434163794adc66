#include <deque>
#include <map>

#include "json.hpp"
#include "wkb/cover.hpp"

namespace wkb {

namespace {

using nlohmann::json;

cd read_complex(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_string()) return parse_complex(j.get<std::string>());
    if (j.is_object() && j.contains("re")) return {j.at("re").get<double>(), j.value("im", 0.0)};
    throw WkbError(ErrorKind::Parse, "expected a complex number");
}

double read_real(const json& j) {
    cd z = read_complex(j);
    if (z.imag() != 0.0) throw WkbError(ErrorKind::Parse, "expected a real number");
    return z.real();
}

std::string read_id(const json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    throw WkbError(ErrorKind::Parse, "identifiers must be strings or integers");
}

Family read_family(const json& j) {
    std::string s = j.get<std::string>();
    if (s == "plus" || s == "PlusAlpha" || s == "alpha") return Family::PlusAlpha;
    if (s == "minus" || s == "MinusAlpha" || s == "-alpha") return Family::MinusAlpha;
    throw WkbError(ErrorKind::Parse, "unknown family '" + s + "'");
}

StripComplex read_complex_block(const json& j, Family family, double alpha, cd z_x0) {
    StripComplex cx;
    cx.family = family;
    cx.alpha = alpha;
    cx.z_x0 = z_x0;
    std::map<std::string, int> strip_ids;
    for (const auto& s : j.at("strips")) {
        Strip st;
        st.id = static_cast<int>(cx.strips.size());
        st.family = family;
        st.region = st.id;
        std::string id = read_id(s.at("id"));
        if (strip_ids.count(id)) throw WkbError(ErrorKind::Parse, "duplicate strip id " + id);
        strip_ids[id] = st.id;
        const json& shape = s.at("shape");
        std::string type = shape.at("type").get<std::string>();
        auto t_of = [&](const char* key) { return cx.transverse(read_complex(shape.at(key))); };
        // "lower" and "upper" are points on the boundary lines below and above the strip.
        std::optional<double> lower, upper;
        if (type == "plane") {
        } else if (type == "half_plane_upper") {
            lower = t_of("lower");
        } else if (type == "half_plane_lower") {
            upper = t_of("upper");
        } else if (type == "strip") {
            lower = t_of("lower");
            upper = t_of("upper");
        } else {
            throw WkbError(ErrorKind::Parse, "unknown shape type '" + type + "'");
        }
        if (family == Family::PlusAlpha) {
            st.band.lo = upper;
            st.band.hi = lower;
        } else {
            st.band.lo = lower;
            st.band.hi = upper;
        }
        if (st.band.lo && st.band.hi && !(*st.band.lo < *st.band.hi))
            throw WkbError(ErrorKind::Parse, "strip '" + id + "' has empty interior");
        cx.strips.push_back(st);
    }
    if (cx.strips.empty()) throw WkbError(ErrorKind::Parse, "complex without strips");
    for (const auto& r : j.value("rays", json::array())) {
        Ray ray;
        ray.id = static_cast<int>(cx.rays.size());
        ray.family = family;
        ray.curve = ray.id;
        ray.c_hat = read_complex(r.at("c_hat"));
        std::string h = r.at("handedness").get<std::string>();
        if (h == "left" || h == "Left") ray.handedness = Handedness::Left;
        else if (h == "right" || h == "Right") ray.handedness = Handedness::Right;
        else throw WkbError(ErrorKind::Parse, "unknown handedness '" + h + "'");
        const json& ss = r.at("strips");
        if (!ss.is_array() || ss.empty() || ss.size() > 2) throw WkbError(ErrorKind::Parse, "ray needs one or two strips");
        for (std::size_t k = 0; k < ss.size(); ++k) {
            if (ss[k].is_null()) continue;
            std::string id = read_id(ss[k]);
            if (!strip_ids.count(id)) throw WkbError(ErrorKind::Parse, "ray references unknown strip " + id);
            ray.strips[k] = strip_ids[id];
            cx.strips[ray.strips[k]].rays.push_back(ray.id);
        }
        if (ray.strips[0] < 0) throw WkbError(ErrorKind::Parse, "ray without a first strip");
        cx.rays.push_back(ray);
    }
    std::string root = read_id(j.at("root"));
    if (!strip_ids.count(root)) throw WkbError(ErrorKind::Parse, "unknown root strip " + root);
    cx.root = strip_ids[root];

    // Depths and access words by breadth-first search from the root.
    std::vector<char> seen(cx.strips.size(), 0);
    std::deque<int> q{cx.root};
    seen[cx.root] = 1;
    int maxd = 0;
    while (!q.empty()) {
        int a = q.front();
        q.pop_front();
        for (int rid : cx.strips[a].rays) {
            int b = cx.rays[rid].other(a);
            if (b < 0 || seen[b]) continue;
            seen[b] = 1;
            cx.strips[b].depth = cx.strips[a].depth + 1;
            cx.strips[b].parent_ray = rid;
            cx.strips[b].deck_word = cx.strips[a].deck_word;
            cx.strips[b].deck_word.push_back(rid);
            maxd = std::max(maxd, cx.strips[b].depth);
            q.push_back(b);
        }
    }
    cx.depth = maxd;
    return cx;
}

}  // namespace

SyntheticInput load_synthetic(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw WkbError(ErrorKind::Parse, e.what());
    }
    try {
        SyntheticInput in;
        in.alpha = read_real(j.at("alpha"));
        if (!(in.alpha > 0 && in.alpha < kPi / 2)) throw WkbError(ErrorKind::Parse, "alpha must lie in (0, pi/2)");
        in.z_x0 = j.contains("z_x0") ? read_complex(j.at("z_x0")) : cd(0.0);
        if (j.contains("plus") || j.contains("minus")) {
            if (j.contains("plus")) in.plus = read_complex_block(j.at("plus"), Family::PlusAlpha, in.alpha, in.z_x0);
            if (j.contains("minus")) in.minus = read_complex_block(j.at("minus"), Family::MinusAlpha, in.alpha, in.z_x0);
        } else {
            Family f = read_family(j.at("family"));
            auto cx = read_complex_block(j, f, in.alpha, in.z_x0);
            (f == Family::PlusAlpha ? in.plus : in.minus) = std::move(cx);
        }
        return in;
    } catch (const json::exception& e) {
        throw WkbError(ErrorKind::Parse, e.what());
    }
}

}  // namespace wkb
