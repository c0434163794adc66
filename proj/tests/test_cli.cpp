#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "wkb/cli.hpp"
#include "wkb/io.hpp"

using namespace wkb;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

json load_schema(const std::string& name) {
    std::ifstream in(std::string(WKB_SOURCE_DIR) + "/schemas/" + name);
    return json::parse(in);
}

std::string data(const std::string& name) { return std::string(WKB_SOURCE_DIR) + "/data/" + name; }

int count(const std::string& text, const std::string& needle) {
    int n = 0;
    for (std::size_t p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("geometry: Airy has one turning point and 3 + 3 curves") {
    auto r = run({"geometry", "--potential", "0,1", "--alpha", "0.3"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["turning_points"].size() == 1);
    CHECK(j["curves"].size() == 6);
    CHECK(validate_schema(j, load_schema("geometry.schema.json")).empty());
}

TEST_CASE("geometry: constant potential") {
    auto r = run({"geometry", "--potential", "2", "--alpha", "0.3"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["turning_points"].empty());
    CHECK(j["curves"].empty());
}

TEST_CASE("malformed input exits with code 2 and a parse record") {
    auto r = run({"geometry", "--potential", "1,x"});
    CHECK(r.code == 2);
    CHECK(json::parse(r.err)["error"] == "parse");
    CHECK(run({"explode"}).code == 2);
    CHECK(run({"geometry", "--potential", "0,1", "--window", "1", "0", "0", "1"}).code == 2);
    CHECK(run({"geometry", "--potential", "0,1", "--alpha", "2"}).code == 2);
    CHECK(run({"geometry", "--potential", "0,1", "--format", "both"}).code == 2);
    CHECK(run({"geometry", "--potential", "0,1", "--depth", "-1"}).code == 2);
}

TEST_CASE("check: exit codes 0, 3 and 4") {
    CHECK(run({"check", "--potential", "0,1", "--alpha", "0.3", "--depth", "2"}).code == 0);
    auto bad = run({"check", "--potential", "-1,0,1", "--alpha", "0"});
    CHECK(bad.code == 3);
    CHECK(bad.out.find("FAIL") != std::string::npos);
    CHECK(run({"check", "--synthetic", data("cyclic.json")}).code == 4);
    CHECK(run({"check", "--synthetic", data("two_punctures_depth2.json"), "--depth", "2"}).code == 0);
}

TEST_CASE("singularities refuse failed assumptions unless forced") {
    auto r = run({"singularities", "--potential", "-1,0,1", "--alpha", "0"});
    CHECK(r.code == 3);
    CHECK(json::parse(r.err)["error"] == "assumption_violation");
}

TEST_CASE("singularities: depth zero Airy report validates") {
    auto r = run({"singularities", "--potential", "0,1", "--alpha", "0.3", "--x0", "-1+0.3i", "--depth", "0"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["singular_apexes"].size() == 2);
    CHECK(j["certified"] == true);
    CHECK(validate_schema(j, load_schema("report.schema.json")).empty());
    json broken = j;
    broken.erase("cuts");
    CHECK_FALSE(validate_schema(broken, load_schema("report.schema.json")).empty());
}

TEST_CASE("SVG element counts match the JSON records") {
    auto dir = std::filesystem::temp_directory_path() / "wkb_cli_svg";
    std::filesystem::remove_all(dir);
    auto r = run({"singularities", "--potential", "-1,0,1", "--alpha", "0.3", "--x0", "-1+0.3i", "--x-eval",
                  "1.5+0.6i", "--depth", "3", "--format", "both", "--out", dir.string()});
    REQUIRE(r.code == 0);
    std::ifstream jf(dir / "report.json"), sf(dir / "report.svg");
    json j = json::parse(jf);
    std::stringstream svg;
    svg << sf.rdbuf();
    CHECK(count(svg.str(), "class=\"apex\"") == static_cast<int>(j["singular_apexes"].size()));
    CHECK(count(svg.str(), "class=\"cut\"") == static_cast<int>(j["cuts"].size()));
    CHECK(count(svg.str(), "stroke-dasharray") == static_cast<int>(j["cuts"].size()));
    CHECK(count(svg.str(), "class=\"tp\"") == 2);
    CHECK(count(svg.str(), "class=\"curve ") == 12);
    std::filesystem::remove_all(dir);
}

TEST_CASE("words output validates and respects the depth") {
    auto r = run({"words", "--synthetic", data("airy_flat.json"), "--depth", "2"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(validate_schema(j, load_schema("words.schema.json")).empty());
    CHECK_FALSE(j["words"].empty());
    for (const auto& w : j["words"]) CHECK(w["length"].get<int>() <= 2);
}

TEST_CASE("flags override the config file") {
    auto path = std::filesystem::temp_directory_path() / "wkb_cli_config.json";
    {
        std::ofstream f(path);
        f << R"({"potential": "0,1", "alpha": 0.3, "depth": 1, "x0": "-1+0.3i"})";
    }
    auto a = run({"singularities", "--config", path.string()});
    auto b = run({"singularities", "--config", path.string(), "--depth", "0"});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(json::parse(a.out)["depth"] == 1);
    CHECK(json::parse(b.out)["depth"] == 0);
    {
        std::ofstream f(path);
        f << R"({"potential": "0,1", "colour": "red"})";
    }
    CHECK(run({"geometry", "--config", path.string()}).code == 2);
    std::filesystem::remove(path);
}

TEST_CASE("identical runs produce identical bytes") {
    std::vector<std::string> args{"singularities", "--potential", "-1,0,1", "--alpha", "auto", "--depth", "2"};
    auto a = run(args), b = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    // Floats carry at most 12 significant digits.
    std::regex number("[0-9]+\\.[0-9]+");
    int worst = 0;
    for (auto it = std::sregex_iterator(a.out.begin(), a.out.end(), number); it != std::sregex_iterator(); ++it) {
        std::string digits;
        for (char c : it->str())
            if (c != '.') digits += c;
        digits.erase(0, digits.find_first_not_of('0'));
        worst = std::max(worst, static_cast<int>(digits.size()));
    }
    CHECK(worst <= 12);
}
