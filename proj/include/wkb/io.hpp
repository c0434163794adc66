#pragma once
// JSON and SVG emission with deterministic formatting.

#include <json.hpp>
#include <string>
#include <vector>

#include "wkb/continuation.hpp"

namespace wkb {

using nlohmann::json;

/// Rounds every floating-point leaf to 12 significant digits.
json round_floats(const json& j);
/// Deterministic text: rounded floats, sorted keys, two-space indent, trailing newline.
std::string dump_json(const json& j);

json complex_json(cd z);
json word_json(const Word& w);

json geometry_json(const StokesGeometry& geom, const StripComplex* plus = nullptr, const StripComplex* minus = nullptr);
json complex_summary_json(const StripComplex& cx);
json words_json(const std::vector<Word>& words, const StripComplex& cx, cd z_x0);
json report_json(const ContinuationReport& rep);
json error_json(const std::string& kind, const std::string& message);
/// Explicit complex description in the format read by load_synthetic.
json synthetic_json(double alpha, cd z_x0, const StripComplex* plus, const StripComplex* minus);

/// x-plane picture: one element per turning point and per curve.
std::string geometry_svg(const StokesGeometry& geom, const Window& window);
/// Two panels: Stokes graph in the x-plane and the s-plane with apexes, cuts and U.
std::string report_svg(const StokesGeometry* geom, const Window& window, const ContinuationReport& rep);

/// Minimal JSON-schema check (type, required, properties, items, enum, minimum). Returns the
/// list of violations, empty if the document conforms.
std::vector<std::string> validate_schema(const json& doc, const json& schema);

}  // namespace wkb
