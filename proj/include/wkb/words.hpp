#pragma once
// Alternating words over boundary rays, their apexes, cone sets and inclusion tests.

#include <optional>
#include <string>
#include <vector>

#include "wkb/cover.hpp"

namespace wkb {

enum class Terminal { L, R };
enum class Sign { Plus, Minus };

struct Word {
    Family family = Family::PlusAlpha;
    std::vector<int> letters;  ///< leftmost letter first: l_n ... l_1
    Terminal terminal = Terminal::L;

    int length() const { return static_cast<int>(letters.size()); }
    /// Word with ray l prepended on the left.
    Word prepend(int ray) const;
    std::string str() const;

    friend bool operator==(const Word& a, const Word& b) {
        return a.family == b.family && a.terminal == b.terminal && a.letters == b.letters;
    }
    friend bool operator!=(const Word& a, const Word& b) { return !(a == b); }
    /// Order by (family, length, letters, terminal with L before R).
    friend bool operator<(const Word& a, const Word& b);
};

/// Handedness required of letter l_i (i counted from the terminal, starting at 1).
Handedness required_handedness(Terminal t, int i);

void validate_word(const Word& w, const StripComplex& cx);
Sign word_sign(const Word& w, const StripComplex& cx);
cd c_hat_word(const Word& w, const StripComplex& cx, cd x0_action);

/// Where a cone set is restricted. Only the corners matter for inclusion tests.
enum class RegionKind { Cell, Strip, Ray, Slice, Unsupported };

struct RegionHandle {
    RegionKind kind = RegionKind::Cell;
    int id = -1;
    std::optional<cd> A;  ///< region lies in A + K
    std::optional<cd> C;  ///< region lies in C - K

    static RegionHandle cell(const Cell& c);
    static RegionHandle strip(int id);
    static RegionHandle ray(const Ray& r);
    static RegionHandle slice(cd z);
    static RegionHandle corners(std::optional<cd> A, std::optional<cd> C, int id = -1);

    friend bool operator==(const RegionHandle& a, const RegionHandle& b) {
        return a.kind == b.kind && a.id == b.id && a.A == b.A && a.C == b.C;
    }
};

enum class DeltaKind { K, RayPlus, RayMinus, IntK };

struct ConeSet {
    Sign sign = Sign::Plus;
    cd apex;
    DeltaKind delta = DeltaKind::K;
    RegionHandle region;
};

/// Exact decision of cone-set inclusion over the region (cones closed, angle tolerance 1e-9).
bool cone_inclusion(const ConeSet& inner, const ConeSet& outer, double alpha);

/// Apex of the fiber set {s : s +- z in apex + K}: apex - z for Plus, apex + z for Minus.
cd fiber_apex(Sign sign, cd apex, cd z);

/// Every alternating word with at most max_len letters over the given rays (all rays if empty).
std::vector<Word> all_words(const StripComplex& cx, int max_len, const std::vector<int>& rays = {});

/// All words with at most depth letters and apex in s - K, sorted.
std::vector<Word> enumerate_small(const StripComplex& cx, cd x0_action, cd s, int depth);

/// The alpha-ray aligned with a -alpha ray: same apex and handedness, on the alpha-strip that
/// contains the initial segment of the ray.
int align_ray(int ell, const StripComplex& minus, const StripComplex& plus, const CellComplex& cells);
/// Letterwise image of a -alpha word; nullopt if a letter is not covered.
std::optional<Word> align_word(const Word& w, const StripComplex& minus, const StripComplex& plus,
                               const CellComplex& cells);

}  // namespace wkb
