#pragma once
// Integer morphism calculus on word-indexed cone-set families.

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <memory>
#include <vector>

#include "wkb/words.hpp"

namespace wkb {

using BigInt = boost::multiprecision::cpp_int;
using Column = std::map<Word, BigInt>;

/// Sign and apex of words; implemented over strip complexes or by explicit tables (tests).
class WordSpace {
public:
    virtual ~WordSpace() = default;
    virtual Sign sign(const Word& w) const = 0;
    virtual cd apex(const Word& w) const = 0;
    virtual double alpha() const = 0;
    ConeSet cone(const Word& w, const RegionHandle& region) const { return {sign(w), apex(w), DeltaKind::K, region}; }
};

class ComplexWordSpace : public WordSpace {
public:
    ComplexWordSpace(const StripComplex* plus, const StripComplex* minus, cd z_x0)
        : plus_(plus), minus_(minus), z_x0_(z_x0) {}
    Sign sign(const Word& w) const override { return word_sign(w, complex(w)); }
    cd apex(const Word& w) const override { return c_hat_word(w, complex(w), z_x0_); }
    double alpha() const override { return (plus_ ? plus_ : minus_)->alpha; }
    const StripComplex& complex(const Word& w) const;

private:
    const StripComplex* plus_;
    const StripComplex* minus_;
    cd z_x0_;
};

class TableWordSpace : public WordSpace {
public:
    explicit TableWordSpace(double alpha) : alpha_(alpha) {}
    void set(const Word& w, Sign s, cd apex) { table_[w] = {s, apex}; }
    Sign sign(const Word& w) const override { return table_.at(w).first; }
    cd apex(const Word& w) const override { return table_.at(w).second; }
    double alpha() const override { return alpha_; }

private:
    double alpha_;
    std::map<Word, std::pair<Sign, cd>> table_;
};

/// Sparse integer matrix: cols[source][target] = coefficient.
struct MorphismMatrix {
    RegionHandle region;
    std::map<Word, Column> cols;

    BigInt entry(const Word& src, const Word& dst) const;
    void add(const Word& src, const Word& dst, const BigInt& v);
    bool is_zero() const;
    std::vector<Word> basis() const;  ///< union of sources and targets, sorted

    static MorphismMatrix identity(const std::vector<Word>& words, const RegionHandle& region);
    friend bool operator==(const MorphismMatrix& a, const MorphismMatrix& b) { return a.cols == b.cols; }
};

MorphismMatrix add(const MorphismMatrix& a, const MorphismMatrix& b, int sign_b = 1);

/// True if every entry satisfies the support condition over the matrix region.
bool support_ok(const MorphismMatrix& f, const WordSpace& space);
/// f o g with the support condition re-verified on every output entry.
MorphismMatrix compose(const MorphismMatrix& f, const MorphismMatrix& g, const WordSpace& space);
/// True iff every entry factors through the apex shift by epsilon.
bool filtration_degree(const MorphismMatrix& f, cd epsilon, const WordSpace& space);

struct NeumannResult {
    MorphismMatrix inverse;
    int nilpotency_step = 0;  ///< k with n^k in F^epsilon
    bool verified = false;    ///< m o inverse = Id modulo F^{epsilon floor(order/k)}
};
NeumannResult neumann_invert(const MorphismMatrix& m, cd epsilon, int order, const WordSpace& space);

/// Rank of the kernel of the truncated matrix over the rationals.
int kernel_rank(const MorphismMatrix& f);

// ---------------------------------------------------------------------------------------------
// Gluing maps and sections.

struct GluingMap {
    int ray = -1;
    int theta = 1;
    const StripComplex* cx = nullptr;
    int max_len = 1 << 20;

    /// N applied to a single word, if it acts on it.
    std::optional<Word> n_image(const Word& w) const;
    Column apply(const Column& v) const;
    MorphismMatrix matrix(const std::vector<Word>& basis, const RegionHandle& region) const;
};

/// theta(P, P') for crossing the ray from P to P'.
int gluing_theta(const StripComplex& cx, int from, int to, int ray);
GluingMap gluing_map(const StripComplex& cx, int from, int to, int ray, int max_len = 1 << 20);

struct SectionVector {
    int strip = -1;
    Column coeffs;
};

SectionVector root_section(const StripComplex& cx);
SectionVector propagate_section(const SectionVector& e, const GluingMap& across, int target);
/// e_P for every strip of the complex, propagated from the root along the tree.
std::map<int, SectionVector> compute_sections(const StripComplex& cx, int max_len = 1 << 20);

// ---------------------------------------------------------------------------------------------
// The transfer matrices between -alpha and alpha descriptions.

class IPsiPhi {
public:
    IPsiPhi(const StripComplex& plus, const StripComplex& minus, const CellComplex& cells, cd z_x0, int max_len);

    int max_len() const { return max_len_; }
    const WordSpace& space() const { return space_; }

    /// i_{Pi P} applied to a generator e_w (w an alpha-word) on the cell (P, Pi).
    Column i_column(int cell, const Word& w);
    Column i_apply(int cell, const Column& v);
    Column i_inverse_apply(int cell, const Column& v);

    /// U_Pi column of a -alpha word, as a combination of alpha-words.
    Column u_column(int Pi, const Word& w);
    /// J = i_{Pi P} o U_Pi, column of a -alpha word on the cell.
    Column j_column(int cell, const Word& w);
    MorphismMatrix j_matrix(int cell, const std::vector<Word>& minus_words);

    /// Number of rays where the transfer computed at different alpha-strips disagreed.
    int transfer_mismatches() const { return transfer_mismatches_; }
    bool partial() const { return partial_; }

private:
    struct TransferKey {
        int from, to, ray;
        bool operator<(const TransferKey& o) const { return std::tie(from, to, ray) < std::tie(o.from, o.to, o.ray); }
    };
    Column transfer(int from, int to, int ray, const Column& v);
    std::vector<int> strips_meeting(int ray);
    Column keep_sign(const Column& v, Sign s) const;
    std::vector<int> path_between(int a, int b) const;

    const StripComplex& plus_;
    const StripComplex& minus_;
    const CellComplex& cells_;
    ComplexWordSpace space_;
    int max_len_;
    std::map<std::pair<int, Word>, Column> i_cache_, inv_cache_, u_cache_;
    int transfer_mismatches_ = 0;
    bool partial_ = false;
};

struct IpipReport {
    int cells_checked = 0;
    int words_checked = 0;
    int diagonal_failures = 0;      ///< coefficient differs from (-1)^{|w|}
    int diagonal_not_unit = 0;      ///< coefficient differs from +1 as well
    int strictness_failures = 0;
    int uncovered = 0;
    int transfer_mismatches = 0;
    bool partial = false;
    bool ok() const { return diagonal_failures == 0 && strictness_failures == 0 && transfer_mismatches == 0; }
};

/// Checks the diagonal sign law and strict inclusion of off-diagonal entries on every cell
/// for the given -alpha words.
IpipReport check_ipip(IPsiPhi& ip, const CellComplex& cells, const std::vector<Word>& minus_words);

}  // namespace wkb
