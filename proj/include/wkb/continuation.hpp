#pragma once
// Singular apex sets and continuation domains in the s-plane of one solution slice.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wkb/sheafcalc.hpp"

namespace wkb {

/// Parallelogram with sides along e^{-i alpha} and e^{i alpha}; a square of half-side r about
/// the centre in K-coordinates.
struct Parallelogram {
    double alpha = 0.0;
    KCoords center;
    double radius = 0.0;

    cd A() const { return from_k({center.u - radius, center.v - radius}, alpha); }
    cd B() const { return from_k({center.u - radius, center.v + radius}, alpha); }  ///< AB along e^{-i alpha}
    cd C() const { return from_k({center.u + radius, center.v + radius}, alpha); }
    cd D() const { return from_k({center.u + radius, center.v - radius}, alpha); }  ///< AD along e^{i alpha}
    /// Open parallelogram membership.
    bool contains(cd s) const;
    /// True if the closed cut ray d + r_{-alpha} meets the open parallelogram.
    bool hit_by_cut(cd d) const;
    /// Homothety about A with the given ratio.
    Parallelogram shrink_about_A(double ratio) const;
};

/// Everything the singularity computation needs: both complexes, their cells and the
/// located evaluation point.
struct Pipeline {
    double alpha = 0.0;
    StripComplex plus;
    StripComplex minus;
    CellComplex cells;
    cd z_x0 = 0.0;
    cd z_eval = 0.0;
    int P_eval = -1;
    int Pi_eval = -1;
    int cell_eval = -1;
    int depth = 0;
    std::vector<std::string> caveats;
};

/// Builds the complexes for a numeric cover. The alpha complex is grown until every walk is
/// complete (up to depth + 12).
std::shared_ptr<Pipeline> make_pipeline(const NumericCover& cover, cd x_eval, int depth);
std::shared_ptr<Pipeline> make_pipeline(const FlatModel& model, cd x_eval, int depth);
/// Synthetic inputs carry both families; the evaluation point is x0 in the root strips.
std::shared_ptr<Pipeline> make_pipeline(const SyntheticInput& input, int depth);

struct RemovedRay {
    cd apex;  ///< the ray apex + r_alpha
    Word word;
};

/// Rays removed from the fiber over z in strip P: one per word in the support of e_P.
std::vector<RemovedRay> compute_U_set(const StripComplex& plus, const std::map<int, SectionVector>& sections,
                                      int P, cd z, cd z_x0);

struct SingularApex {
    cd point;
    Word word;
};

struct ContinuationReport {
    double alpha = 0.0;
    Parallelogram base_U;
    Parallelogram sub_V;
    cd fiber_point = 0.0;
    int depth = 0;
    std::vector<Word> section_support;  ///< W_P
    std::vector<Word> S;                ///< words of W_P whose cone set meets V
    std::vector<SingularApex> singular_apexes;
    bool disjoint = true;               ///< no cut meets U
    bool smallness_certified = false;
    bool partial = false;
    std::vector<std::string> caveats;

    cd cut_direction() const { return std::polar(1.0, -alpha); }
    /// Number of apexes in s - K (sorted sweep over K-coordinates).
    int count_below(cd s) const;
};

struct ContinuationOptions {
    std::optional<Parallelogram> U;  ///< default: chosen from the candidate cuts
    double rho = 0.5;                ///< offset of default centres from section apexes
    int probes = 100;
    unsigned seed = 12345;
};

ContinuationReport compute_singularities(Pipeline& p, const ContinuationOptions& opt = {});

/// Apexes recomputed directly from c_hat_word for the words of a report.
std::vector<SingularApex> direct_apexes(const ContinuationReport& rep, const Pipeline& p);

/// Connectivity of (U+K) minus the cuts on an n x n grid in K-coordinates.
bool domain_connected(const ContinuationReport& rep, int n = 120);

/// End-to-end: potential to singular apexes for the slice at x_eval.
std::vector<SingularApex> borel_singularity_table(const Polynomial& V, double alpha, cd x0, cd x_eval, int depth,
                                                  const TraceConfig& cfg = {});

}  // namespace wkb
