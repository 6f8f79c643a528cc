#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tiledeform/deformation.hpp"
#include "tiledeform/smith.hpp"

namespace tiledeform {

/// A pair of positions i < j of the scanned fixed-point word whose collared
/// labels agree. chain counts the level-k labels on [i, j), a 1-cycle of the
/// system's complex.
struct Recurrence {
  std::size_t start = 0;
  std::size_t end = 0;
  long size = 0;        // combinatorial agreement radius, in tiles
  double degree = 0;    // size / (end - start)
  bool truncated = false;  // agreement ran into the end of the scanned word
  std::vector<mpz_class> chain;
  long length() const { return static_cast<long>(end - start); }
};

struct RecurrenceSearch {
  int power = 0;  // the word is sigma^power(seed tile)
  std::size_t word_length = 0;
  long size_min = 0;
  bool budget_exhausted = false;
  std::vector<Recurrence> recurrences;  // one per class, largest size kept
};

inline constexpr std::size_t kDefaultRecurrenceBudget = 200'000;

/// Default size floor: the collar radius, so every identically collared
/// pair counts. The sigma^2 patch diameter is available as an alternative.
long default_size_min(const TilingSystem& s);
long sigma2_size_min(const TilingSystem& s);

/// Scans the smallest sigma^n(seed) with at least min_length tiles (capped
/// at budget tiles). 1-D built systems only.
RecurrenceSearch find_recurrences(const TilingSystem& s, std::size_t min_length, long size_min = -1,
                                  std::size_t budget = kDefaultRecurrenceBudget);

enum class Saturation { saturated, possibly_incomplete };
const char* to_string(Saturation s);

struct RecurrenceLattice {
  ZMatrix basis;  // chain coordinates x s, columns a_1..a_s in Hermite form
  ZMatrix M;      // sigma on the lattice: F a_j = sum_i M(i, j) a_i
  std::vector<Recurrence> generators;
  Saturation saturation = Saturation::possibly_incomplete;
  std::optional<double> recognition_radius_estimate;
  int rounds = 0;
  std::vector<std::string> notes;

  std::size_t rank() const { return basis.cols(); }
  /// Integer coordinates of a chain in the basis, if it lies in the lattice.
  std::optional<std::vector<mpz_class>> coordinates(const std::vector<mpz_class>& chain) const;
};

/// Integer basis (as columns) of the lattice spanned by the given vectors.
ZMatrix hermite_basis(const std::vector<std::vector<mpz_class>>& vectors, std::size_t length);

/// Lattice of the given recurrences, closed under the substitution map.
RecurrenceLattice recurrence_lattice(const TilingSystem& s, const std::vector<Recurrence>& recurrences);

struct LatticeOptions {
  std::size_t min_length = 400;
  long size_min = -1;  // -1: default_size_min
  std::size_t budget = kDefaultRecurrenceBudget;
  int max_rounds = 8;
};

/// Repeated searches over longer words until two consecutive enlargement
/// rounds leave the lattice unchanged.
RecurrenceLattice saturated_lattice(const TilingSystem& s, const LatticeOptions& options = {});

/// The full integral first homology of the system's complex, for systems
/// without a fixed-point word to scan (complex fixtures).
RecurrenceLattice homology_lattice(const TilingSystem& s);

/// True iff no nonzero reduced H^1 class annihilates the lattice.
bool span_check(const RecurrenceLattice& lattice, const TilingSystem& s);

struct ShapeVector {
  std::vector<std::vector<Quad>> L;  // L[component][j] = f(a_j)
  std::vector<std::vector<double>> numeric() const;
};

ShapeVector shape_vector(const ShapeParameter& f, const RecurrenceLattice& lattice, const TilingSystem& s);

enum class CandidateVerdict { verified, fails, inconclusive };
const char* to_string(CandidateVerdict v);

struct CandidateTrace {
  std::vector<std::vector<double>> traces;  // traces[basis vector][m]
  CandidateVerdict verdict = CandidateVerdict::inconclusive;
  std::optional<double> rate;  // fitted geometric rate over the last 10 steps, worst generator
};

inline constexpr double kTraceThreshold = 1e-6;
inline constexpr double kTraceFailure = 1e-2;

/// t_m = dist(w . M^m e_j, Z) for each lattice basis vector e_j; w is the
/// row k.L/2pi given exactly.
CandidateTrace eigenvalue_candidate_test(const std::vector<Quad>& w, const RecurrenceLattice& lattice, int m_max = 40);
/// Same with w = k.L/2pi formed from a numeric k in R^d.
CandidateTrace eigenvalue_candidate_test(const std::vector<double>& k, const ShapeVector& L,
                                         const RecurrenceLattice& lattice, int m_max = 40);

enum class SpectrumVerdict { trivial, constrained, candidate_verified, inconclusive };
const char* to_string(SpectrumVerdict v);

/// One solution family of k.L/2pi in Q^s + S: c = k/2pi and the rational
/// part q with c L - q in S.
struct SpectrumCandidate {
  Quad c;
  std::vector<mpq_class> q;
  std::optional<CandidateTrace> trace;
};

struct SpectrumReport {
  SpectrumVerdict verdict = SpectrumVerdict::inconclusive;
  bool all_nonsmall = false;  // every nonzero eigenvalue of M has |lambda| >= 1
  std::string constraint;
  std::size_t solution_dimension = 0;  // Q-dimension of admissible c = k/2pi
  std::vector<SpectrumCandidate> candidates;
  std::size_t d_b = 0;
  int d = 1;
  int dimension_bound = 0;
  std::vector<std::string> notes;
};

/// Which k can be eigenvalues for the shape vector L. 1-D shapes only;
/// higher dimensions report inconclusive.
SpectrumReport rationality_constraint(const ShapeVector& L, const RecurrenceLattice& lattice, const TilingSystem& s);

/// Runs the trace test on up to max_candidates candidates; any verified
/// candidate upgrades a constrained verdict to candidate-verified.
void test_candidates(SpectrumReport& report, const ShapeVector& L, const RecurrenceLattice& lattice, int m_max = 40,
                     std::size_t max_candidates = 4);

struct WeakMixingReport {
  std::size_t d_b = 0;
  int d = 1;
  bool splits = false;  // H^1 = PF + S
  bool generic_weak_mixing = false;
  std::optional<SpectrumReport> spectrum;  // for a concrete shape when decidable
  std::vector<std::string> notes;
};

WeakMixingReport weak_mixing_verdict(const TilingSystem& s, const ShapeParameter* f = nullptr,
                                     const RecurrenceLattice* lattice = nullptr);

/// d * (s_PF + 1).
int spectrum_dim_bound(const EigenStructure& e);

struct FamilySet {
  double p = 0.25;
  double epsilon = 0.1;
  std::vector<std::vector<mpz_class>> generators;  // lattice coordinates
  std::vector<long> generator_lengths;
  double D = 0;          // recognition radius used in the bound
  double length_bound = 0;
  bool heuristic = true;  // D is the empirical agreement radius
  struct Factor {
    std::size_t recurrence;  // index into lattice.generators
    int k = 0;
    std::size_t family = 0;
  };
  std::vector<Factor> factorization;
  std::vector<std::string> notes;
};

FamilySet recurrence_families(const RecurrenceLattice& lattice, const TilingSystem& s, double p = 0.25,
                              double epsilon = 0.1);

/// table[i][k] = L . M^k v_i for k = 0..k_max.
std::vector<std::vector<std::vector<double>>> conjugacy_invariant_table(const ShapeVector& L, const FamilySet& families,
                                                                        const RecurrenceLattice& lattice, int k_max);

}  // namespace tiledeform
