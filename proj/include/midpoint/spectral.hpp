#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "midpoint/ringnet.hpp"

namespace midpoint {

using Range = std::pair<std::size_t, std::size_t>;  // [begin, end)

/// Storage ranges of the rings 0..ω (core), the non-corner (b) and corner
/// (c) vertices of ring ω+1, and the remaining rings (outer).
struct BlockPartition {
  Range core;
  Range b;
  Range c;
  Range outer;
};

/// M_n restricted to j-nets; indices follow the NetLayout storage order.
struct SubdivisionMatrix {
  int n = 0;
  int m = 0;
  NetKind kind = NetKind::primal;
  int j = 0;
  NetLayout layout;
  Eigen::MatrixXd S;
  std::optional<std::vector<SparseRow<Rational>>> exact;  // rational rows
  std::optional<BlockPartition> partition;                // j >= ω+1

  std::size_t size() const { return layout.size(); }
  NetIndex label(std::size_t k) const { return layout.label(k); }
};

/// Throws too_few_rings, parity_mismatch, degree_out_of_range, bad_valence.
SubdivisionMatrix assemble_matrix(int n, int m, NetKind kind, int j, bool exact = false);

/// Applies S to the vertices of net (same layout).
Ringnet apply_matrix(const SubdivisionMatrix& S, const Ringnet& net);

/// max_k |sum_l S_kl - 1|.
double row_sum_error(const SubdivisionMatrix& S);
/// All exact row sums equal 1 and all weights are >= 0. Requires exact rows.
bool exact_stochastic(const SubdivisionMatrix& S);

/// Index of a column of S^power with only positive entries, if any.
std::optional<std::size_t> positive_column(const SubdivisionMatrix& S, int power);

BlockPartition partition_of(const NetLayout& layout, int n);

struct Blocks {
  BlockPartition partition;
  Eigen::MatrixXd A;  // core
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  double max_upper = 0.0;       // largest |entry| above the block diagonal
  double max_outer_diag = 0.0;  // largest |entry| in the outer ring diagonal blocks
};

/// Throws too_few_rings (j < ω+1) and ordering_violation when an entry above
/// the block diagonal exceeds tol.
Blocks block_partition(const SubdivisionMatrix& S, double tol = 1e-14);

struct BlockBounds {
  double normB = 0.0;
  double normC = 0.0;
  std::optional<Rational> normB_exact;
  std::optional<Rational> normC_exact;
  bool pass = false;
};

/// Infinity norms of B and C against 2^-n and 4^-n; exact when S carries
/// rational rows.
BlockBounds block_norm_bounds(const SubdivisionMatrix& S);

/// Discrete Fourier blocks over the segment index. Block f acts on the
/// segment-0 coordinates of frequency-f nets; block 0 carries the primal
/// center as its last coordinate.
struct FrequencyBlocks {
  int m = 0;
  bool has_center = false;
  std::vector<Eigen::MatrixXcd> blocks;
};

/// Throws orbit_mismatch when S does not commute with the segment rotation.
FrequencyBlocks frequency_blocks(const SubdivisionMatrix& S, double tol = 1e-13);

/// Frequency-f ringnet with segment-0 coordinates v.
Ringnet net_from_block_vector(const NetLayout& layout, int f, const Eigen::VectorXcd& v);

struct DominantPair {
  int f = 0;
  Complex lambda;
  Ringnet eigennet;  // phase fixed so that the net is reflection symmetric when possible
};

/// Largest-modulus eigenvalue of a frequency block with its eigennet.
/// Throws convergence_failure if the eigensolver fails.
DominantPair dominant_pair_per_frequency(const FrequencyBlocks& blocks, const NetLayout& layout,
                                         int f);

std::vector<Complex> eigenvalues(const Eigen::MatrixXd& S);
std::vector<Complex> eigenvalues(const Eigen::MatrixXcd& B);

/// Eigenvalues sorted by decreasing modulus, then by argument.
void sort_spectrum(std::vector<Complex>& values);

struct SpectrumMatch {
  bool ok = false;
  double max_deviation = 0.0;      // over eigenvalues outside the zero cluster
  std::size_t zero_cluster_a = 0;  // eigenvalues with modulus <= zero_radius
  std::size_t zero_cluster_b = 0;
};

/// Multiset comparison. Eigenvalues of modulus <= zero_radius are counted
/// instead of matched, since nilpotent parts smear them far beyond rounding.
SpectrumMatch match_spectra(std::vector<Complex> a, std::vector<Complex> b, double tol,
                            double zero_radius);

struct Multiplicity {
  int algebraic = 0;
  int geometric = 0;
  double cluster_radius = 0.0;
};

inline double cluster_radius(Complex lambda) { return 1e-6 * std::max(1.0, std::abs(lambda)); }

/// Dimension of the numeric null space of (M - λI): singular values below
/// tol * ||M||_2.
int geometric_multiplicity(const Eigen::MatrixXcd& M, Complex lambda, double tol = 1e-9);
int geometric_multiplicity(const Eigen::MatrixXd& M, Complex lambda, double tol = 1e-9);

/// Algebraic count inside cluster_radius(λ) and geometric multiplicity.
/// Throws ill_conditioned when another eigenvalue lies within ten cluster
/// radii but outside one.
Multiplicity multiplicity(const SubdivisionMatrix& S, Complex lambda, double tol = 1e-9);
Multiplicity multiplicity(const FrequencyBlocks& blocks, Complex lambda, double tol = 1e-9);

struct CharacteristicMesh {
  Ringnet net;  // ρ-net, frequency 1, MAX norm 1
  double lambda = 0.0;
  int iterations = 0;
  double last_step = 0.0;  // ∞-difference of the last two iterates
  double residual = 0.0;   // ||S N - λ N||_∞ with the full operator
};

/// Normalized power iteration from the frequency-1 grid mesh. Throws
/// no_convergence and positivity_violation.
/// step_history, if given, receives the ∞-difference of every step.
CharacteristicMesh characteristic_mesh(int n, int m, double tol = 1e-11, int max_iter = 20000,
                                       std::vector<double>* step_history = nullptr);

struct FrequencyEntry {
  int f = 0;
  std::vector<Complex> eigenvalues;  // sorted by decreasing modulus
  Complex dominant;
};

struct SpectralFlags {
  bool stochastic = false;
  bool dominant_simple = false;
  bool subdominant_real_positive = false;
  bool subdominant_mult2 = false;
  bool subdominant_frequencies = false;  // attained exactly at 1 and m-1
  bool lambda_range = false;
  bool monotone = false;
  bool block_structure = false;
  bool block_bounds = false;

  bool all() const {
    return stochastic && dominant_simple && subdominant_real_positive && subdominant_mult2 &&
           subdominant_frequencies && lambda_range && monotone && block_structure &&
           block_bounds;
  }
};

struct SpectralReport {
  int n = 0;
  int m = 0;
  int j = 0;
  NetKind kind = NetKind::primal;
  std::vector<FrequencyEntry> frequencies;
  Complex dominant;
  Multiplicity dominant_mult;
  Complex lambda_sub;
  Multiplicity sub_mult;
  std::vector<int> sub_frequencies;
  std::vector<double> monotonicity;  // Re λ̂_f for f = 1..floor(m/2)
  double row_sum_error = 0.0;
  BlockBounds bounds;
  double max_upper = 0.0;
  SpectralFlags flags;
  bool ill_conditioned = false;  // a multiplicity cluster was ambiguous
  // distances of numeric quantities from their decision thresholds
  double margin_sub_gap = 0.0;   // |λ_sub| minus the next smaller modulus
  double margin_imag = 0.0;      // |Im λ_sub|
  double margin_monotone = 0.0;  // smallest λ̂_f - λ̂_(f+1) and λ̂_last - 1/4
};

/// Full analysis at j = ρ through the frequency blocks. Set exact for
/// rational stochasticity and block-bound checks.
SpectralReport spectral_report(int n, int m, bool exact = true);

}  // namespace midpoint
