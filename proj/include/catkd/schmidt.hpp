// Entanglement-transformation theory on ordered Schmidt spectra:
// majorization, catalysis, optimal conversion probability and fidelity.

#pragma once

#include <Eigen/Dense>

#include <utility>

namespace catkd {

// Absolute tolerance on cumulative sums in majorization comparisons.
inline constexpr double kMajorizationTol = 1e-12;
// Tolerance on normalization of a Schmidt spectrum.
inline constexpr double kNormalizationTol = 1e-9;

// Ordered, normalized Schmidt coefficients of a bipartite pure state.
// Invariants: non-negative, sorted non-increasing, sums to 1.
class SchmidtVector {
public:
    // Requires coefficients already sorted non-increasing and normalized.
    explicit SchmidtVector(Eigen::VectorXd coefficients);

    Eigen::Index dim() const { return coeffs_.size(); }
    double operator[](Eigen::Index i) const { return coeffs_[i]; }
    const Eigen::VectorXd& coefficients() const { return coeffs_; }

    // Same spectrum with zeros appended up to dimension n (n >= dim()).
    SchmidtVector padded_to(Eigen::Index n) const;

    // Cumulative sums S_k = sum_{i<=k}, k = 1..n.
    Eigen::VectorXd prefix_sums() const;
    // Tail sums E_l = sum_{i>=l}, l = 1..n.
    Eigen::VectorXd tail_sums() const;

    bool operator==(const SchmidtVector& other) const {
        return coeffs_ == other.coeffs_;
    }

private:
    Eigen::VectorXd coeffs_;
};

// Sorts and normalizes raw non-negative weights. Trailing zeros are kept,
// so the caller controls the dimension. Throws std::invalid_argument on
// negative entries or an all-zero vector.
SchmidtVector make_schmidt(const Eigen::VectorXd& weights);
SchmidtVector make_schmidt(std::initializer_list<double> weights);

// Nielsen criterion: true iff every prefix sum of y dominates that of x,
// i.e. a deterministic LOCC conversion x -> y exists. Vectors of unequal
// dimension are zero-padded first.
bool majorizes(const SchmidtVector& y, const SchmidtVector& x);

// Schmidt spectrum of the tensor product: all pairwise products, re-sorted.
SchmidtVector tensor_schmidt(const SchmidtVector& x, const SchmidtVector& y);

// gamma catalyzes b -> c: the conversion is impossible bare but becomes
// deterministic jointly with gamma.
bool is_catalyst(const SchmidtVector& gamma, const SchmidtVector& b,
                 const SchmidtVector& c);

// Vidal's optimal conversion probability P(b -> c) = min_l E_l(b) / E_l(c),
// taken over l with E_l(c) > 0. Returns 1 exactly when majorizes(c, b).
double conversion_probability(const SchmidtVector& b, const SchmidtVector& c);

// Maximum fidelity with c over all states deterministically reachable from b,
// together with the achieving spectrum. Found by enumerating block partitions
// of {1..n}: within each block J, chi_i = c_i * sum_J(b) / sum_J(c)
// (chi_i = b_i on zero-c-mass blocks); candidates must stay sorted and
// majorize b. 2^(n-1) partitions, feasible for n <= 20.
std::pair<double, SchmidtVector> optimal_fidelity(const SchmidtVector& b,
                                                  const SchmidtVector& c);

// Full conversion analysis for a pair of spectra.
struct ConversionReport {
    bool deterministic;            // majorizes(c, b)
    double probability;            // P(b -> c)
    double fidelity;               // best deterministic fidelity with c
    SchmidtVector optimal_target;  // spectrum achieving that fidelity
};

ConversionReport analyze_conversion(const SchmidtVector& b,
                                    const SchmidtVector& c);

// The canonical five-dimensional (b, c) pair the protocol is built on:
// b = (0.31, 0.31, 0.30, 0.04, 0.04), c = (0.48, 0.24, 0.14, 0.14, 0).
// c does not majorize b, yet c (x) c majorizes b (x) c, so a shared c pair
// catalyzes the conversion.
std::pair<SchmidtVector, SchmidtVector> reference_states();

// Fidelity ceiling p0 for an unassisted deterministic conversion between the
// reference states; computed once via optimal_fidelity.
double reference_fidelity_bound();

}  // namespace catkd
