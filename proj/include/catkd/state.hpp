// Dense bipartite pure states: Schmidt embedding and recovery, fidelities,
// local unitaries, four-particle partial traces, projective test sampling.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <random>
#include <vector>

#include "catkd/schmidt.hpp"

namespace catkd {

using Matrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

// Pure state of two particles, amplitudes A(i, j) on |i>|j>.
class BipartiteState {
public:
    explicit BipartiteState(Matrix amplitudes);  // unit Frobenius norm

    Eigen::Index dim_a() const { return amps_.rows(); }
    Eigen::Index dim_b() const { return amps_.cols(); }
    const Matrix& amplitudes() const { return amps_; }

private:
    Matrix amps_;
};

// Hermitian, unit-trace, positive-semidefinite matrix.
class DensityOperator {
public:
    explicit DensityOperator(Matrix matrix);

    Eigen::Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }

private:
    Matrix m_;
};

enum class Side { A, B };

// |x> = sum_k sqrt(x_k) |k>|k>, a diagonal amplitude matrix.
BipartiteState embed_schmidt(const SchmidtVector& x);

// Squared singular values of the amplitude matrix, sorted. Inverse of
// embed_schmidt and invariant under local unitaries.
SchmidtVector schmidt_of(const BipartiteState& state);

// <target|psi|target> resp. <target|rho|target>, where |target> is the
// diagonal Schmidt embedding. Dimensions must match.
double fidelity_with(const BipartiteState& state, const SchmidtVector& target);
double fidelity_with(const DensityOperator& rho, const SchmidtVector& target);

// Applies u to one side; u must be unitary within 1e-9.
BipartiteState apply_local_unitary(const BipartiteState& state, Side side,
                                   const Matrix& u);

// Pure state of four particles with explicit dimension factorization;
// amplitudes are stored flat in row-major particle order.
class FourPartyState {
public:
    FourPartyState(Eigen::VectorXcd amplitudes, std::array<Eigen::Index, 4> dims);

    const Eigen::VectorXcd& amplitudes() const { return amps_; }
    const std::array<Eigen::Index, 4>& dims() const { return dims_; }

private:
    Eigen::VectorXcd amps_;
    std::array<Eigen::Index, 4> dims_;
};

// Product of two pair states; particle order (first.A, first.B, second.A,
// second.B).
FourPartyState tensor_product(const BipartiteState& first,
                              const BipartiteState& second);

// Traces out the particles not in `keep`; kept particles appear in the
// reduced matrix in the order given.
DensityOperator reduced_state(const FourPartyState& joint,
                              const std::vector<int>& keep);

// Applies a joint unitary to the listed particles (dimension = product of
// their local dimensions, row-major in the listed order).
FourPartyState apply_unitary(const FourPartyState& state,
                             const std::vector<int>& particles, const Matrix& u);

// One Bernoulli draw from an analytically known pass probability.
bool sample_projective_test(double pass_probability, std::mt19937_64& rng);

// Haar-ish random unitary (QR of a complex Ginibre matrix, phases fixed).
Matrix random_unitary(Eigen::Index n, std::mt19937_64& rng);

}  // namespace catkd
