#include "catkd/state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace catkd {

namespace {

constexpr double kStateTol = 1e-9;

void check_unitary(const Matrix& u) {
    if (u.rows() != u.cols())
        throw std::invalid_argument("unitary matrix must be square");
    Matrix delta = u.adjoint() * u - Matrix::Identity(u.rows(), u.cols());
    if (delta.cwiseAbs().maxCoeff() > kStateTol)
        throw std::invalid_argument("matrix is not unitary");
}

}  // namespace

BipartiteState::BipartiteState(Matrix amplitudes) : amps_(std::move(amplitudes)) {
    if (amps_.size() == 0)
        throw std::invalid_argument("BipartiteState: empty amplitude matrix");
    if (std::abs(amps_.squaredNorm() - 1.0) > kStateTol)
        throw std::invalid_argument("BipartiteState: not normalized");
}

DensityOperator::DensityOperator(Matrix matrix) : m_(std::move(matrix)) {
    if (m_.rows() != m_.cols())
        throw std::invalid_argument("DensityOperator: not square");
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kStateTol)
        throw std::invalid_argument("DensityOperator: not Hermitian");
    if (std::abs(m_.trace().real() - 1.0) > kStateTol)
        throw std::invalid_argument("DensityOperator: trace != 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kStateTol)
        throw std::invalid_argument("DensityOperator: negative eigenvalue");
}

BipartiteState embed_schmidt(const SchmidtVector& x) {
    Matrix amps = Matrix::Zero(x.dim(), x.dim());
    for (Eigen::Index k = 0; k < x.dim(); ++k)
        amps(k, k) = std::sqrt(x[k]);
    return BipartiteState(std::move(amps));
}

SchmidtVector schmidt_of(const BipartiteState& state) {
    Eigen::JacobiSVD<Matrix> svd(state.amplitudes());
    Eigen::VectorXd sv = svd.singularValues();
    Eigen::VectorXd coeffs(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) coeffs[i] = sv[i] * sv[i];
    // Singular values come out sorted; renormalize away rounding.
    coeffs /= coeffs.sum();
    return SchmidtVector(std::move(coeffs));
}

double fidelity_with(const BipartiteState& state, const SchmidtVector& target) {
    if (state.dim_a() != target.dim() || state.dim_b() != target.dim())
        throw std::invalid_argument("fidelity_with: dimension mismatch");
    Complex overlap = 0.0;
    for (Eigen::Index k = 0; k < target.dim(); ++k)
        overlap += std::sqrt(target[k]) * state.amplitudes()(k, k);
    return std::norm(overlap);
}

double fidelity_with(const DensityOperator& rho, const SchmidtVector& target) {
    Eigen::Index n = target.dim();
    if (rho.dim() != n * n)
        throw std::invalid_argument("fidelity_with: dimension mismatch");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n * n);
    for (Eigen::Index k = 0; k < n; ++k) v[k * n + k] = std::sqrt(target[k]);
    return (v.adjoint() * rho.matrix() * v).value().real();
}

BipartiteState apply_local_unitary(const BipartiteState& state, Side side,
                                   const Matrix& u) {
    check_unitary(u);
    if (side == Side::A) {
        if (u.rows() != state.dim_a())
            throw std::invalid_argument("apply_local_unitary: dimension mismatch");
        return BipartiteState(u * state.amplitudes());
    }
    if (u.rows() != state.dim_b())
        throw std::invalid_argument("apply_local_unitary: dimension mismatch");
    return BipartiteState(state.amplitudes() * u.transpose());
}

FourPartyState::FourPartyState(Eigen::VectorXcd amplitudes,
                               std::array<Eigen::Index, 4> dims)
    : amps_(std::move(amplitudes)), dims_(dims) {
    Eigen::Index total = dims_[0] * dims_[1] * dims_[2] * dims_[3];
    if (amps_.size() != total)
        throw std::invalid_argument("FourPartyState: dimension mismatch");
    if (std::abs(amps_.squaredNorm() - 1.0) > kStateTol)
        throw std::invalid_argument("FourPartyState: not normalized");
}

FourPartyState tensor_product(const BipartiteState& first,
                              const BipartiteState& second) {
    std::array<Eigen::Index, 4> dims = {first.dim_a(), first.dim_b(),
                                        second.dim_a(), second.dim_b()};
    Eigen::VectorXcd amps(dims[0] * dims[1] * dims[2] * dims[3]);
    Eigen::Index flat = 0;
    for (Eigen::Index i0 = 0; i0 < dims[0]; ++i0)
        for (Eigen::Index i1 = 0; i1 < dims[1]; ++i1)
            for (Eigen::Index i2 = 0; i2 < dims[2]; ++i2)
                for (Eigen::Index i3 = 0; i3 < dims[3]; ++i3)
                    amps[flat++] = first.amplitudes()(i0, i1) *
                                   second.amplitudes()(i2, i3);
    return FourPartyState(std::move(amps), dims);
}

namespace {

std::array<Eigen::Index, 4> strides_of(const std::array<Eigen::Index, 4>& dims) {
    std::array<Eigen::Index, 4> s;
    s[3] = 1;
    for (int p = 2; p >= 0; --p) s[p] = s[p + 1] * dims[p + 1];
    return s;
}

}  // namespace

DensityOperator reduced_state(const FourPartyState& joint,
                              const std::vector<int>& keep) {
    const auto& dims = joint.dims();
    std::array<bool, 4> kept{false, false, false, false};
    for (int p : keep) {
        if (p < 0 || p > 3 || kept[p])
            throw std::invalid_argument("reduced_state: invalid particle set");
        kept[p] = true;
    }
    if (keep.empty() || keep.size() > 3)
        throw std::invalid_argument("reduced_state: invalid particle set");

    std::vector<int> traced;
    for (int p = 0; p < 4; ++p)
        if (!kept[p]) traced.push_back(p);

    auto strides = strides_of(dims);
    Eigen::Index keep_dim = 1, trace_dim = 1;
    for (int p : keep) keep_dim *= dims[p];
    for (int p : traced) trace_dim *= dims[p];

    // Flat index of the joint tensor from a (kept, traced) index pair.
    auto flat_index = [&](Eigen::Index k, Eigen::Index t) {
        Eigen::Index flat = 0;
        for (auto it = keep.rbegin(); it != keep.rend(); ++it) {
            flat += (k % dims[*it]) * strides[*it];
            k /= dims[*it];
        }
        for (auto it = traced.rbegin(); it != traced.rend(); ++it) {
            flat += (t % dims[*it]) * strides[*it];
            t /= dims[*it];
        }
        return flat;
    };

    Matrix rho = Matrix::Zero(keep_dim, keep_dim);
    const auto& psi = joint.amplitudes();
    for (Eigen::Index k = 0; k < keep_dim; ++k)
        for (Eigen::Index kp = 0; kp < keep_dim; ++kp) {
            Complex acc = 0.0;
            for (Eigen::Index t = 0; t < trace_dim; ++t)
                acc += psi[flat_index(k, t)] * std::conj(psi[flat_index(kp, t)]);
            rho(k, kp) = acc;
        }
    return DensityOperator(std::move(rho));
}

FourPartyState apply_unitary(const FourPartyState& state,
                             const std::vector<int>& particles,
                             const Matrix& u) {
    check_unitary(u);
    const auto& dims = state.dims();
    std::array<bool, 4> in_set{false, false, false, false};
    Eigen::Index sub_dim = 1;
    for (int p : particles) {
        if (p < 0 || p > 3 || in_set[p])
            throw std::invalid_argument("apply_unitary: invalid particle set");
        in_set[p] = true;
        sub_dim *= dims[p];
    }
    if (u.rows() != sub_dim)
        throw std::invalid_argument("apply_unitary: dimension mismatch");

    std::vector<int> rest;
    for (int p = 0; p < 4; ++p)
        if (!in_set[p]) rest.push_back(p);
    Eigen::Index rest_dim = 1;
    for (int p : rest) rest_dim *= dims[p];

    auto strides = strides_of(dims);
    auto flat_index = [&](Eigen::Index s, Eigen::Index r) {
        Eigen::Index flat = 0;
        for (auto it = particles.rbegin(); it != particles.rend(); ++it) {
            flat += (s % dims[*it]) * strides[*it];
            s /= dims[*it];
        }
        for (auto it = rest.rbegin(); it != rest.rend(); ++it) {
            flat += (r % dims[*it]) * strides[*it];
            r /= dims[*it];
        }
        return flat;
    };

    Eigen::VectorXcd out = state.amplitudes();
    Eigen::VectorXcd slice(sub_dim);
    for (Eigen::Index r = 0; r < rest_dim; ++r) {
        for (Eigen::Index s = 0; s < sub_dim; ++s)
            slice[s] = state.amplitudes()[flat_index(s, r)];
        Eigen::VectorXcd mixed = u * slice;
        for (Eigen::Index s = 0; s < sub_dim; ++s)
            out[flat_index(s, r)] = mixed[s];
    }
    return FourPartyState(std::move(out), dims);
}

bool sample_projective_test(double pass_probability, std::mt19937_64& rng) {
    if (pass_probability < 0.0 || pass_probability > 1.0)
        throw std::invalid_argument("sample_projective_test: probability out of range");
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) <
           pass_probability;
}

Matrix random_unitary(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            g(i, j) = Complex(gauss(rng), gauss(rng));
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j) {
        Complex d = r(j, j);
        q.col(j) *= (std::abs(d) > 0.0) ? d / std::abs(d) : Complex(1.0, 0.0);
    }
    return q;
}

}  // namespace catkd
