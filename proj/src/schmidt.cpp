#include "catkd/schmidt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace catkd {

namespace {

void check_sorted_normalized(const Eigen::VectorXd& v) {
    if (v.size() == 0)
        throw std::invalid_argument("SchmidtVector: empty coefficient vector");
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] < -kMajorizationTol)
            throw std::invalid_argument("SchmidtVector: negative coefficient");
        if (i > 0 && v[i] > v[i - 1] + kMajorizationTol)
            throw std::invalid_argument("SchmidtVector: not sorted non-increasing");
    }
    if (std::abs(v.sum() - 1.0) > kNormalizationTol)
        throw std::invalid_argument("SchmidtVector: coefficients do not sum to 1");
}

// Pads both spectra to a common dimension.
std::pair<SchmidtVector, SchmidtVector> common_dim(const SchmidtVector& a,
                                                   const SchmidtVector& b) {
    Eigen::Index n = std::max(a.dim(), b.dim());
    return {a.padded_to(n), b.padded_to(n)};
}

}  // namespace

SchmidtVector::SchmidtVector(Eigen::VectorXd coefficients)
    : coeffs_(std::move(coefficients)) {
    check_sorted_normalized(coeffs_);
    for (Eigen::Index i = 0; i < coeffs_.size(); ++i)
        coeffs_[i] = std::max(coeffs_[i], 0.0);
}

SchmidtVector SchmidtVector::padded_to(Eigen::Index n) const {
    if (n < dim())
        throw std::invalid_argument("padded_to: target dimension too small");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    out.head(dim()) = coeffs_;
    return SchmidtVector(std::move(out));
}

Eigen::VectorXd SchmidtVector::prefix_sums() const {
    Eigen::VectorXd out(dim());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < dim(); ++i) out[i] = (acc += coeffs_[i]);
    return out;
}

Eigen::VectorXd SchmidtVector::tail_sums() const {
    Eigen::VectorXd out(dim());
    double acc = 0.0;
    for (Eigen::Index i = dim() - 1; i >= 0; --i) out[i] = (acc += coeffs_[i]);
    return out;
}

SchmidtVector make_schmidt(const Eigen::VectorXd& weights) {
    if (weights.size() == 0)
        throw std::invalid_argument("make_schmidt: empty input");
    for (Eigen::Index i = 0; i < weights.size(); ++i)
        if (weights[i] < 0.0)
            throw std::invalid_argument("make_schmidt: negative weight");
    double total = weights.sum();
    if (total <= 0.0)
        throw std::invalid_argument("make_schmidt: all weights zero");
    Eigen::VectorXd v = weights / total;
    std::sort(v.data(), v.data() + v.size(), std::greater<double>());
    return SchmidtVector(std::move(v));
}

SchmidtVector make_schmidt(std::initializer_list<double> weights) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(weights.size()));
    Eigen::Index i = 0;
    for (double w : weights) v[i++] = w;
    return make_schmidt(v);
}

bool majorizes(const SchmidtVector& y, const SchmidtVector& x) {
    auto [yp, xp] = common_dim(y, x);
    Eigen::VectorXd sy = yp.prefix_sums();
    Eigen::VectorXd sx = xp.prefix_sums();
    for (Eigen::Index k = 0; k < sy.size(); ++k)
        if (sy[k] < sx[k] - kMajorizationTol) return false;
    return true;
}

SchmidtVector tensor_schmidt(const SchmidtVector& x, const SchmidtVector& y) {
    Eigen::VectorXd out(x.dim() * y.dim());
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < x.dim(); ++i)
        for (Eigen::Index j = 0; j < y.dim(); ++j) out[k++] = x[i] * y[j];
    std::sort(out.data(), out.data() + out.size(), std::greater<double>());
    return SchmidtVector(std::move(out));
}

bool is_catalyst(const SchmidtVector& gamma, const SchmidtVector& b,
                 const SchmidtVector& c) {
    if (majorizes(c, b)) return false;
    return majorizes(tensor_schmidt(c, gamma), tensor_schmidt(b, gamma));
}

double conversion_probability(const SchmidtVector& b, const SchmidtVector& c) {
    if (majorizes(c, b)) return 1.0;
    auto [bp, cp] = common_dim(b, c);
    Eigen::VectorXd eb = bp.tail_sums();
    Eigen::VectorXd ec = cp.tail_sums();
    double p = 1.0;
    for (Eigen::Index l = 0; l < eb.size(); ++l) {
        // Tail positions where c has no mass leave the ratio unconstrained.
        if (ec[l] <= kMajorizationTol) continue;
        p = std::min(p, eb[l] / ec[l]);
    }
    return std::clamp(p, 0.0, 1.0);
}

std::pair<double, SchmidtVector> optimal_fidelity(const SchmidtVector& b,
                                                  const SchmidtVector& c) {
    if (majorizes(c, b)) {
        auto [bp, cp] = common_dim(b, c);
        return {1.0, cp};
    }
    auto [bp, cp] = common_dim(b, c);
    const Eigen::Index n = bp.dim();
    if (n > 20)
        throw std::invalid_argument("optimal_fidelity: dimension > 20");

    double best_f = -1.0;
    Eigen::VectorXd best_chi;
    Eigen::VectorXd chi(n);
    // Bit k of `mask` set means a block boundary between positions k and k+1.
    for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
        Eigen::Index start = 0;
        bool feasible = true;
        for (Eigen::Index end = 0; end < n && feasible; ++end) {
            bool boundary = (end == n - 1) || (mask >> end) & 1u;
            if (!boundary) continue;
            double bsum = 0.0, csum = 0.0;
            for (Eigen::Index i = start; i <= end; ++i) {
                bsum += bp[i];
                csum += cp[i];
            }
            if (csum > kMajorizationTol) {
                double scale = bsum / csum;
                for (Eigen::Index i = start; i <= end; ++i)
                    chi[i] = cp[i] * scale;
            } else {
                for (Eigen::Index i = start; i <= end; ++i) chi[i] = bp[i];
            }
            start = end + 1;
        }
        // Candidate must be a valid spectrum that majorizes b.
        double prev = std::numeric_limits<double>::infinity();
        double cum_chi = 0.0, cum_b = 0.0;
        for (Eigen::Index i = 0; i < n && feasible; ++i) {
            if (chi[i] > prev + kMajorizationTol) feasible = false;
            prev = chi[i];
            cum_chi += chi[i];
            cum_b += bp[i];
            if (cum_chi < cum_b - kMajorizationTol) feasible = false;
        }
        if (!feasible) continue;
        double root_sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            root_sum += std::sqrt(std::max(chi[i], 0.0) * cp[i]);
        double f = root_sum * root_sum;
        if (f > best_f) {
            best_f = f;
            best_chi = chi;
        }
    }
    // chi = b (the single-block-free partition with every boundary set) is
    // always feasible, so a maximizer exists.
    for (Eigen::Index i = 0; i < n; ++i) best_chi[i] = std::max(best_chi[i], 0.0);
    std::sort(best_chi.data(), best_chi.data() + n, std::greater<double>());
    return {std::clamp(best_f, 0.0, 1.0), SchmidtVector(std::move(best_chi))};
}

ConversionReport analyze_conversion(const SchmidtVector& b,
                                    const SchmidtVector& c) {
    bool det = majorizes(c, b);
    double p = conversion_probability(b, c);
    auto [f, chi] = optimal_fidelity(b, c);
    return ConversionReport{det, p, f, std::move(chi)};
}

std::pair<SchmidtVector, SchmidtVector> reference_states() {
    return {make_schmidt({0.31, 0.31, 0.30, 0.04, 0.04}),
            make_schmidt({0.48, 0.24, 0.14, 0.14, 0.0})};
}

double reference_fidelity_bound() {
    static const double p0 = [] {
        auto [b, c] = reference_states();
        return optimal_fidelity(b, c).first;
    }();
    return p0;
}

}  // namespace catkd
