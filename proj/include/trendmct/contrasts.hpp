#pragma once

// Contrast-matrix construction for one-way layouts (possibly unbalanced) and
// the induced correlation matrix of the joint studentized contrast vector.

#include <cstddef>
#include <span>
#include <vector>

namespace trendmct {

enum class ContrastKind { GrandMean, Williams, Custom };

struct ContrastMatrix {
    std::vector<std::vector<double>> coefficients;  // xi rows of length k
    ContrastKind kind = ContrastKind::Custom;
    std::vector<int> group_sizes;                   // length k

    std::size_t xi() const { return coefficients.size(); }
    std::size_t k() const { return coefficients.empty() ? 0 : coefficients.front().size(); }
};

struct CorrelationMatrix {
    std::vector<std::vector<double>> entries;  // xi x xi, symmetric, unit diagonal
    std::size_t dim() const { return entries.size(); }
};

// Rows c_h with c_hh = 1 - n_h/N and c_hj = -n_j/N: each group compared
// against the size-weighted grand mean, oriented so an increasing profile
// makes upper-group statistics positive. xi = k rows (linearly dependent; the
// induced correlation matrix is singular and handled by the integrator's
// jitter path).
ContrastMatrix grand_mean_contrasts(const std::vector<int>& group_sizes);

// Williams-type rows: row j (j = 1..k-1) compares the control (group 1,
// coefficient -1) with the size-weighted average of the top j dose groups.
ContrastMatrix williams_contrasts(const std::vector<int>& group_sizes);

// Wrap user-provided rows; enforces row-sum-zero and shape consistency.
ContrastMatrix custom_contrasts(std::vector<std::vector<double>> rows,
                                std::vector<int> group_sizes);

// Correlation of the joint contrast estimates when the group-mean covariance
// is diag(mean_variances): R_hl = (C V C')_hl / sqrt((C V C')_hh (C V C')_ll).
CorrelationMatrix contrast_correlation(const ContrastMatrix& cm,
                                       std::span<const double> mean_variances);

// Pooled-variance shortcut with V proportional to diag(1/n_i); equals the
// classical R_hl = (sum_i c_hi c_li / n_i) / sqrt(...) formula.
CorrelationMatrix contrast_correlation(const ContrastMatrix& cm);

}  // namespace trendmct
