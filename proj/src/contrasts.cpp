#include "trendmct/contrasts.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "trendmct/errors.hpp"

namespace trendmct {

namespace {

void validate_sizes(const std::vector<int>& group_sizes) {
    if (group_sizes.size() < 2) throw DataError("contrasts: need at least two groups");
    for (int n : group_sizes) {
        if (n < 1) throw DataError("contrasts: group sizes must be positive");
    }
}

}  // namespace

ContrastMatrix grand_mean_contrasts(const std::vector<int>& group_sizes) {
    validate_sizes(group_sizes);
    const std::size_t k = group_sizes.size();
    const double total = std::accumulate(group_sizes.begin(), group_sizes.end(), 0.0);
    ContrastMatrix cm;
    cm.kind = ContrastKind::GrandMean;
    cm.group_sizes = group_sizes;
    cm.coefficients.assign(k, std::vector<double>(k, 0.0));
    for (std::size_t h = 0; h < k; ++h) {
        for (std::size_t j = 0; j < k; ++j) {
            cm.coefficients[h][j] = (h == j ? 1.0 : 0.0) - group_sizes[j] / total;
        }
    }
    return cm;
}

ContrastMatrix williams_contrasts(const std::vector<int>& group_sizes) {
    validate_sizes(group_sizes);
    const std::size_t k = group_sizes.size();
    ContrastMatrix cm;
    cm.kind = ContrastKind::Williams;
    cm.group_sizes = group_sizes;
    cm.coefficients.assign(k - 1, std::vector<double>(k, 0.0));
    for (std::size_t j = 1; j <= k - 1; ++j) {
        std::vector<double>& row = cm.coefficients[j - 1];
        row[0] = -1.0;
        double pooled = 0.0;
        for (std::size_t i = k - j; i < k; ++i) pooled += group_sizes[i];
        for (std::size_t i = k - j; i < k; ++i) row[i] = group_sizes[i] / pooled;
    }
    return cm;
}

ContrastMatrix custom_contrasts(std::vector<std::vector<double>> rows,
                                std::vector<int> group_sizes) {
    validate_sizes(group_sizes);
    if (rows.empty()) throw DataError("custom contrasts: no rows");
    const std::size_t k = group_sizes.size();
    for (std::size_t h = 0; h < rows.size(); ++h) {
        if (rows[h].size() != k)
            throw DataError("custom contrasts: row " + std::to_string(h + 1) +
                            " has wrong length");
        double sum = 0.0, abs_sum = 0.0;
        for (double c : rows[h]) {
            if (!std::isfinite(c)) throw DataError("custom contrasts: non-finite coefficient");
            sum += c;
            abs_sum += std::fabs(c);
        }
        if (abs_sum == 0.0)
            throw DataError("custom contrasts: row " + std::to_string(h + 1) + " is all zero");
        if (std::fabs(sum) > 1e-9 * (1.0 + abs_sum))
            throw DataError("custom contrasts: row " + std::to_string(h + 1) +
                            " does not sum to zero");
    }
    ContrastMatrix cm;
    cm.kind = ContrastKind::Custom;
    cm.group_sizes = std::move(group_sizes);
    cm.coefficients = std::move(rows);
    return cm;
}

CorrelationMatrix contrast_correlation(const ContrastMatrix& cm,
                                       std::span<const double> mean_variances) {
    const std::size_t xi = cm.xi();
    const std::size_t k = cm.k();
    if (mean_variances.size() != k)
        throw DataError("contrast_correlation: variance vector length mismatch");
    std::vector<std::vector<double>> gram(xi, std::vector<double>(xi, 0.0));
    for (std::size_t h = 0; h < xi; ++h) {
        for (std::size_t l = h; l < xi; ++l) {
            double s = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                s += cm.coefficients[h][i] * cm.coefficients[l][i] * mean_variances[i];
            }
            gram[h][l] = gram[l][h] = s;
        }
    }
    CorrelationMatrix R;
    R.entries.assign(xi, std::vector<double>(xi, 0.0));
    for (std::size_t h = 0; h < xi; ++h) {
        if (!(gram[h][h] > 0.0))
            throw DataError("contrast_correlation: zero-variance contrast row");
    }
    for (std::size_t h = 0; h < xi; ++h) {
        for (std::size_t l = 0; l < xi; ++l) {
            R.entries[h][l] = gram[h][l] / std::sqrt(gram[h][h] * gram[l][l]);
        }
        R.entries[h][h] = 1.0;
    }
    return R;
}

CorrelationMatrix contrast_correlation(const ContrastMatrix& cm) {
    std::vector<double> inv_n(cm.k());
    for (std::size_t i = 0; i < inv_n.size(); ++i) inv_n[i] = 1.0 / cm.group_sizes[i];
    return contrast_correlation(cm, inv_n);
}

}  // namespace trendmct
