#include "trendmct/estimators.hpp"

#include <cmath>

#include "trendmct/errors.hpp"

namespace trendmct {

std::vector<int> OneWayLayout::group_sizes() const {
    std::vector<int> sizes(responses.size());
    for (std::size_t i = 0; i < responses.size(); ++i)
        sizes[i] = static_cast<int>(responses[i].size());
    return sizes;
}

int OneWayLayout::total_n() const {
    int total = 0;
    for (const auto& group : responses) total += static_cast<int>(group.size());
    return total;
}

void OneWayLayout::validate() const {
    if (responses.size() < 2) throw DataError("layout: need at least two groups");
    if (!levels.empty() && levels.size() != responses.size())
        throw DataError("layout: level labels do not match group count");
    for (std::size_t i = 0; i < responses.size(); ++i) {
        const std::string name =
            i < levels.size() ? levels[i] : "group " + std::to_string(i + 1);
        if (responses[i].size() < 2)
            throw DataError("layout: " + name + " has fewer than 2 observations");
        for (double v : responses[i]) {
            if (!std::isfinite(v)) throw DataError("layout: non-finite response in " + name);
        }
    }
}

GroupEstimates summarize(const OneWayLayout& layout, VarianceMode mode, HcFlavor hc) {
    layout.validate();
    const std::size_t k = layout.k();
    GroupEstimates est;
    est.variance_mode = mode;
    est.hc = hc;
    est.group_sizes = layout.group_sizes();
    est.means.resize(k);
    est.group_variances.resize(k);
    est.mean_variances.resize(k);

    const int total = layout.total_n();
    est.df = total - static_cast<int>(k);
    double weighted_sum = 0.0;
    double pooled_ss = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const auto& x = layout.responses[i];
        const double n = static_cast<double>(x.size());
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= n;
        double ss = 0.0;
        for (double v : x) ss += (v - mean) * (v - mean);
        est.means[i] = mean;
        est.group_variances[i] = ss / (n - 1.0);
        weighted_sum += n * mean;
        pooled_ss += ss;
    }
    est.grand_mean = weighted_sum / total;
    est.pooled_s2 = pooled_ss / est.df;

    for (std::size_t i = 0; i < k; ++i) {
        const double n = static_cast<double>(est.group_sizes[i]);
        if (mode == VarianceMode::Pooled) {
            est.mean_variances[i] = est.pooled_s2 / n;
        } else {
            const double s2 = est.group_variances[i];
            if (!(s2 > 0.0))
                throw DataError("summarize: zero within-group variance in sandwich mode");
            switch (hc) {
                case HcFlavor::HC0:
                    est.mean_variances[i] = s2 * (n - 1.0) / (n * n);
                    break;
                case HcFlavor::HC1:
                    est.mean_variances[i] = s2 * (n - 1.0) / (n * n) * total / est.df;
                    break;
                case HcFlavor::HC3:
                    est.mean_variances[i] = s2 / (n - 1.0);
                    break;
            }
        }
    }
    return est;
}

std::vector<double> contrast_statistics(const GroupEstimates& est, const ContrastMatrix& cm,
                                        Estimand estimand, Direction direction,
                                        StudentizeMode studentize) {
    const std::size_t k = est.means.size();
    if (cm.k() != k) throw DataError("contrast_statistics: contrast/estimate dimension mismatch");

    std::vector<double> m = est.means;
    if (estimand == Estimand::PavaMeans) {
        std::vector<double> weights(k);
        for (std::size_t i = 0; i < k; ++i) weights[i] = static_cast<double>(est.group_sizes[i]);
        m = pava(m, weights, direction).fitted;
    }

    std::vector<double> stats(cm.xi());
    for (std::size_t h = 0; h < cm.xi(); ++h) {
        double numerator = 0.0;
        double variance = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double c = cm.coefficients[h][i];
            numerator += c * m[i];
            variance += c * c * est.mean_variances[i];
        }
        const double denom = studentize == StudentizeMode::SigmaOnly
                                 ? std::sqrt(est.pooled_s2)
                                 : std::sqrt(variance);
        if (!(denom > 0.0)) throw DataError("contrast_statistics: degenerate variance");
        stats[h] = numerator / denom;
    }
    return stats;
}

}  // namespace trendmct
