#pragma once

// Group-level summaries for a one-way layout plus the two variance models:
// pooled mean-squared-error (homogeneous) and heteroskedasticity-consistent
// sandwich covariance, which for the cell-means design reduces to per-group
// closed forms.

#include <string>
#include <vector>

#include "trendmct/contrasts.hpp"
#include "trendmct/isotonic.hpp"

namespace trendmct {

struct OneWayLayout {
    std::vector<std::string> levels;                 // ordered group labels
    std::vector<std::vector<double>> responses;      // per group observations

    std::size_t k() const { return responses.size(); }
    std::vector<int> group_sizes() const;
    int total_n() const;
    void validate() const;  // k >= 2, every n_i >= 2, all finite
};

enum class VarianceMode { Pooled, Sandwich };
enum class HcFlavor { HC0, HC1, HC3 };

struct GroupEstimates {
    std::vector<double> means;
    std::vector<double> group_variances;  // s_i^2 with denominator n_i - 1
    std::vector<int> group_sizes;
    double pooled_s2 = 0.0;               // S^2 = sum (n_i-1) s_i^2 / (N-k)
    int df = 0;                           // N - k
    double grand_mean = 0.0;              // size-weighted grand mean
    std::vector<double> mean_variances;   // diagonal covariance of the group means
    VarianceMode variance_mode = VarianceMode::Pooled;
    HcFlavor hc = HcFlavor::HC3;
};

// Pooled: mean_variances = S^2 / n_i.
// Sandwich closed forms for the cell-means fit (leverage h_ij = 1/n_i):
//   HC0: s_i^2 (n_i - 1) / n_i^2,  HC1: HC0 * N/(N-k),  HC3: s_i^2/(n_i - 1).
GroupEstimates summarize(const OneWayLayout& layout, VarianceMode mode,
                         HcFlavor hc = HcFlavor::HC3);

enum class Estimand { ArithmeticMeans, PavaMeans };

// Compatibility switch: FullStandardError divides each contrast by
// sqrt(c' V c); SigmaOnly divides by the pooled S alone.
enum class StudentizeMode { FullStandardError, SigmaOnly };

// Studentized contrast statistics t_h = c_h' m / sqrt(c_h' V c_h), where m is
// the arithmetic means or their PAVA fit (weights n_i, in `direction`) and V
// is the diagonal mean covariance from `est`.
std::vector<double> contrast_statistics(const GroupEstimates& est, const ContrastMatrix& cm,
                                        Estimand estimand, Direction direction,
                                        StudentizeMode studentize = StudentizeMode::FullStandardError);

}  // namespace trendmct
