#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace bugmine::stats {

/// Rows are samples, columns treatments.
class PairedSampleMatrix {
public:
    /// Throws ValidationError unless rectangular with at least 2 rows and 2 columns.
    explicit PairedSampleMatrix(std::vector<std::vector<double>> rows);

    std::size_t rows() const { return rows_.size(); }
    std::size_t cols() const { return rows_.front().size(); }
    double at(std::size_t r, std::size_t c) const { return rows_[r][c]; }
    const std::vector<std::vector<double>>& data() const { return rows_; }

private:
    std::vector<std::vector<double>> rows_;
};

/// Midranks (1-based) of the values; ties share their average rank.
std::vector<double> midranks(const std::vector<double>& values);

/// Regularized upper incomplete gamma Q(a, x): series below x = a + 1,
/// continued fraction above.
double gamma_q(double a, double x);
double chi_square_sf(double x, double dof);
double normal_sf(double z);

struct FriedmanResult {
    double statistic = 0;
    double p_value = 1;
    std::vector<double> mean_ranks;
};

FriedmanResult friedman(const PairedSampleMatrix& m);

/// P(Q > q) for the studentized range of k means with infinite degrees of freedom.
double studentized_range_sf(double q, int k);

/// Critical value q(alpha, k, inf) from the embedded table (k in 2..20,
/// alpha 0.05 or 0.01). Throws ValidationError outside the table.
double q_critical(double alpha, int k);

inline constexpr double nemenyi_p_floor = 0.001;
inline constexpr double nemenyi_p_cap = 0.9;

struct NemenyiPair {
    std::size_t i = 0, j = 0;
    double rank_difference = 0;  ///< mean rank of i minus mean rank of j
    double statistic = 0;        ///< |rank difference| / sqrt(k(k+1)/(12N))
    double p_value = 1;          ///< exact upper tail
    double p_reported = 1;       ///< clamped to [0.001, 0.9]
    bool significant = false;    ///< statistic >= q_critical
};

struct NemenyiResult {
    double q_crit = 0;
    double critical_difference = 0;
    std::vector<double> mean_ranks;
    std::vector<NemenyiPair> pairs;  ///< i > j, row-major like a lower-triangular table
};

NemenyiResult nemenyi(const PairedSampleMatrix& m, double alpha = 0.05);

/// Lower-triangular "p (statistic)" table; significant cells marked with '*'.
std::string format_nemenyi_table(const NemenyiResult& r, const std::vector<std::string>& names);

inline constexpr double z_critical = 1.96;

struct WilcoxonResult {
    double z = 0;
    double p_value = 1;
    double w_plus = 0;
    std::size_t n = 0;  ///< pairs left after dropping zero differences
    bool degenerate = false;
};

/// Zero differences dropped, midranks, tie-corrected normal approximation
/// without continuity correction; z = (W+ - mu) / sigma, two-tailed p.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

struct EffectSize {
    double r = 0;
    std::string_view label;  ///< negligible, small, medium, large
};

EffectSize effect_size_r(double z, std::size_t n);

double rate(double traditional_count, double bughunter_count);

}  // namespace bugmine::stats
