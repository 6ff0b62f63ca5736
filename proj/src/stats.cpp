#include "bugmine/stats.hpp"

#include "bugmine/util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace bugmine::stats {

PairedSampleMatrix::PairedSampleMatrix(std::vector<std::vector<double>> rows) : rows_(std::move(rows))
{
    if (rows_.size() < 2)
        throw ValidationError(fmt::format("need at least 2 rows, got {}", rows_.size()), {});
    const auto k = rows_.front().size();
    if (k < 2)
        throw ValidationError(fmt::format("need at least 2 treatments, got {}", k), {});
    for (std::size_t r = 0; r < rows_.size(); ++r)
        if (rows_[r].size() != k)
            throw ValidationError(fmt::format("row {} has {} values, expected {}", r, rows_[r].size(), k),
                                  {fmt::format("row {}", r)});
}

std::vector<double> midranks(const std::vector<double>& values)
{
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        auto j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]])
            ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2 + 1;
        for (auto t = i; t <= j; ++t)
            ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

namespace {

/// Sum of t^3 - t over tie groups.
double tie_term(const std::vector<double>& values)
{
    auto v = values;
    std::sort(v.begin(), v.end());
    double s = 0;
    for (std::size_t i = 0; i < v.size();) {
        auto j = i;
        while (j + 1 < v.size() && v[j + 1] == v[i])
            ++j;
        const double t = static_cast<double>(j - i + 1);
        s += t * t * t - t;
        i = j + 1;
    }
    return s;
}

}  // namespace

double gamma_q(double a, double x)
{
    if (a <= 0 || x < 0)
        throw ValidationError(fmt::format("gamma_q({}, {}) out of domain", a, x), {});
    if (x == 0)
        return 1;
    constexpr double eps = 1e-16;
    constexpr int max_iter = 10000;
    const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
    if (x < a + 1) {
        // Series for P(a, x).
        double ap = a, sum = 1 / a, del = sum;
        for (int n = 0; n < max_iter; ++n) {
            ap += 1;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * eps)
                break;
        }
        return 1 - sum * std::exp(log_prefix);
    }
    // Lentz continued fraction for Q(a, x).
    constexpr double tiny = std::numeric_limits<double>::min() / eps;
    double b = x + 1 - a, c = 1 / tiny, d = 1 / b, h = d;
    for (int i = 1; i < max_iter; ++i) {
        const double an = -i * (i - a);
        b += 2;
        d = an * d + b;
        if (std::fabs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny)
            c = tiny;
        d = 1 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1) < eps)
            break;
    }
    return std::exp(log_prefix) * h;
}

double chi_square_sf(double x, double dof)
{
    if (x <= 0)
        return 1;
    return gamma_q(dof / 2, x / 2);
}

double normal_sf(double z)
{
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

FriedmanResult friedman(const PairedSampleMatrix& m)
{
    const auto n = static_cast<double>(m.rows());
    const auto k = static_cast<double>(m.cols());
    std::vector<double> rank_sums(m.cols(), 0);
    double ties = 0;
    for (const auto& row : m.data()) {
        auto r = midranks(row);
        for (std::size_t c = 0; c < r.size(); ++c)
            rank_sums[c] += r[c];
        ties += tie_term(row);
    }
    FriedmanResult res;
    for (auto s : rank_sums)
        res.mean_ranks.push_back(s / n);
    const double correction = 1 - ties / (n * (k * k * k - k));
    if (correction <= 0) {
        res.statistic = 0;
        res.p_value = 1;
        return res;
    }
    double ss = 0;
    for (auto s : rank_sums)
        ss += s * s;
    const double chi2 = (12 / (n * k * (k + 1)) * ss - 3 * n * (k + 1)) / correction;
    res.statistic = std::max(0.0, chi2);
    res.p_value = std::clamp(chi_square_sf(res.statistic, k - 1), 0.0, 1.0);
    return res;
}

double studentized_range_sf(double q, int k)
{
    if (k < 2)
        throw ValidationError(fmt::format("studentized range needs k >= 2, got {}", k), {});
    if (q <= 0)
        return 1;
    // P(Q <= q) = k * integral phi(z) [Phi(z) - Phi(z - q)]^(k-1) dz, composite Simpson.
    auto Phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    auto f = [&](double z) {
        const double phi = std::exp(-0.5 * z * z) / std::sqrt(2 * M_PI);
        return phi * std::pow(Phi(z) - Phi(z - q), k - 1);
    };
    const double lo = -9, hi = 9 + q;
    const int steps = 4000;
    const double h = (hi - lo) / steps;
    double s = f(lo) + f(hi);
    for (int i = 1; i < steps; ++i)
        s += f(lo + i * h) * (i % 2 ? 4 : 2);
    const double cdf = k * s * h / 3;
    return std::clamp(1 - cdf, 0.0, 1.0);
}

namespace {

// q(alpha, k, inf) for k = 2..20.
constexpr std::array<double, 19> q05{2.7718, 3.3145, 3.6332, 3.8577, 4.0301, 4.1696, 4.2863, 4.3865, 4.4741, 4.5519,
                                     4.6217, 4.6849, 4.7427, 4.7959, 4.8452, 4.8910, 4.9337, 4.9739, 5.0117};
constexpr std::array<double, 19> q01{3.6428, 4.1203, 4.4028, 4.6028, 4.7570, 4.8822, 4.9872, 5.0775, 5.1566, 5.2270,
                                     5.2902, 5.3476, 5.4001, 5.4485, 5.4933, 5.5350, 5.5740, 5.6107, 5.6452};

}  // namespace

double q_critical(double alpha, int k)
{
    if (k < 2 || k > 20)
        throw ValidationError(fmt::format("no studentized range table entry for k = {}", k), {});
    const auto i = static_cast<std::size_t>(k - 2);
    if (std::fabs(alpha - 0.05) < 1e-12)
        return q05[i];
    if (std::fabs(alpha - 0.01) < 1e-12)
        return q01[i];
    throw ValidationError(fmt::format("no studentized range table for alpha = {}", alpha), {});
}

NemenyiResult nemenyi(const PairedSampleMatrix& m, double alpha)
{
    const auto n = static_cast<double>(m.rows());
    const int k = static_cast<int>(m.cols());
    NemenyiResult res;
    res.q_crit = q_critical(alpha, k);
    const double se = std::sqrt(k * (k + 1) / (12 * n));
    res.critical_difference = res.q_crit * se;
    res.mean_ranks.assign(m.cols(), 0);
    for (const auto& row : m.data()) {
        auto r = midranks(row);
        for (std::size_t c = 0; c < r.size(); ++c)
            res.mean_ranks[c] += r[c] / n;
    }
    for (std::size_t i = 1; i < m.cols(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            NemenyiPair p;
            p.i = i;
            p.j = j;
            p.rank_difference = res.mean_ranks[i] - res.mean_ranks[j];
            p.statistic = std::fabs(p.rank_difference) / se;
            p.p_value = studentized_range_sf(p.statistic, k);
            p.p_reported = std::clamp(p.p_value, nemenyi_p_floor, nemenyi_p_cap);
            p.significant = p.statistic >= res.q_crit;
            res.pairs.push_back(p);
        }
    }
    return res;
}

std::string format_nemenyi_table(const NemenyiResult& r, const std::vector<std::string>& names)
{
    const auto k = r.mean_ranks.size();
    if (names.size() != k)
        throw ValidationError(fmt::format("{} names for {} treatments", names.size(), k), {});
    std::size_t w0 = 0;
    for (const auto& n : names)
        w0 = std::max(w0, n.size());
    constexpr std::size_t cell = 18;
    std::string out = fmt::format("{:<{}}", "", w0);
    for (std::size_t j = 0; j + 1 < k; ++j)
        out += fmt::format(" | {:<{}}", names[j], cell);
    out += '\n';
    for (std::size_t i = 1; i < k; ++i) {
        out += fmt::format("{:<{}}", names[i], w0);
        for (std::size_t j = 0; j + 1 < k; ++j) {
            std::string text;
            if (j < i) {
                auto it = std::find_if(r.pairs.begin(), r.pairs.end(),
                                       [&](const NemenyiPair& p) { return p.i == i && p.j == j; });
                text = fmt::format("{:.4f} ({:.4f}){}", it->p_reported, it->statistic, it->significant ? "*" : "");
            }
            out += fmt::format(" | {:<{}}", text, cell);
        }
        out += '\n';
    }
    return out;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size())
        throw ValidationError(fmt::format("paired samples differ in length ({} vs {})", a.size(), b.size()), {});
    std::vector<double> d;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i])
            d.push_back(a[i] - b[i]);
    WilcoxonResult res;
    res.n = d.size();
    if (d.empty()) {
        res.degenerate = true;
        return res;
    }
    if (d.size() < 5)
        throw ValidationError(fmt::format("need at least 5 nonzero differences, got {}", d.size()), {});
    std::vector<double> mag(d.size());
    std::transform(d.begin(), d.end(), mag.begin(), [](double x) { return std::fabs(x); });
    const auto ranks = midranks(mag);
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] > 0)
            res.w_plus += ranks[i];
    const double n = static_cast<double>(d.size());
    const double mu = n * (n + 1) / 4;
    const double var = n * (n + 1) * (2 * n + 1) / 24 - tie_term(mag) / 48;
    res.z = (res.w_plus - mu) / std::sqrt(var);
    res.p_value = std::min(1.0, 2 * normal_sf(std::fabs(res.z)));
    return res;
}

EffectSize effect_size_r(double z, std::size_t n)
{
    if (n == 0)
        throw ValidationError("effect size needs n > 0", {});
    EffectSize e;
    e.r = z / std::sqrt(static_cast<double>(n));
    const double m = std::fabs(e.r);
    e.label = m >= 0.5 ? "large" : m >= 0.3 ? "medium" : m >= 0.1 ? "small" : "negligible";
    return e;
}

double rate(double traditional_count, double bughunter_count)
{
    if (bughunter_count == 0)
        throw ValidationError("rate: bug-hunter count is zero", {});
    return traditional_count / bughunter_count;
}

}  // namespace bugmine::stats
