#include "mbclust/metrics.hpp"

#include "mbclust/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace mbclust {

namespace {

// 128-bit products keep pair counts exact for any realistic n.
__extension__ typedef __int128 Wide;

// Contingency table of two labelings, rows indexed by the distinct values
// of `a`, columns by those of `b`.
struct Contingency {
    std::vector<std::vector<long long>> counts;
    std::vector<long long> row_sums;
    std::vector<long long> col_sums;
    long long n = 0;
};

std::vector<int> compact(std::span<const int> labels) {
    std::map<int, int> ids;
    for (int label : labels) {
        if (label < 0) throw InvalidParameter("labels must be nonnegative");
        ids.emplace(label, 0);
    }
    int next = 0;
    for (auto& [label, id] : ids) id = next++;
    std::vector<int> out;
    out.reserve(labels.size());
    for (int label : labels) out.push_back(ids.at(label));
    return out;
}

Contingency contingency(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw InvalidParameter("label vectors differ in length");
    if (a.empty()) throw InvalidParameter("label vectors are empty");
    const std::vector<int> ca = compact(a);
    const std::vector<int> cb = compact(b);
    const int ka = *std::max_element(ca.begin(), ca.end()) + 1;
    const int kb = *std::max_element(cb.begin(), cb.end()) + 1;
    Contingency t;
    t.counts.assign(static_cast<std::size_t>(ka), std::vector<long long>(static_cast<std::size_t>(kb), 0));
    t.row_sums.assign(static_cast<std::size_t>(ka), 0);
    t.col_sums.assign(static_cast<std::size_t>(kb), 0);
    for (std::size_t i = 0; i < ca.size(); ++i) {
        ++t.counts[static_cast<std::size_t>(ca[i])][static_cast<std::size_t>(cb[i])];
        ++t.row_sums[static_cast<std::size_t>(ca[i])];
        ++t.col_sums[static_cast<std::size_t>(cb[i])];
    }
    t.n = static_cast<long long>(a.size());
    return t;
}

Wide pairs(long long count) { return static_cast<Wide>(count) * (count - 1) / 2; }

struct SignedRanks {
    std::vector<double> ranks;  // tie-averaged ranks of |d|
    std::vector<char> positive;
    double tie_term = 0.0;      // Σ (t³ − t) over tie groups
};

SignedRanks signed_ranks(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidParameter("wilcoxon: samples differ in length");
    std::vector<double> diffs;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        if (!std::isfinite(d)) throw InvalidParameter("wilcoxon: non-finite difference");
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.size() < 5) throw InsufficientData("wilcoxon: fewer than 5 nonzero differences");

    std::vector<std::size_t> order(diffs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(diffs[a]) < std::abs(diffs[b]); });
    SignedRanks out;
    out.ranks.assign(diffs.size(), 0.0);
    out.positive.assign(diffs.size(), 0);
    for (std::size_t start = 0; start < order.size();) {
        std::size_t end = start + 1;
        while (end < order.size() && std::abs(diffs[order[end]]) == std::abs(diffs[order[start]])) ++end;
        const double rank = 0.5 * static_cast<double>(start + 1 + end);  // mean of start+1 .. end
        const double t = static_cast<double>(end - start);
        out.tie_term += t * t * t - t;
        for (std::size_t r = start; r < end; ++r) out.ranks[order[r]] = rank;
        start = end;
    }
    for (std::size_t i = 0; i < diffs.size(); ++i) out.positive[i] = diffs[i] > 0.0;
    return out;
}

double normal_p_value(const SignedRanks& sr) {
    const double m = static_cast<double>(sr.ranks.size());
    double w_plus = 0.0;
    for (std::size_t i = 0; i < sr.ranks.size(); ++i) {
        if (sr.positive[i]) w_plus += sr.ranks[i];
    }
    const double mean = m * (m + 1.0) / 4.0;
    const double variance = m * (m + 1.0) * (2.0 * m + 1.0) / 24.0 - sr.tie_term / 48.0;
    if (!(variance > 0.0)) return 1.0;
    const double z = std::max(std::abs(w_plus - mean) - 0.5, 0.0) / std::sqrt(variance);
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

// Exact null distribution of the doubled positive-rank sum over all 2^m sign
// assignments, conditional on the observed tie pattern.
double exact_p_value(const SignedRanks& sr) {
    std::vector<long long> doubled(sr.ranks.size());
    long long total = 0;
    long long observed = 0;
    for (std::size_t i = 0; i < sr.ranks.size(); ++i) {
        doubled[i] = std::llround(2.0 * sr.ranks[i]);
        total += doubled[i];
        if (sr.positive[i]) observed += doubled[i];
    }
    std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
    ways[0] = 1.0;
    long long reach = 0;
    for (const long long r : doubled) {
        for (long long s = reach; s >= 0; --s) ways[static_cast<std::size_t>(s + r)] += ways[static_cast<std::size_t>(s)];
        reach += r;
    }
    const long long observed_gap = std::llabs(2 * observed - total);
    double extreme = 0.0;
    for (long long s = 0; s <= total; ++s) {
        if (std::llabs(2 * s - total) >= observed_gap) extreme += ways[static_cast<std::size_t>(s)];
    }
    return std::min(1.0, extreme / std::ldexp(1.0, static_cast<int>(sr.ranks.size())));
}

}  // namespace

double ari(std::span<const int> a, std::span<const int> b) {
    const Contingency t = contingency(a, b);
    Wide index = 0;
    for (const auto& row : t.counts) {
        for (const long long c : row) index += pairs(c);
    }
    Wide sum_a = 0;
    Wide sum_b = 0;
    for (const long long c : t.row_sums) sum_a += pairs(c);
    for (const long long c : t.col_sums) sum_b += pairs(c);
    const Wide total = pairs(t.n);
    // (index − E) / (max − E) with E = sum_a sum_b / total, scaled by 2 total
    const Wide numerator = 2 * (total * index - sum_a * sum_b);
    const Wide denominator = total * (sum_a + sum_b) - 2 * sum_a * sum_b;
    if (denominator == 0) return 1.0;
    return static_cast<double>(static_cast<long double>(numerator) / static_cast<long double>(denominator));
}

double nmi(std::span<const int> a, std::span<const int> b) {
    const Contingency t = contingency(a, b);
    const double n = static_cast<double>(t.n);
    auto entropy = [n](const std::vector<long long>& sums) {
        double h = 0.0;
        for (const long long c : sums) {
            if (c > 0) {
                const double p = static_cast<double>(c) / n;
                h -= p * std::log(p);
            }
        }
        return h;
    };
    const double ha = entropy(t.row_sums);
    const double hb = entropy(t.col_sums);
    if (ha <= 0.0 && hb <= 0.0) return 1.0;
    double mutual = 0.0;
    for (std::size_t i = 0; i < t.counts.size(); ++i) {
        for (std::size_t j = 0; j < t.counts[i].size(); ++j) {
            const long long c = t.counts[i][j];
            if (c == 0) continue;
            const double joint = static_cast<double>(c) / n;
            const double indep = static_cast<double>(t.row_sums[i]) * static_cast<double>(t.col_sums[j]) / (n * n);
            mutual += joint * std::log(joint / indep);
        }
    }
    return std::clamp(mutual / (0.5 * (ha + hb)), 0.0, 1.0);
}

int centroid_index(const Matrix& centers_a, const Matrix& centers_b) {
    if (centers_a.rows() != centers_b.rows() || centers_a.cols() != centers_b.cols() || centers_a.rows() == 0) {
        throw InvalidParameter("centroid_index: center sets differ in shape");
    }
    auto orphans = [](const Matrix& from, const Matrix& to) {
        std::vector<int> hits(static_cast<std::size_t>(to.rows()), 0);
        for (Index i = 0; i < from.rows(); ++i) {
            Index nearest = 0;
            double best = (from.row(i) - to.row(0)).squaredNorm();
            for (Index j = 1; j < to.rows(); ++j) {
                const double dist = (from.row(i) - to.row(j)).squaredNorm();
                if (dist < best) {
                    best = dist;
                    nearest = j;
                }
            }
            ++hits[static_cast<std::size_t>(nearest)];
        }
        return static_cast<int>(std::count(hits.begin(), hits.end(), 0));
    };
    return std::max(orphans(centers_a, centers_b), orphans(centers_b, centers_a));
}

double wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
    const SignedRanks sr = signed_ranks(x, y);
    if (sr.ranks.size() <= kWilcoxonExactLimit) return exact_p_value(sr);
    return normal_p_value(sr);
}

double wilcoxon_signed_rank_normal(std::span<const double> x, std::span<const double> y) {
    return normal_p_value(signed_ranks(x, y));
}

}  // namespace mbclust
