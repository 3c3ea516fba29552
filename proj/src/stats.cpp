#include "cbnlearn/stats.hpp"

#include "cbnlearn/error.hpp"

#include <cmath>
#include <vector>

namespace cbnlearn {

std::uint64_t ContingencyTable::total() const {
    return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

ContingencyTable ContingencyTable::transposed() const {
    ContingencyTable t;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) t.counts[i][j] = counts[j][i];
    return t;
}

double chi_squared_critical_value(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("significance level must lie in (0,1)");
    struct Entry {
        double alpha;
        double critical;
    };
    static constexpr Entry kTable[] = {
        {0.10, 2.705543454095404},
        {0.05, 3.841458820694124},
        {0.025, 5.023886187314888},
        {0.01, 6.634896601021214},
        {0.005, 7.879438576622417},
        {0.001, 10.827566170662733},
    };
    for (const auto& e : kTable)
        if (alpha == e.alpha) return e.critical;

    // P(chi2_1 > z^2) = erfc(z / sqrt 2); erfc is decreasing in z.
    double lo = 0.0;
    double hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (std::erfc(mid / std::sqrt(2.0)) > alpha)
            lo = mid;
        else
            hi = mid;
    }
    const double z = 0.5 * (lo + hi);
    return z * z;
}

ContingencyTable tabulate(const Dataset& dataset, VarId x, VarId y, const ValueFilter& filter) {
    if (x == y) throw StructuralError("tabulate needs two distinct variables");
    const std::size_t n = dataset.variables.size();
    if (x.index >= n || y.index >= n) throw StructuralError("tabulate on a variable missing from the dataset");
    for (const auto& [v, value] : filter)
        if (v.index >= n) throw StructuralError("filter on a variable missing from the dataset");

    ContingencyTable table;
    for (const auto& record : dataset.records) {
        bool keep = true;
        for (const auto& [v, value] : filter)
            if (record.state[v] != value) {
                keep = false;
                break;
            }
        if (keep) ++table.counts[record.state[x] ? 1 : 0][record.state[y] ? 1 : 0];
    }
    return table;
}

TestOutcome chi_squared(const ContingencyTable& table, double alpha) {
    TestOutcome out;
    out.critical_value = chi_squared_critical_value(alpha);
    const double total = static_cast<double>(table.total());
    if (total == 0.0) {
        out.inconclusive = true;
        return out;
    }
    double statistic = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const double expected =
                static_cast<double>(table.row_total(i)) * static_cast<double>(table.col_total(j)) / total;
            if (expected < kMinExpectedCount) out.inconclusive = true;
            if (expected > 0.0) {
                const double diff = static_cast<double>(table.counts[i][j]) - expected;
                statistic += diff * diff / expected;
            }
        }
    }
    out.statistic = statistic;
    out.reject_independence = !out.inconclusive && statistic > out.critical_value;
    return out;
}

TestOutcome distributions_differ(const Dataset& a, const Dataset& b, VarId target, double alpha) {
    if (target.index >= a.variables.size() || target.index >= b.variables.size())
        throw StructuralError("target variable missing from dataset");
    ContingencyTable table;
    for (const auto& r : a.records) ++table.counts[0][r.state[target] ? 1 : 0];
    for (const auto& r : b.records) ++table.counts[1][r.state[target] ? 1 : 0];
    return chi_squared(table, alpha);
}

StratifiedOutcome cond_independent(const Dataset& dataset, VarId x, VarId y, const std::set<VarId>& given,
                                   double alpha) {
    if (given.contains(x) || given.contains(y))
        throw StructuralError("conditioning set must exclude the tested variables");
    const Dataset observed = dataset.observational();
    const std::vector<VarId> conditioning(given.begin(), given.end());

    StratifiedOutcome out;
    out.summary.critical_value = chi_squared_critical_value(alpha);
    const std::size_t strata = std::size_t{1} << conditioning.size();
    for (std::size_t s = 0; s < strata; ++s) {
        ValueFilter filter;
        for (std::size_t j = 0; j < conditioning.size(); ++j)
            filter[conditioning[j]] = ((s >> (conditioning.size() - 1 - j)) & 1u) != 0;
        const TestOutcome o = chi_squared(tabulate(observed, x, y, filter), alpha);
        ++out.strata;
        if (o.inconclusive) {
            ++out.inconclusive_strata;
            continue;
        }
        out.summary.statistic = std::max(out.summary.statistic, o.statistic);
        if (o.reject_independence) out.summary.reject_independence = true;
    }
    out.summary.inconclusive = out.inconclusive_strata == out.strata;
    return out;
}

} // namespace cbnlearn
