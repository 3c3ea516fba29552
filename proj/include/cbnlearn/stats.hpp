#pragma once

#include "cbnlearn/model.hpp"
#include "cbnlearn/simulator.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <set>

namespace cbnlearn {

inline constexpr double kDefaultAlpha = 0.05;
/// Smallest expected cell count for which the chi-squared approximation is trusted.
inline constexpr double kMinExpectedCount = 5.0;

/// 2x2 counts; rows indexed by the first variable, columns by the second.
struct ContingencyTable {
    std::array<std::array<std::uint64_t, 2>, 2> counts{};

    std::uint64_t total() const;
    std::uint64_t row_total(int row) const { return counts[row][0] + counts[row][1]; }
    std::uint64_t col_total(int col) const { return counts[0][col] + counts[1][col]; }
    ContingencyTable transposed() const;

    friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;
};

struct TestOutcome {
    double statistic = 0.0;
    int degrees_of_freedom = 1;
    double critical_value = 0.0;
    bool reject_independence = false;
    /// Some expected cell fell below kMinExpectedCount; never rejects.
    bool inconclusive = false;
};

/// Upper-alpha quantile of the chi-squared distribution with one degree of
/// freedom. Common levels come from a table; others are solved from erfc.
double chi_squared_critical_value(double alpha);

using ValueFilter = std::map<VarId, bool>;

ContingencyTable tabulate(const Dataset& dataset, VarId x, VarId y, const ValueFilter& filter = {});

/// Pearson's statistic without continuity correction.
TestOutcome chi_squared(const ContingencyTable& table, double alpha = kDefaultAlpha);

/// Rows are the source dataset (a, b), columns the value of target.
TestOutcome distributions_differ(const Dataset& a, const Dataset& b, VarId target,
                                 double alpha = kDefaultAlpha);

struct StratifiedOutcome {
    /// reject_independence: some stratum rejected. inconclusive: every stratum
    /// was inconclusive. statistic: largest conclusive stratum statistic.
    TestOutcome summary;
    std::size_t strata = 0;
    std::size_t inconclusive_strata = 0;

    bool independent() const { return !summary.reject_independence && !summary.inconclusive; }
};

/// Conditional independence of x and y given a set, tested stratum by
/// stratum on the observational records only.
StratifiedOutcome cond_independent(const Dataset& dataset, VarId x, VarId y, const std::set<VarId>& given,
                                   double alpha = kDefaultAlpha);

} // namespace cbnlearn
