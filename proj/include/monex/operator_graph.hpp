#pragma once

#include "monex/types.hpp"

#include <cstddef>
#include <vector>

namespace monex {

enum class Kind { Monotone, FirmlyNonexpansive, Nonexpansive };

const char* kind_name(Kind k);

/// One data pair (x, y): y = T(x) / F(x), or y in A(x) for monotone data.
struct GraphPair {
    Vec x;
    Vec y;
};

/// Finite single-valued operator graph in R^n with a kind tag.
///
/// Construction enforces structure only (dimensions, single-valuedness);
/// the kind-specific inequalities are checked by validate(). Immutable
/// after construction, safe to share across threads.
class OperatorGraph {
public:
    /// Exact duplicate pairs are dropped; two pairs with equal x and
    /// different y are rejected (the data must describe a function).
    OperatorGraph(int dim, Kind kind, std::vector<GraphPair> pairs);

    int dim() const { return dim_; }
    Kind kind() const { return kind_; }
    std::size_t size() const { return pairs_.size(); }
    const std::vector<GraphPair>& pairs() const { return pairs_; }
    const GraphPair& pair(std::size_t i) const { return pairs_[i]; }

private:
    int dim_;
    Kind kind_;
    std::vector<GraphPair> pairs_;
};

struct Violation {
    std::size_t i;
    std::size_t j;
    double slack;  // negative = inequality violated by |slack|
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;
};

/// Check the kind-specific pairwise inequalities with 1e-12 slack for
/// round-off. Reports are symmetric: (i,j) listed iff (j,i) is.
ValidationReport validate(const OperatorGraph& g);

/// Slack tolerance used by validate().
inline constexpr double kValidationSlack = 1e-12;

/// (x, y) -> (x, (x+y)/2). Nonexpansive -> firmly nonexpansive.
OperatorGraph to_firmly(const OperatorGraph& g);

/// (x, y) -> (x, 2y - x). Inverse of to_firmly.
OperatorGraph from_firmly(const OperatorGraph& g);

/// (x, y) -> (y, x - y). Graph of A = F^{-1} - Id. Rejects inputs whose
/// monotone representation would be set-valued (two pairs with equal y).
OperatorGraph firmly_to_monotone(const OperatorGraph& g);

/// (x, y) -> (x + y, x). Inverse of firmly_to_monotone.
OperatorGraph monotone_to_firmly(const OperatorGraph& g);

}  // namespace monex
