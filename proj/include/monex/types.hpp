#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>

namespace monex {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Extended real value: finite double or +infinity. No sentinel floats;
/// +infinity is a first-class outcome (infeasible programs evaluate to it).
class ExtReal {
public:
    static ExtReal finite(double v) { return ExtReal(v, true); }
    static ExtReal infinity() { return ExtReal(0.0, false); }

    bool is_finite() const { return finite_; }
    double value() const {
        if (!finite_) throw std::logic_error("ExtReal: value() on +infinity");
        return value_;
    }
    /// Finite value, or +HUGE_VAL for display purposes.
    double value_or_inf() const {
        return finite_ ? value_ : std::numeric_limits<double>::infinity();
    }

    friend bool operator==(const ExtReal& a, const ExtReal& b) {
        if (a.finite_ != b.finite_) return false;
        return !a.finite_ || a.value_ == b.value_;
    }

private:
    ExtReal(double v, bool f) : value_(v), finite_(f) {}
    double value_;
    bool finite_;
};

struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dimension mismatch among vectors of a single object.
struct DimensionError : StructuralError {
    using StructuralError::StructuralError;
};

/// Input data rejected (duplicate domain points, wrong kind, invalid graph).
struct InvalidGraphError : StructuralError {
    using StructuralError::StructuralError;
};

/// Enforced size cap hit (facet enumeration, oracle grids).
struct LimitError : StructuralError {
    using StructuralError::StructuralError;
};

/// A quantity that is provably zero (or convergent) in exact arithmetic
/// failed its numerical check; signals solver trouble, not bad input.
struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace monex
