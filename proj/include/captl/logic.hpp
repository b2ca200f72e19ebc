#pragma once

#include <cstddef>
#include <memory>
#include <string>

namespace captl {

enum class Direction { Max, Min };

const char* to_string(Direction d);

/// Propositional state formula: true, "atom", !f, f & g, f | g.
class StateFormula {
public:
    enum class Kind { True, Atom, Not, And, Or };

    StateFormula() = default; // true

    static StateFormula truth() { return {}; }
    static StateFormula atom(std::string name);
    static StateFormula negation(StateFormula operand);
    static StateFormula conjunction(StateFormula lhs, StateFormula rhs);
    static StateFormula disjunction(StateFormula lhs, StateFormula rhs);

    Kind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }
    const StateFormula& operand() const { return *lhs_; }
    const StateFormula& lhs() const { return *lhs_; }
    const StateFormula& rhs() const { return *rhs_; }

    /// Text in the requirement/query syntax; parses back to an equal formula.
    std::string to_string() const;

    friend bool operator==(const StateFormula& a, const StateFormula& b);

private:
    Kind kind_ = Kind::True;
    std::string name_;
    std::shared_ptr<const StateFormula> lhs_;
    std::shared_ptr<const StateFormula> rhs_;
};

bool operator==(const StateFormula& a, const StateFormula& b);

/// Path formulas: X f, f U g, f U<=k g, F f, F G f.
class PathFormula {
public:
    enum class Kind { Next, Until, BoundedUntil, Eventually, EventuallyAlways };

    static PathFormula next(StateFormula f);
    static PathFormula until(StateFormula lhs, StateFormula rhs);
    static PathFormula bounded_until(StateFormula lhs, StateFormula rhs, std::size_t bound);
    static PathFormula eventually(StateFormula f);
    static PathFormula eventually_always(StateFormula f);

    Kind kind() const noexcept { return kind_; }
    /// The right-hand state formula (the target, or B for F G B).
    const StateFormula& target() const noexcept { return rhs_; }
    /// Left operand of (bounded) until; `true` otherwise.
    const StateFormula& guard() const noexcept { return lhs_; }
    std::size_t bound() const noexcept { return bound_; }

    std::string to_string() const;

    friend bool operator==(const PathFormula& a, const PathFormula& b) = default;

private:
    PathFormula(Kind k, StateFormula lhs, StateFormula rhs, std::size_t bound)
        : kind_(k), lhs_(std::move(lhs)), rhs_(std::move(rhs)), bound_(bound) {}

    Kind kind_;
    StateFormula lhs_;
    StateFormula rhs_;
    std::size_t bound_ = 0;
};

/// A sub-interval of [0,1] with open or closed endpoints.
struct Interval {
    double lo = 0.0;
    bool lo_open = false;
    double hi = 1.0;
    bool hi_open = false;

    static Interval below(double c) { return {0.0, false, c, true}; }     // [0, c)
    static Interval at_most(double c) { return {0.0, false, c, false}; }  // [0, c]

    bool contains(double x) const {
        bool above_lo = lo_open ? x > lo : x >= lo;
        bool below_hi = hi_open ? x < hi : x <= hi;
        return above_lo && below_hi;
    }
    bool is_empty() const { return lo > hi || (lo == hi && (lo_open || hi_open)); }
    bool well_formed() const { return lo >= 0.0 && hi <= 1.0 && !is_empty(); }
    bool overlaps(const Interval& other) const;
    double distance_to_boundary(double x) const;

    /// `< c`, `<= c`, or `in [a,b)` style text.
    std::string to_string() const;

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

} // namespace captl
