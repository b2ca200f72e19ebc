#include "captl/logic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace captl {

const char* to_string(Direction d) { return d == Direction::Max ? "Pmax" : "Pmin"; }

StateFormula StateFormula::atom(std::string name) {
    StateFormula f;
    f.kind_ = Kind::Atom;
    f.name_ = std::move(name);
    return f;
}

StateFormula StateFormula::negation(StateFormula operand) {
    StateFormula f;
    f.kind_ = Kind::Not;
    f.lhs_ = std::make_shared<const StateFormula>(std::move(operand));
    return f;
}

StateFormula StateFormula::conjunction(StateFormula lhs, StateFormula rhs) {
    StateFormula f;
    f.kind_ = Kind::And;
    f.lhs_ = std::make_shared<const StateFormula>(std::move(lhs));
    f.rhs_ = std::make_shared<const StateFormula>(std::move(rhs));
    return f;
}

StateFormula StateFormula::disjunction(StateFormula lhs, StateFormula rhs) {
    StateFormula f;
    f.kind_ = Kind::Or;
    f.lhs_ = std::make_shared<const StateFormula>(std::move(lhs));
    f.rhs_ = std::make_shared<const StateFormula>(std::move(rhs));
    return f;
}

bool operator==(const StateFormula& a, const StateFormula& b) {
    if (a.kind_ != b.kind_) return false;
    switch (a.kind_) {
    case StateFormula::Kind::True: return true;
    case StateFormula::Kind::Atom: return a.name_ == b.name_;
    case StateFormula::Kind::Not: return *a.lhs_ == *b.lhs_;
    default: return *a.lhs_ == *b.lhs_ && *a.rhs_ == *b.rhs_;
    }
}

namespace {

// Binding strength: | < & < ! < atoms.
int precedence(StateFormula::Kind k) {
    switch (k) {
    case StateFormula::Kind::Or: return 1;
    case StateFormula::Kind::And: return 2;
    default: return 3;
    }
}

std::string wrap(const StateFormula& f, bool parens) { return parens ? "(" + f.to_string() + ")" : f.to_string(); }

} // namespace

std::string StateFormula::to_string() const {
    switch (kind_) {
    case Kind::True: return "true";
    case Kind::Atom: return "\"" + name_ + "\"";
    case Kind::Not: return "!" + wrap(*lhs_, precedence(lhs_->kind()) < 3);
    case Kind::And:
    case Kind::Or: {
        int p = precedence(kind_);
        // Operators associate to the left, so a right operand of equal strength needs parentheses.
        std::string op = kind_ == Kind::And ? " & " : " | ";
        return wrap(*lhs_, precedence(lhs_->kind()) < p) + op + wrap(*rhs_, precedence(rhs_->kind()) <= p);
    }
    }
    return {};
}

PathFormula PathFormula::next(StateFormula f) { return {Kind::Next, StateFormula::truth(), std::move(f), 0}; }
PathFormula PathFormula::until(StateFormula lhs, StateFormula rhs) {
    return {Kind::Until, std::move(lhs), std::move(rhs), 0};
}
PathFormula PathFormula::bounded_until(StateFormula lhs, StateFormula rhs, std::size_t bound) {
    return {Kind::BoundedUntil, std::move(lhs), std::move(rhs), bound};
}
PathFormula PathFormula::eventually(StateFormula f) {
    return {Kind::Eventually, StateFormula::truth(), std::move(f), 0};
}
PathFormula PathFormula::eventually_always(StateFormula f) {
    return {Kind::EventuallyAlways, StateFormula::truth(), std::move(f), 0};
}

std::string PathFormula::to_string() const {
    auto operand = [](const StateFormula& f) {
        return f.kind() == StateFormula::Kind::And || f.kind() == StateFormula::Kind::Or ? "(" + f.to_string() + ")"
                                                                                         : f.to_string();
    };
    switch (kind_) {
    case Kind::Next: return "X " + operand(rhs_);
    case Kind::Until: return operand(lhs_) + " U " + operand(rhs_);
    case Kind::BoundedUntil: return operand(lhs_) + " U<=" + std::to_string(bound_) + " " + operand(rhs_);
    case Kind::Eventually: return "F " + operand(rhs_);
    case Kind::EventuallyAlways: return "F G " + operand(rhs_);
    }
    return {};
}

bool Interval::overlaps(const Interval& other) const {
    if (is_empty() || other.is_empty()) return false;
    // Order by lower endpoint, then check whether the first ends before the second starts.
    const Interval* a = this;
    const Interval* b = &other;
    if (b->lo < a->lo || (b->lo == a->lo && !b->lo_open && a->lo_open)) std::swap(a, b);
    if (a->hi < b->lo) return false;
    if (a->hi > b->lo) return true;
    return !a->hi_open && !b->lo_open;
}

double Interval::distance_to_boundary(double x) const { return std::min(std::abs(x - lo), std::abs(x - hi)); }

std::string Interval::to_string() const {
    if (lo == 0.0 && !lo_open) return (hi_open ? "< " : "<= ") + format_number(hi);
    return std::string("in ") + (lo_open ? "(" : "[") + format_number(lo) + ", " + format_number(hi) +
           (hi_open ? ")" : "]");
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace captl
