#include "captl/requirement.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "captl/errors.hpp"

namespace captl {

// ---------------------------------------------------------------- model

CaptlRequirement::CaptlRequirement(std::vector<Objective> objectives, std::vector<Context> contexts,
                                   std::string initial)
    : objectives_(std::move(objectives)), contexts_(std::move(contexts)), initial_(std::move(initial)) {
    if (objectives_.empty()) throw ValidationError("requirement declares no objectives");
    for (std::size_t i = 0; i < objectives_.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (objectives_[i].id == objectives_[j].id)
                throw ValidationError("duplicate objective '" + objectives_[i].id + "'");
    for (std::size_t i = 0; i < contexts_.size(); ++i) {
        Context& w = contexts_[i];
        for (std::size_t j = 0; j < i; ++j)
            if (contexts_[j].id == w.id) throw ValidationError("duplicate context '" + w.id + "'");
        for (const std::string* ref : {&w.source, &w.target})
            if (!find(*ref))
                throw ValidationError("context '" + w.id + "' refers to unknown objective '" + *ref + "'");
        if (w.source == w.target) throw ValidationError("context '" + w.id + "' loops on objective '" + w.source + "'");
        if (!w.interval.well_formed())
            throw ValidationError("context '" + w.id + "': malformed interval " + w.interval.to_string());
        w.formula = objective(w.source).path;
    }
    if (!find(initial_)) throw ValidationError("initial objective '" + initial_ + "' is not declared");
    if (topological_order().size() != objectives_.size()) throw ValidationError("objective graph is cyclic");
}

std::optional<std::size_t> CaptlRequirement::find(std::string_view id) const {
    for (std::size_t i = 0; i < objectives_.size(); ++i)
        if (objectives_[i].id == id) return i;
    return std::nullopt;
}

std::size_t CaptlRequirement::index_of(std::string_view id) const {
    auto i = find(id);
    if (!i) throw ValidationError("unknown objective '" + std::string(id) + "'");
    return *i;
}

const Context* CaptlRequirement::find_context(std::string_view id) const {
    for (const Context& w : contexts_)
        if (w.id == id) return &w;
    return nullptr;
}

std::vector<std::size_t> CaptlRequirement::topological_order() const {
    std::size_t n = objectives_.size();
    std::vector<std::size_t> indegree(n, 0);
    for (const Context& w : contexts_) ++indegree[*find(w.target)];
    std::vector<std::size_t> order;
    std::vector<bool> done(n, false);
    // Kahn's algorithm, always taking the lowest ready index.
    for (bool progress = true; progress;) {
        progress = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i] || indegree[i] != 0) continue;
            done[i] = true;
            order.push_back(i);
            for (const Context& w : contexts_)
                if (w.source == objectives_[i].id) --indegree[*find(w.target)];
            progress = true;
            break;
        }
    }
    return order;
}

std::vector<Context> contexts_of(const CaptlRequirement& req, std::string_view q) {
    req.index_of(q);
    std::vector<Context> result;
    for (const Context& w : req.contexts())
        if (w.source == q) result.push_back(w);
    return result;
}

std::vector<std::string> validate_persistence(const CaptlRequirement& req) {
    std::vector<std::string> violations;
    for (const Objective& q : req.objectives()) {
        if (q.direction != Direction::Max || q.path.kind() != PathFormula::Kind::EventuallyAlways)
            violations.push_back("objective '" + q.id + "' is not of the form Pmax [ F G B ]");
        auto ws = contexts_of(req, q.id);
        for (const Context& w : ws)
            if (!(w.formula == q.path))
                violations.push_back("context '" + w.id + "' does not bound the formula of '" + q.id + "'");
        bool overlap = false;
        for (std::size_t i = 0; i < ws.size(); ++i)
            for (std::size_t j = i + 1; j < ws.size(); ++j)
                if (ws[i].interval.overlaps(ws[j].interval)) {
                    violations.push_back("objective '" + q.id + "': intervals overlap (" + ws[i].id + " " +
                                         ws[i].interval.to_string() + ", " + ws[j].id + " " +
                                         ws[j].interval.to_string() + ")");
                    overlap = true;
                }
        if (ws.empty() || overlap) continue;
        std::vector<Interval> sorted;
        for (const Context& w : ws) sorted.push_back(w.interval);
        std::sort(sorted.begin(), sorted.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        bool contiguous = sorted.front().lo == 0.0 && !sorted.front().lo_open;
        for (std::size_t i = 1; contiguous && i < sorted.size(); ++i)
            contiguous = sorted[i - 1].hi == sorted[i].lo && sorted[i - 1].hi_open != sorted[i].lo_open;
        if (!contiguous || !sorted.back().hi_open || !(sorted.back().hi > 0.0))
            violations.push_back("objective '" + q.id + "': union not of form [0,c)");
    }
    return violations;
}

// ---------------------------------------------------------------- lexer

namespace {

enum class Tok { Ident, Number, String, Punct, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t line;
    std::size_t column;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            std::size_t line = line_, column = column_;
            if (pos_ >= text_.size()) {
                out.push_back({Tok::End, "", line, column});
                return out;
            }
            char c = text_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t start = pos_;
                while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                    advance();
                out.push_back({Tok::Ident, std::string(text_.substr(start, pos_ - start)), line, column});
            } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                out.push_back({Tok::Number, number(), line, column});
            } else if (c == '"') {
                advance();
                std::size_t start = pos_;
                while (pos_ < text_.size() && text_[pos_] != '"' && text_[pos_] != '\n') advance();
                if (pos_ >= text_.size() || text_[pos_] != '"') throw ParseError("unterminated string", line, column);
                out.push_back({Tok::String, std::string(text_.substr(start, pos_ - start)), line, column});
                advance();
            } else {
                static constexpr std::string_view two[] = {"->", "<=", ">=", "=?"};
                std::string_view rest = text_.substr(pos_);
                std::string op;
                for (auto t : two)
                    if (rest.starts_with(t)) op = t;
                if (op.empty()) {
                    if (std::string_view("=[];:()<>,!&|").find(c) == std::string_view::npos)
                        throw ParseError(std::string("unexpected character '") + c + "'", line, column);
                    op = std::string(1, c);
                }
                for (std::size_t i = 0; i < op.size(); ++i) advance();
                out.push_back({Tok::Punct, op, line, column});
            }
        }
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < text_.size()) {
            if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
                advance();
            } else if (text_.substr(pos_).starts_with("//")) {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    std::string number() {
        std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
        };
        digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            advance();
            digits();
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            advance();
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) advance();
            digits();
        }
        return std::string(text_.substr(start, pos_ - start));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

// ---------------------------------------------------------------- parser

class Parser {
public:
    explicit Parser(std::string_view text) : tokens_(Lexer(text).run()) {}

    CaptlRequirement requirement() {
        std::vector<Objective> objectives;
        std::vector<Context> contexts;
        std::optional<std::string> initial;
        while (peek().kind != Tok::End) {
            const Token& head = peek();
            if (is_ident("objective")) {
                next();
                Objective q;
                q.id = ident("objective name");
                expect("=");
                q.direction = direction();
                expect("[");
                q.path = objective_path();
                expect("]");
                expect(";");
                objectives.push_back(std::move(q));
            } else if (is_ident("context")) {
                next();
                Context w;
                w.id = ident("context name");
                expect(":");
                w.source = ident("source objective");
                expect("->");
                w.target = ident("target objective");
                expect_ident("when");
                expect_ident("Pmax");
                w.interval = bound(false);
                expect(";");
                contexts.push_back(std::move(w));
            } else if (is_ident("initial")) {
                next();
                if (initial) throw error(head, "duplicate initial declaration");
                initial = ident("objective name");
                expect(";");
            } else {
                throw error(head, "expected 'objective', 'context' or 'initial'");
            }
        }
        if (objectives.empty()) throw ParseError("requirement declares no objectives", peek().line, peek().column);
        if (!initial) initial = objectives.front().id;
        return CaptlRequirement(std::move(objectives), std::move(contexts), *initial);
    }

    Query query() {
        Query q;
        q.direction = direction();
        if (is_punct("=?"))
            next();
        else if (!is_punct("["))
            q.bound = bound(true);
        expect("[");
        q.path = query_path();
        expect("]");
        finish();
        return q;
    }

    StateFormula lone_state_formula() {
        StateFormula f = state_formula();
        finish();
        return f;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& next() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

    bool is_ident(std::string_view word) const { return peek().kind == Tok::Ident && peek().text == word; }
    bool is_punct(std::string_view p) const { return peek().kind == Tok::Punct && peek().text == p; }

    static ParseError error(const Token& t, const std::string& message) {
        std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        return ParseError(message + ", found " + found, t.line, t.column);
    }

    void expect(std::string_view p) {
        if (!is_punct(p)) throw error(peek(), "expected '" + std::string(p) + "'");
        next();
    }

    void expect_ident(std::string_view word) {
        if (!is_ident(word)) throw error(peek(), "expected '" + std::string(word) + "'");
        next();
    }

    void finish() {
        if (peek().kind != Tok::End) throw error(peek(), "unexpected trailing input");
    }

    std::string ident(const char* what) {
        if (peek().kind != Tok::Ident) throw error(peek(), std::string("expected ") + what);
        return next().text;
    }

    double number() {
        const Token& t = peek();
        if (t.kind != Tok::Number) throw error(t, "expected a number");
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size())
            throw ParseError("malformed number '" + t.text + "'", t.line, t.column);
        next();
        return v;
    }

    Direction direction() {
        if (is_ident("Pmax")) {
            next();
            return Direction::Max;
        }
        if (is_ident("Pmin")) {
            next();
            return Direction::Min;
        }
        throw error(peek(), "expected 'Pmax' or 'Pmin'");
    }

    Interval bound(bool allow_lower) {
        const Token& head = peek();
        Interval j;
        if (is_punct("<") || is_punct("<=")) {
            bool open = next().text == "<";
            j = {0.0, false, number(), open};
        } else if (allow_lower && (is_punct(">") || is_punct(">="))) {
            bool open = next().text == ">";
            j = {number(), open, 1.0, false};
        } else if (is_ident("in")) {
            next();
            if (!is_punct("[") && !is_punct("(")) throw error(peek(), "expected '[' or '('");
            j.lo_open = next().text == "(";
            j.lo = number();
            expect(",");
            j.hi = number();
            if (!is_punct("]") && !is_punct(")")) throw error(peek(), "expected ']' or ')'");
            j.hi_open = next().text == ")";
        } else {
            throw error(head, allow_lower ? "expected a bound" : "expected '<', '<=' or 'in'");
        }
        if (!j.well_formed()) throw ParseError("malformed interval " + j.to_string(), head.line, head.column);
        return j;
    }

    PathFormula objective_path() {
        expect_ident("F");
        if (is_ident("G")) {
            next();
            return PathFormula::eventually_always(state_formula());
        }
        return PathFormula::eventually(state_formula());
    }

    PathFormula query_path() {
        if (is_ident("X")) {
            next();
            return PathFormula::next(state_formula());
        }
        if (is_ident("F")) return objective_path();
        StateFormula lhs = state_formula();
        expect_ident("U");
        if (is_punct("<=")) {
            next();
            const Token& t = peek();
            double k = number();
            if (k < 0 || k != static_cast<double>(static_cast<std::size_t>(k)))
                throw ParseError("step bound must be a non-negative integer", t.line, t.column);
            return PathFormula::bounded_until(std::move(lhs), state_formula(), static_cast<std::size_t>(k));
        }
        return PathFormula::until(std::move(lhs), state_formula());
    }

    StateFormula state_formula() {
        StateFormula f = conjunction();
        while (is_punct("|")) {
            next();
            f = StateFormula::disjunction(std::move(f), conjunction());
        }
        return f;
    }

    StateFormula conjunction() {
        StateFormula f = unary();
        while (is_punct("&")) {
            next();
            f = StateFormula::conjunction(std::move(f), unary());
        }
        return f;
    }

    StateFormula unary() {
        if (is_punct("!")) {
            next();
            return StateFormula::negation(unary());
        }
        if (is_punct("(")) {
            next();
            StateFormula f = state_formula();
            expect(")");
            return f;
        }
        if (is_ident("true")) {
            next();
            return StateFormula::truth();
        }
        if (peek().kind == Tok::String) return StateFormula::atom(next().text);
        throw error(peek(), "expected a state formula");
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

} // namespace

CaptlRequirement parse_requirement(std::string_view text) { return Parser(text).requirement(); }

Query parse_query(std::string_view text) { return Parser(text).query(); }

StateFormula parse_state_formula(std::string_view text) { return Parser(text).lone_state_formula(); }

std::string print_requirement(const CaptlRequirement& req) {
    std::string out;
    for (const Objective& q : req.objectives())
        out += "objective " + q.id + " = " + to_string(q.direction) + " [ " + q.path.to_string() + " ];\n";
    for (const Context& w : req.contexts())
        out += "context " + w.id + " : " + w.source + " -> " + w.target + " when Pmax " + w.interval.to_string() +
               ";\n";
    out += "initial " + req.initial() + ";\n";
    return out;
}

} // namespace captl
