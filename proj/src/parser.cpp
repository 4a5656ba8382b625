#include "plp/parser.hpp"

#include <cctype>
#include <map>
#include <set>

namespace plp {

using logic::Term;
using logic::TermKind;

namespace {

enum class Tok {
    Ident,     // lowercase identifier
    Variable,  // uppercase identifier
    Number,    // digits, possibly with a fraction part
    Annotate,  // ::
    Arrow,     // :-
    LParen,
    RParen,
    Comma,
    Dot,
    Slash,
    Equals,
    NotEquals,  // \=
    Negation,   // \+
    Amp,        // & (query syntax)
    Pipe,       // | (query syntax)
    Tilde,      // ~ (query syntax)
    End,
};

struct Token {
    Tok kind;
    std::string text;
    int line;
    int column;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        skip_trivia();
        int line = line_, col = col_;
        if (pos_ >= text_.size()) return {Tok::End, "", line, col};
        char c = text_[pos_];
        if (std::islower(static_cast<unsigned char>(c)))
            return {Tok::Ident, identifier(), line, col};
        if (std::isupper(static_cast<unsigned char>(c)))
            return {Tok::Variable, identifier(), line, col};
        if (std::isdigit(static_cast<unsigned char>(c))) return {Tok::Number, number(), line, col};
        if (match("::")) return {Tok::Annotate, "::", line, col};
        if (match(":-")) return {Tok::Arrow, ":-", line, col};
        if (match("\\=")) return {Tok::NotEquals, "\\=", line, col};
        if (match("\\+")) return {Tok::Negation, "\\+", line, col};
        switch (c) {
            case '(': advance(); return {Tok::LParen, "(", line, col};
            case ')': advance(); return {Tok::RParen, ")", line, col};
            case ',': advance(); return {Tok::Comma, ",", line, col};
            case '.': advance(); return {Tok::Dot, ".", line, col};
            case '/': advance(); return {Tok::Slash, "/", line, col};
            case '=': advance(); return {Tok::Equals, "=", line, col};
            case '&': advance(); return {Tok::Amp, "&", line, col};
            case '|': advance(); return {Tok::Pipe, "|", line, col};
            case '~': advance(); return {Tok::Tilde, "~", line, col};
        }
        throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    bool match(const char* two) {
        if (pos_ + 1 < text_.size() && text_[pos_] == two[0] && text_[pos_ + 1] == two[1]) {
            advance();
            advance();
            return true;
        }
        return false;
    }

    void skip_trivia() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '%') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    std::string identifier() {
        std::string s;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
                s += c;
                advance();
            } else {
                break;
            }
        }
        return s;
    }

    std::string number() {
        std::string s;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            s += text_[pos_];
            advance();
        }
        // decimal fraction: '.' followed by a digit (a bare '.' ends a clause)
        if (pos_ + 1 < text_.size() && text_[pos_] == '.' &&
            std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
            s += '.';
            advance();
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                s += text_[pos_];
                advance();
            }
        }
        return s;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class ProgramParser {
public:
    explicit ProgramParser(const std::string& text) : lexer_(text) { shift(); }

    ProbProgram parse() {
        while (cur_.kind != Tok::End) statement();
        finalize();
        return std::move(program_);
    }

private:
    void shift() { cur_ = lexer_.next(); }

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(cur_.line, cur_.column, msg); }

    Token expect(Tok kind, const std::string& what) {
        if (cur_.kind != kind) fail("expected " + what + ", found '" + describe(cur_) + "'");
        Token t = cur_;
        shift();
        return t;
    }

    static std::string describe(const Token& t) {
        return t.kind == Tok::End ? "end of input" : t.text;
    }

    void statement() {
        if (cur_.kind == Tok::Number) {
            prob_statement();
        } else if (cur_.kind == Tok::Ident) {
            clause_statement();
        } else {
            fail("expected a probability annotation or a clause head");
        }
    }

    Rational probability() {
        Token num = expect(Tok::Number, "a probability");
        std::string text = num.text;
        if (cur_.kind == Tok::Slash) {
            shift();
            Token den = expect(Tok::Number, "a denominator");
            if (den.text.find('.') != std::string::npos)
                throw ParseError(den.line, den.column, "denominator must be an integer");
            text += "/" + den.text;
        }
        Rational q;
        try {
            q = parse_rational(text);
        } catch (const Error& e) {
            throw ParseError(num.line, num.column, e.what());
        }
        if (q < 0 || q > 1)
            throw ParseError(num.line, num.column, "probability out of range: " + text);
        return q;
    }

    // relation(T1, ..., Tk) or a bare nullary relation
    std::pair<HeadAtom, Token> atom() {
        Token name = expect(Tok::Ident, "a relation symbol");
        HeadAtom a;
        a.pred = name.text;
        if (cur_.kind == Tok::LParen) {
            shift();
            a.args.push_back(term());
            while (cur_.kind == Tok::Comma) {
                shift();
                a.args.push_back(term());
            }
            expect(Tok::RParen, "')'");
        }
        note_arity(a.pred, static_cast<int>(a.args.size()), name);
        return {a, name};
    }

    void note_arity(const std::string& pred, int arity, const Token& at) {
        auto [it, fresh] = arity_seen_.emplace(pred, arity);
        if (!fresh && it->second != arity)
            throw ParseError(at.line, at.column,
                             "relation " + pred + " used with arity " + std::to_string(arity) +
                                 " but earlier with " + std::to_string(it->second));
    }

    Term term() {
        if (cur_.kind == Tok::Variable) {
            Term t = logic::var(cur_.text);
            shift();
            return t;
        }
        if (cur_.kind == Tok::Ident) {
            Term t = logic::cst(cur_.text);
            shift();
            return t;
        }
        if (cur_.kind == Tok::Number)
            fail("numerals are query syntax; program constants are lowercase identifiers");
        fail("expected a term");
    }

    void prob_statement() {
        Token start = cur_;
        Rational q = probability();
        expect(Tok::Annotate, "'::'");
        auto [head, name_tok] = atom();

        if (cur_.kind == Tok::Dot) {
            shift();
            add_fact(head, q, name_tok, start.line);
            return;
        }
        expect(Tok::Arrow, "'.' or ':-'");
        Clause c;
        c.head = head;
        c.line = start.line;
        c.body = body();
        expect(Tok::Dot, "'.'");
        desugar_prob_rule(q, std::move(c), name_tok);
    }

    void add_fact(const HeadAtom& head, const Rational& q, const Token& name_tok, int line,
                  bool auxiliary = false) {
        std::set<std::string> seen;
        for (const auto& t : head.args) {
            if (t.kind != TermKind::Variable)
                throw ParseError(name_tok.line, name_tok.column,
                                 "probabilistic facts take distinct variables, not constants");
            if (!seen.insert(t.name).second)
                throw ParseError(name_tok.line, name_tok.column,
                                 "probabilistic facts take distinct variables; " + t.name +
                                     " repeats");
        }
        if (!fact_names_.insert(head.pred).second)
            throw ParseError(name_tok.line, name_tok.column,
                             "duplicate probabilistic fact " + head.pred);
        if (head_names_.count(head.pred))
            throw ParseError(name_tok.line, name_tok.column,
                             head.pred + " appears both as a probabilistic fact and a rule head");
        ProbFact f;
        f.name = head.pred;
        f.arity = static_cast<int>(head.args.size());
        f.q = q;
        f.auxiliary = auxiliary;
        f.line = line;
        program_.facts.push_back(std::move(f));
    }

    // p :: h(x...) :- body  becomes  p :: aux_k(x..., y...) plus
    // h(x...) :- body, aux_k(x..., y...), with y the body-only variables.
    void desugar_prob_rule(const Rational& q, Clause c, const Token& name_tok) {
        ++prob_rule_count_;
        std::string aux_name = "aux_" + std::to_string(prob_rule_count_);

        std::vector<Term> aux_args;
        std::set<std::string> seen;
        auto note = [&](const Term& t) {
            if (t.kind == TermKind::Variable && seen.insert(t.name).second)
                aux_args.push_back(t);
        };
        for (const auto& t : c.head.args) note(t);
        for (const auto& l : c.body) {
            if (l.kind == BodyLiteral::Kind::Atom || l.kind == BodyLiteral::Kind::NegAtom) {
                for (const auto& t : l.args) note(t);
            } else {
                note(l.lhs);
                note(l.rhs);
            }
        }

        HeadAtom aux_head;
        aux_head.pred = aux_name;
        aux_head.args = aux_args;
        add_fact(aux_head, q, name_tok, c.line, true);
        note_arity(aux_name, static_cast<int>(aux_args.size()), name_tok);

        c.body.push_back(BodyLiteral::pos(aux_name, aux_args));
        add_rule(std::move(c), name_tok);
    }

    void clause_statement() {
        Token start = cur_;
        auto [head, name_tok] = atom();
        Clause c;
        c.head = head;
        c.line = start.line;
        if (cur_.kind == Tok::Arrow) {
            shift();
            c.body = body();
        }
        expect(Tok::Dot, "'.' or ':-'");
        add_rule(std::move(c), name_tok);
    }

    void add_rule(Clause c, const Token& name_tok) {
        if (fact_names_.count(c.head.pred))
            throw ParseError(name_tok.line, name_tok.column,
                             c.head.pred + " appears both as a probabilistic fact and a rule head");
        head_names_.insert(c.head.pred);
        check_safe(c, name_tok);
        program_.rules.push_back(std::move(c));
    }

    // A variable occurring only in negated atoms or equalities has no atom to
    // ground it. Head variables range over the whole domain, so they are fine.
    void check_safe(const Clause& c, const Token& name_tok) {
        std::set<std::string> bound;
        for (const auto& t : c.head.args)
            if (t.kind == TermKind::Variable) bound.insert(t.name);
        for (const auto& l : c.body)
            if (l.kind == BodyLiteral::Kind::Atom)
                for (const auto& t : l.args)
                    if (t.kind == TermKind::Variable) bound.insert(t.name);
        auto require = [&](const Term& t) {
            if (t.kind == TermKind::Variable && !bound.count(t.name))
                throw ParseError(name_tok.line, name_tok.column,
                                 "unsafe variable " + t.name + " in clause for " + c.head.pred);
        };
        for (const auto& l : c.body) {
            if (l.kind == BodyLiteral::Kind::NegAtom)
                for (const auto& t : l.args) require(t);
            if (l.kind == BodyLiteral::Kind::Eq || l.kind == BodyLiteral::Kind::Neq) {
                require(l.lhs);
                require(l.rhs);
            }
        }
    }

    std::vector<BodyLiteral> body() {
        std::vector<BodyLiteral> out;
        out.push_back(literal());
        while (cur_.kind == Tok::Comma) {
            shift();
            out.push_back(literal());
        }
        return out;
    }

    BodyLiteral literal() {
        if (cur_.kind == Tok::Negation) {
            shift();
            auto [a, tok] = atom();
            (void)tok;
            return BodyLiteral::neg(a.pred, a.args);
        }
        if (cur_.kind == Tok::Variable) {
            Term lhs = term();
            return equality_tail(lhs);
        }
        if (cur_.kind == Tok::Ident) {
            // could be an atom or an equality with a constant left-hand side
            Token name = cur_;
            shift();
            if (cur_.kind == Tok::LParen) {
                shift();
                std::vector<Term> args;
                args.push_back(term());
                while (cur_.kind == Tok::Comma) {
                    shift();
                    args.push_back(term());
                }
                expect(Tok::RParen, "')'");
                note_arity(name.text, static_cast<int>(args.size()), name);
                return BodyLiteral::pos(name.text, std::move(args));
            }
            if (cur_.kind == Tok::Equals || cur_.kind == Tok::NotEquals)
                return equality_tail(logic::cst(name.text));
            note_arity(name.text, 0, name);
            return BodyLiteral::pos(name.text, {});
        }
        fail("expected a body literal");
    }

    BodyLiteral equality_tail(const Term& lhs) {
        if (cur_.kind == Tok::Equals) {
            shift();
            return BodyLiteral::eq(lhs, term());
        }
        if (cur_.kind == Tok::NotEquals) {
            shift();
            return BodyLiteral::neq(lhs, term());
        }
        fail("expected '=' or '\\=' after a term");
    }

    void finalize() {
        try {
            program_.validate();
        } catch (const Error& e) {
            throw ParseError(1, 1, e.what());
        }
    }

    Lexer lexer_;
    Token cur_{Tok::End, "", 0, 0};
    ProbProgram program_;
    std::map<std::string, int> arity_seen_;
    std::set<std::string> fact_names_;
    std::set<std::string> head_names_;
    int prob_rule_count_ = 0;
};

// --- queries ---------------------------------------------------------------

class QueryParser {
public:
    explicit QueryParser(const std::string& text) : lexer_(text) { shift(); }

    logic::FormulaPtr parse() {
        auto f = disjunction();
        if (cur_.kind != Tok::End) fail("trailing input after query");
        return f;
    }

private:
    void shift() { cur_ = lexer_.next(); }
    [[noreturn]] void fail(const std::string& msg) { throw ParseError(cur_.line, cur_.column, msg); }

    logic::FormulaPtr disjunction() {
        auto f = conjunction();
        while (cur_.kind == Tok::Pipe) {
            shift();
            f = logic::disj(f, conjunction());
        }
        return f;
    }

    logic::FormulaPtr conjunction() {
        auto f = unary();
        while (cur_.kind == Tok::Amp || cur_.kind == Tok::Comma) {
            shift();
            f = logic::conj(f, unary());
        }
        return f;
    }

    logic::FormulaPtr unary() {
        if (cur_.kind == Tok::Negation || cur_.kind == Tok::Tilde) {
            shift();
            return logic::negation(unary());
        }
        if (cur_.kind == Tok::LParen) {
            shift();
            auto f = disjunction();
            if (cur_.kind != Tok::RParen) fail("expected ')'");
            shift();
            return f;
        }
        if (cur_.kind == Tok::Variable || cur_.kind == Tok::Number) {
            Term lhs = query_term();
            return equality_tail(lhs);
        }
        if (cur_.kind == Tok::Ident) {
            if (cur_.text == "true") {
                shift();
                return logic::truth(true);
            }
            if (cur_.text == "false") {
                shift();
                return logic::truth(false);
            }
            std::string name = cur_.text;
            shift();
            if (cur_.kind == Tok::LParen) {
                shift();
                std::vector<Term> args;
                args.push_back(query_term());
                while (cur_.kind == Tok::Comma) {
                    shift();
                    args.push_back(query_term());
                }
                if (cur_.kind != Tok::RParen) fail("expected ',' or ')' in query atom");
                shift();
                return logic::atom(name, std::move(args));
            }
            if (cur_.kind == Tok::Equals || cur_.kind == Tok::NotEquals)
                return equality_tail(logic::cst(name));
            return logic::atom(name, {});
        }
        fail("expected a query literal");
    }

    logic::FormulaPtr equality_tail(const Term& lhs) {
        if (cur_.kind == Tok::Equals) {
            shift();
            return logic::equal(lhs, query_term());
        }
        if (cur_.kind == Tok::NotEquals) {
            shift();
            return logic::negation(logic::equal(lhs, query_term()));
        }
        fail("expected '=' or '\\=' after a term");
    }

    Term query_term() {
        if (cur_.kind == Tok::Variable) {
            Term t = logic::var(cur_.text);
            shift();
            return t;
        }
        if (cur_.kind == Tok::Number) {
            if (cur_.text.find('.') != std::string::npos) fail("domain elements are integers");
            Term t = logic::cst(cur_.text);
            shift();
            return t;
        }
        if (cur_.kind == Tok::Ident) {
            Term t = logic::cst(cur_.text);
            shift();
            return t;
        }
        fail("expected a query term");
    }

    Lexer lexer_;
    Token cur_{Tok::End, "", 0, 0};
};

}  // namespace

ProbProgram parse_program(const std::string& text) { return ProgramParser(text).parse(); }

logic::FormulaPtr parse_query(const std::string& text) { return QueryParser(text).parse(); }

}  // namespace plp
