#include "contextdl/parse.hpp"

#include <algorithm>
#include <cctype>

#include "contextdl/chase.hpp"

namespace contextdl {

namespace {

struct Token {
    enum Kind { Ident, Quoted, NullLabel, HashIdent, Punct, Directive, Number, End };
    Kind kind = End;
    std::string text;
    int line = 1;
    int column = 1;

    bool is_punct(const char* p) const { return kind == Punct && text == p; }
};

class Lexer {
public:
    Lexer(const std::string& text, std::string filename)
        : text_(text), filename_(std::move(filename)) {}

    const std::string& filename() const { return filename_; }

    [[noreturn]] void fail(Errc code, const std::string& message, int line, int column) const {
        throw ParseError({code, message, filename_, line, column});
    }
    [[noreturn]] void fail(Errc code, const std::string& message, const Token& at) const {
        fail(code, message, at.line, at.column);
    }

    const Token& peek() {
        if (!lookahead_) lookahead_ = lex();
        return *lookahead_;
    }

    Token next() {
        if (lookahead_) {
            Token t = *lookahead_;
            lookahead_.reset();
            return t;
        }
        return lex();
    }

private:
    const std::string& text_;
    std::string filename_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
    std::optional<Token> lookahead_;

    char cur() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    char ahead() const { return pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0'; }
    bool done() const { return pos_ >= text_.size(); }

    void advance() {
        if (done()) return;
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_trivia() {
        while (!done()) {
            char c = cur();
            if (c == '%') {
                while (!done() && cur() != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    static bool ident_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
               std::isdigit(static_cast<unsigned char>(c));
    }
    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    }

    std::string read_ident() {
        std::string out;
        while (!done() && ident_char(cur())) {
            out += cur();
            advance();
        }
        return out;
    }

    Token lex() {
        skip_trivia();
        Token t;
        t.line = line_;
        t.column = column_;
        if (done()) {
            t.kind = Token::End;
            return t;
        }
        char c = cur();

        if (c == '_' && ahead() == ':') {
            advance();
            advance();
            if (!ident_start(cur())) fail(Errc::SyntaxError, "expected null label after '_:'", t.line, t.column);
            t.kind = Token::NullLabel;
            t.text = read_ident();
            return t;
        }
        if (c == '#') {
            advance();
            if (!ident_start(cur())) fail(Errc::SyntaxError, "expected identifier after '#'", t.line, t.column);
            t.kind = Token::HashIdent;
            t.text = read_ident();
            return t;
        }
        if (c == '@') {
            advance();
            if (!std::isalpha(static_cast<unsigned char>(cur())))
                fail(Errc::SyntaxError, "expected directive name after '@'", t.line, t.column);
            t.kind = Token::Directive;
            while (!done() && (ident_char(cur()) || cur() == '-')) {
                t.text += cur();
                advance();
            }
            return t;
        }
        if (c == '"') {
            advance();
            t.kind = Token::Quoted;
            while (true) {
                if (done() || cur() == '\n')
                    fail(Errc::SyntaxError, "unterminated string literal", t.line, t.column);
                if (cur() == '"') {
                    advance();
                    break;
                }
                if (cur() == '\\') {
                    advance();
                    char e = cur();
                    if (e == '"' || e == '\\') {
                        t.text += e;
                        advance();
                    } else {
                        fail(Errc::SyntaxError, "unsupported escape in string literal", line_, column_);
                    }
                } else {
                    t.text += cur();
                    advance();
                }
            }
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            // A digit run; becomes a Number when followed by a fractional
            // part, otherwise a plain identifier-like constant.
            std::string digits;
            while (!done() && std::isdigit(static_cast<unsigned char>(cur()))) {
                digits += cur();
                advance();
            }
            if (cur() == '.' && std::isdigit(static_cast<unsigned char>(ahead()))) {
                digits += '.';
                advance();
                while (!done() && std::isdigit(static_cast<unsigned char>(cur()))) {
                    digits += cur();
                    advance();
                }
                t.kind = Token::Number;
                t.text = digits;
                return t;
            }
            if (ident_char(cur())) digits += read_ident();
            t.kind = Token::Ident;
            t.text = digits;
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            t.kind = Token::Ident;
            t.text = read_ident();
            return t;
        }
        if (c == ':' && ahead() == '-') {
            advance();
            advance();
            t.kind = Token::Punct;
            t.text = ":-";
            return t;
        }
        if (c == '-' && ahead() == '>') {
            advance();
            advance();
            t.kind = Token::Punct;
            t.text = "->";
            return t;
        }
        if (c == '(' || c == ')' || c == ',' || c == '.' || c == ':' || c == '=') {
            advance();
            t.kind = Token::Punct;
            t.text = std::string(1, c);
            return t;
        }
        fail(Errc::SyntaxError, std::string("unexpected character '") + c + "'", t.line, t.column);
    }
};

bool uppercase_initial(const std::string& s) {
    return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

Degree parse_degree_token(Lexer& lex) {
    Token t = lex.next();
    if (t.kind != Token::Number && t.kind != Token::Ident)
        lex.fail(Errc::SyntaxError, "expected a decimal confidence degree", t);
    auto d = Degree::parse(t.text);
    if (!d) lex.fail(Errc::SyntaxError, "malformed confidence degree '" + t.text + "'", t);
    if (!d->in_range())
        lex.fail(Errc::ConfidenceOutOfRange, "confidence degree " + t.text + " is outside [0,1]", t);
    return *d;
}

// Raw parsed item: either an atom or a comparison whose right side is still
// unresolved (capitalized identifiers become variables only when they occur
// in some body atom).
struct RawComparison {
    Term left;
    Token right_token;
    Term right;        // resolved later when right_token has to be inspected
    bool right_fixed;  // quoted / hash / lowercase: no resolution needed
    int line;
    int column;
};

struct StatementParser {
    Lexer& lex;
    Schema& schema;

    // mode switches
    bool allow_nulls = false;       // instances
    bool idents_are_vars = false;   // rule text: capitalized identifier = variable

    Term parse_term(const Token& t) {
        switch (t.kind) {
            case Token::Ident:
                if (idents_are_vars && uppercase_initial(t.text)) return Term::variable(t.text);
                return Term::constant(t.text);
            case Token::Quoted:
                return Term::constant(t.text);
            case Token::HashIdent:
                return Term::constant(t.text);
            case Token::Number:
                return Term::constant(t.text);
            case Token::NullLabel:
                if (!allow_nulls)
                    lex.fail(Errc::SyntaxError, "labeled nulls are not allowed here", t);
                return Term::null(t.text);
            default:
                lex.fail(Errc::SyntaxError, "expected a term, got '" + t.text + "'", t);
        }
    }

    Atom parse_atom_after_predicate(const Token& pred) {
        Atom atom{pred.text, {}};
        Token open = lex.next();
        if (!open.is_punct("(")) lex.fail(Errc::SyntaxError, "expected '(' after predicate", open);
        if (lex.peek().is_punct(")")) {
            lex.next();
        } else {
            while (true) {
                atom.terms.push_back(parse_term(lex.next()));
                Token sep = lex.next();
                if (sep.is_punct(")")) break;
                if (!sep.is_punct(",")) lex.fail(Errc::SyntaxError, "expected ',' or ')'", sep);
            }
        }
        if (!schema.declare(atom.predicate, atom.arity()))
            lex.fail(Errc::ArityMismatch,
                     "predicate '" + atom.predicate + "' used with arity " +
                         std::to_string(atom.arity()) + " but declared with arity " +
                         std::to_string(*schema.arity(atom.predicate)),
                     pred);
        return atom;
    }

    // Parses `atom` or `Var = term` items separated by commas, stopping
    // before the given terminator tokens.
    void parse_items(std::vector<Atom>& atoms, std::vector<RawComparison>& comparisons) {
        while (true) {
            Token first = lex.next();
            if (first.kind == Token::Ident && lex.peek().is_punct("=")) {
                if (!uppercase_initial(first.text))
                    lex.fail(Errc::SyntaxError, "comparison left side must be a variable", first);
                lex.next();  // '='
                Token rhs = lex.next();
                RawComparison rc;
                rc.left = Term::variable(first.text);
                rc.right_token = rhs;
                rc.line = first.line;
                rc.column = first.column;
                if (rhs.kind == Token::Ident && uppercase_initial(rhs.text)) {
                    rc.right_fixed = false;  // variable or constant, decided against body vars
                } else {
                    rc.right_fixed = true;
                    rc.right = parse_term(rhs);
                    if (rc.right.is_variable()) rc.right_fixed = false;
                }
                comparisons.push_back(std::move(rc));
            } else if (first.kind == Token::Ident) {
                atoms.push_back(parse_atom_after_predicate(first));
            } else {
                lex.fail(Errc::SyntaxError, "expected an atom or comparison", first);
            }
            if (lex.peek().is_punct(",")) {
                lex.next();
                continue;
            }
            break;
        }
    }

    std::vector<ComparisonAtom> resolve_comparisons(const std::vector<RawComparison>& raw,
                                                    const std::vector<Atom>& body) {
        std::set<std::string> body_vars;
        for (const Atom& a : body)
            for (const Term& t : a.terms)
                if (t.is_variable()) body_vars.insert(t.text());
        std::vector<ComparisonAtom> out;
        for (const RawComparison& rc : raw) {
            Term right;
            if (rc.right_fixed) {
                right = rc.right;
            } else {
                // Capitalized right side: a variable when it occurs in the
                // body, otherwise a constant (e.g. `C = Java`).
                const std::string& name = rc.right_token.text;
                right = body_vars.count(name) ? Term::variable(name) : Term::constant(name);
            }
            if (!body_vars.count(rc.left.text()))
                lex.fail(Errc::NotRangeRestricted,
                         "comparison variable " + rc.left.text() + " does not occur in the body",
                         rc.line, rc.column);
            out.emplace_back(rc.left, right);
        }
        return out;
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// Sources and instances
// ---------------------------------------------------------------------------

SourceDatabase parse_source_file(const std::string& text, const std::string& filename) {
    Lexer lex(text, filename);
    Schema schema;
    StatementParser sp{lex, schema};

    Token t = lex.next();
    if (t.kind != Token::Directive || t.text != "source")
        lex.fail(Errc::SyntaxError, "expected '@source <id>' header", t);
    Token id = lex.next();
    if (id.kind != Token::Ident) lex.fail(Errc::SyntaxError, "expected source id", id);
    Token conf = lex.next();
    if (conf.kind != Token::Directive || conf.text != "confidence")
        lex.fail(Errc::SyntaxError, "expected '@confidence <decimal>'", conf);
    Degree tau = parse_degree_token(lex);

    SourceDatabase source(id.text, tau);
    while (true) {
        Token first = lex.next();
        if (first.kind == Token::End) break;
        if (first.kind != Token::Ident)
            lex.fail(Errc::SyntaxError, "expected a fact", first);
        Atom atom = sp.parse_atom_after_predicate(first);
        Token dot = lex.next();
        if (!dot.is_punct(".")) lex.fail(Errc::SyntaxError, "expected '.' after fact", dot);
        if (!atom.is_ground())
            lex.fail(Errc::SyntaxError, "facts must be ground", first);
        source.add(Fact(std::move(atom)));
    }
    return source;
}

std::vector<Atom> parse_instance(const std::string& text, const std::string& filename) {
    Lexer lex(text, filename);
    Schema schema;
    StatementParser sp{lex, schema};
    sp.allow_nulls = true;

    std::vector<Atom> atoms;
    while (true) {
        Token first = lex.next();
        if (first.kind == Token::End) break;
        if (first.kind != Token::Ident)
            lex.fail(Errc::SyntaxError, "expected an atom", first);
        Atom atom = sp.parse_atom_after_predicate(first);
        Token dot = lex.next();
        if (!dot.is_punct(".")) lex.fail(Errc::SyntaxError, "expected '.' after atom", dot);
        if (std::find(atoms.begin(), atoms.end(), atom) == atoms.end())
            atoms.push_back(std::move(atom));
    }
    std::sort(atoms.begin(), atoms.end());
    return atoms;
}

// ---------------------------------------------------------------------------
// Context files
// ---------------------------------------------------------------------------

namespace {

void raise_constraint_diagnostics(Lexer& lex, const std::vector<Diagnostic>& problems,
                                  const Token& at) {
    if (problems.empty()) return;
    lex.fail(problems.front().code, problems.front().message, at);
}

}  // namespace

Context parse_context_file(const std::string& text, const std::string& filename) {
    Lexer lex(text, filename);
    Schema schema;
    StatementParser sp{lex, schema};
    sp.idents_are_vars = true;

    Context ctx;
    std::set<std::string> seen_ids;
    std::map<std::string, std::pair<int, int>> positive_positions;

    while (true) {
        Token id = lex.next();
        if (id.kind == Token::End) break;
        if (id.kind != Token::Ident)
            lex.fail(Errc::SyntaxError, "expected a constraint id", id);
        Token colon = lex.next();
        if (!colon.is_punct(":")) lex.fail(Errc::SyntaxError, "expected ':' after constraint id", colon);
        if (!seen_ids.insert(id.text).second)
            lex.fail(Errc::MalformedConstraint, "duplicate constraint id '" + id.text + "'", id);

        std::vector<Atom> body;
        std::vector<RawComparison> raw_comparisons;
        sp.parse_items(body, raw_comparisons);
        if (body.empty())
            lex.fail(Errc::MalformedConstraint, id.text + ": constraint body has no atom", id);

        Token arrow = lex.next();
        if (!arrow.is_punct("->")) lex.fail(Errc::SyntaxError, "expected '->'", arrow);

        Token head_first = lex.next();
        if (head_first.kind == Token::Ident && head_first.text == "false" &&
            !lex.peek().is_punct("(")) {
            // negative constraint
            Token dot = lex.next();
            if (!dot.is_punct(".")) lex.fail(Errc::SyntaxError, "expected '.' after 'false'", dot);
            if (body.size() > 2)
                lex.fail(Errc::MalformedConstraint,
                         id.text + ": negative constraint needs one or two body atoms, got " +
                             std::to_string(body.size()),
                         id);
            NegativeConstraint c{id.text, body, sp.resolve_comparisons(raw_comparisons, body)};
            raise_constraint_diagnostics(lex, check_constraint(c), id);
            (body.size() == 1 ? ctx.negatives1 : ctx.negatives2).push_back(std::move(c));
            continue;
        }

        if (head_first.kind == Token::Ident && lex.peek().is_punct("=")) {
            // EGD: equality list
            if (!raw_comparisons.empty())
                lex.fail(Errc::MalformedConstraint,
                         id.text + ": comparisons are not supported in EGD bodies", id);
            if (body.size() != 2)
                lex.fail(Errc::MalformedConstraint,
                         id.text + ": an EGD needs exactly two body atoms, got " +
                             std::to_string(body.size()),
                         id);
            std::set<Term> v1 = body[0].variables();
            std::set<Term> v2 = body[1].variables();
            std::vector<std::pair<Term, Term>> equalities;
            Token current = head_first;
            while (true) {
                if (current.kind != Token::Ident || !uppercase_initial(current.text))
                    lex.fail(Errc::MalformedConstraint,
                             id.text + ": EGD equalities must relate variables", current);
                Term a = Term::variable(current.text);
                Token eq = lex.next();
                if (!eq.is_punct("=")) lex.fail(Errc::SyntaxError, "expected '=' in EGD head", eq);
                Token rhs = lex.next();
                if (rhs.kind != Token::Ident || !uppercase_initial(rhs.text))
                    lex.fail(Errc::MalformedConstraint,
                             id.text + ": EGD equalities must relate variables", rhs);
                Term b = Term::variable(rhs.text);
                // Orient: first member from atom1, second from atom2.
                if (v1.count(a) && v2.count(b)) {
                    equalities.emplace_back(a, b);
                } else if (v1.count(b) && v2.count(a)) {
                    equalities.emplace_back(b, a);
                } else {
                    lex.fail(Errc::MalformedConstraint,
                             id.text + ": equality " + a.text() + " = " + b.text() +
                                 " does not relate the two body atoms",
                             current);
                }
                Token sep = lex.next();
                if (sep.is_punct(".")) break;
                if (!sep.is_punct(",")) lex.fail(Errc::SyntaxError, "expected ',' or '.'", sep);
                current = lex.next();
            }
            EgdConstraint c{id.text, body[0], body[1], std::move(equalities)};
            raise_constraint_diagnostics(lex, check_constraint(c), id);
            ctx.egds.push_back(std::move(c));
            continue;
        }

        // positive constraint
        if (head_first.kind != Token::Ident)
            lex.fail(Errc::SyntaxError, "expected a head atom, 'false', or an equality", head_first);
        if (!raw_comparisons.empty())
            lex.fail(Errc::MalformedConstraint,
                     id.text + ": comparisons are not supported in positive constraints", id);
        if (body.size() != 1)
            lex.fail(Errc::MalformedConstraint,
                     id.text + ": a positive constraint has exactly one body atom, got " +
                         std::to_string(body.size()),
                     id);
        Atom head = sp.parse_atom_after_predicate(head_first);
        Token dot = lex.next();
        if (!dot.is_punct(".")) lex.fail(Errc::SyntaxError, "expected '.' after head atom", dot);
        PositiveConstraint c{id.text, body[0], std::move(head)};
        raise_constraint_diagnostics(lex, check_constraint(c), id);
        positive_positions[c.id] = {id.line, id.column};
        ctx.positives.push_back(std::move(c));
    }

    AcyclicityResult acyclicity = is_weakly_acyclic(ctx.positives);
    if (!acyclicity.ok) {
        // Attach the diagnostic to the first constraint on the cycle.
        std::pair<int, int> where{1, 1};
        if (!acyclicity.cycle.empty()) {
            auto it = positive_positions.find(acyclicity.cycle.front().constraint_id);
            if (it != positive_positions.end()) where = it->second;
        }
        throw ParseError({Errc::NotWeaklyAcyclic,
                          "positive constraints are not weakly acyclic; cycle: " +
                              describe_cycle(acyclicity.cycle),
                          filename, where.first, where.second});
    }
    return ctx;
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

namespace {

ConjunctiveQuery parse_query_statement(Lexer& lex, StatementParser& sp, const Token& head_pred) {
    ConjunctiveQuery q;
    Atom head = sp.parse_atom_after_predicate(head_pred);
    q.head_predicate = head.predicate;
    q.head = head.terms;

    Token arrow = lex.next();
    if (!arrow.is_punct(":-")) lex.fail(Errc::SyntaxError, "expected ':-' after query head", arrow);

    std::vector<RawComparison> raw_comparisons;
    if (!(lex.peek().kind == Token::Directive) && !(lex.peek().kind == Token::End) &&
        !lex.peek().is_punct(".")) {
        sp.parse_items(q.body, raw_comparisons);
    }
    q.comparisons = sp.resolve_comparisons(raw_comparisons, q.body);

    if (lex.peek().is_punct(".")) lex.next();
    if (lex.peek().kind == Token::Directive && lex.peek().text == "tau") {
        lex.next();
        q.tau_in = parse_degree_token(lex);
    }

    for (const Diagnostic& d : check_query(q))
        lex.fail(d.code, d.message, head_pred);
    return q;
}

}  // namespace

std::vector<ConjunctiveQuery> parse_query_file(const std::string& text,
                                               const std::string& filename) {
    Lexer lex(text, filename);
    Schema schema;
    StatementParser sp{lex, schema};
    sp.idents_are_vars = true;

    std::vector<ConjunctiveQuery> out;
    while (true) {
        Token first = lex.next();
        if (first.kind == Token::End) break;
        if (first.kind != Token::Ident)
            lex.fail(Errc::SyntaxError, "expected a query", first);
        out.push_back(parse_query_statement(lex, sp, first));
    }
    return out;
}

ConjunctiveQuery parse_query(const std::string& text, const std::string& filename) {
    std::vector<ConjunctiveQuery> all = parse_query_file(text, filename);
    if (all.size() != 1)
        throw ParseError({Errc::SyntaxError,
                          "expected exactly one query, got " + std::to_string(all.size()), filename,
                          1, 1});
    return all.front();
}

}  // namespace contextdl
