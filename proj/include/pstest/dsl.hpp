#pragma once

// Text format for systems and observers.
//
//   file      := ("system" | "observer") STRING "{" alphabet membrane "}"
//   alphabet  := "alphabet" "{" [ names ] "}"
//   membrane  := "membrane" NUMBER "{" item* "}"
//   item      := "objects" "{" [ mset ] "}"
//              | [ "forall" bindings [ "if" guard ] ":" ] rule
//              | membrane
//              | "hole" NUMBER                          (observers only)
//   rule      := "rule" ID ":" mset "->" targets [ "|" gate+ ]
//   targets   := "(" ")" | target+
//   target    := "(" mset "," dest ")"
//   dest      := "here" | "out" | "in" NUMBER
//   gate      := ("promoters" | "inhibitors") "{" [ names ] "}"
//   bindings  := binding ("," binding)*
//   binding   := ID ("," ID)* "in" "{" frag ("," frag)* "}"
//   guard     := or ; or := and ("||" and)* ; and := atom ("&&" atom)*
//   guardatom := "(" or ")" | operand ("=" | "!=") operand
//   mset      := atom+ ; atom := name [":" NUMBER]
//   names     := name ("," name)*
//   name      := ID | "[" frag+ "]" ; frag := ID | NUMBER
//
// Lexical rules: '#' starts a comment running to end of line; commas between
// list elements are optional separators; a maximal [A-Za-z0-9_]+ word that is
// all digits is a NUMBER, anything else an ID. Keywords (system, observer,
// alphabet, membrane, objects, rule, hole, forall, if, in, here, out,
// promoters, inhibitors, omega) are reserved and cannot name symbols. The
// symbol "omega" may appear only in out-targets of observer skin rules.
// Compound names ([a1 a2 f]) ground each fragment (substituting bound schema
// variables) and join them with '_'.

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pstest/schema.hpp"
#include "pstest/term.hpp"

namespace pstest {

struct ParseError : Error {
    int line;
    int col;
    std::string detail; // message without the position prefix
    ParseError(int line_, int col_, const std::string& msg)
        : Error("line " + std::to_string(line_) + ", col " + std::to_string(col_) + ": " + msg),
          line(line_), col(col_), detail(msg) {}
};

struct SourceSpec {
    enum class Kind { System, Observer };
    Kind kind = Kind::System;
    std::string name;
    std::set<Symbol> alphabet;
    MembraneNode root;                        // systems
    std::optional<ObserverTemplate> observer; // observers
    std::vector<RuleSchema> schemas;          // schemas as written, pre-expansion
    std::vector<std::string> warnings;        // e.g. unsatisfiable schema guards
};

namespace detail {

struct Token {
    enum class Kind {
        Ident, Number, String,
        LBrace, RBrace, LParen, RParen, LBracket, RBracket,
        Comma, Colon, Pipe, Arrow, Eq, Ne, AndAnd, OrOr,
        End,
    };
    Kind kind;
    std::string text;
    int line = 1;
    int col = 1;
};

inline bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

inline std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t j = 0; j < n; ++j) {
            if (src[i + j] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        i += n;
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == '#') {
            std::size_t j = i;
            while (j < src.size() && src[j] != '\n')
                ++j;
            advance(j - i);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        auto single = [&](Token::Kind k) {
            t.kind = k;
            t.text = c;
            advance(1);
        };
        switch (c) {
        case '{': single(Token::Kind::LBrace); break;
        case '}': single(Token::Kind::RBrace); break;
        case '(': single(Token::Kind::LParen); break;
        case ')': single(Token::Kind::RParen); break;
        case '[': single(Token::Kind::LBracket); break;
        case ']': single(Token::Kind::RBracket); break;
        case ',': single(Token::Kind::Comma); break;
        case ':': single(Token::Kind::Colon); break;
        case '|':
            if (i + 1 < src.size() && src[i + 1] == '|') {
                t.kind = Token::Kind::OrOr;
                t.text = "||";
                advance(2);
            } else {
                single(Token::Kind::Pipe);
            }
            break;
        case '-':
            if (i + 1 < src.size() && src[i + 1] == '>') {
                t.kind = Token::Kind::Arrow;
                t.text = "->";
                advance(2);
            } else {
                throw ParseError(line, col, "expected '->'");
            }
            break;
        case '=': single(Token::Kind::Eq); break;
        case '!':
            if (i + 1 < src.size() && src[i + 1] == '=') {
                t.kind = Token::Kind::Ne;
                t.text = "!=";
                advance(2);
            } else {
                throw ParseError(line, col, "expected '!='");
            }
            break;
        case '&':
            if (i + 1 < src.size() && src[i + 1] == '&') {
                t.kind = Token::Kind::AndAnd;
                t.text = "&&";
                advance(2);
            } else {
                throw ParseError(line, col, "expected '&&'");
            }
            break;
        case '"': {
            std::size_t j = i + 1;
            while (j < src.size() && src[j] != '"' && src[j] != '\n')
                ++j;
            if (j >= src.size() || src[j] != '"')
                throw ParseError(line, col, "unterminated string");
            t.kind = Token::Kind::String;
            t.text = src.substr(i + 1, j - i - 1);
            advance(j - i + 1);
            break;
        }
        default: {
            if (!is_word_char(c))
                throw ParseError(line, col, std::string("unexpected character '") + c + "'");
            std::size_t j = i;
            bool all_digits = true;
            while (j < src.size() && is_word_char(src[j])) {
                if (!std::isdigit(static_cast<unsigned char>(src[j])))
                    all_digits = false;
                ++j;
            }
            t.kind = all_digits ? Token::Kind::Number : Token::Kind::Ident;
            t.text = src.substr(i, j - i);
            advance(j - i);
            break;
        }
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.kind = Token::Kind::End;
    end.text = "<end of input>";
    end.line = line;
    end.col = col;
    out.push_back(std::move(end));
    return out;
}

inline bool is_keyword(const std::string& s) {
    static const std::set<std::string> keywords = {
        "system", "observer", "alphabet", "membrane", "objects", "rule",  "hole",
        "forall", "if",       "in",       "here",     "out",     "promoters",
        "inhibitors", "omega",
    };
    return keywords.count(s) != 0;
}

class Parser {
  public:
    explicit Parser(const std::string& src) : tokens_(lex(src)) {}

    SourceSpec parse() {
        SourceSpec spec;
        const Token& head = next();
        if (head.kind != Token::Kind::Ident || (head.text != "system" && head.text != "observer"))
            throw ParseError(head.line, head.col, "expected 'system' or 'observer'");
        spec.kind = head.text == "system" ? SourceSpec::Kind::System : SourceSpec::Kind::Observer;
        observer_ = spec.kind == SourceSpec::Kind::Observer;
        const Token& name = next();
        if (name.kind != Token::Kind::String)
            throw ParseError(name.line, name.col, "expected quoted name");
        spec.name = name.text;
        expect(Token::Kind::LBrace, "'{'");
        parse_alphabet(spec);
        alphabet_ = &spec.alphabet;
        const Token& mem = peek();
        if (!(mem.kind == Token::Kind::Ident && mem.text == "membrane"))
            throw ParseError(mem.line, mem.col, "expected 'membrane'");
        MembraneNode root = parse_membrane(spec, 0);
        expect(Token::Kind::RBrace, "'}'");
        const Token& tail = peek();
        if (tail.kind != Token::Kind::End)
            throw ParseError(tail.line, tail.col, "trailing input after closing '}'");

        if (observer_) {
            if (root.label != observer_skin_label)
                throw ParseError(root_line_, root_col_, "observer skin must be membrane 1");
            if (!hole_seen_)
                throw ParseError(root_line_, root_col_, "observer needs a hole (hole 2)");
            try {
                spec.observer = make_observer(spec.name, root.content);
            } catch (const ObserverShapeError& e) {
                throw ParseError(root_line_, root_col_, e.what());
            }
            spec.root = std::move(root);
        } else {
            root.normalize();
            spec.root = std::move(root);
            auto violations = validate_system(spec.root);
            if (!violations.empty())
                throw ParseError(root_line_, root_col_, violations.front().str());
        }
        spec.schemas = std::move(schemas_);
        spec.warnings = std::move(warnings_);
        return spec;
    }

  private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    bool observer_ = false;
    bool hole_seen_ = false;
    int root_line_ = 1, root_col_ = 1;
    const std::set<Symbol>* alphabet_ = nullptr;
    std::vector<RuleSchema> schemas_;
    std::vector<std::string> warnings_;

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t p = pos_ + ahead;
        if (p >= tokens_.size())
            p = tokens_.size() - 1;
        return tokens_[p];
    }
    const Token& next() {
        const Token& t = peek();
        if (t.kind != Token::Kind::End)
            ++pos_;
        return t;
    }
    const Token& expect(Token::Kind kind, const char* what) {
        const Token& t = peek();
        if (t.kind != kind)
            throw ParseError(t.line, t.col, std::string("expected ") + what + ", found '" + t.text + "'");
        return next();
    }
    bool accept(Token::Kind kind) {
        if (peek().kind == kind) {
            next();
            return true;
        }
        return false;
    }
    bool at_ident(const char* word) const {
        return peek().kind == Token::Kind::Ident && peek().text == word;
    }
    void expect_ident(const char* word) {
        const Token& t = peek();
        if (!at_ident(word))
            throw ParseError(t.line, t.col,
                             std::string("expected '") + word + "', found '" + t.text + "'");
        next();
    }

    std::uint32_t parse_number(const char* what, std::uint32_t min_value) {
        const Token& t = peek();
        if (t.kind != Token::Kind::Number)
            throw ParseError(t.line, t.col, std::string("expected ") + what + ", found '" + t.text + "'");
        if (t.text.size() > 9)
            throw ParseError(t.line, t.col, std::string(what) + " out of range");
        std::uint32_t v = static_cast<std::uint32_t>(std::stoul(t.text));
        if (v < min_value)
            throw ParseError(t.line, t.col, std::string(what) + " must be at least " +
                                                std::to_string(min_value));
        next();
        return v;
    }

    std::string parse_symbol_word(const char* what) {
        const Token& t = peek();
        if (t.kind != Token::Kind::Ident)
            throw ParseError(t.line, t.col, std::string("expected ") + what + ", found '" + t.text + "'");
        if (is_keyword(t.text))
            throw ParseError(t.line, t.col, "'" + t.text + "' is reserved and cannot be used here");
        next();
        return t.text;
    }

    // name := ID | "[" frag+ "]"; returns the fragments (one for plain names).
    SchemaAtom parse_name(bool& compound) {
        SchemaAtom atom;
        const Token& t = peek();
        if (t.kind == Token::Kind::LBracket) {
            next();
            compound = true;
            while (peek().kind == Token::Kind::Ident || peek().kind == Token::Kind::Number) {
                const Token& frag = next();
                if (frag.kind == Token::Kind::Ident && is_keyword(frag.text))
                    throw ParseError(frag.line, frag.col, "'" + frag.text + "' is reserved");
                atom.parts.push_back(frag.text);
            }
            if (atom.parts.empty())
                throw ParseError(peek().line, peek().col, "empty compound name");
            expect(Token::Kind::RBracket, "']'");
            return atom;
        }
        compound = false;
        atom.parts.push_back(parse_symbol_word("symbol name"));
        return atom;
    }

    void parse_alphabet(SourceSpec& spec) {
        expect_ident("alphabet");
        expect(Token::Kind::LBrace, "'{'");
        while (peek().kind != Token::Kind::RBrace) {
            bool compound = false;
            const Token& at = peek();
            SchemaAtom atom = parse_name(compound);
            std::string sym;
            for (std::size_t i = 0; i < atom.parts.size(); ++i)
                sym += (i ? "_" : "") + atom.parts[i];
            if (sym == omega_symbol)
                throw ParseError(at.line, at.col, "'omega' is reserved and cannot be declared");
            spec.alphabet.insert(sym);
            accept(Token::Kind::Comma);
        }
        expect(Token::Kind::RBrace, "'}'");
    }

    // mset := atom+. In target position, a comma followed by a destination
    // keyword ends the multiset instead of separating atoms.
    std::vector<SchemaAtom> parse_mset(bool target_position, bool allow_omega, bool allow_empty,
                                       bool allow_counts = true) {
        std::vector<SchemaAtom> atoms;
        while (true) {
            const Token& t = peek();
            if (t.kind == Token::Kind::Ident && t.text == omega_symbol) {
                if (!allow_omega)
                    throw ParseError(t.line, t.col,
                                     "'omega' may appear only in out-targets of observer rules");
                next();
                SchemaAtom atom;
                atom.parts.push_back(omega_symbol);
                atom.count = parse_count(allow_counts);
                atoms.push_back(std::move(atom));
            } else if (t.kind == Token::Kind::Ident && !is_keyword(t.text)) {
                bool compound = false;
                SchemaAtom atom = parse_name(compound);
                atom.count = parse_count(allow_counts);
                atoms.push_back(std::move(atom));
            } else if (t.kind == Token::Kind::LBracket) {
                bool compound = false;
                SchemaAtom atom = parse_name(compound);
                atom.count = parse_count(allow_counts);
                atoms.push_back(std::move(atom));
            } else if (t.kind == Token::Kind::Comma) {
                if (target_position && is_dest_keyword(peek(1)))
                    break;
                if (atoms.empty())
                    throw ParseError(t.line, t.col, "expected symbol, found ','");
                next();
            } else {
                break;
            }
        }
        if (atoms.empty() && !allow_empty) {
            const Token& t = peek();
            throw ParseError(t.line, t.col, "expected at least one symbol, found '" + t.text + "'");
        }
        return atoms;
    }

    std::uint32_t parse_count(bool allow_counts) {
        if (peek().kind == Token::Kind::Colon) {
            if (!allow_counts)
                throw ParseError(peek().line, peek().col,
                                 "counts are not allowed in promoter or inhibitor sets");
            next();
            return parse_number("count", 1);
        }
        return 1;
    }

    static bool is_dest_keyword(const Token& t) {
        return t.kind == Token::Kind::Ident &&
               (t.text == "here" || t.text == "out" || t.text == "in");
    }

    GuardPtr parse_guard(int depth) {
        if (depth > 32)
            throw ParseError(peek().line, peek().col, "guard nesting too deep");
        GuardPtr left = parse_guard_and(depth);
        while (peek().kind == Token::Kind::OrOr) {
            next();
            left = guard_combine(GuardNode::Op::Or, left, parse_guard_and(depth));
        }
        return left;
    }
    GuardPtr parse_guard_and(int depth) {
        GuardPtr left = parse_guard_atom(depth);
        while (peek().kind == Token::Kind::AndAnd) {
            next();
            left = guard_combine(GuardNode::Op::And, left, parse_guard_atom(depth));
        }
        return left;
    }
    GuardPtr parse_guard_atom(int depth) {
        if (accept(Token::Kind::LParen)) {
            GuardPtr g = parse_guard(depth + 1);
            expect(Token::Kind::RParen, "')'");
            return g;
        }
        std::string lhs = parse_guard_operand();
        const Token& op = peek();
        GuardNode::Op kind;
        if (op.kind == Token::Kind::Eq)
            kind = GuardNode::Op::Eq;
        else if (op.kind == Token::Kind::Ne)
            kind = GuardNode::Op::Ne;
        else
            throw ParseError(op.line, op.col, "expected '=' or '!=', found '" + op.text + "'");
        next();
        return guard_cmp(kind, std::move(lhs), parse_guard_operand());
    }
    std::string parse_guard_operand() {
        const Token& t = peek();
        if (t.kind == Token::Kind::Number) {
            next();
            return t.text;
        }
        if (t.kind == Token::Kind::Ident && !is_keyword(t.text)) {
            next();
            return t.text;
        }
        throw ParseError(t.line, t.col, "expected guard operand, found '" + t.text + "'");
    }

    // Membranes nest arbitrarily in systems; observers are flat (skin + hole).
    MembraneNode parse_membrane(SourceSpec& spec, int depth) {
        if (depth > 32)
            throw ParseError(peek().line, peek().col, "membrane nesting too deep");
        const Token& kw = peek();
        expect_ident("membrane");
        if (depth == 0) {
            root_line_ = kw.line;
            root_col_ = kw.col;
        }
        MembraneNode node;
        node.label = static_cast<int>(parse_number("membrane label", 1));
        expect(Token::Kind::LBrace, "'{'");

        bool objects_seen = false;
        std::vector<RuleSchema> pending;
        std::vector<std::pair<int, int>> pending_pos;
        std::set<int> child_labels;
        while (peek().kind != Token::Kind::RBrace) {
            const Token& t = peek();
            if (t.kind != Token::Kind::Ident)
                throw ParseError(t.line, t.col, "expected membrane item, found '" + t.text + "'");
            if (t.text == "objects") {
                if (objects_seen)
                    throw ParseError(t.line, t.col, "duplicate objects block");
                objects_seen = true;
                next();
                expect(Token::Kind::LBrace, "'{'");
                std::vector<SchemaAtom> atoms = parse_mset(false, false, true);
                expect(Token::Kind::RBrace, "'}'");
                std::map<std::string, std::string> empty_env;
                for (const auto& a : atoms) {
                    std::string sym = ground_atom(a, empty_env);
                    check_symbol(sym, t.line, t.col);
                    node.content.objects.add(sym, a.count);
                }
            } else if (t.text == "membrane") {
                if (observer_)
                    throw ParseError(t.line, t.col, "observers cannot contain nested membranes");
                MembraneNode child = parse_membrane(spec, depth + 1);
                if (!child_labels.insert(child.label).second)
                    throw ParseError(t.line, t.col, "duplicate membrane label " +
                                                        std::to_string(child.label));
                node.children.push_back(std::move(child));
            } else if (t.text == "hole") {
                if (!observer_)
                    throw ParseError(t.line, t.col, "'hole' is only allowed in observers");
                if (hole_seen_)
                    throw ParseError(t.line, t.col, "duplicate hole");
                if (depth != 0)
                    throw ParseError(t.line, t.col, "the hole must sit in the observer skin");
                next();
                std::uint32_t label = parse_number("hole label", 1);
                if (label != static_cast<std::uint32_t>(observer_hole_label))
                    throw ParseError(t.line, t.col, "the hole must be labelled 2");
                hole_seen_ = true;
            } else if (t.text == "rule" || t.text == "forall") {
                pending_pos.emplace_back(t.line, t.col);
                pending.push_back(parse_rule_or_schema(depth == 0));
            } else {
                throw ParseError(t.line, t.col, "expected membrane item, found '" + t.text + "'");
            }
        }
        expect(Token::Kind::RBrace, "'}'");

        ExpansionResult expanded = expand_rule_schemas(pending);
        for (auto& w : expanded.warnings)
            warnings_.push_back(std::move(w));
        for (std::size_t i = 0; i < pending.size(); ++i)
            schemas_.push_back(pending[i]);
        // Locate the originating schema for error messages.
        auto locate = [&](const std::string& rule_id) {
            std::pair<int, int> pos{root_line_, root_col_};
            if (!pending_pos.empty())
                pos = pending_pos[0];
            for (std::size_t j = 0; j < pending.size(); ++j) {
                const std::string& base = pending[j].rule.id;
                if (rule_id == base || rule_id.rfind(base + "__", 0) == 0)
                    pos = pending_pos[j];
            }
            return pos;
        };
        // Ids are checked before the same-effect merge so that two literal
        // copies of a rule still count as a duplicate.
        std::set<std::string> ids;
        for (const std::string& rule_id : expanded.ids) {
            if (!ids.insert(rule_id).second) {
                auto [line, col] = locate(rule_id);
                throw ParseError(line, col, "duplicate rule id '" + rule_id + "'");
            }
        }
        for (const EvolutionRule& r : expanded.rules) {
            auto [line, col] = locate(r.id);
            check_rule_symbols(r, line, col);
        }
        node.content.rules = make_rule_set(std::move(expanded.rules));
        return node;
    }

    RuleSchema parse_rule_or_schema(bool skin) {
        RuleSchema schema;
        std::set<std::string> bound;
        if (at_ident("forall")) {
            next();
            while (true) {
                std::vector<std::string> group;
                group.push_back(parse_symbol_word("schema variable"));
                while (peek().kind == Token::Kind::Comma && peek(1).kind == Token::Kind::Ident &&
                       !is_keyword(peek(1).text)) {
                    // Could be "a, b in ..." or the start of the next binding;
                    // both consume the comma and a variable name.
                    next();
                    group.push_back(parse_symbol_word("schema variable"));
                }
                expect_ident("in");
                expect(Token::Kind::LBrace, "'{'");
                std::vector<std::string> domain;
                while (peek().kind == Token::Kind::Ident || peek().kind == Token::Kind::Number) {
                    const Token& v = next();
                    if (v.kind == Token::Kind::Ident && is_keyword(v.text))
                        throw ParseError(v.line, v.col, "'" + v.text + "' is reserved");
                    domain.push_back(v.text);
                    accept(Token::Kind::Comma);
                }
                if (domain.empty())
                    throw ParseError(peek().line, peek().col, "empty domain");
                expect(Token::Kind::RBrace, "'}'");
                for (const auto& var : group) {
                    if (!bound.insert(var).second)
                        throw ParseError(peek().line, peek().col,
                                         "schema variable '" + var + "' bound twice");
                    schema.params.emplace_back(var, domain);
                }
                if (accept(Token::Kind::Comma))
                    continue;
                break;
            }
            if (at_ident("if")) {
                next();
                schema.guard = parse_guard(0);
            }
            expect(Token::Kind::Colon, "':'");
        }

        expect_ident("rule");
        schema.rule.id = parse_symbol_word("rule id");
        expect(Token::Kind::Colon, "':'");
        schema.rule.lhs = parse_mset(false, false, false);

        expect(Token::Kind::Arrow, "'->'");
        bool saw_target = false;
        bool empty_targets = false;
        if (peek().kind == Token::Kind::LParen && peek(1).kind == Token::Kind::RParen) {
            next();
            next();
            empty_targets = true;
        }
        while (!empty_targets && peek().kind == Token::Kind::LParen) {
            next();
            bool omega_ok = observer_ && skin;
            // Destination follows the multiset; omega is validated against it
            // below once the destination is known.
            std::vector<SchemaAtom> atoms = parse_mset(true, omega_ok, false);
            const Token& comma = peek();
            expect(Token::Kind::Comma, "','");
            const Token& dest = peek();
            if (!is_dest_keyword(dest))
                throw ParseError(dest.line, dest.col,
                                 "expected 'here', 'out' or 'in', found '" + dest.text + "'");
            next();
            bool has_omega = false;
            for (const auto& a : atoms)
                for (const auto& p : a.parts)
                    if (p == omega_symbol)
                        has_omega = true;
            if (dest.text == "here") {
                if (has_omega)
                    throw ParseError(comma.line, comma.col, "'omega' may only be sent out");
                for (auto& a : atoms)
                    schema.rule.here.push_back(std::move(a));
            } else if (dest.text == "out") {
                for (auto& a : atoms)
                    schema.rule.out.push_back(std::move(a));
            } else {
                if (has_omega)
                    throw ParseError(comma.line, comma.col, "'omega' may only be sent out");
                std::uint32_t label = parse_number("membrane label", 1);
                if (observer_ && label != static_cast<std::uint32_t>(observer_hole_label))
                    throw ParseError(dest.line, dest.col, "observer rules may only send into the hole (2)");
                auto& slot = schema.rule.ins[static_cast<int>(label)];
                for (auto& a : atoms)
                    slot.push_back(std::move(a));
            }
            expect(Token::Kind::RParen, "')'");
            saw_target = true;
        }
        if (!saw_target && !empty_targets)
            throw ParseError(peek().line, peek().col,
                             "expected target list or '()' after '->'");

        if (accept(Token::Kind::Pipe)) {
            bool any = false;
            while (at_ident("promoters") || at_ident("inhibitors")) {
                bool promoters = peek().text == "promoters";
                next();
                expect(Token::Kind::LBrace, "'{'");
                std::vector<SchemaAtom> atoms = parse_mset(false, false, true, false);
                expect(Token::Kind::RBrace, "'}'");
                auto& slot = promoters ? schema.rule.promoters : schema.rule.inhibitors;
                for (auto& a : atoms)
                    slot.push_back(std::move(a));
                any = true;
            }
            if (!any)
                throw ParseError(peek().line, peek().col,
                                 "expected 'promoters' or 'inhibitors' after '|'");
        }
        return schema;
    }

    void check_symbol(const std::string& sym, int line, int col) {
        if (sym == omega_symbol)
            return;
        if (alphabet_ && !alphabet_->count(sym))
            throw ParseError(line, col, "undeclared symbol '" + sym + "'");
    }

    void check_rule_symbols(const EvolutionRule& r, int line, int col) {
        auto check_mset = [&](const Multiset& m) {
            for (const auto& [sym, n] : m)
                check_symbol(sym, line, col);
        };
        check_mset(r.lhs);
        check_mset(r.here);
        for (const auto& [sym, n] : r.out)
            if (sym != omega_symbol)
                check_symbol(sym, line, col);
        for (const auto& [label, m] : r.ins)
            check_mset(m);
        for (const auto& p : r.cond.promoters)
            check_symbol(p, line, col);
        for (const auto& i : r.cond.inhibitors) {
            check_symbol(i, line, col);
            if (r.cond.promoters.count(i))
                throw ParseError(line, col, "rule " + r.id + ": '" + i +
                                                "' is both a promoter and an inhibitor");
            if (r.lhs.has(i))
                throw ParseError(line, col, "rule " + r.id + ": '" + i +
                                                "' is consumed but also listed as an inhibitor");
        }
    }
};

} // namespace detail

inline SourceSpec parse_spec(const std::string& text) {
    detail::Parser parser(text);
    return parser.parse();
}

inline SourceSpec parse_spec_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_spec(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(e.line, e.col, path + ": " + e.detail);
    }
}

namespace detail {

inline void serialize_mset_entries(std::string& out, const Multiset& m) {
    bool first = true;
    for (const auto& [sym, n] : m) {
        if (!first)
            out += ", ";
        first = false;
        out += sym;
        if (n > 1) {
            out += ':';
            out += std::to_string(n);
        }
    }
}

inline void serialize_rule(std::string& out, const EvolutionRule& r, const std::string& indent) {
    out += indent + "rule " + r.id + ": ";
    serialize_mset_entries(out, r.lhs);
    out += " ->";
    bool any = false;
    auto target = [&](const Multiset& m, const std::string& dest) {
        if (m.empty())
            return;
        out += " (";
        serialize_mset_entries(out, m);
        out += ", " + dest + ")";
        any = true;
    };
    target(r.here, "here");
    target(r.out, "out");
    for (const auto& [label, m] : r.ins)
        target(m, "in " + std::to_string(label));
    if (!any)
        out += " ()";
    if (!r.cond.promoters.empty() || !r.cond.inhibitors.empty()) {
        out += " |";
        auto gate = [&](const std::set<Symbol>& set, const char* name) {
            if (set.empty())
                return;
            out += std::string(" ") + name + " { ";
            bool first = true;
            for (const auto& s : set) {
                if (!first)
                    out += ", ";
                first = false;
                out += s;
            }
            out += " }";
        };
        gate(r.cond.promoters, "promoters");
        gate(r.cond.inhibitors, "inhibitors");
    }
    out += '\n';
}

inline void serialize_membrane(std::string& out, const MembraneNode& node, int depth,
                               bool observer_skin) {
    std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    std::string inner = indent + "  ";
    out += indent + "membrane " + std::to_string(node.label) + " {\n";
    if (!node.content.objects.empty()) {
        out += inner + "objects { ";
        serialize_mset_entries(out, node.content.objects);
        out += " }\n";
    }
    for (const auto& r : node.content.rules->rules)
        serialize_rule(out, r, inner);
    if (observer_skin)
        out += inner + "hole " + std::to_string(observer_hole_label) + "\n";
    std::vector<const MembraneNode*> kids;
    for (const auto& c : node.children)
        kids.push_back(&c);
    std::sort(kids.begin(), kids.end(),
              [](const MembraneNode* a, const MembraneNode* b) { return a->label < b->label; });
    for (const MembraneNode* c : kids)
        serialize_membrane(out, *c, depth + 1, false);
    out += indent + "}\n";
}

} // namespace detail

// Canonical text form: sorted alphabet, rules sorted by id, multiset entries
// sorted by symbol, children sorted by label. Schemas are emitted in their
// expanded ground form, so parse(serialize(s)) is structurally equal to s.
inline std::string serialize_spec(const SourceSpec& spec) {
    std::string out;
    bool observer = spec.kind == SourceSpec::Kind::Observer;
    out += observer ? "observer" : "system";
    out += " \"" + spec.name + "\" {\n";
    out += "  alphabet { ";
    bool first = true;
    for (const auto& s : spec.alphabet) {
        if (!first)
            out += ", ";
        first = false;
        out += s;
    }
    out += " }\n";
    if (observer) {
        MembraneNode skin;
        skin.label = observer_skin_label;
        skin.content = spec.observer ? spec.observer->skin : spec.root.content;
        detail::serialize_membrane(out, skin, 1, true);
    } else {
        detail::serialize_membrane(out, spec.root, 1, false);
    }
    out += "}\n";
    return out;
}

} // namespace pstest
