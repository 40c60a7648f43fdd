#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "taskgen/objects.hpp"
#include "taskgen/rng.hpp"

namespace taskgen {

// ============================================================================
// Scenario vocabulary
// ============================================================================

enum class Direction { left, right, above, below, any };

inline const char* to_string(Direction d) {
    switch (d) {
        case Direction::left: return "left";
        case Direction::right: return "right";
        case Direction::above: return "above";
        case Direction::below: return "below";
        case Direction::any: return "any";
    }
    return "?";
}

inline std::optional<Direction> direction_from_string(const std::string& s) {
    if (s == "left") return Direction::left;
    if (s == "right") return Direction::right;
    if (s == "above") return Direction::above;
    if (s == "below") return Direction::below;
    if (s == "any") return Direction::any;
    return std::nullopt;
}

inline Direction opposite(Direction d) {
    switch (d) {
        case Direction::left: return Direction::right;
        case Direction::right: return Direction::left;
        case Direction::above: return Direction::below;
        case Direction::below: return Direction::above;
        case Direction::any: return Direction::any;
    }
    return Direction::any;
}

enum class InteractionVerb { hit, roll, fall, slide, bounce, destroy };

inline const char* to_string(InteractionVerb v) {
    switch (v) {
        case InteractionVerb::hit: return "hit";
        case InteractionVerb::roll: return "roll";
        case InteractionVerb::fall: return "fall";
        case InteractionVerb::slide: return "slide";
        case InteractionVerb::bounce: return "bounce";
        case InteractionVerb::destroy: return "destroy";
    }
    return "?";
}

enum class RestrictionVerb { cannot_hit, cannot_fall };

inline const char* to_string(RestrictionVerb v) {
    return v == RestrictionVerb::cannot_hit ? "cannotHit" : "cannotFall";
}

// One step of the causal chain. `direction_options` holds the overloaded
// direction parameter (e.g. left or above); empty for fall/destroy which take
// no direction.
struct Interaction {
    InteractionVerb verb = InteractionVerb::hit;
    ObjectRef actor;
    ObjectRef patient;
    std::vector<Direction> direction_options;

    bool operator==(const Interaction& o) const {
        auto a = direction_options, b = o.direction_options;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        return verb == o.verb && actor == o.actor && patient == o.patient && a == b;
    }
};

struct Restriction {
    RestrictionVerb verb = RestrictionVerb::cannot_fall;
    ObjectRef subject;
    ObjectRef object;               // cannotHit only
    Direction direction = Direction::any; // cannotHit only

    bool operator==(const Restriction& o) const {
        return verb == o.verb && subject == o.subject && object == o.object &&
               direction == o.direction;
    }
    bool operator<(const Restriction& o) const {
        auto key = [](const Restriction& r) {
            return std::make_tuple(static_cast<int>(r.verb), r.subject.name, r.object.name,
                                   static_cast<int>(r.direction));
        };
        return key(*this) < key(o);
    }
};

struct ScenarioDefinition {
    std::string name;
    std::vector<Interaction> interactions;
    std::vector<Restriction> restrictions;
    std::vector<ObjectRef> object_refs; // first-use order

    const ObjectRef* find_ref(const std::string& ref_name) const {
        for (const auto& r : object_refs)
            if (r.name == ref_name) return &r;
        return nullptr;
    }

    bool operator==(const ScenarioDefinition& o) const {
        auto a = restrictions, b = o.restrictions;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        return name == o.name && interactions == o.interactions && a == b;
    }
};

// ============================================================================
// Parsing
// ============================================================================

enum class ParseErrorKind { syntax, unknown_term, arity, undeclared_object };

class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrorKind kind, std::string message, int line, int col)
        : std::runtime_error(message + " (line " + std::to_string(line) + ", col " +
                             std::to_string(col) + ")"),
          kind(kind), line(line), col(col) {}

    ParseErrorKind kind;
    int line;
    int col;
};

namespace detail {

struct Token {
    enum Type { lbrace, rbrace, lbracket, rbracket, lparen, rparen,
                chain_sep, comma, conj, disj, ident, end } type = end;
    std::string text;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_ws_and_comments();
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= src_.size()) {
            t.type = Token::end;
            return t;
        }
        char c = src_[pos_];
        switch (c) {
            case '{': t.type = Token::lbrace; advance(); return t;
            case '}': t.type = Token::rbrace; advance(); return t;
            case '[': t.type = Token::lbracket; advance(); return t;
            case ']': t.type = Token::rbracket; advance(); return t;
            case '(': t.type = Token::lparen; advance(); return t;
            case ')': t.type = Token::rparen; advance(); return t;
            case '>': t.type = Token::chain_sep; advance(); return t;
            case ',': t.type = Token::comma; advance(); return t;
            case '&': t.type = Token::conj; advance(); return t;
            case '|': t.type = Token::disj; advance(); return t;
            default: break;
        }
        // UTF-8 logical operators from the notation: ∧ and ∨.
        if (match_utf8("\xe2\x88\xa7")) { t.type = Token::conj; return t; }
        if (match_utf8("\xe2\x88\xa8")) { t.type = Token::disj; return t; }
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                advance();
            t.type = Token::ident;
            t.text = std::string(src_.substr(start, pos_ - start));
            return t;
        }
        throw ParseError(ParseErrorKind::syntax,
                         std::string("unexpected character '") + c + "'", line_, col_);
    }

private:
    void advance() {
        if (pos_ < src_.size()) {
            if (src_[pos_] == '\n') { ++line_; col_ = 1; }
            else ++col_;
            ++pos_;
        }
    }

    bool match_utf8(std::string_view bytes) {
        if (src_.substr(pos_, bytes.size()) == bytes) {
            for (size_t i = 0; i < bytes.size(); ++i) ++pos_;
            col_ += 1;
            return true;
        }
        return false;
    }

    void skip_ws_and_comments() {
        for (;;) {
            while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
                advance();
            if (pos_ < src_.size() && src_[pos_] == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
                continue;
            }
            return;
        }
    }

    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

// Splits "rBlock2" into class spelling "rBlock" and keeps the full name.
inline ObjectRef resolve_ref(const std::string& spelling, int line, int col) {
    size_t end = spelling.size();
    while (end > 0 && std::isdigit(static_cast<unsigned char>(spelling[end - 1]))) --end;
    std::string base = spelling.substr(0, end);
    const ObjectClass* cls = class_by_spelling(base);
    if (!cls)
        throw ParseError(ParseErrorKind::unknown_term,
                         "unknown object class '" + base + "'", line, col);
    return ObjectRef{spelling, cls->kind};
}

struct TermArgs {
    std::vector<std::string> object_args;
    std::vector<std::pair<int, int>> object_positions;
    std::vector<Direction> directions;
};

} // namespace detail

// Parses one scenario from DSL text. Throws ParseError on malformed input.
//
// Surface form mirrors the notation used in scenario tables:
//   {[hit(bird)(pig)(any)] > [destroy(bird)(pig)]}, {[cannotFall(rBlock)]}
// with '&' (or U+2227) joining restrictions and '|' (or U+2228) joining
// overloaded directions. Lines starting with '#' are comments; an optional
// "name: <ident>" line before the body names the scenario.
inline ScenarioDefinition parse_scenario(const std::string& text) {
    ScenarioDefinition def;

    // Pull out the optional name line before lexing the body.
    std::string body;
    body.reserve(text.size());
    {
        std::istringstream in(text);
        std::string line;
        bool name_taken = false;
        while (std::getline(in, line)) {
            std::string stripped = line;
            size_t h = stripped.find('#');
            if (h != std::string::npos) stripped = stripped.substr(0, h);
            size_t first = stripped.find_first_not_of(" \t\r");
            if (!name_taken && first != std::string::npos &&
                stripped.compare(first, 5, "name:") == 0) {
                std::string value = stripped.substr(first + 5);
                size_t vb = value.find_first_not_of(" \t\r");
                size_t ve = value.find_last_not_of(" \t\r");
                if (vb != std::string::npos) def.name = value.substr(vb, ve - vb + 1);
                name_taken = true;
                body += "\n"; // keep line numbering aligned
                continue;
            }
            body += line;
            body += "\n";
        }
    }

    using Token = detail::Token;
    detail::Lexer lex(body);
    Token tok = lex.next();

    auto expect = [&](Token::Type type, const char* what) {
        if (tok.type != type)
            throw ParseError(ParseErrorKind::syntax, std::string("expected ") + what,
                             tok.line, tok.col);
        Token got = tok;
        tok = lex.next();
        return got;
    };

    // Reads one bracketed term: [verb(args)...]. Returns verb + raw args.
    auto parse_term = [&](std::string& verb, detail::TermArgs& args) {
        expect(Token::lbracket, "'['");
        Token v = expect(Token::ident, "a verb");
        verb = v.text;
        args = {};
        while (tok.type == Token::lparen) {
            tok = lex.next();
            Token arg = expect(Token::ident, "a parameter");
            if (direction_from_string(arg.text)) {
                args.directions.push_back(*direction_from_string(arg.text));
                while (tok.type == Token::disj) {
                    tok = lex.next();
                    Token more = expect(Token::ident, "a direction");
                    auto d = direction_from_string(more.text);
                    if (!d)
                        throw ParseError(ParseErrorKind::syntax,
                                         "expected a direction after '|', got '" + more.text + "'",
                                         more.line, more.col);
                    args.directions.push_back(*d);
                }
            } else {
                args.object_args.push_back(arg.text);
                args.object_positions.emplace_back(arg.line, arg.col);
            }
            expect(Token::rparen, "')'");
        }
        expect(Token::rbracket, "']'");
        return v;
    };

    auto declare = [&](const std::string& spelling, int line, int col) {
        ObjectRef ref = detail::resolve_ref(spelling, line, col);
        if (!def.find_ref(ref.name)) def.object_refs.push_back(ref);
        return ref;
    };

    // Interaction block.
    expect(Token::lbrace, "'{'");
    if (tok.type == Token::rbrace)
        throw ParseError(ParseErrorKind::syntax, "a scenario needs at least one interaction",
                         tok.line, tok.col);
    for (;;) {
        std::string verb;
        detail::TermArgs args;
        Token vt = parse_term(verb, args);

        Interaction ia;
        bool needs_direction = true;
        std::vector<Direction> allowed;
        if (verb == "hit") {
            ia.verb = InteractionVerb::hit;
            allowed = {Direction::left, Direction::right, Direction::above, Direction::below,
                       Direction::any};
        } else if (verb == "roll") {
            ia.verb = InteractionVerb::roll;
            allowed = {Direction::left, Direction::right};
        } else if (verb == "slide") {
            ia.verb = InteractionVerb::slide;
            allowed = {Direction::left, Direction::right};
        } else if (verb == "bounce") {
            ia.verb = InteractionVerb::bounce;
            allowed = {Direction::left, Direction::right, Direction::above, Direction::below};
        } else if (verb == "fall") {
            ia.verb = InteractionVerb::fall;
            needs_direction = false;
        } else if (verb == "destroy") {
            ia.verb = InteractionVerb::destroy;
            needs_direction = false;
        } else {
            throw ParseError(ParseErrorKind::unknown_term, "unknown interaction verb '" + verb + "'",
                             vt.line, vt.col);
        }

        size_t expected_objects = 2;
        if (args.object_args.size() != expected_objects ||
            (needs_direction && args.directions.empty()) ||
            (!needs_direction && !args.directions.empty()))
            throw ParseError(ParseErrorKind::arity,
                             std::string("wrong parameters for '") + verb + "'", vt.line, vt.col);

        ia.actor = declare(args.object_args[0], args.object_positions[0].first,
                           args.object_positions[0].second);
        ia.patient = declare(args.object_args[1], args.object_positions[1].first,
                             args.object_positions[1].second);
        for (Direction d : args.directions) {
            if (std::find(allowed.begin(), allowed.end(), d) == allowed.end())
                throw ParseError(ParseErrorKind::syntax,
                                 std::string("direction '") + to_string(d) + "' not allowed for '" +
                                     verb + "'",
                                 vt.line, vt.col);
            if (std::find(ia.direction_options.begin(), ia.direction_options.end(), d) ==
                ia.direction_options.end())
                ia.direction_options.push_back(d);
        }
        def.interactions.push_back(std::move(ia));

        if (tok.type == Token::chain_sep) {
            tok = lex.next();
            continue;
        }
        break;
    }
    expect(Token::rbrace, "'}'");
    expect(Token::comma, "','");
    expect(Token::lbrace, "'{'");

    // Restriction block (possibly empty).
    if (tok.type != Token::rbrace) {
        for (;;) {
            std::string verb;
            detail::TermArgs args;
            Token vt = parse_term(verb, args);

            Restriction r;
            if (verb == "cannotHit") {
                r.verb = RestrictionVerb::cannot_hit;
                if (args.object_args.size() != 2 || args.directions.size() != 1)
                    throw ParseError(ParseErrorKind::arity, "cannotHit takes (a)(b)(d)", vt.line,
                                     vt.col);
                r.direction = args.directions[0];
            } else if (verb == "cannotFall") {
                r.verb = RestrictionVerb::cannot_fall;
                if (args.object_args.size() != 1 || !args.directions.empty())
                    throw ParseError(ParseErrorKind::arity, "cannotFall takes (a)", vt.line, vt.col);
            } else {
                throw ParseError(ParseErrorKind::unknown_term,
                                 "unknown restriction verb '" + verb + "'", vt.line, vt.col);
            }

            // Restrictions may only mention objects that take part in an
            // interaction.
            auto resolve_declared = [&](const std::string& spelling, int idx) {
                auto [pl, pc] = args.object_positions[idx];
                ObjectRef ref = detail::resolve_ref(spelling, pl, pc);
                if (!def.find_ref(ref.name))
                    throw ParseError(ParseErrorKind::undeclared_object,
                                     "object '" + ref.name + "' does not appear in any interaction",
                                     pl, pc);
                return ref;
            };
            r.subject = resolve_declared(args.object_args[0], 0);
            if (r.verb == RestrictionVerb::cannot_hit) r.object = resolve_declared(args.object_args[1], 1);
            def.restrictions.push_back(std::move(r));

            if (tok.type == Token::conj) {
                tok = lex.next();
                continue;
            }
            break;
        }
    }
    expect(Token::rbrace, "'}'");
    if (tok.type != Token::end)
        throw ParseError(ParseErrorKind::syntax, "trailing input after scenario", tok.line, tok.col);
    return def;
}

// Canonical ASCII form; parse(print(def)) reproduces an equivalent definition.
inline std::string print_scenario(const ScenarioDefinition& def) {
    std::ostringstream out;
    if (!def.name.empty()) out << "name: " << def.name << "\n";
    out << "{";
    for (size_t i = 0; i < def.interactions.size(); ++i) {
        const Interaction& ia = def.interactions[i];
        if (i) out << " > ";
        out << "[" << to_string(ia.verb) << "(" << ia.actor.name << ")(" << ia.patient.name << ")";
        if (!ia.direction_options.empty()) {
            out << "(";
            for (size_t k = 0; k < ia.direction_options.size(); ++k) {
                if (k) out << "|";
                out << to_string(ia.direction_options[k]);
            }
            out << ")";
        }
        out << "]";
    }
    out << "}, {";
    for (size_t i = 0; i < def.restrictions.size(); ++i) {
        const Restriction& r = def.restrictions[i];
        if (i) out << " & ";
        out << "[" << to_string(r.verb) << "(" << r.subject.name << ")";
        if (r.verb == RestrictionVerb::cannot_hit)
            out << "(" << r.object.name << ")(" << to_string(r.direction) << ")";
        out << "]";
    }
    out << "}\n";
    return out.str();
}

// ============================================================================
// Validation
// ============================================================================

struct Violation {
    std::string rule;
    std::string message;
};

struct ValidateOptions {
    // The "bird shoots first, a pig dies last" convention. All catalog
    // scenarios follow it, but it is a convention rather than a grammar rule,
    // so it can be switched off.
    bool require_goal_rule = true;
};

inline std::vector<Violation> validate_scenario(const ScenarioDefinition& def,
                                                const ValidateOptions& opts = {}) {
    std::vector<Violation> out;
    if (def.interactions.empty()) {
        out.push_back({"EmptyChain", "scenario has no interactions"});
        return out;
    }

    // Causal chaining: the actor of step i+1 must appear in step i.
    for (size_t i = 1; i < def.interactions.size(); ++i) {
        const Interaction& prev = def.interactions[i - 1];
        const Interaction& cur = def.interactions[i];
        if (!(cur.actor == prev.actor || cur.actor == prev.patient))
            out.push_back({"CausalChainBroken",
                           "interaction " + std::to_string(i + 1) + " actor '" + cur.actor.name +
                               "' does not appear in interaction " + std::to_string(i)});
    }

    if (opts.require_goal_rule) {
        if (def.interactions.front().actor.cls != ObjectClassKind::bird)
            out.push_back({"FirstActorNotBird",
                           "first interaction's actor '" + def.interactions.front().actor.name +
                               "' is not a bird"});
        const Interaction& last = def.interactions.back();
        if (last.verb != InteractionVerb::destroy || last.patient.cls != ObjectClassKind::pig)
            out.push_back({"MissingDestroyGoal",
                           "final interaction must destroy a pig, got '" +
                               std::string(to_string(last.verb)) + "(" + last.actor.name + ")(" +
                               last.patient.name + ")'"});
    }
    return out;
}

// ============================================================================
// Instantiation
// ============================================================================

namespace detail {

// Surfaces that something rolls or slides along, or that occur in a
// cannotFall movement chain. Rolling stock cannot rest stationary on an
// incline, so these bind to flat platforms.
inline std::set<std::string> substrate_surfaces(const ScenarioDefinition& def) {
    std::set<std::string> out;
    for (const auto& ia : def.interactions)
        if (ia.verb == InteractionVerb::roll || ia.verb == InteractionVerb::slide)
            out.insert(ia.patient.name);
    return out;
}

} // namespace detail

// Binds every object reference to a concrete game object, drawn uniformly
// (seeded) from its class options. Deterministic for a given seed.
inline ObjectInstanceSet instantiate_objects(const ScenarioDefinition& def, uint64_t seed) {
    Rng rng = Rng(seed).derive("instantiate");
    std::set<std::string> substrates = detail::substrate_surfaces(def);

    ObjectInstanceSet out;
    for (const auto& ref : def.object_refs) {
        const ObjectClass& cls = object_class(ref.cls);
        std::vector<ConcreteKindId> options = cls.concrete_options;
        if (ref.cls == ObjectClassKind::surface && substrates.count(ref.name))
            options = {ConcreteKindId::flat_platform};

        ConcreteKindId kind = options[rng.uniform_u64(options.size())];
        const ConcreteKind& ck = concrete_kind(kind);

        ObjectInstance inst;
        inst.ref = ref;
        inst.kind = kind;
        inst.width = ck.width;
        inst.height = ck.height;
        // Surfaces that something travels along need runway.
        if (substrates.count(ref.name)) inst.width = 4.5;
        inst.rotation_deg = 0.0;
        // Tilted right-end-down: the underside sends a rising shot back down
        // with the vertical component dominating, a "from below" deflection.
        if (kind == ConcreteKindId::inclined_platform)
            inst.rotation_deg = -static_cast<double>(rng.uniform_int(35, 55));
        out.add(std::move(inst));
    }
    return out;
}

} // namespace taskgen
