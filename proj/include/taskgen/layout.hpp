#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "taskgen/scenario.hpp"

namespace taskgen {

// ============================================================================
// Layout predicates
// ============================================================================

enum class LayoutVerb {
    in_direction,
    on_location,
    located_far,
    touching,
    path_obstructed,
    lies_on_path,
};

inline const char* to_string(LayoutVerb v) {
    switch (v) {
        case LayoutVerb::in_direction: return "inDirection";
        case LayoutVerb::on_location: return "onLocation";
        case LayoutVerb::located_far: return "locatedFar";
        case LayoutVerb::touching: return "touching";
        case LayoutVerb::path_obstructed: return "pathObstructed";
        case LayoutVerb::lies_on_path: return "liesOnPath";
    }
    return "?";
}

enum class OnLocationTag { left, centre, right };
enum class TouchLocationTag { upper_left, centre_left, lower_left };

inline const char* to_string(OnLocationTag t) {
    switch (t) {
        case OnLocationTag::left: return "left";
        case OnLocationTag::centre: return "centre";
        case OnLocationTag::right: return "right";
    }
    return "?";
}

inline const char* to_string(TouchLocationTag t) {
    switch (t) {
        case TouchLocationTag::upper_left: return "upperLeft";
        case TouchLocationTag::centre_left: return "centreLeft";
        case TouchLocationTag::lower_left: return "lowerLeft";
    }
    return "?";
}

enum class EdgeOrigin { from_interaction, from_restriction, from_stability };

inline const char* to_string(EdgeOrigin o) {
    switch (o) {
        case EdgeOrigin::from_interaction: return "from_interaction";
        case EdgeOrigin::from_restriction: return "from_restriction";
        case EdgeOrigin::from_stability: return "from_stability";
    }
    return "?";
}

struct LayoutPredicate {
    LayoutVerb verb = LayoutVerb::in_direction;
    std::string a;
    std::string b;
    Direction direction = Direction::any;                  // inDirection/locatedFar/pathObstructed
    OnLocationTag location = OnLocationTag::centre;        // onLocation
    TouchLocationTag touch = TouchLocationTag::upper_left; // touching
    EdgeOrigin origin = EdgeOrigin::from_interaction;

    std::string param_string() const {
        switch (verb) {
            case LayoutVerb::in_direction:
            case LayoutVerb::located_far:
            case LayoutVerb::path_obstructed:
                return to_string(direction);
            case LayoutVerb::on_location: return to_string(location);
            case LayoutVerb::touching: return to_string(touch);
            case LayoutVerb::lies_on_path: return "-";
        }
        return "-";
    }

    bool same_constraint(const LayoutPredicate& o) const {
        return verb == o.verb && a == o.a && b == o.b && direction == o.direction &&
               location == o.location && touch == o.touch;
    }
};

// Objects (scenario objects plus any supports added for stability) as nodes
// and layout predicates as directed edges. Also records which disjunct was
// chosen for each overloaded interaction direction, so a retry can revisit
// the choice.
struct LayoutGraph {
    ObjectInstanceSet nodes;
    std::vector<LayoutPredicate> edges;
    std::vector<Direction> chosen_directions; // parallel to def.interactions

    bool has_edge(const LayoutPredicate& p) const {
        for (const auto& e : edges)
            if (e.same_constraint(p)) return true;
        return false;
    }

    void add_edge(LayoutPredicate p) {
        if (!has_edge(p)) edges.push_back(std::move(p));
    }
};

class UnsupportedPredicate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ============================================================================
// Inference
// ============================================================================

namespace detail {

// Movement surfaces of `obj` in chain order: the substrates of its roll and
// slide interactions.
inline std::vector<std::string> movement_surfaces(const ScenarioDefinition& def,
                                                  const std::string& obj) {
    std::vector<std::string> out;
    for (const auto& ia : def.interactions) {
        if ((ia.verb == InteractionVerb::roll || ia.verb == InteractionVerb::slide) &&
            ia.actor.name == obj)
            out.push_back(ia.patient.name);
    }
    return out;
}

// The object that `obj` hits after its last roll/slide step, i.e. where its
// movement path must lead.
inline std::optional<std::string> landing_target(const ScenarioDefinition& def,
                                                 const std::string& obj) {
    int last_move = -1;
    for (size_t i = 0; i < def.interactions.size(); ++i) {
        const auto& ia = def.interactions[i];
        if ((ia.verb == InteractionVerb::roll || ia.verb == InteractionVerb::slide) &&
            ia.actor.name == obj)
            last_move = static_cast<int>(i);
    }
    if (last_move < 0) return std::nullopt;
    for (size_t i = last_move + 1; i < def.interactions.size(); ++i) {
        const auto& ia = def.interactions[i];
        if (ia.verb == InteractionVerb::hit && ia.actor.name == obj) return ia.patient.name;
    }
    return std::nullopt;
}

// Drops redundant inDirection edges: exact duplicates, edges that a stricter
// touching/onLocation edge on the same ordered pair subsumes, and edges that
// a locatedFar on the same pair already implies (far in a direction is still
// in that direction; keeping both would contradict the distance bands).
inline void optimize_edges(std::vector<LayoutPredicate>& edges) {
    std::set<std::pair<std::string, std::string>> contact_pairs;
    std::set<std::tuple<std::string, std::string, Direction>> far_edges;
    for (const auto& e : edges) {
        if (e.verb == LayoutVerb::touching || e.verb == LayoutVerb::on_location)
            contact_pairs.insert({e.a, e.b});
        if (e.verb == LayoutVerb::located_far) far_edges.insert({e.a, e.b, e.direction});
    }

    std::vector<LayoutPredicate> kept;
    for (auto& e : edges) {
        if (e.verb == LayoutVerb::in_direction) {
            if (contact_pairs.count({e.a, e.b})) continue;
            if (far_edges.count({e.a, e.b, e.direction}) ||
                far_edges.count({e.b, e.a, opposite(e.direction)}))
                continue;
        }
        bool dup = false;
        for (const auto& k : kept)
            if (k.same_constraint(e)) { dup = true; break; }
        if (!dup) kept.push_back(std::move(e));
    }
    edges = std::move(kept);
}

} // namespace detail

// Applies the interaction-to-layout inference rules:
//   hit(a,b,d)      =>  liesOnPath(b,a) and, unless d is `any`, inDirection(b,a,-d)
//   roll(a,b,d)     =>  inDirection(a,b,-d)
//   slide(a,b,d)    =>  inDirection(a,b,-d)
//   fall(a,b)       =>  locatedFar(a,b,above)
//   bounce(a,b,d)   =>  inDirection(a,b,d)
//   cannotHit(a,b,d) => pathObstructed(a,b,d)
//   cannotFall(a)   =>  touching chain over the surfaces a moves along
// When an interaction carries several direction options one is chosen
// (seeded) and recorded in chosen_directions.
inline LayoutGraph infer_layout(const ScenarioDefinition& def, const ObjectInstanceSet& inst,
                                uint64_t seed) {
    Rng rng = Rng(seed).derive("layout");
    LayoutGraph g;
    for (const auto& i : inst.all()) g.nodes.add(i);

    for (const auto& ia : def.interactions) {
        Direction d = Direction::any;
        if (!ia.direction_options.empty())
            d = ia.direction_options[rng.uniform_u64(ia.direction_options.size())];
        g.chosen_directions.push_back(d);

        switch (ia.verb) {
            case InteractionVerb::hit:
                g.add_edge({LayoutVerb::lies_on_path, ia.patient.name, ia.actor.name,
                            Direction::any, OnLocationTag::centre, TouchLocationTag::upper_left,
                            EdgeOrigin::from_interaction});
                if (d != Direction::any)
                    g.add_edge({LayoutVerb::in_direction, ia.patient.name, ia.actor.name,
                                opposite(d), OnLocationTag::centre, TouchLocationTag::upper_left,
                                EdgeOrigin::from_interaction});
                break;
            case InteractionVerb::roll:
            case InteractionVerb::slide:
                g.add_edge({LayoutVerb::in_direction, ia.actor.name, ia.patient.name, opposite(d),
                            OnLocationTag::centre, TouchLocationTag::upper_left,
                            EdgeOrigin::from_interaction});
                break;
            case InteractionVerb::fall:
                g.add_edge({LayoutVerb::located_far, ia.actor.name, ia.patient.name,
                            Direction::above, OnLocationTag::centre, TouchLocationTag::upper_left,
                            EdgeOrigin::from_interaction});
                break;
            case InteractionVerb::bounce:
                g.add_edge({LayoutVerb::in_direction, ia.actor.name, ia.patient.name, d,
                            OnLocationTag::centre, TouchLocationTag::upper_left,
                            EdgeOrigin::from_interaction});
                break;
            case InteractionVerb::destroy:
                break; // satisfied by simulation, no layout constraint
        }
    }

    for (const auto& r : def.restrictions) {
        switch (r.verb) {
            case RestrictionVerb::cannot_hit:
                g.add_edge({LayoutVerb::path_obstructed, r.subject.name, r.object.name,
                            r.direction, OnLocationTag::centre, TouchLocationTag::upper_left,
                            EdgeOrigin::from_restriction});
                break;
            case RestrictionVerb::cannot_fall: {
                auto surfaces = detail::movement_surfaces(def, r.subject.name);
                if (!surfaces.empty()) {
                    g.add_edge({LayoutVerb::touching, r.subject.name, surfaces[0], Direction::any,
                                OnLocationTag::centre, TouchLocationTag::upper_left,
                                EdgeOrigin::from_restriction});
                    for (size_t i = 0; i + 1 < surfaces.size(); ++i)
                        g.add_edge({LayoutVerb::touching, surfaces[i], surfaces[i + 1],
                                    Direction::any, OnLocationTag::centre,
                                    TouchLocationTag::centre_left, EdgeOrigin::from_restriction});
                }
                break;
            }
        }
    }

    detail::optimize_edges(g.edges);
    return g;
}

// ============================================================================
// Stability augmentation and support checking
// ============================================================================

namespace detail {

inline bool rests_on_static(const LayoutGraph& g, const std::string& name,
                            std::set<std::string>& visiting) {
    const ObjectInstance& obj = g.nodes.at(name);
    if (obj.is_static()) return true;
    if (visiting.count(name)) return false;
    visiting.insert(name);
    for (const auto& e : g.edges) {
        if (e.a != name) continue;
        if (e.verb != LayoutVerb::on_location && e.verb != LayoutVerb::touching) continue;
        if (e.verb == LayoutVerb::touching && e.touch == TouchLocationTag::lower_left)
            continue; // touching something from below does not support
        if (rests_on_static(g, e.b, visiting)) return true;
    }
    return false;
}

inline bool is_supported(const LayoutGraph& g, const std::string& name) {
    std::set<std::string> visiting;
    return rests_on_static(g, name, visiting);
}

// The node that `name` directly rests on, if any.
inline std::optional<std::string> support_of(const LayoutGraph& g, const std::string& name) {
    for (const auto& e : g.edges) {
        if (e.a != name) continue;
        if (e.verb == LayoutVerb::on_location ||
            (e.verb == LayoutVerb::touching && e.touch != TouchLocationTag::lower_left))
            return e.b;
    }
    return std::nullopt;
}

} // namespace detail

// True iff every dynamic node rests (possibly transitively) on a static node
// through onLocation/touching edges.
inline bool check_support(const LayoutGraph& g) {
    for (const auto& obj : g.nodes.all()) {
        if (obj.is_static()) continue;
        if (!detail::is_supported(g, obj.ref.name)) return false;
    }
    return true;
}

// Gives every unsupported dynamic object a flat platform beneath it, and
// extends cannotFall movement chains onto the support of the object the mover
// finally hits, so the path it travels is continuous.
inline LayoutGraph augment_stability(const LayoutGraph& g,
                                     const ScenarioDefinition* def = nullptr) {
    LayoutGraph out = g;

    for (const auto& obj : g.nodes.all()) {
        if (obj.is_static()) continue;
        if (detail::is_supported(out, obj.ref.name)) continue;

        ObjectInstance platform;
        platform.ref.name = "support_" + obj.ref.name;
        platform.ref.cls = ObjectClassKind::horizontal_surface;
        platform.kind = ConcreteKindId::flat_platform;
        platform.width = std::max(1.2, 3.0 * obj.width);
        platform.height = concrete_kind(ConcreteKindId::flat_platform).height;
        platform.rotation_deg = 0.0;
        out.nodes.add(platform);
        out.add_edge({LayoutVerb::on_location, obj.ref.name, platform.ref.name, Direction::any,
                      OnLocationTag::centre, TouchLocationTag::upper_left,
                      EdgeOrigin::from_stability});
    }

    // Movement-path continuity: the last surface of a cannotFall chain joins
    // the support of the landing target.
    if (def) {
        for (const auto& r : def->restrictions) {
            if (r.verb != RestrictionVerb::cannot_fall) continue;
            auto surfaces = detail::movement_surfaces(*def, r.subject.name);
            if (surfaces.empty()) continue;
            auto target = detail::landing_target(*def, r.subject.name);
            if (!target) continue;
            std::string target_support = *target;
            if (!out.nodes.at(*target).is_static()) {
                auto s = detail::support_of(out, *target);
                if (!s) continue;
                target_support = *s;
            }
            if (target_support != surfaces.back())
                out.add_edge({LayoutVerb::touching, surfaces.back(), target_support,
                              Direction::any, OnLocationTag::centre,
                              TouchLocationTag::centre_left, EdgeOrigin::from_stability});
        }
    }

    detail::optimize_edges(out.edges);
    return out;
}

// Line-based debug export: verb a b param origin.
inline std::string export_edge_list(const LayoutGraph& g) {
    std::ostringstream out;
    for (const auto& e : g.edges)
        out << to_string(e.verb) << " " << e.a << " " << e.b << " " << e.param_string() << " "
            << to_string(e.origin) << "\n";
    return out.str();
}

} // namespace taskgen
