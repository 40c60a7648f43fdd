#pragma once

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <set>

#include "taskgen/dimension.hpp"
#include "taskgen/layout.hpp"
#include "taskgen/physics.hpp"

namespace taskgen {

// ============================================================================
// Levels
// ============================================================================

enum class ObjectRole { scenario, support, obstacle, distractor };

inline const char* to_string(ObjectRole r) {
    switch (r) {
        case ObjectRole::scenario: return "scenario";
        case ObjectRole::support: return "support";
        case ObjectRole::obstacle: return "obstacle";
        case ObjectRole::distractor: return "distractor";
    }
    return "?";
}

struct PlacedObject {
    ObjectInstance instance;
    Vec2 centre;
    ObjectRole role = ObjectRole::scenario;

    FivePointBox box() const { return instance.box_at(centre); }
};

struct Level {
    std::string scenario_name;
    uint64_t seed = 0;
    WorldBounds bounds;
    Vec2 slingshot{2.0, 2.0};
    std::vector<PlacedObject> objects;
    LaunchSpec intended_solution;
    ScenarioDefinition scenario;

    int find(const std::string& name) const {
        for (size_t i = 0; i < objects.size(); ++i)
            if (objects[i].instance.ref.name == name) return static_cast<int>(i);
        return -1;
    }

    std::map<std::string, FivePointBox> boxes() const {
        std::map<std::string, FivePointBox> out;
        for (const auto& o : objects) out[o.instance.ref.name] = o.box();
        return out;
    }
};

struct GeneratorConfig {
    WorldBounds bounds;
    Vec2 slingshot{2.0, 2.0};
    PhysicsParams physics;
    QsrParams qsr{0.01, 3.0}; // generation-scale far threshold
    ClassifierParams classifier;
    uint64_t dnf_pool_cap = 1000000;
    int conjunction_budget = 50;
    int placements_per_conjunction = 3;
    int max_obstacles = 8;
    int obstacle_candidates = 24;
    int reposition_candidates = 96;
    int max_distractors = 4;
    int distractor_draw_limit = 20;
    double path_corridor = 0.2;
    double stability_displacement = 0.05;
    double stability_seconds = 5.0;
    bool skip_final_validation = false;
    bool goal_rule = true;
};

struct GenerationReport {
    int conjunctions_tried = 0;
    int direction_combos_tried = 0;
    int repositions = 0;
    int obstacles_added = 0;
    int distractors_added = 0;
    int distractor_draws_discarded = 0;
    double wall_clock_s = 0.0;
    bool success = false;
    std::vector<std::string> failure_reasons;
};

struct GenerationResult {
    std::optional<Level> level;
    GenerationReport report;

    bool infeasible() const { return !level.has_value(); }
};

// ============================================================================
// World assembly
// ============================================================================

inline World build_world(const Level& level, const PhysicsParams& physics) {
    World w(physics);
    // Ground spans well past the visible bounds so flung objects still land.
    double gx0 = level.bounds.x_min - 5.0;
    double gx1 = level.bounds.x_max + 40.0;
    w.add_box("ground", {(gx0 + gx1) / 2.0, -0.5}, gx1 - gx0, 1.0, 0.0, 0.0, Material::platform);

    for (const auto& o : level.objects) {
        const ConcreteKind& ck = o.instance.concrete();
        double mass = ck.is_static ? 0.0 : ck.mass;
        double angle = deg_to_rad(o.instance.rotation_deg);
        // Hole-type blocks carry their mass at the rim.
        double inertia_scale =
            (ck.id == ConcreteKindId::square_hole || ck.id == ConcreteKindId::triangle_hole)
                ? 2.0
                : 1.0;
        // Dynamic bodies spawn a hair sunk into their support so resting
        // contacts exist from the first tick.
        Vec2 centre = o.centre;
        if (!ck.is_static) centre.y -= 0.004;
        switch (ck.shape) {
            case ShapeKind::circle:
                w.add_circle(o.instance.ref.name, centre, o.instance.width / 2.0, mass,
                             ck.material, ck.health);
                break;
            case ShapeKind::box:
                w.add_box(o.instance.ref.name, centre, o.instance.width, o.instance.height,
                          angle, mass, ck.material, ck.health, inertia_scale);
                break;
            case ShapeKind::right_triangle:
                w.add_right_triangle(o.instance.ref.name, centre, o.instance.width,
                                     o.instance.height, angle, mass, ck.material, ck.health,
                                     inertia_scale);
                break;
        }
    }
    return w;
}

// All pigs destroyed by the end of the trace.
inline bool level_solved(const SimTrace& trace) {
    bool saw_pig = false;
    for (size_t i = 0; i < trace.names.size(); ++i) {
        if (trace.materials[i] != Material::pig) continue;
        saw_pig = true;
        if (trace.frames.back()[i].alive) return false;
    }
    return saw_pig;
}

// Largest centre displacement of any dynamic body over a no-action run.
// Destroyed or out-of-world bodies count as unstable.
inline double stability_displacement(const Level& level, const GeneratorConfig& config) {
    World w = build_world(level, config.physics);
    int ticks = static_cast<int>(config.stability_seconds / config.physics.dt);
    std::vector<Vec2> start;
    for (const auto& b : w.bodies()) start.push_back(b.pos);

    double max_disp = 0.0;
    for (int t = 0; t < ticks; ++t) {
        w.step();
        for (const auto& b : w.bodies()) {
            if (b.is_static()) continue;
            if (!b.active()) return std::numeric_limits<double>::infinity();
            max_disp = std::max(max_disp, (b.pos - start[b.id]).length());
        }
    }
    return max_disp;
}

inline bool stable(const Level& level, const GeneratorConfig& config) {
    return stability_displacement(level, config) < config.stability_displacement;
}

// ============================================================================
// Candidate shots
// ============================================================================

// Discretized solution shots: both trajectories to each of the target's
// points of interest (centre, ul, ur — a centre aim delivers a torque-free
// push, the corners cover drop shots), low arcs first, at most six shots.
// Points behind the slingshot are excluded.
inline std::vector<LaunchSpec> candidate_shots(const Level& level, const std::string& target,
                                               const GeneratorConfig& config) {
    int idx = level.find(target);
    if (idx < 0) return {};
    FivePointBox box = level.objects[idx].box();
    const std::string bird = level.scenario.interactions.front().actor.name;
    int bird_idx = level.find(bird);
    double bird_r = bird_idx >= 0 ? level.objects[bird_idx].instance.width / 2.0 : 0.175;

    // The centre shot aims where the bird's centre sits at the moment of a
    // face-on contact, so the push goes through the target's centre of mass.
    // Tilted targets have no vertical left face; their belly is the centre.
    Vec2 centre_aim{box.min_x() - bird_r, box.c.y};
    if (std::abs(level.objects[idx].instance.rotation_deg) > 5.0) centre_aim = box.c;

    std::vector<LaunchSpec> low, high;
    for (const Vec2& point : {centre_aim, box.ul, box.ur}) {
        if (point.x < level.slingshot.x) continue;
        auto trajs = launch_trajectories(point, level.slingshot, config.physics.launch_speed,
                                         config.physics, bird);
        for (auto& t : trajs) {
            t.target = target;
            (t.high_arc ? high : low).push_back(t);
        }
    }
    low.insert(low.end(), high.begin(), high.end());
    if (low.size() > 6) low.resize(6);
    return low;
}

// ============================================================================
// Simulation-based satisfaction
// ============================================================================

namespace gen_detail {

// Diagnostic trace for generation runs, enabled by TASKGEN_TRACE=1.
inline int trace_level() {
    static int level = [] {
        const char* v = std::getenv("TASKGEN_TRACE");
        return v ? std::atoi(v) : 0;
    }();
    return level;
}
inline bool trace_enabled() { return trace_level() > 0; }
template <typename... Args>
inline void trace(const char* fmt, Args... args) {
    if (trace_enabled()) {
        std::fprintf(stderr, fmt, args...);
        std::fputc('\n', stderr);
    }
}

inline bool destroys_match(const std::vector<InteractionEvent>& events,
                           const ScenarioDefinition& def) {
    size_t want = 0;
    std::vector<const Interaction*> goals;
    for (const auto& ia : def.interactions)
        if (ia.verb == InteractionVerb::destroy) goals.push_back(&ia);
    for (const auto& e : events) {
        if (e.verb != InteractionVerb::destroy || want >= goals.size()) continue;
        if (e.actor == goals[want]->actor.name && e.patient == goals[want]->patient.name) ++want;
    }
    return want == goals.size();
}

inline size_t chain_progress(const std::vector<InteractionEvent>& events,
                             const ScenarioDefinition& def) {
    size_t idx = 0;
    for (const auto& e : events) {
        if (idx >= def.interactions.size()) break;
        const Interaction& want = def.interactions[idx];
        if (e.verb == want.verb && e.actor == want.actor.name && e.patient == want.patient.name &&
            direction_matches(want.direction_options, e.direction))
            ++idx;
    }
    return idx;
}

inline int restriction_violations(const std::vector<InteractionEvent>& events,
                                  const ScenarioDefinition& def) {
    int count = 0;
    for (const auto& e : events) {
        for (const auto& r : def.restrictions) {
            if (r.verb == RestrictionVerb::cannot_hit) {
                if (e.verb == InteractionVerb::hit && e.actor == r.subject.name &&
                    e.patient == r.object.name &&
                    (r.direction == Direction::any ||
                     (e.direction && *e.direction == r.direction)))
                    ++count;
            } else {
                if (e.verb == InteractionVerb::fall && e.actor == r.subject.name) ++count;
            }
        }
    }
    return count;
}

inline std::pair<Vec2, Vec2> aabb_of(const FivePointBox& b, double inflate = 0.0) {
    return {{b.min_x() - inflate, b.min_y() - inflate}, {b.max_x() + inflate, b.max_y() + inflate}};
}

inline bool aabbs_overlap(const std::pair<Vec2, Vec2>& a, const std::pair<Vec2, Vec2>& b) {
    return a.first.x < b.second.x && b.first.x < a.second.x && a.first.y < b.second.y &&
           b.first.y < a.second.y;
}

inline bool segment_hits_aabb(Vec2 p, Vec2 q, const std::pair<Vec2, Vec2>& box) {
    // Slab test.
    Vec2 d = q - p;
    double t0 = 0.0, t1 = 1.0;
    for (int axis = 0; axis < 2; ++axis) {
        double o = axis == 0 ? p.x : p.y;
        double dd = axis == 0 ? d.x : d.y;
        double lo = axis == 0 ? box.first.x : box.first.y;
        double hi = axis == 0 ? box.second.x : box.second.y;
        if (std::abs(dd) < 1e-12) {
            if (o < lo || o > hi) return false;
        } else {
            double ta = (lo - o) / dd;
            double tb = (hi - o) / dd;
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
            if (t0 > t1) return false;
        }
    }
    return true;
}

inline bool path_hits_box(const std::vector<Vec2>& path, const FivePointBox& box,
                          double inflate) {
    auto bb = aabb_of(box, inflate);
    for (size_t i = 0; i + 1 < path.size(); ++i)
        if (segment_hits_aabb(path[i], path[i + 1], bb)) return true;
    return false;
}

inline double path_min_distance(const std::vector<Vec2>& path, Vec2 p) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < path.size(); ++i)
        best = std::min(best, point_segment_distance(p, path[i], path[i + 1]));
    return best;
}

// Placement sanity: inside bounds, above the ground, not overlapping other
// objects (touching is fine).
inline bool placement_clear(const Level& level, const std::vector<int>& moved,
                            const std::vector<FivePointBox>& moved_boxes) {
    for (size_t m = 0; m < moved.size(); ++m) {
        const FivePointBox& box = moved_boxes[m];
        if (box.min_x() < level.bounds.x_min - 1e-9 || box.max_x() > level.bounds.x_max + 1e-9 ||
            box.min_y() < -1e-6 || box.max_y() > level.bounds.y_max + 1e-9)
            return false;
        auto bb = aabb_of(box, -0.02);
        for (size_t i = 0; i < level.objects.size(); ++i) {
            if (std::find(moved.begin(), moved.end(), static_cast<int>(i)) != moved.end())
                continue;
            if (aabbs_overlap(bb, aabb_of(level.objects[i].box(), -0.02))) return false;
        }
        for (size_t m2 = m + 1; m2 < moved.size(); ++m2)
            if (aabbs_overlap(bb, aabb_of(moved_boxes[m2], -0.02))) return false;
    }
    return true;
}

} // namespace gen_detail

// Shared state for the simulation-satisfaction steps of one conjunction.
struct SatisfyContext {
    const ScenarioDefinition* def = nullptr;
    const GeneratorConfig* config = nullptr;
    std::vector<QsrRelation> relations;       // solved conjunction
    std::vector<LayoutPredicate> deferred;    // liesOnPath / pathObstructed
    GenerationReport* report = nullptr;
    Rng rng{0};
    std::string failure;
};

// Re-verifies every QSR of the conjunction against current placements.
// Relations touching objects in `pending` are skipped: those objects still
// await their own path-based repositioning.
inline bool verify_relations(const Level& level, const SatisfyContext& ctx,
                             const std::set<std::string>& pending = {}) {
    auto boxes = level.boxes();
    for (const auto& rel : ctx.relations) {
        if (pending.count(rel.a) || pending.count(rel.b)) continue;
        auto ia = boxes.find(rel.a);
        auto ib = boxes.find(rel.b);
        if (ia == boxes.end() || ib == boxes.end()) return false;
        if (!holds(rel, ia->second, ib->second, ctx.config->qsr)) return false;
    }
    return true;
}

// Finds a candidate shot whose classified events contain every destroy of the
// scenario, in order. Among those, the shot that advances the interaction
// chain furthest wins; candidate order (low arcs first) breaks ties.
inline std::optional<LaunchSpec> satisfy_destroy(const Level& level, SatisfyContext& ctx) {
    const std::string target = level.scenario.interactions.front().patient.name;
    auto shots = candidate_shots(level, target, *ctx.config);
    if (shots.empty()) {
        ctx.failure = "NoDestroyingShot: target " + target + " unreachable";
        return std::nullopt;
    }
    std::optional<LaunchSpec> best;
    size_t best_progress = 0;
    for (const auto& shot : shots) {
        SimTrace trace = run(build_world(level, ctx.config->physics), shot);
        auto events = classify_events(trace, ctx.config->classifier);
        if (gen_detail::trace_level() >= 2) {
            std::string ev;
            for (const auto& e : events) {
                ev += " " + to_string(e);
                if (ev.size() > 600) break;
            }
            gen_detail::trace("      shot a=%.2f hi=%d d=%d c=%zu:%s", shot.angle_rad,
                              (int)shot.high_arc, (int)gen_detail::destroys_match(events, *ctx.def),
                              gen_detail::chain_progress(events, *ctx.def), ev.c_str());
        }
        if (!gen_detail::destroys_match(events, *ctx.def)) continue;
        size_t progress = gen_detail::chain_progress(events, *ctx.def);
        if (matches_sequence(events, *ctx.def)) progress += 1; // clean chain beats raw progress
        if (!best || progress > best_progress) {
            best = shot;
            best_progress = progress;
        }
    }
    if (!best) ctx.failure = "NoDestroyingShot: no candidate shot completes the destroy chain";
    return best;
}

// Repositions each liesOnPath(a, b) object onto the recorded movement paths
// of b, keeping every QSR satisfied. The object's dedicated support platform
// moves with it.
// `have_shot` reports whether `shot` already completes the destroy chain; a
// fall scenario has no destroying shot until its target is repositioned, so
// the destroy check re-runs here after repositioning.
inline bool satisfy_lies_on_path(Level& level, LaunchSpec& shot, SatisfyContext& ctx,
                                 bool have_shot = true) {
    const GeneratorConfig& cfg = *ctx.config;
    bool any_change = false;

    for (size_t pred_i = 0; pred_i < ctx.deferred.size(); ++pred_i) {
        const auto& pred = ctx.deferred[pred_i];
        if (pred.verb != LayoutVerb::lies_on_path) continue;
        const std::string& a = pred.a;
        const std::string& b = pred.b;
        int a_idx = level.find(a);
        if (a_idx < 0) continue;

        // Objects that later liesOnPath steps will reposition; constraints
        // against them hold once their own step runs.
        std::set<std::string> pending;
        for (size_t j = pred_i + 1; j < ctx.deferred.size(); ++j)
            if (ctx.deferred[j].verb == LayoutVerb::lies_on_path && ctx.deferred[j].a != a)
                pending.insert(ctx.deferred[j].a);

        const std::string target = level.scenario.interactions.front().patient.name;
        auto shots = candidate_shots(level, target, cfg);
        std::vector<std::vector<Vec2>> paths;
        for (const auto& s : shots) {
            SimTrace trace = run(build_world(level, cfg.physics), s);
            int bi = trace.index_of(b);
            if (bi >= 0) paths.push_back(trace.path_of(bi));
        }
        if (paths.empty()) {
            ctx.failure = "NoIntersectingPlacement: no recorded paths for " + b;
            return false;
        }

        // Paths are centre polylines; the mover's own extent widens the
        // corridor that counts as "on the path".
        int b_idx = level.find(b);
        double reach = cfg.path_corridor;
        if (b_idx >= 0)
            reach += 0.5 * std::min(level.objects[b_idx].instance.width,
                                    level.objects[b_idx].instance.height);

        bool satisfied = false;
        for (const auto& p : paths)
            if (gen_detail::path_hits_box(p, level.objects[a_idx].box(), reach)) {
                satisfied = true;
                break;
            }
        if (satisfied) continue;

        // Lattice candidates along the paths, scored by how many paths pass
        // through the surrounding corridor.
        struct Candidate {
            Vec2 point;
            int score;
            double progress;   // fraction of the path already travelled
            size_t path_index; // which recorded path it came from
            size_t point_index;
        };
        std::vector<Candidate> cands;
        std::set<std::pair<int, int>> seen;
        Vec2 b_start = b_idx >= 0 ? level.objects[b_idx].centre : Vec2{-100, -100};
        for (size_t pi = 0; pi < paths.size(); ++pi) {
            const auto& p = paths[pi];
            for (size_t i = 0; i < p.size(); i += 2) {
                Vec2 snapped{std::round(p[i].x * 10.0) / 10.0, std::round(p[i].y * 10.0) / 10.0};
                // Spots where the mover itself starts cannot host the target.
                if ((snapped - b_start).length() < 1.2) continue;
                auto key = std::make_pair(static_cast<int>(snapped.x * 10),
                                          static_cast<int>(snapped.y * 10));
                if (!seen.insert(key).second) continue;
                int score = 0;
                for (const auto& q : paths)
                    if (gen_detail::path_min_distance(q, snapped) <= reach) ++score;
                cands.push_back({snapped, score, static_cast<double>(i) / p.size(), pi, i});
            }
        }
        // Strongest crossings first; among ties, late path points (the
        // landing zone) beat early flight.
        std::stable_sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
            if (x.score != y.score) return x.score > y.score;
            return x.progress > y.progress;
        });
        if (static_cast<int>(cands.size()) > cfg.reposition_candidates)
            cands.resize(cfg.reposition_candidates);
        if (gen_detail::trace_enabled()) {
            std::string desc;
            for (size_t i = 0; i < cands.size() && i < 8; ++i) {
                char buf[48];
                std::snprintf(buf, sizeof buf, " (%.1f,%.1f)s%d", cands[i].point.x,
                              cands[i].point.y, cands[i].score);
                desc += buf;
            }
            gen_detail::trace("    reposition %s on paths of %s: %zu cands%s", a.c_str(),
                              b.c_str(), cands.size(), desc.c_str());
        }

        int support_idx = level.find("support_" + a);
        bool placed = false;
        for (const auto& cand : cands) {
            // Placement variants: move a (and its dedicated support) to the
            // candidate point, slide a along its current plane, or ground
            // a's support beneath the candidate column so a waits under the
            // descending tail of the path.
            struct Variant {
                Vec2 a_centre;
                std::optional<Vec2> support_centre;
            };
            std::vector<Variant> variants;
            const ObjectInstance& a_inst = level.objects[a_idx].instance;
            Vec2 cur = level.objects[a_idx].centre;
            if (support_idx >= 0) {
                Vec2 delta = cand.point - cur;
                variants.push_back(
                    {cand.point, level.objects[support_idx].centre + delta});
                variants.push_back(
                    {Vec2{cand.point.x, cur.y},
                     level.objects[support_idx].centre + Vec2{delta.x, 0.0}});
                // Grounded: support stacked on the highest static top below.
                double base_top = 0.0;
                for (const auto& o : level.objects) {
                    if (!o.instance.is_static()) continue;
                    FivePointBox b = o.box();
                    if (cand.point.x < b.min_x() || cand.point.x > b.max_x()) continue;
                    if (b.max_y() <= cand.point.y && b.max_y() > base_top) base_top = b.max_y();
                }
                const ObjectInstance& s_inst = level.objects[support_idx].instance;
                double support_c = base_top + s_inst.height / 2.0;
                variants.push_back({Vec2{cand.point.x, base_top + s_inst.height +
                                                           a_inst.height / 2.0},
                                    Vec2{cand.point.x, support_c}});
            } else {
                variants.push_back({cand.point, std::nullopt});
                variants.push_back({Vec2{cand.point.x, cur.y}, std::nullopt});
            }

            for (const Variant& v : variants) {
                std::vector<int> moved{a_idx};
                std::vector<FivePointBox> boxes{a_inst.box_at(v.a_centre)};
                if (support_idx >= 0 && v.support_centre) {
                    moved.push_back(support_idx);
                    boxes.push_back(
                        level.objects[support_idx].instance.box_at(*v.support_centre));
                }
                if (!gen_detail::placement_clear(level, moved, boxes)) continue;

                // The delivery path must stay clear: nothing moved may sit
                // on the mover's approach to this candidate.
                {
                    const auto& src = paths[cand.path_index];
                    bool shadowed = false;
                    size_t upto = cand.point_index > 4 ? cand.point_index - 4 : 0;
                    for (size_t m = 0; m < boxes.size() && !shadowed; ++m) {
                        auto bb = gen_detail::aabb_of(boxes[m], 0.05);
                        for (size_t k = 0; k + 1 < upto; ++k)
                            if (gen_detail::segment_hits_aabb(src[k], src[k + 1], bb)) {
                                shadowed = true;
                                break;
                            }
                    }
                    if (shadowed) continue;
                }

                Level trial = level;
                trial.objects[a_idx].centre = v.a_centre;
                if (support_idx >= 0 && v.support_centre)
                    trial.objects[support_idx].centre = *v.support_centre;
                if (!verify_relations(trial, ctx, pending)) continue;

                level = std::move(trial);
                ++ctx.report->repositions;
                placed = true;
                any_change = true;
                break;
            }
            if (placed) break;
        }

        // `a` may be pinned by contact constraints (a block at the start of
        // its movement chain). Shifting `b` sideways moves its recorded
        // paths across `a` instead.
        if (!placed) {
            int b_obj = level.find(b);
            int b_support = level.find("support_" + b);
            if (b_obj >= 0) {
                std::set<int> shifts;
                for (const auto& p : paths) {
                    double best_d = std::numeric_limits<double>::infinity();
                    Vec2 best_pt = p.front();
                    for (const auto& pt : p) {
                        double d = (pt - level.objects[a_idx].centre).length();
                        if (d < best_d) {
                            best_d = d;
                            best_pt = pt;
                        }
                    }
                    shifts.insert(
                        static_cast<int>(std::round((level.objects[a_idx].centre.x - best_pt.x) * 10.0)));
                }
                for (int ishift : shifts) {
                    double shift = ishift / 10.0;
                    if (std::abs(shift) < 0.05) continue;
                    Vec2 delta{shift, 0.0};
                    std::vector<int> moved{b_obj};
                    std::vector<FivePointBox> boxes{
                        level.objects[b_obj].instance.box_at(level.objects[b_obj].centre + delta)};
                    if (b_support >= 0) {
                        moved.push_back(b_support);
                        boxes.push_back(level.objects[b_support].instance.box_at(
                            level.objects[b_support].centre + delta));
                    }
                    if (!gen_detail::placement_clear(level, moved, boxes)) continue;
                    Level trial = level;
                    trial.objects[b_obj].centre += delta;
                    if (b_support >= 0) trial.objects[b_support].centre += delta;
                    if (!verify_relations(trial, ctx, pending)) continue;
                    level = std::move(trial);
                    ++ctx.report->repositions;
                    placed = true;
                    any_change = true;
                    break;
                }
            }
        }

        if (!placed) {
            ctx.failure = "NoIntersectingPlacement: " + a + " cannot reach a path of " + b;
            return false;
        }
    }

    if (any_change || !have_shot) {
        // Repositioning changes which shot completes the destroy chain.
        auto new_shot = satisfy_destroy(level, ctx);
        if (!new_shot) return false;
        shot = *new_shot;
    }
    return true;
}

// Blocks every direct path of a to b from the forbidden direction by
// inserting small static platforms, without altering the intended chain.
inline bool satisfy_path_obstructed(Level& level, LaunchSpec& shot, SatisfyContext& ctx) {
    const GeneratorConfig& cfg = *ctx.config;

    auto baseline_events = [&]() {
        SimTrace t = run(build_world(level, cfg.physics), shot);
        return classify_events(t, cfg.classifier);
    };

    for (const auto& pred : ctx.deferred) {
        if (pred.verb != LayoutVerb::path_obstructed) continue;
        const std::string& a = pred.a;
        const std::string& b = pred.b;
        // Only the launched object has free actions; other pairs are already
        // fixed by the layout.
        if (a != level.scenario.interactions.front().actor.name) continue;

        for (int round = 0; round <= cfg.max_obstacles; ++round) {
            // Offending paths: direct shots at b that reach it from the
            // forbidden direction.
            std::vector<std::vector<Vec2>> offending;
            auto direct = candidate_shots(level, b, cfg);
            for (const auto& s : direct) {
                SimTrace trace = run(build_world(level, cfg.physics), s);
                auto events = classify_events(trace, cfg.classifier);
                for (const auto& e : events) {
                    if (e.verb != InteractionVerb::hit) continue;
                    if (e.actor != a || e.patient != b) continue;
                    if (pred.direction != Direction::any && e.direction &&
                        *e.direction != pred.direction)
                        continue;
                    int ai = trace.index_of(a);
                    auto path = trace.path_of(ai);
                    path.resize(std::min<size_t>(path.size(), e.tick + 1));
                    if (path.size() >= 2) offending.push_back(std::move(path));
                    break;
                }
            }
            if (offending.empty()) break; // this predicate is satisfied

            if (round == cfg.max_obstacles) {
                ctx.failure = "CannotObstruct: obstacle budget exhausted for " + a + "->" + b;
                return false;
            }

            auto before = baseline_events();
            size_t before_progress = gen_detail::chain_progress(before, *ctx.def);
            bool before_destroys = gen_detail::destroys_match(before, *ctx.def);
            int before_violations = gen_detail::restriction_violations(before, *ctx.def);

            // Obstacle candidates: lattice points along the offending paths,
            // preferring spots that cut several paths at once and sit away
            // from the endpoints.
            struct Candidate {
                Vec2 point;
                Vec2 heading;
                int score;
            };
            std::vector<Candidate> cands;
            std::set<std::pair<int, int>> seen;
            for (const auto& p : offending) {
                for (size_t i = 1; i + 1 < p.size(); i += 2) {
                    double from_start = (p[i] - p.front()).length();
                    double from_end = (p[i] - p.back()).length();
                    if (from_start < 1.0 || from_end < 0.6) continue;
                    Vec2 snapped{std::round(p[i].x * 10.0) / 10.0,
                                 std::round(p[i].y * 10.0) / 10.0};
                    auto key = std::make_pair(static_cast<int>(snapped.x * 10),
                                              static_cast<int>(snapped.y * 10));
                    if (!seen.insert(key).second) continue;
                    int score = 0;
                    for (const auto& q : offending)
                        if (gen_detail::path_min_distance(q, snapped) <= cfg.path_corridor)
                            ++score;
                    cands.push_back({snapped, (p[i + 1] - p[i]).normalized(), score});
                }
            }
            std::stable_sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
                return x.score > y.score;
            });
            if (static_cast<int>(cands.size()) > cfg.obstacle_candidates)
                cands.resize(cfg.obstacle_candidates);

            bool inserted = false;
            for (const auto& cand : cands) {
                ObjectInstance obstacle;
                obstacle.ref.name = "obstacle_" + std::to_string(ctx.report->obstacles_added);
                obstacle.ref.cls = ObjectClassKind::horizontal_surface;
                obstacle.kind = ConcreteKindId::flat_platform;
                bool vertical = std::abs(cand.heading.x) >= std::abs(cand.heading.y);
                obstacle.width = vertical ? 0.25 : 1.2;
                obstacle.height = vertical ? 1.2 : 0.25;
                obstacle.rotation_deg = 0.0;

                std::vector<FivePointBox> boxes{obstacle.box_at(cand.point)};
                std::vector<int> moved{static_cast<int>(level.objects.size())};
                Level trial = level;
                trial.objects.push_back({obstacle, cand.point, ObjectRole::obstacle});
                if (!gen_detail::placement_clear(trial, moved, boxes)) continue;

                SimTrace t = run(build_world(trial, cfg.physics), shot);
                auto after = classify_events(t, cfg.classifier);
                if (gen_detail::chain_progress(after, *ctx.def) < before_progress) continue;
                if (before_destroys && !gen_detail::destroys_match(after, *ctx.def)) continue;
                if (gen_detail::restriction_violations(after, *ctx.def) > before_violations)
                    continue;

                level = std::move(trial);
                ++ctx.report->obstacles_added;
                inserted = true;
                break;
            }
            if (!inserted) {
                ctx.failure = "CannotObstruct: no placement blocks " + a + "->" + b +
                              " without breaking the chain";
                return false;
            }
        }
    }
    return true;
}

// Draws a random number of distractor blocks at supported positions. A draw
// that breaks the intended chain or the level's stability is discarded and
// redrawn, up to the draw limit.
inline void add_distractions(Level& level, const LaunchSpec& shot, SatisfyContext& ctx) {
    const GeneratorConfig& cfg = *ctx.config;
    int want = ctx.rng.uniform_int(0, cfg.max_distractors);
    if (want == 0) return;

    static const ConcreteKindId kinds[3] = {ConcreteKindId::square_hole,
                                            ConcreteKindId::triangle_hole,
                                            ConcreteKindId::circle_small};

    int added = 0;
    for (int draw = 0; draw < cfg.distractor_draw_limit && added < want; ++draw) {
        // A supported position: on the ground or on a platform top.
        std::vector<std::pair<Vec2, Vec2>> spots; // (span start, span end) of a top face
        spots.push_back({{level.bounds.x_min + 1.0, 0.0}, {level.bounds.x_max - 1.0, 0.0}});
        for (const auto& o : level.objects) {
            if (!o.instance.is_static()) continue;
            FivePointBox b = o.box();
            if (b.width() < 0.6) continue;
            spots.push_back({{b.min_x() + 0.2, b.max_y()}, {b.max_x() - 0.2, b.max_y()}});
        }
        const auto& spot = spots[ctx.rng.uniform_u64(spots.size())];

        ObjectInstance inst;
        const ConcreteKind& ck = concrete_kind(kinds[ctx.rng.uniform_u64(3)]);
        inst.ref.name = "distractor_" + std::to_string(ctx.report->distractors_added);
        inst.ref.cls = ObjectClassKind::fallable_block;
        inst.kind = ck.id;
        inst.width = ck.width;
        inst.height = ck.height;

        double x = ctx.rng.uniform_real(spot.first.x, spot.second.x);
        x = std::round(x * 10.0) / 10.0;
        Vec2 centre{x, spot.first.y + inst.height / 2.0};

        Level trial = level;
        trial.objects.push_back({inst, centre, ObjectRole::distractor});
        std::vector<int> moved{static_cast<int>(level.objects.size())};
        std::vector<FivePointBox> boxes{inst.box_at(centre)};
        if (!gen_detail::placement_clear(trial, moved, boxes)) {
            ++ctx.report->distractor_draws_discarded;
            continue;
        }

        SimTrace t = run(build_world(trial, cfg.physics), shot);
        auto events = classify_events(t, cfg.classifier);
        if (!matches_sequence(events, *ctx.def) || !stable(trial, cfg)) {
            ++ctx.report->distractor_draws_discarded;
            continue;
        }

        level = std::move(trial);
        ++ctx.report->distractors_added;
        ++added;
    }
}

// ============================================================================
// Full pipeline
// ============================================================================

namespace gen_detail {

// All combinations of overloaded interaction directions, in seeded order.
inline std::vector<std::vector<Direction>> direction_combos(const ScenarioDefinition& def,
                                                            Rng& rng, size_t cap = 16) {
    std::vector<std::vector<Direction>> combos{{}};
    for (const auto& ia : def.interactions) {
        std::vector<Direction> options = ia.direction_options;
        if (options.empty()) options = {Direction::any};
        std::vector<std::vector<Direction>> next;
        for (const auto& combo : combos) {
            for (Direction d : options) {
                auto c = combo;
                c.push_back(d);
                next.push_back(std::move(c));
                if (next.size() >= cap * 4) break;
            }
        }
        combos = std::move(next);
        if (combos.size() > cap) combos.resize(cap);
    }
    rng.shuffle(combos);
    return combos;
}

inline Level assemble_level(const ScenarioDefinition& def, const LayoutGraph& graph,
                            const Assignment& assignment, const GeneratorConfig& cfg,
                            uint64_t seed) {
    Level level;
    level.scenario_name = def.name;
    level.seed = seed;
    level.bounds = cfg.bounds;
    level.slingshot = cfg.slingshot;
    level.scenario = def;
    for (const auto& node : graph.nodes.all()) {
        PlacedObject po;
        po.instance = node;
        po.centre = assignment.at(node.ref.name).c;
        po.role = node.ref.name.rfind("support_", 0) == 0 ? ObjectRole::support
                                                          : ObjectRole::scenario;
        level.objects.push_back(std::move(po));
    }
    return level;
}

} // namespace gen_detail

// Layout inference with externally fixed direction choices.
inline LayoutGraph infer_layout_forced(const ScenarioDefinition& def,
                                       const ObjectInstanceSet& inst,
                                       const std::vector<Direction>& forced) {
    ScenarioDefinition fixed = def;
    for (size_t i = 0; i < fixed.interactions.size() && i < forced.size(); ++i)
        if (!fixed.interactions[i].direction_options.empty())
            fixed.interactions[i].direction_options = {forced[i]};
    return infer_layout(fixed, inst, 0);
}

// Runs the whole generation pipeline for one scenario and seed.
inline GenerationResult generate_task(const ScenarioDefinition& def, uint64_t seed,
                                      const GeneratorConfig& config = {}) {
    auto t_start = std::chrono::steady_clock::now();
    GenerationResult result;
    GenerationReport& report = result.report;

    auto finish = [&](std::optional<Level> level) -> GenerationResult& {
        report.wall_clock_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        report.success = level.has_value();
        result.level = std::move(level);
        return result;
    };

    ValidateOptions vopts;
    vopts.require_goal_rule = config.goal_rule;
    auto violations = validate_scenario(def, vopts);
    if (!violations.empty()) {
        for (const auto& v : violations) report.failure_reasons.push_back(v.rule + ": " + v.message);
        return finish(std::nullopt);
    }

    Rng rng(seed);
    ObjectInstanceSet inst = instantiate_objects(def, seed);

    Rng combo_rng = rng.derive("direction_combos");
    auto combos = gen_detail::direction_combos(def, combo_rng);

    for (size_t combo_i = 0; combo_i < combos.size(); ++combo_i) {
        if (report.conjunctions_tried >= config.conjunction_budget) break;
        ++report.direction_combos_tried;

        LayoutGraph graph = infer_layout_forced(def, inst, combos[combo_i]);
        graph = augment_stability(graph, &def);
        if (!check_support(graph)) {
            report.failure_reasons.push_back("support invariant failed after augmentation");
            continue;
        }

        QsrGraph qsr = translate_layout(graph);
        std::unique_ptr<DnfPool> pool;
        try {
            pool = std::make_unique<DnfPool>(qsr, rng.derive(combo_i).next_u64(),
                                             config.dnf_pool_cap);
        } catch (const PoolOverflow& e) {
            report.failure_reasons.push_back(std::string("PoolOverflow: ") + e.what());
            continue;
        }

        while (report.conjunctions_tried < config.conjunction_budget) {
            auto conj = pool->next();
            if (!conj) break;
            ++report.conjunctions_tried;
            if (gen_detail::trace_enabled()) {
                std::string desc;
                for (const auto& r : conj->relations)
                    desc += std::string(" ") + to_string(r.kind) + "(" + r.a + "," + r.b + ")";
                gen_detail::trace("[conj %d]%s", report.conjunctions_tried, desc.c_str());
            }

            // A conjunction admits many concrete placements and two far-
            // distance encodings; spend a few attempts on it before advancing
            // the pool. Each attempt counts against the conjunction budget.
            for (int placement = 0; placement < config.placements_per_conjunction; ++placement) {
            if (placement > 0 && ++report.conjunctions_tried > config.conjunction_budget) break;
            // Far relations stem from fall interactions: the vertical
            // encoding (a real drop) leads; the lateral one explores long
            // thrown arcs.
            auto [gx, gy] =
                build_dimension_graphs(*conj, graph.nodes, config.qsr, placement % 2 == 0);
            if (!check_consistency(gx, gy)) break;
            Assignment assignment;
            try {
                std::map<std::string, Vec2> pins;
                pins[def.interactions.front().actor.name] = config.slingshot;
                // The first chain target plays best within a flat shot's
                // reach: moderate standoff, near launch height. Later chain
                // members space out to the right so hops land between them.
                std::map<std::string, Vec2> prefs;
                double nan = std::numeric_limits<double>::quiet_NaN();
                // A bounce deflects the bird downward, so the reflector sits
                // higher than a directly struck first target would.
                bool bounce_opener = def.interactions.size() > 1 &&
                                     def.interactions[1].verb == InteractionVerb::bounce;
                int hit_index = 0;
                for (const auto& ia : def.interactions) {
                    if (ia.verb != InteractionVerb::hit) continue;
                    if (hit_index == 0)
                        prefs[ia.patient.name] =
                            bounce_opener
                                ? Vec2{config.slingshot.x + 5.5, config.slingshot.y + 3.5}
                                : Vec2{config.slingshot.x + 6.5, config.slingshot.y + 1.2};
                    else if (!prefs.count(ia.patient.name))
                        prefs[ia.patient.name] =
                            Vec2{config.slingshot.x + 6.5 + 5.0 * hit_index, nan};
                    ++hit_index;
                }
                assignment = solve_positions(
                    gx, gy, graph.nodes, config.bounds,
                    rng.derive(report.conjunctions_tried * 16 + placement).next_u64(), *conj,
                    config.qsr, pins, prefs);
            } catch (const DomainWipeout&) {
                gen_detail::trace("  placement %d: wipeout", placement);
                continue; // the other far-distance encoding may still fit
            }

            Level level = gen_detail::assemble_level(def, graph, assignment, config, seed);

            SatisfyContext ctx;
            ctx.def = &def;
            ctx.config = &config;
            ctx.relations = conj->relations;
            ctx.deferred = qsr.deferred;
            ctx.report = &report;
            ctx.rng = rng.derive("satisfy").derive(report.conjunctions_tried);

            // A destroying shot may only exist after liesOnPath repositioning
            // (falling blocks land where no object sits yet), so a failure
            // here is not fatal when liesOnPath constraints remain.
            if (gen_detail::trace_enabled()) {
                std::string desc;
                for (const auto& o : level.objects) {
                    char buf[96];
                    std::snprintf(buf, sizeof buf, " %s=(%.1f,%.1f)",
                                  o.instance.ref.name.c_str(), o.centre.x, o.centre.y);
                    desc += buf;
                }
                gen_detail::trace("  placement %d:%s", placement, desc.c_str());
            }
            auto shot = satisfy_destroy(level, ctx);
            bool has_deferred_paths = false;
            for (const auto& p : ctx.deferred)
                if (p.verb == LayoutVerb::lies_on_path) has_deferred_paths = true;
            if (!shot && !has_deferred_paths) {
                gen_detail::trace("  destroy: %s", ctx.failure.c_str());
                report.failure_reasons.push_back(ctx.failure);
                continue;
            }
            LaunchSpec solution = shot ? *shot : LaunchSpec{};

            if (!satisfy_lies_on_path(level, solution, ctx, shot.has_value())) {
                gen_detail::trace("  liesOnPath: %s", ctx.failure.c_str());
                report.failure_reasons.push_back(ctx.failure);
                continue;
            }
            if (!satisfy_path_obstructed(level, solution, ctx)) {
                gen_detail::trace("  pathObstructed: %s", ctx.failure.c_str());
                report.failure_reasons.push_back(ctx.failure);
                continue;
            }
            add_distractions(level, solution, ctx);

            level.intended_solution = solution;

            if (!config.skip_final_validation) {
                SimTrace t = run(build_world(level, config.physics), solution);
                auto events = classify_events(t, config.classifier);
                if (!matches_sequence(events, def)) {
                    if (gen_detail::trace_enabled()) {
                        std::string ev;
                        for (const auto& e : events) ev += " " + to_string(e);
                        gen_detail::trace("  final mismatch:%s", ev.c_str());
                    }
                    report.failure_reasons.push_back("final validation: chain mismatch");
                    continue;
                }
                if (!level_solved(t)) {
                    report.failure_reasons.push_back("final validation: pigs survive");
                    continue;
                }
                if (!stable(level, config)) {
                    report.failure_reasons.push_back("final validation: unstable layout");
                    continue;
                }
            }

            return finish(std::move(level));
            }
        }
    }

    if (report.failure_reasons.empty())
        report.failure_reasons.push_back("DNF pool exhausted without a feasible conjunction");
    return finish(std::nullopt);
}

} // namespace taskgen
