#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "taskgen/qsr.hpp"

namespace taskgen {

// ============================================================================
// DNF pool
// ============================================================================

// One disjunct chosen per constraint of the source QSR graph.
struct Conjunction {
    std::vector<QsrRelation> relations;
};

class PoolOverflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Enumerates all disjunct combinations of a QSR graph in seeded-random order.
// Conjunctions are materialized one at a time; the shuffled index sequence is
// produced by an incremental Fisher-Yates so untouched parts of large pools
// cost nothing.
class DnfPool {
public:
    DnfPool(const QsrGraph& graph, uint64_t seed, uint64_t cap = 1000000)
        : graph_(&graph), rng_(Rng(seed).derive("dnf_pool")) {
        total_ = 1;
        for (const auto& c : graph.constraints) {
            radices_.push_back(c.disjuncts.size());
            if (c.disjuncts.empty()) throw PoolOverflow("constraint with no disjuncts");
            if (total_ > cap / c.disjuncts.size() + 1) {
                uint64_t next = total_ * c.disjuncts.size();
                if (next / c.disjuncts.size() != total_ || next > cap)
                    throw PoolOverflow("DNF pool exceeds cap");
                total_ = next;
            } else {
                total_ *= c.disjuncts.size();
                if (total_ > cap) throw PoolOverflow("DNF pool exceeds cap");
            }
        }
    }

    uint64_t size() const { return total_; }
    uint64_t cursor() const { return cursor_; }
    bool exhausted() const { return cursor_ >= total_; }

    std::optional<Conjunction> next() {
        if (cursor_ >= total_) return std::nullopt;
        uint64_t index = draw_permuted(cursor_++);
        Conjunction conj;
        conj.relations.reserve(radices_.size());
        for (size_t i = 0; i < radices_.size(); ++i) {
            uint64_t digit = index % radices_[i];
            index /= radices_[i];
            conj.relations.push_back(graph_->constraints[i].disjuncts[digit]);
        }
        return conj;
    }

private:
    uint64_t draw_permuted(uint64_t i) {
        uint64_t j = i + rng_.uniform_u64(total_ - i);
        uint64_t vi = lookup(i), vj = lookup(j);
        swaps_[j] = vi;
        swaps_[i] = vj; // value consumed; kept for clarity
        return vj;
    }

    uint64_t lookup(uint64_t k) const {
        auto it = swaps_.find(k);
        return it == swaps_.end() ? k : it->second;
    }

    const QsrGraph* graph_;
    Rng rng_;
    std::vector<uint64_t> radices_;
    uint64_t total_ = 1;
    uint64_t cursor_ = 0;
    std::unordered_map<uint64_t, uint64_t> swaps_;
};

// ============================================================================
// Dimension graphs
// ============================================================================

enum class Axis { X, Y };

// Point order within one object.
enum DimPoint { P_LL = 0, P_LR = 1, P_UL = 2, P_UR = 3, P_C = 4 };

inline const char* dim_point_name(int p) {
    static const char* names[5] = {"ll", "lr", "ul", "ur", "c"};
    return names[p];
}

enum class DimEdgeLabel { strict_lt, leq, eq, gap, band };

inline const char* to_string(DimEdgeLabel l) {
    switch (l) {
        case DimEdgeLabel::strict_lt: return "lt";
        case DimEdgeLabel::leq: return "leq";
        case DimEdgeLabel::eq: return "eq";
        case DimEdgeLabel::gap: return "gap";
        case DimEdgeLabel::band: return "band";
    }
    return "?";
}

// Constraint on the coordinates of two points along one axis:
//   min <= coord(v) - coord(u) <= max.
// eq edges carry min == max; band edges may have a negative min and do not
// participate in cycle detection (they impose no ordering).
struct DimEdge {
    int u_obj = 0;
    int u_pt = 0;
    int v_obj = 0;
    int v_pt = 0;
    DimEdgeLabel label = DimEdgeLabel::leq;
    double min = 0.0;
    double max = std::numeric_limits<double>::infinity();
};

struct DimObject {
    std::string name;
    std::array<double, 5> offset{}; // point coordinate = anchor + offset
    double min_off = 0.0;           // extent offsets over the corners
    double max_off = 0.0;
    int min_pt = P_LL; // corner realizing min_off
    int max_pt = P_LR; // corner realizing max_off
};

struct DimensionGraph {
    Axis axis = Axis::X;
    std::vector<DimObject> objects;
    std::vector<DimEdge> edges;

    int index_of(const std::string& name) const {
        for (size_t i = 0; i < objects.size(); ++i)
            if (objects[i].name == name) return static_cast<int>(i);
        return -1;
    }
};

namespace dim_detail {

inline int corner_to_point(CornerId c) {
    switch (c) {
        case CornerId::ll: return P_LL;
        case CornerId::lr: return P_LR;
        case CornerId::ur: return P_UR;
        case CornerId::ul: return P_UL;
    }
    return P_C;
}

inline DimObject make_dim_object(const ObjectInstance& inst, Axis axis) {
    DimObject o;
    o.name = inst.ref.name;
    PointOffsets off = point_offsets(inst.width, inst.height, inst.rotation_deg);
    // point_offsets order: ll, lr, ul, ur, c -> our order: ll, lr, ul, ur, c.
    const auto& vals = (axis == Axis::X) ? off.dx : off.dy;
    o.offset = {vals[0], vals[1], vals[2], vals[3], vals[4]};
    o.min_off = o.offset[0];
    o.max_off = o.offset[0];
    o.min_pt = o.max_pt = P_LL;
    for (int p = 0; p < 4; ++p) { // corners only
        if (o.offset[p] < o.min_off) { o.min_off = o.offset[p]; o.min_pt = p; }
        if (o.offset[p] > o.max_off) { o.max_off = o.offset[p]; o.max_pt = p; }
    }
    return o;
}

inline void add_intrinsic_edges(DimensionGraph& g, int obj_index) {
    const DimObject& o = g.objects[obj_index];
    std::array<int, 5> order = {0, 1, 2, 3, 4};
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return o.offset[a] < o.offset[b]; });
    for (int i = 0; i + 1 < 5; ++i) {
        int u = order[i], v = order[i + 1];
        double d = o.offset[v] - o.offset[u];
        DimEdge e;
        e.u_obj = e.v_obj = obj_index;
        e.u_pt = u;
        e.v_pt = v;
        if (std::abs(d) < 1e-9) {
            e.label = DimEdgeLabel::eq;
            e.min = e.max = 0.0;
        } else {
            e.label = DimEdgeLabel::strict_lt;
            e.min = e.max = d;
        }
        g.edges.push_back(e);
    }
}

} // namespace dim_detail

// Projects the relations of a conjunction onto per-axis dimension graphs.
// Instances provide the exact point offsets (sizes and rotations are fixed
// before solving), so every edge carries a concrete interval.
// `diagonal_far_vertical` switches which axis of a diagonal Far relation
// carries the far distance; both encodings satisfy the relation, they reach
// different configurations (a long lateral throw vs a tall drop).
inline std::pair<DimensionGraph, DimensionGraph> build_dimension_graphs(
    const Conjunction& conj, const ObjectInstanceSet& inst, const QsrParams& params = {},
    bool diagonal_far_vertical = false) {
    DimensionGraph gx, gy;
    gx.axis = Axis::X;
    gy.axis = Axis::Y;
    for (const auto& i : inst.all()) {
        gx.objects.push_back(dim_detail::make_dim_object(i, Axis::X));
        gy.objects.push_back(dim_detail::make_dim_object(i, Axis::Y));
    }
    for (size_t i = 0; i < inst.all().size(); ++i) {
        dim_detail::add_intrinsic_edges(gx, static_cast<int>(i));
        dim_detail::add_intrinsic_edges(gy, static_cast<int>(i));
    }

    const double eps = params.contact_eps;
    const double far_lo = params.far_threshold;
    const double INF = std::numeric_limits<double>::infinity();
    const double near_hi = INF; // cardinal relations are open-ended

    auto edge = [](DimensionGraph& g, int ao, int ap, int bo, int bp, DimEdgeLabel label,
                   double lo, double hi) {
        DimEdge e;
        e.u_obj = ao;
        e.u_pt = ap;
        e.v_obj = bo;
        e.v_pt = bp;
        e.label = label;
        e.min = lo;
        e.max = hi;
        g.edges.push_back(e);
    };

    for (const auto& rel : conj.relations) {
        int A_x = gx.index_of(rel.a), B_x = gx.index_of(rel.b);
        if (A_x < 0 || B_x < 0)
            throw std::invalid_argument("relation references unknown object " + rel.a + "/" + rel.b);
        const DimObject& ax = gx.objects[A_x];
        const DimObject& bx = gx.objects[B_x];
        const DimObject& ay = gy.objects[A_x];
        const DimObject& by = gy.objects[B_x];
        const int A = A_x, B = B_x;

        // Shorthand for frequently used projections.
        auto gap_right = [&](double lo, double hi) { // a right of b: a.min_x - b.max_x
            edge(gx, B, bx.max_pt, A, ax.min_pt, DimEdgeLabel::gap, lo, hi);
        };
        auto gap_left = [&](double lo, double hi) { // b.min_x - a.max_x
            edge(gx, A, ax.max_pt, B, bx.min_pt, DimEdgeLabel::gap, lo, hi);
        };
        auto gap_above = [&](double lo, double hi) { // a.min_y - b.max_y
            edge(gy, B, by.max_pt, A, ay.min_pt, DimEdgeLabel::gap, lo, hi);
        };
        auto gap_below = [&](double lo, double hi) { // b.min_y - a.max_y
            edge(gy, A, ay.max_pt, B, by.min_pt, DimEdgeLabel::gap, lo, hi);
        };
        auto x_overlap = [&]() {
            edge(gx, A, ax.min_pt, B, bx.max_pt, DimEdgeLabel::leq, 0.0, INF);
            edge(gx, B, bx.min_pt, A, ax.max_pt, DimEdgeLabel::leq, 0.0, INF);
        };
        auto y_overlap = [&]() {
            edge(gy, A, ay.min_pt, B, by.max_pt, DimEdgeLabel::leq, 0.0, INF);
            edge(gy, B, by.min_pt, A, ay.max_pt, DimEdgeLabel::leq, 0.0, INF);
        };
        // Vertical contact: a's bottom on b's top.
        auto rest_on_top = [&]() {
            edge(gy, B, by.max_pt, A, ay.min_pt, DimEdgeLabel::eq, 0.0, 0.0);
        };
        auto x_contained = [&]() {
            edge(gx, B, bx.min_pt, A, ax.min_pt, DimEdgeLabel::leq, 0.0, INF);
            edge(gx, A, ax.max_pt, B, bx.max_pt, DimEdgeLabel::leq, 0.0, INF);
        };
        double bw = bx.max_off - bx.min_off;

        switch (rel.kind) {
            case QsrKind::N: gap_above(eps, near_hi); x_overlap(); break;
            case QsrKind::S: gap_below(eps, near_hi); x_overlap(); break;
            case QsrKind::E: gap_right(eps, near_hi); y_overlap(); break;
            case QsrKind::W: gap_left(eps, near_hi); y_overlap(); break;
            case QsrKind::NE: gap_above(eps, near_hi); gap_right(eps, near_hi); break;
            case QsrKind::NW: gap_above(eps, near_hi); gap_left(eps, near_hi); break;
            case QsrKind::SE: gap_below(eps, near_hi); gap_right(eps, near_hi); break;
            case QsrKind::SW: gap_below(eps, near_hi); gap_left(eps, near_hi); break;

            case QsrKind::FarN: gap_above(far_lo, INF); x_overlap(); break;
            case QsrKind::FarS: gap_below(far_lo, INF); x_overlap(); break;
            case QsrKind::FarE: gap_right(far_lo, INF); y_overlap(); break;
            case QsrKind::FarW: gap_left(far_lo, INF); y_overlap(); break;
            // Diagonal far relations carry the far distance on one chosen
            // axis; the other separation only needs to be present.
            case QsrKind::FarNE:
                if (diagonal_far_vertical) { gap_above(far_lo, INF); gap_right(eps, INF); }
                else { gap_above(eps, INF); gap_right(far_lo, INF); }
                break;
            case QsrKind::FarNW:
                if (diagonal_far_vertical) { gap_above(far_lo, INF); gap_left(eps, INF); }
                else { gap_above(eps, INF); gap_left(far_lo, INF); }
                break;
            case QsrKind::FarSE:
                if (diagonal_far_vertical) { gap_below(far_lo, INF); gap_right(eps, INF); }
                else { gap_below(eps, INF); gap_right(far_lo, INF); }
                break;
            case QsrKind::FarSW:
                if (diagonal_far_vertical) { gap_below(far_lo, INF); gap_left(eps, INF); }
                else { gap_below(eps, INF); gap_left(far_lo, INF); }
                break;

            case QsrKind::MeetN:
                rest_on_top();
                x_contained();
                edge(gx, B, bx.min_pt, A, P_C, DimEdgeLabel::gap, bw / 3.0, 2.0 * bw / 3.0);
                break;
            case QsrKind::MeetDuringW:
                rest_on_top();
                x_contained();
                edge(gx, B, bx.min_pt, A, P_C, DimEdgeLabel::leq, 0.0, bw / 3.0);
                break;
            case QsrKind::MeetDuringE:
                rest_on_top();
                x_contained();
                edge(gx, B, bx.min_pt, A, P_C, DimEdgeLabel::gap, 2.0 * bw / 3.0, bw);
                break;
            case QsrKind::MeetW: {
                // Side contact continuing a movement path: a's top-right
                // corner coincides with b's top-left corner.
                ObjectInstance ia = inst.at(rel.a), ib = inst.at(rel.b);
                FivePointBox fa = ia.box_at({0, 0}), fb = ib.box_at({0, 0});
                int rt = dim_detail::corner_to_point(top_right_corner(fa));
                int lt = dim_detail::corner_to_point(top_left_corner(fb));
                edge(gx, A, ax.max_pt, B, bx.min_pt, DimEdgeLabel::eq, 0.0, 0.0);
                edge(gy, A, rt, B, lt, DimEdgeLabel::eq, 0.0, 0.0);
                break;
            }
            case QsrKind::MeetNW: {
                ObjectInstance ib = inst.at(rel.b);
                FivePointBox fb = ib.box_at({0, 0});
                int lt = dim_detail::corner_to_point(top_left_corner(fb));
                double radius = std::max(0.1, 0.25 * std::min(fb.width(), fb.height()));
                rest_on_top();
                edge(gx, B, lt, A, ax.min_pt, DimEdgeLabel::band, -radius, radius);
                break;
            }
            case QsrKind::MeetSW: {
                double radius = std::max(0.1, 0.25 * std::min(bx.max_off - bx.min_off,
                                                              by.max_off - by.min_off));
                edge(gy, A, ay.max_pt, B, by.min_pt, DimEdgeLabel::eq, 0.0, 0.0);
                edge(gx, B, bx.min_pt, A, ax.min_pt, DimEdgeLabel::band, -radius, radius);
                break;
            }
        }
    }
    return {gx, gy};
}

// ============================================================================
// Consistency: cycle detection after equality merging
// ============================================================================

namespace dim_detail {

class Dsu {
public:
    explicit Dsu(size_t n) : parent_(n) {
        for (size_t i = 0; i < n; ++i) parent_[i] = static_cast<int>(i);
    }
    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(int a, int b) { parent_[find(a)] = find(b); }

private:
    std::vector<int> parent_;
};

inline int node_id(const DimensionGraph&, int obj, int pt) { return obj * 5 + pt; }

// True iff the graph, with eq-merged nodes, has no cycle containing a strict
// edge. Cycles made purely of leq edges are treated as equalities.
inline bool acyclic_after_merge(const DimensionGraph& g) {
    size_t n = g.objects.size() * 5;
    Dsu dsu(n);
    for (const auto& e : g.edges)
        if (e.label == DimEdgeLabel::eq)
            dsu.unite(node_id(g, e.u_obj, e.u_pt), node_id(g, e.v_obj, e.v_pt));

    struct Arc {
        int to;
        bool strict;
    };
    std::vector<std::vector<Arc>> adj(n);
    std::vector<std::pair<std::pair<int, int>, bool>> arcs; // ((u,v), strict)
    for (const auto& e : g.edges) {
        if (e.label == DimEdgeLabel::eq || e.label == DimEdgeLabel::band) continue;
        bool strict = e.label == DimEdgeLabel::strict_lt ||
                      (e.label == DimEdgeLabel::gap && e.min > 1e-12);
        int u = dsu.find(node_id(g, e.u_obj, e.u_pt));
        int v = dsu.find(node_id(g, e.v_obj, e.v_pt));
        if (u == v) {
            if (strict) return false; // strict self-loop after merging
            continue;
        }
        adj[u].push_back({v, strict});
        arcs.push_back({{u, v}, strict});
    }

    // Tarjan SCC, iterative.
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    int next_index = 0, comp_count = 0;

    struct Frame {
        int node;
        size_t child;
    };
    for (size_t s = 0; s < n; ++s) {
        if (index[s] != -1) continue;
        std::vector<Frame> call;
        call.push_back({static_cast<int>(s), 0});
        while (!call.empty()) {
            Frame& f = call.back();
            int v = f.node;
            if (f.child == 0) {
                index[v] = low[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            if (f.child < adj[v].size()) {
                int w = adj[v][f.child++].to;
                if (index[w] == -1) {
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
            } else {
                if (low[v] == index[v]) {
                    for (;;) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        comp[w] = comp_count;
                        if (w == v) break;
                    }
                    ++comp_count;
                }
                call.pop_back();
                if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[v]);
            }
        }
    }

    // A strict arc inside one component closes an impossible cycle.
    for (const auto& [uv, strict] : arcs)
        if (strict && comp[uv.first] == comp[uv.second]) return false;
    return true;
}

} // namespace dim_detail

inline bool check_consistency(const DimensionGraph& gx, const DimensionGraph& gy) {
    return dim_detail::acyclic_after_merge(gx) && dim_detail::acyclic_after_merge(gy);
}

// Line-based debug dump: "<obj>.<pt> <obj>.<pt> <label>" per edge.
inline std::string dump_dimension_graph(const DimensionGraph& g) {
    std::ostringstream out;
    out << (g.axis == Axis::X ? "axis X\n" : "axis Y\n");
    for (const auto& e : g.edges)
        out << g.objects[e.u_obj].name << "." << dim_point_name(e.u_pt) << " "
            << g.objects[e.v_obj].name << "." << dim_point_name(e.v_pt) << " "
            << to_string(e.label) << "\n";
    return out.str();
}

// ============================================================================
// Position solving (forward checking over lattice domains)
// ============================================================================

struct WorldBounds {
    double x_min = 0.0;
    double x_max = 30.0;
    double y_min = 0.0;
    double y_max = 15.0;
};

struct Assignment {
    std::map<std::string, FivePointBox> boxes;

    const FivePointBox& at(const std::string& name) const { return boxes.at(name); }
};

class DomainWipeout : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace dim_detail {

constexpr double kLattice = 0.1;

struct ClassConstraint {
    int from = 0; // class index
    int to = 0;
    double lo = 0.0;
    double hi = 0.0;
};

// Anchors of one axis after equality merging: each object's centre coordinate
// equals value(root class) + potential.
struct AxisSystem {
    std::vector<int> cls;        // object -> class index
    std::vector<double> pot;     // object -> offset from class value
    std::vector<ClassConstraint> constraints;
    std::vector<std::vector<double>> domains; // per class
    std::vector<std::optional<double>> prefs; // per class, soft target value
    int n_classes = 0;
};

// Weighted union-find: anchor(b) - anchor(a) = delta.
class PotentialDsu {
public:
    explicit PotentialDsu(size_t n) : parent_(n), pot_(n, 0.0) {
        for (size_t i = 0; i < n; ++i) parent_[i] = static_cast<int>(i);
    }

    std::pair<int, double> find(int x) {
        if (parent_[x] == x) return {x, 0.0};
        auto [root, p] = find(parent_[x]);
        parent_[x] = root;
        pot_[x] += p;
        return {root, pot_[x]};
    }

    // Returns false on contradiction.
    bool unite(int a, int b, double delta) { // value(b) = value(a) + delta
        auto [ra, pa] = find(a);
        auto [rb, pb] = find(b);
        if (ra == rb) return std::abs((pb - pa) - delta) < 1e-6;
        parent_[rb] = ra;
        pot_[rb] = pa + delta - pb;
        return true;
    }

    double potential(int x) {
        auto [root, p] = find(x);
        (void)root;
        return p;
    }

private:
    std::vector<int> parent_;
    std::vector<double> pot_;
};

inline std::optional<AxisSystem> build_axis_system(
    const DimensionGraph& g, double lo_bound, double hi_bound,
    const std::map<std::string, double>& pinned,
    const std::map<std::string, double>& preferred = {}) {
    size_t n = g.objects.size();
    PotentialDsu dsu(n);

    // Anchor deltas from eq edges.
    for (const auto& e : g.edges) {
        if (e.label != DimEdgeLabel::eq) continue;
        if (e.u_obj == e.v_obj) continue;
        double delta = g.objects[e.u_obj].offset[e.u_pt] - g.objects[e.v_obj].offset[e.v_pt];
        if (!dsu.unite(e.u_obj, e.v_obj, delta)) return std::nullopt;
    }

    AxisSystem sys;
    sys.cls.resize(n);
    sys.pot.resize(n);
    std::map<int, int> root_to_class;
    for (size_t i = 0; i < n; ++i) {
        auto [root, pot] = dsu.find(static_cast<int>(i));
        auto it = root_to_class.find(root);
        if (it == root_to_class.end())
            it = root_to_class.emplace(root, static_cast<int>(root_to_class.size())).first;
        sys.cls[i] = it->second;
        sys.pot[i] = pot;
    }
    sys.n_classes = static_cast<int>(root_to_class.size());

    // Class-level interval constraints from the remaining edges.
    std::map<std::pair<int, int>, std::pair<double, double>> merged;
    for (const auto& e : g.edges) {
        if (e.label == DimEdgeLabel::eq) continue;
        double shift = g.objects[e.u_obj].offset[e.u_pt] + sys.pot[e.u_obj] -
                       g.objects[e.v_obj].offset[e.v_pt] - sys.pot[e.v_obj];
        double lo = e.min + shift;
        double hi = e.max + shift;
        int cu = sys.cls[e.u_obj], cv = sys.cls[e.v_obj];
        if (cu == cv) {
            if (0.0 < lo - 1e-9 || 0.0 > hi + 1e-9) return std::nullopt;
            continue;
        }
        auto key = std::make_pair(cu, cv);
        auto it = merged.find(key);
        if (it == merged.end()) merged[key] = {lo, hi};
        else {
            it->second.first = std::max(it->second.first, lo);
            it->second.second = std::min(it->second.second, hi);
            if (it->second.first > it->second.second + 1e-9) return std::nullopt;
        }
    }
    for (const auto& [key, interval] : merged)
        sys.constraints.push_back({key.first, key.second, interval.first, interval.second});

    sys.prefs.assign(sys.n_classes, std::nullopt);
    for (size_t i = 0; i < n; ++i) {
        auto it = preferred.find(g.objects[i].name);
        if (it != preferred.end() && !sys.prefs[sys.cls[i]])
            sys.prefs[sys.cls[i]] = it->second - sys.pot[i];
    }

    // Domains: every member's box must fit inside the world bounds; a pinned
    // member fixes its class to a single value.
    sys.domains.assign(sys.n_classes, {});
    std::vector<double> lo(sys.n_classes, lo_bound - 1e9), hi(sys.n_classes, hi_bound + 1e9);
    std::vector<std::optional<double>> pin(sys.n_classes);
    for (size_t i = 0; i < n; ++i) {
        int c = sys.cls[i];
        const DimObject& o = g.objects[i];
        lo[c] = std::max(lo[c], lo_bound - o.min_off - sys.pot[i]);
        hi[c] = std::min(hi[c], hi_bound - o.max_off - sys.pot[i]);
        auto it = pinned.find(o.name);
        if (it != pinned.end()) {
            double v = it->second - sys.pot[i];
            if (pin[c] && std::abs(*pin[c] - v) > 1e-6) return std::nullopt;
            pin[c] = v;
        }
    }
    for (int c = 0; c < sys.n_classes; ++c) {
        if (pin[c]) {
            if (*pin[c] < lo[c] - 1e-9 || *pin[c] > hi[c] + 1e-9) return std::nullopt;
            sys.domains[c] = {*pin[c]};
            continue;
        }
        if (lo[c] > hi[c] + 1e-9) return std::nullopt;
        double start = std::ceil((lo[c] - 1e-9) / kLattice) * kLattice;
        for (double v = start; v <= hi[c] + 1e-9; v += kLattice)
            sys.domains[c].push_back(v);
        if (sys.domains[c].empty()) return std::nullopt;
    }
    return sys;
}

// Chronological-backtracking forward checking over one axis system.
inline std::optional<std::vector<double>> solve_axis(const AxisSystem& sys, Rng& rng) {
    int n = sys.n_classes;

    // Variable order: topological over strictly-positive constraints, pinned
    // (singleton) classes first so everything anchors around them.
    std::vector<int> order;
    {
        std::vector<int> indes(n, 0);
        std::vector<std::vector<int>> out(n);
        for (const auto& c : sys.constraints) {
            if (c.lo > 1e-9) {
                out[c.from].push_back(c.to);
                ++indes[c.to];
            }
        }
        std::vector<bool> placed(n, false);
        for (int c = 0; c < n; ++c)
            if (sys.domains[c].size() == 1 && indes[c] == 0) {
                order.push_back(c);
                placed[c] = true;
                for (int w : out[c]) --indes[w];
            }
        bool progress = true;
        while (static_cast<int>(order.size()) < n) {
            progress = false;
            for (int c = 0; c < n; ++c) {
                if (placed[c] || indes[c] != 0) continue;
                order.push_back(c);
                placed[c] = true;
                for (int w : out[c]) --indes[w];
                progress = true;
            }
            if (!progress) {
                for (int c = 0; c < n; ++c)
                    if (!placed[c]) {
                        order.push_back(c);
                        placed[c] = true;
                    }
            }
        }
    }

    // Adjacency for pruning.
    std::vector<std::vector<ClassConstraint>> incident(n);
    for (const auto& c : sys.constraints) {
        incident[c.from].push_back(c);
        incident[c.to].push_back(c);
    }

    struct Node {
        std::vector<std::vector<double>> domains;
        std::vector<double> candidates;
        bool primed = false;
    };

    std::vector<double> value(n, 0.0);
    std::vector<bool> assigned(n, false);
    std::vector<Node> trail(n);
    int steps = 0;

    auto prune = [&](std::vector<std::vector<double>>& domains, int c) -> bool {
        for (const auto& con : incident[c]) {
            int other = (con.from == c) ? con.to : con.from;
            if (assigned[other]) continue;
            std::vector<double>& dom = domains[other];
            std::vector<double> kept;
            kept.reserve(dom.size());
            for (double w : dom) {
                double diff = (con.from == c) ? (w - value[c]) : (value[c] - w);
                if (diff >= con.lo - 1e-9 && diff <= con.hi + 1e-9) kept.push_back(w);
            }
            if (kept.empty()) return false;
            dom = std::move(kept);
        }
        return true;
    };

    int depth = 0;
    trail[0].domains = sys.domains;
    trail[0].candidates.clear();
    trail[0].primed = false;

    while (depth < n) {
        if (++steps > 20000) return std::nullopt;
        Node& node = trail[depth];
        int c = order[depth];
        if (!node.primed) {
            // First visit at this depth: filter against assigned neighbours.
            std::vector<double> feasible;
            for (double v : node.domains[c]) {
                bool ok = true;
                for (const auto& con : incident[c]) {
                    int other = (con.from == c) ? con.to : con.from;
                    if (!assigned[other]) continue;
                    double diff = (con.from == c) ? (value[other] - v) : (v - value[other]);
                    if (diff < con.lo - 1e-9 || diff > con.hi + 1e-9) { ok = false; break; }
                }
                if (ok) feasible.push_back(v);
            }
            node.candidates = std::move(feasible);
            node.primed = true;
        }

        if (node.candidates.empty()) {
            // Backtrack.
            if (depth == 0) return std::nullopt;
            assigned[order[depth]] = false;
            --depth;
            assigned[order[depth]] = false;
            continue;
        }

        // Value choice: a soft preference pulls toward requested spots,
        // otherwise mostly uniform with an occasional compact pick (keeps
        // sprawling layouts inside the camera bounds).
        size_t pick;
        if (sys.prefs[c] && rng.chance(0.6)) {
            double target = *sys.prefs[c] + rng.uniform_real(-0.8, 0.8);
            double best = std::numeric_limits<double>::infinity();
            pick = 0;
            for (size_t i = 0; i < node.candidates.size(); ++i) {
                double d = std::abs(node.candidates[i] - target);
                if (d < best) { best = d; pick = i; }
            }
        } else if (rng.chance(0.12)) {
            double best = std::numeric_limits<double>::infinity();
            pick = 0;
            for (size_t i = 0; i < node.candidates.size(); ++i) {
                double cost = 0.0;
                for (const auto& con : incident[c]) {
                    int other = (con.from == c) ? con.to : con.from;
                    if (assigned[other]) cost += std::abs(node.candidates[i] - value[other]);
                }
                if (cost < best) { best = cost; pick = i; }
            }
        } else {
            pick = rng.uniform_u64(node.candidates.size());
        }
        value[c] = node.candidates[pick];
        node.candidates.erase(node.candidates.begin() + pick);
        assigned[c] = true;

        auto domains = node.domains;
        if (!prune(domains, c)) {
            assigned[c] = false;
            continue; // next candidate at same depth
        }
        ++depth;
        if (depth < n) {
            trail[depth].domains = std::move(domains);
            trail[depth].candidates.clear();
            trail[depth].primed = false;
        }
    }

    return value;
}

} // namespace dim_detail

// Assigns coordinates to every object so that all relations of the solved
// conjunction hold. `pinned` fixes named objects' centres (the bird sits at
// the slingshot). Throws DomainWipeout when no placement survives.
inline Assignment solve_positions(const DimensionGraph& gx, const DimensionGraph& gy,
                                  const ObjectInstanceSet& inst, const WorldBounds& bounds,
                                  uint64_t seed, const Conjunction& conj,
                                  const QsrParams& params = {},
                                  const std::map<std::string, Vec2>& pinned = {},
                                  const std::map<std::string, Vec2>& preferred = {}) {
    std::map<std::string, double> pin_x, pin_y, pref_x, pref_y;
    for (const auto& [name, pos] : pinned) {
        pin_x[name] = pos.x;
        pin_y[name] = pos.y;
    }
    for (const auto& [name, pos] : preferred) {
        if (!std::isnan(pos.x)) pref_x[name] = pos.x;
        if (!std::isnan(pos.y)) pref_y[name] = pos.y;
    }

    auto sys_x = dim_detail::build_axis_system(gx, bounds.x_min, bounds.x_max, pin_x, pref_x);
    auto sys_y = dim_detail::build_axis_system(gy, bounds.y_min, bounds.y_max, pin_y, pref_y);
    if (!sys_x || !sys_y) throw DomainWipeout("axis system infeasible");

    Rng rng = Rng(seed).derive("solve_positions");
    for (int attempt = 0; attempt < 6; ++attempt) {
        Rng rx = rng.derive(attempt * 2);
        Rng ry = rng.derive(attempt * 2 + 1);
        auto vx = dim_detail::solve_axis(*sys_x, rx);
        auto vy = dim_detail::solve_axis(*sys_y, ry);
        if (!vx || !vy) continue;

        Assignment out;
        for (size_t i = 0; i < inst.all().size(); ++i) {
            const ObjectInstance& oi = inst.all()[i];
            double cx = (*vx)[sys_x->cls[i]] + sys_x->pot[i];
            double cy = (*vy)[sys_y->cls[i]] + sys_y->pot[i];
            out.boxes[oi.ref.name] = oi.box_at({cx, cy});
        }

        bool sound = true;
        for (const auto& rel : conj.relations)
            if (!holds(rel, out.at(rel.a), out.at(rel.b), params)) { sound = false; break; }
        if (sound) return out;
    }
    throw DomainWipeout("no lattice assignment satisfies the conjunction");
}

} // namespace taskgen
