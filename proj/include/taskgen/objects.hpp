#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "taskgen/geom.hpp"
#include "taskgen/rng.hpp"

namespace taskgen {

// ============================================================================
// Object vocabulary: classes, concrete game objects, materials
// ============================================================================

enum class ObjectClassKind {
    bird,
    pig,
    rollable_block,
    fallable_block,
    slidable_block,
    horizontal_surface,
    inclined_surface,
    surface,
};

enum class ConcreteKindId {
    red_bird,
    pig_small,
    pig_medium,
    circle_small,
    circle,
    square_hole,
    triangle_hole,
    flat_platform,
    inclined_platform,
};

enum class Material { bird, pig, wood, stone, platform };

enum class ShapeKind { circle, box, right_triangle };

struct ConcreteKind {
    ConcreteKindId id;
    std::string name;
    double width = 0.0;  // default extent, world units
    double height = 0.0;
    bool is_static = false;
    Material material = Material::wood;
    ShapeKind shape = ShapeKind::box;
    double mass = 1.0;       // ignored for static kinds
    double health = -1.0;    // < 0 means indestructible
};

inline const std::vector<ConcreteKind>& concrete_catalog() {
    static const std::vector<ConcreteKind> catalog = {
        {ConcreteKindId::red_bird, "redBird", 0.35, 0.35, false, Material::bird, ShapeKind::circle, 1.0, -1.0},
        {ConcreteKindId::pig_small, "pigSmall", 0.5, 0.5, false, Material::pig, ShapeKind::circle, 0.5, 1.0},
        {ConcreteKindId::pig_medium, "pigMedium", 0.8, 0.8, false, Material::pig, ShapeKind::circle, 1.0, 1.5},
        {ConcreteKindId::circle_small, "circleSmall", 0.4, 0.4, false, Material::wood, ShapeKind::circle, 0.8, 3.0},
        {ConcreteKindId::circle, "circle", 0.8, 0.8, false, Material::wood, ShapeKind::circle, 1.0, 3.0},
        {ConcreteKindId::square_hole, "squareHole", 0.8, 0.8, false, Material::wood, ShapeKind::box, 1.0, 3.0},
        {ConcreteKindId::triangle_hole, "triangleHole", 0.8, 0.8, false, Material::wood, ShapeKind::right_triangle, 0.8, 3.0},
        {ConcreteKindId::flat_platform, "flatPlatform", 3.0, 0.25, true, Material::platform, ShapeKind::box, 0.0, -1.0},
        {ConcreteKindId::inclined_platform, "inclinedPlatform", 2.5, 0.25, true, Material::platform, ShapeKind::box, 0.0, -1.0},
    };
    return catalog;
}

inline const ConcreteKind& concrete_kind(ConcreteKindId id) {
    return concrete_catalog()[static_cast<size_t>(id)];
}

inline const ConcreteKind* concrete_kind_by_name(const std::string& name) {
    for (const auto& k : concrete_catalog())
        if (k.name == name) return &k;
    return nullptr;
}

struct ObjectClass {
    ObjectClassKind kind;
    std::string name;
    std::string abbreviation; // empty when the full name is the only spelling
    std::vector<ConcreteKindId> concrete_options;
};

inline const std::vector<ObjectClass>& class_catalog() {
    using C = ConcreteKindId;
    static const std::vector<ObjectClass> catalog = {
        {ObjectClassKind::bird, "bird", "", {C::red_bird}},
        {ObjectClassKind::pig, "pig", "", {C::pig_small, C::pig_medium}},
        {ObjectClassKind::rollable_block, "rollableBlock", "rBlock", {C::circle_small, C::circle}},
        {ObjectClassKind::fallable_block, "fallableBlock", "fBlock",
         {C::circle_small, C::circle, C::square_hole, C::triangle_hole}},
        {ObjectClassKind::slidable_block, "slidableBlock", "sBlock", {C::square_hole, C::triangle_hole}},
        {ObjectClassKind::horizontal_surface, "horizontalSurface", "hSurface", {C::flat_platform}},
        {ObjectClassKind::inclined_surface, "inclinedSurface", "iSurface", {C::inclined_platform}},
        {ObjectClassKind::surface, "surface", "", {C::flat_platform, C::inclined_platform}},
    };
    return catalog;
}

inline const ObjectClass& object_class(ObjectClassKind kind) {
    return class_catalog()[static_cast<size_t>(kind)];
}

// Resolves a class spelling (full name or abbreviation) to its class.
inline const ObjectClass* class_by_spelling(const std::string& spelling) {
    for (const auto& c : class_catalog())
        if (c.name == spelling || (!c.abbreviation.empty() && c.abbreviation == spelling))
            return &c;
    return nullptr;
}

inline bool class_is_static(ObjectClassKind kind) {
    return kind == ObjectClassKind::horizontal_surface ||
           kind == ObjectClassKind::inclined_surface || kind == ObjectClassKind::surface;
}

// ============================================================================
// Object references and concrete instances
// ============================================================================

// A named object slot in a scenario, e.g. "rBlock2". The name determines the
// class; an optional numeric suffix distinguishes multiple instances.
struct ObjectRef {
    std::string name;
    ObjectClassKind cls = ObjectClassKind::bird;

    bool operator==(const ObjectRef& o) const { return name == o.name; }
    bool operator<(const ObjectRef& o) const { return name < o.name; }
};

// One scenario object bound to a concrete game object. Width/height/rotation
// may differ from the catalog defaults (platform sizing is context dependent).
struct ObjectInstance {
    ObjectRef ref;
    ConcreteKindId kind = ConcreteKindId::red_bird;
    double width = 0.0;
    double height = 0.0;
    double rotation_deg = 0.0; // visual rotation; negative tilts down-right

    const ConcreteKind& concrete() const { return concrete_kind(kind); }
    bool is_static() const { return concrete().is_static; }

    FivePointBox box_at(const Vec2& centre) const {
        return make_box(centre, width, height, rotation_deg);
    }
};

// Instances keyed by reference name, preserving declaration order.
class ObjectInstanceSet {
public:
    void add(ObjectInstance inst) {
        if (index_.count(inst.ref.name))
            throw std::invalid_argument("duplicate object instance: " + inst.ref.name);
        index_[inst.ref.name] = order_.size();
        order_.push_back(std::move(inst));
    }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    const ObjectInstance& at(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::out_of_range("unknown object instance: " + name);
        return order_[it->second];
    }

    ObjectInstance& at(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::out_of_range("unknown object instance: " + name);
        return order_[it->second];
    }

    const std::vector<ObjectInstance>& all() const { return order_; }
    size_t size() const { return order_.size(); }

private:
    std::vector<ObjectInstance> order_;
    std::map<std::string, size_t> index_;
};

} // namespace taskgen
