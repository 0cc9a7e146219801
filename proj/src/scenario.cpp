#include "risim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "risim/errors.hpp"
#include "risim/hash.hpp"

namespace risim {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Shapes

const char* shape_name(Shape s) {
    switch (s) {
        case Shape::Cross: return "cross";
        case Shape::Circle: return "circle";
        case Shape::Square: return "square";
    }
    throw ValidationError("shape_name: unknown shape");
}

Shape shape_from_name(const std::string& name) {
    if (name == "cross") return Shape::Cross;
    if (name == "circle") return Shape::Circle;
    if (name == "square") return Shape::Square;
    throw ValidationError("unknown shape name: '" + name + "'");
}

namespace {

constexpr double kMaxPointSpacing = 0.25;  // lambda/4

std::vector<Vec2> cross_footprint() {
    // Two orthogonal open bars. ceil(1.2 / 0.25) + 1 = 6 points per bar at
    // pitch 0.24; the even count leaves no point at the crossing, so the two
    // bars never coincide.
    constexpr double kBarHalf = 0.6;
    const int n = static_cast<int>(std::ceil(2.0 * kBarHalf / kMaxPointSpacing)) + 1;
    const double pitch = 2.0 * kBarHalf / (n - 1);
    std::vector<Vec2> pts;
    for (int i = 0; i < n; ++i) {
        const double t = -kBarHalf + i * pitch;
        pts.push_back({t, 0.0});
    }
    for (int i = 0; i < n; ++i) {
        const double t = -kBarHalf + i * pitch;
        pts.push_back({0.0, t});
    }
    return pts;
}

std::vector<Vec2> circle_footprint() {
    constexpr double kRadius = 0.5;
    const double circumference = 2.0 * M_PI * kRadius;
    const int n = static_cast<int>(std::ceil(circumference / kMaxPointSpacing));
    std::vector<Vec2> pts;
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * M_PI * i / n;
        pts.push_back({kRadius * std::cos(a), kRadius * std::sin(a)});
    }
    return pts;
}

std::vector<Vec2> square_footprint() {
    constexpr double kHalf = 0.5;
    const double perimeter = 8.0 * kHalf;
    const int n = static_cast<int>(std::ceil(perimeter / kMaxPointSpacing));
    const double step = perimeter / n;
    const Vec2 corners[4] = {{-kHalf, -kHalf}, {kHalf, -kHalf}, {kHalf, kHalf}, {-kHalf, kHalf}};
    std::vector<Vec2> pts;
    for (int i = 0; i < n; ++i) {
        double s = i * step;
        const int side = static_cast<int>(s / (2.0 * kHalf));
        const double t = s - side * 2.0 * kHalf;
        const Vec2 a = corners[side % 4];
        const Vec2 b = corners[(side + 1) % 4];
        const double len = 2.0 * kHalf;
        pts.push_back(a + (t / len) * (b - a));
    }
    return pts;
}

}  // namespace

std::vector<Vec2> object_footprint(Shape shape, Vec2 center) {
    std::vector<Vec2> pts;
    switch (shape) {
        case Shape::Cross: pts = cross_footprint(); break;
        case Shape::Circle: pts = circle_footprint(); break;
        case Shape::Square: pts = square_footprint(); break;
    }
    for (auto& p : pts) p = p + center;
    return pts;
}

// ---------------------------------------------------------------------------
// Trajectory

double Trajectory::length() const {
    double total = 0.0;
    for (std::size_t i = 1; i < vertices.size(); ++i)
        total += distance(vertices[i - 1], vertices[i]);
    return total;
}

Vec2 Trajectory::point(double p) const {
    if (vertices.empty()) throw ValidationError("trajectory has no vertices");
    if (vertices.size() == 1) return vertices.front();
    p = std::clamp(p, 0.0, 1.0);
    double target = p * length();
    for (std::size_t i = 1; i < vertices.size(); ++i) {
        const double seg = distance(vertices[i - 1], vertices[i]);
        if (target <= seg || i + 1 == vertices.size()) {
            const double t = seg > 0.0 ? std::clamp(target / seg, 0.0, 1.0) : 0.0;
            return vertices[i - 1] + t * (vertices[i] - vertices[i - 1]);
        }
        target -= seg;
    }
    return vertices.back();
}

// ---------------------------------------------------------------------------
// Geometry helpers

bool point_in_polygon(Vec2 pt, const std::vector<Vec2>& polygon) {
    // Crossing-number test.
    bool inside = false;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = polygon[j];
        const Vec2 b = polygon[i];
        if ((b.y > pt.y) != (a.y > pt.y)) {
            const double x_cross = b.x + (pt.y - b.y) * (a.x - b.x) / (a.y - b.y);
            if (pt.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

namespace {

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return distance(p, a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + t * ab);
}

bool segments_properly_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double d1 = cross(b - a, c - a);
    const double d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c);
    const double d4 = cross(d - c, b - c);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace

double distance_to_polygon_boundary(Vec2 pt, const std::vector<Vec2>& polygon) {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = polygon.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++)
        best = std::min(best, distance_to_segment(pt, polygon[j], polygon[i]));
    return best;
}

bool polygon_is_simple(const std::vector<Vec2>& polygon) {
    const std::size_t n = polygon.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = polygon[i];
        const Vec2 b = polygon[(i + 1) % n];
        if (distance(a, b) <= 0.0) return false;
        for (std::size_t j = i + 1; j < n; ++j) {
            // Skip edges sharing a vertex.
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            const Vec2 c = polygon[j];
            const Vec2 d = polygon[(j + 1) % n];
            if (segments_properly_intersect(a, b, c, d)) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Compilation

int RisSpec::total_pixels() const {
    int total = 0;
    for (const auto& seg : segments) total += seg.pixels;
    return total;
}

namespace {

std::vector<Vec2> fence_points(const RoomSpec& room) {
    std::vector<Vec2> pts;
    const std::size_t n = room.polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = room.polygon[i];
        const Vec2 b = room.polygon[(i + 1) % n];
        const double len = distance(a, b);
        // Per-edge pitch <= fence_spacing; each edge contributes its start
        // vertex and interior points, the end vertex belongs to the next edge.
        const int ne = std::max(1, static_cast<int>(std::ceil(len / room.fence_spacing)));
        for (int k = 0; k < ne; ++k) pts.push_back(a + (static_cast<double>(k) / ne) * (b - a));
    }
    return pts;
}

std::vector<Vec2> segment_elements(const RisSegmentSpec& seg, double spacing) {
    const int count = 4 * seg.pixels;
    const double len = distance(seg.start, seg.end);
    const double span = (count - 1) * spacing;
    if (len + 1e-9 < span)
        throw ValidationError("RIS segment shorter than its element span");
    const Vec2 dir = (1.0 / len) * (seg.end - seg.start);
    std::vector<Vec2> pts;
    for (int i = 0; i < count; ++i) pts.push_back(seg.start + (i * spacing) * dir);
    return pts;
}

}  // namespace

std::vector<int> CompiledScenario::receivers() const {
    std::vector<int> rx;
    rx.push_back(sets.ue);
    rx.insert(rx.end(), sets.aux.begin(), sets.aux.end());
    return rx;
}

CompiledScenario compile_scenario(const ScenarioSpec& spec, const PerturberState& state) {
    {
        auto issues = validate_scenario(spec, /*strict=*/false);
        if (!issues.empty()) throw ValidationError("invalid scenario: " + issues.front());
    }

    CompiledScenario out;
    out.frequency = spec.frequency;
    out.state = state;
    out.state.p = std::clamp(state.p, 0.0, 1.0);
    out.ris_on = spec.ris.on_props;
    out.ris_off = spec.ris.off_props;

    auto push = [&out](Vec2 pos, const DipoleProperties& props) {
        out.dipoles.push_back({pos, props});
        return static_cast<int>(out.dipoles.size()) - 1;
    };

    out.sets.tx = push(spec.transceivers.tx, spec.transceivers.props);
    out.sets.ue = push(spec.transceivers.ue, spec.transceivers.props);
    for (const Vec2 a : spec.transceivers.aux)
        out.sets.aux.push_back(push(a, spec.transceivers.props));

    for (const auto& seg : spec.ris.segments)
        for (const Vec2 e : segment_elements(seg, spec.ris.element_spacing))
            out.sets.ris.push_back(push(e, spec.ris.off_props));

    for (const Vec2 w : fence_points(spec.room))
        out.sets.wall.push_back(push(w, spec.room.wall_props));

    const Vec2 center = spec.trajectory.point(out.state.p);
    for (const Vec2 o : object_footprint(out.state.shape, center))
        out.sets.object.push_back(push(o, spec.object.props));

    // Coincident dipoles make the interaction kernel singular; reject early.
    const double kMinSeparation = 1e-9;
    for (std::size_t i = 0; i < out.dipoles.size(); ++i)
        for (std::size_t j = i + 1; j < out.dipoles.size(); ++j)
            if (distance(out.dipoles[i].pos, out.dipoles[j].pos) < kMinSeparation) {
                std::ostringstream msg;
                msg << "dipoles " << i << " and " << j << " coincide";
                throw ValidationError(msg.str());
            }

    return out;
}

CompiledScenario apply_ris_config(const CompiledScenario& scenario, const RISConfig& config) {
    CompiledScenario out = scenario;
    const int pixels = out.num_pixels();
    for (int m = 0; m < pixels; ++m) {
        const DipoleProperties& props = config.get(m) ? out.ris_on : out.ris_off;
        for (int e = 4 * m; e < 4 * (m + 1); ++e) out.dipoles[out.sets.ris[e]].props = props;
    }
    out.config = config;
    return out;
}

// ---------------------------------------------------------------------------
// Validation

std::vector<std::string> validate_scenario(const ScenarioSpec& spec, bool strict) {
    std::vector<std::string> issues;
    auto fail = [&issues](const std::string& msg) { issues.push_back(msg); };

    if (!(spec.frequency > 0.0)) fail("frequency must be positive");

    const bool open_room = spec.room.polygon.empty();
    if (!open_room) {
        if (spec.room.polygon.size() < 3)
            fail("room.polygon needs at least 3 vertices");
        else if (!polygon_is_simple(spec.room.polygon))
            fail("room.polygon is self-intersecting or degenerate");
        if (!(spec.room.fence_spacing > 0.0) || spec.room.fence_spacing > kMaxPointSpacing + 1e-12)
            fail("room.fence_spacing must be in (0, 0.25] wavelengths");
        if (!spec.room.wall_props.valid()) fail("room.wall_props invalid");
    }

    if (spec.ris.segments.empty()) fail("ris.segments must not be empty");
    if (!(spec.ris.element_spacing > 0.0)) fail("ris.element_spacing must be positive");
    if (!spec.ris.on_props.valid()) fail("ris.on_props invalid");
    if (!spec.ris.off_props.valid()) fail("ris.off_props invalid");
    if (spec.ris.total_pixels() != RISConfig::kNumPixels)
        fail("ris segments must provide exactly 25 macro-pixels");
    for (std::size_t s = 0; s < spec.ris.segments.size(); ++s) {
        const auto& seg = spec.ris.segments[s];
        std::ostringstream tag;
        tag << "ris.segments[" << s << "]";
        if (seg.pixels <= 0) fail(tag.str() + ".pixels must be positive");
        const double len = distance(seg.start, seg.end);
        if (len <= 0.0) {
            fail(tag.str() + " has zero length");
        } else if (seg.pixels > 0 &&
                   len + 1e-9 < (4 * seg.pixels - 1) * spec.ris.element_spacing) {
            fail(tag.str() + " too short for its element count");
        }
    }

    if (spec.transceivers.aux.size() != 8)
        fail("transceivers.aux must hold exactly 8 receivers");
    if (!spec.transceivers.props.valid()) fail("transceivers.props invalid");

    if (spec.trajectory.vertices.size() < 2)
        fail("trajectory needs at least 2 vertices");
    else if (!(spec.trajectory.length() > 0.0))
        fail("trajectory must have positive length");

    if (!spec.object.props.valid()) fail("object.props invalid");

    if (!open_room && !issues.empty()) return issues;

    if (!open_room) {
        auto inside_with_clearance = [&spec, &fail](Vec2 p, const std::string& what) {
            if (!point_in_polygon(p, spec.room.polygon)) {
                fail(what + " lies outside the room");
                return false;
            }
            return true;
        };
        inside_with_clearance(spec.transceivers.tx, "transceivers.tx");
        inside_with_clearance(spec.transceivers.ue, "transceivers.ue");
        for (std::size_t i = 0; i < spec.transceivers.aux.size(); ++i)
            inside_with_clearance(spec.transceivers.aux[i],
                                  "transceivers.aux[" + std::to_string(i) + "]");
        for (std::size_t s = 0; s < spec.ris.segments.size(); ++s) {
            const auto& seg = spec.ris.segments[s];
            const std::string tag = "ris.segments[" + std::to_string(s) + "]";
            inside_with_clearance(seg.start, tag + ".start");
            inside_with_clearance(seg.end, tag + ".end");
        }

        if (strict && spec.trajectory.vertices.size() >= 2) {
            // The object must never touch the fence anywhere on the path,
            // for any shape it may take.
            const double clearance = spec.room.fence_spacing;
            const int steps = 200;
            for (const Shape shape : {Shape::Cross, Shape::Circle, Shape::Square}) {
                double worst = std::numeric_limits<double>::infinity();
                double worst_p = 0.0;
                bool outside = false;
                for (int i = 0; i <= steps; ++i) {
                    const double p = static_cast<double>(i) / steps;
                    const Vec2 c = spec.trajectory.point(p);
                    for (const Vec2 pt : object_footprint(shape, c)) {
                        if (!point_in_polygon(pt, spec.room.polygon)) {
                            outside = true;
                            worst_p = p;
                            break;
                        }
                        const double d = distance_to_polygon_boundary(pt, spec.room.polygon);
                        if (d < worst) {
                            worst = d;
                            worst_p = p;
                        }
                    }
                    if (outside) break;
                }
                std::ostringstream msg;
                if (outside) {
                    msg << shape_name(shape) << " object leaves the room near p=" << worst_p;
                    fail(msg.str());
                } else if (worst < clearance) {
                    msg << shape_name(shape) << " object gets within " << worst
                        << " of the fence near p=" << worst_p << " (need >= " << clearance << ")";
                    fail(msg.str());
                }
            }
        }
    }

    return issues;
}

// ---------------------------------------------------------------------------
// JSON persistence

namespace {

[[noreturn]] void bad_field(const std::string& path, const std::string& why) {
    throw ValidationError("scenario field '" + path + "': " + why);
}

const json& require(const json& j, const std::string& key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) bad_field(path + key, "missing");
    return *it;
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) bad_field(path, "expected a number");
    return j.get<double>();
}

Vec2 as_vec2(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) bad_field(path, "expected [x, y]");
    return {as_number(j[0], path + "[0]"), as_number(j[1], path + "[1]")};
}

std::vector<Vec2> as_vec2_list(const json& j, const std::string& path) {
    if (!j.is_array()) bad_field(path, "expected an array of [x, y] pairs");
    std::vector<Vec2> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_vec2(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

DipoleProperties as_props(const json& j, const std::string& path) {
    if (!j.is_object()) bad_field(path, "expected an object");
    DipoleProperties p;
    p.f0 = as_number(require(j, "f0", path + "."), path + ".f0");
    p.chi = as_number(require(j, "chi", path + "."), path + ".chi");
    p.gamma = as_number(require(j, "gamma", path + "."), path + ".gamma");
    if (!p.valid()) bad_field(path, "requires f0 > 0, chi > 0, gamma >= 0");
    return p;
}

json props_to_json(const DipoleProperties& p) {
    return json{{"f0", p.f0}, {"chi", p.chi}, {"gamma", p.gamma}};
}

json vec2_to_json(Vec2 v) { return json::array({v.x, v.y}); }

json vec2_list_to_json(const std::vector<Vec2>& v) {
    json arr = json::array();
    for (const Vec2 p : v) arr.push_back(vec2_to_json(p));
    return arr;
}

}  // namespace

ScenarioSpec scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("scenario root must be a JSON object");

    ScenarioSpec spec;
    spec.frequency = as_number(require(j, "frequency", ""), "frequency");

    const json& room = require(j, "room", "");
    spec.room.polygon = as_vec2_list(require(room, "polygon", "room."), "room.polygon");
    spec.room.fence_spacing =
        as_number(require(room, "fence_spacing", "room."), "room.fence_spacing");
    spec.room.wall_props = as_props(require(room, "wall_props", "room."), "room.wall_props");

    const json& ris = require(j, "ris", "");
    spec.ris.element_spacing =
        as_number(require(ris, "element_spacing", "ris."), "ris.element_spacing");
    spec.ris.on_props = as_props(require(ris, "on_props", "ris."), "ris.on_props");
    spec.ris.off_props = as_props(require(ris, "off_props", "ris."), "ris.off_props");
    const json& segs = require(ris, "segments", "ris.");
    if (!segs.is_array()) bad_field("ris.segments", "expected an array");
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const std::string path = "ris.segments[" + std::to_string(i) + "]";
        const json& s = segs[i];
        if (!s.is_object()) bad_field(path, "expected an object");
        RisSegmentSpec seg;
        seg.start = as_vec2(require(s, "start", path + "."), path + ".start");
        seg.end = as_vec2(require(s, "end", path + "."), path + ".end");
        const json& px = require(s, "pixels", path + ".");
        if (!px.is_number_integer()) bad_field(path + ".pixels", "expected an integer");
        seg.pixels = px.get<int>();
        spec.ris.segments.push_back(seg);
    }

    const json& tr = require(j, "transceivers", "");
    spec.transceivers.tx = as_vec2(require(tr, "tx", "transceivers."), "transceivers.tx");
    spec.transceivers.ue = as_vec2(require(tr, "ue", "transceivers."), "transceivers.ue");
    spec.transceivers.aux =
        as_vec2_list(require(tr, "aux", "transceivers."), "transceivers.aux");
    spec.transceivers.props =
        as_props(require(tr, "props", "transceivers."), "transceivers.props");

    const json& traj = require(j, "trajectory", "");
    spec.trajectory.vertices =
        as_vec2_list(require(traj, "vertices", "trajectory."), "trajectory.vertices");

    const json& obj = require(j, "object", "");
    spec.object.props = as_props(require(obj, "props", "object."), "object.props");
    const json& st = require(obj, "default_state", "object.");
    spec.object.default_state.p =
        as_number(require(st, "p", "object.default_state."), "object.default_state.p");
    const json& sh = require(st, "shape", "object.default_state.");
    if (!sh.is_string()) bad_field("object.default_state.shape", "expected a string");
    spec.object.default_state.shape = shape_from_name(sh.get<std::string>());

    return spec;
}

std::string scenario_to_json_text(const ScenarioSpec& spec) {
    json segs = json::array();
    for (const auto& s : spec.ris.segments)
        segs.push_back(json{{"start", vec2_to_json(s.start)},
                            {"end", vec2_to_json(s.end)},
                            {"pixels", s.pixels}});

    const json j{
        {"frequency", spec.frequency},
        {"room",
         {{"polygon", vec2_list_to_json(spec.room.polygon)},
          {"fence_spacing", spec.room.fence_spacing},
          {"wall_props", props_to_json(spec.room.wall_props)}}},
        {"ris",
         {{"element_spacing", spec.ris.element_spacing},
          {"on_props", props_to_json(spec.ris.on_props)},
          {"off_props", props_to_json(spec.ris.off_props)},
          {"segments", segs}}},
        {"transceivers",
         {{"tx", vec2_to_json(spec.transceivers.tx)},
          {"ue", vec2_to_json(spec.transceivers.ue)},
          {"aux", vec2_list_to_json(spec.transceivers.aux)},
          {"props", props_to_json(spec.transceivers.props)}}},
        {"trajectory", {{"vertices", vec2_list_to_json(spec.trajectory.vertices)}}},
        {"object",
         {{"props", props_to_json(spec.object.props)},
          {"default_state",
           {{"p", spec.object.default_state.p},
            {"shape", shape_name(spec.object.default_state.shape)}}}}},
    };
    return j.dump(2) + "\n";
}

ScenarioSpec load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_json_text(buf.str());
}

void save_scenario(const ScenarioSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write scenario file: " + path);
    out << scenario_to_json_text(spec);
}

std::uint64_t scenario_hash(const ScenarioSpec& spec) {
    return fnv1a64(scenario_to_json_text(spec));
}

// ---------------------------------------------------------------------------
// Built-in scenarios

ScenarioSpec default_scenario_spec() {
    ScenarioSpec spec;
    spec.frequency = kWorkingFrequency;

    spec.room.polygon = {{0.0, 0.0}, {11.0, 0.0}, {11.0, 6.0},
                         {9.0, 8.5}, {2.0, 8.5},  {0.0, 6.5}};
    spec.room.fence_spacing = 0.25;
    spec.room.wall_props = {1.0, 0.2, 1.0};

    spec.ris.element_spacing = 0.25;
    spec.ris.on_props = {1.0, 0.1, 1.0};
    spec.ris.off_props = {2.5, 0.1, 1.0};
    // Four wall-conformal segments inset 0.4 from the fence; 7+6+6+6 pixels.
    spec.ris.segments = {
        {{2.125, 0.4}, {8.875, 0.4}, 7},
        {{10.6, 0.125}, {10.6, 5.875}, 6},
        {{8.375, 8.1}, {2.625, 8.1}, 6},
        {{0.4, 5.875}, {0.4, 0.125}, 6},
    };

    spec.transceivers.tx = {1.5, 5.0};
    spec.transceivers.ue = {8.6, 4.3};
    // Aux receivers interleave with the bottom segment at lambda/2 pitch.
    spec.transceivers.aux.clear();
    for (int i = 0; i < 8; ++i) spec.transceivers.aux.push_back({3.75 + 0.5 * i, 0.65});
    spec.transceivers.props = {1.0, 0.5, 0.1};

    spec.trajectory.vertices = {{3.2, 2.6}, {5.4, 4.8}, {8.0, 2.9}};

    spec.object.props = {1.0, 0.15, 1.0};
    spec.object.default_state = {0.5, Shape::Cross};

    return spec;
}

ScenarioSpec open_scenario_spec() {
    ScenarioSpec spec;
    spec.frequency = kWorkingFrequency;

    spec.room.polygon.clear();  // free space
    spec.room.fence_spacing = 0.25;
    spec.room.wall_props = {1.0, 0.2, 1.0};

    // Free-space benchmark: the channel should be close to affine in the
    // pixel bits, which requires negligible element-to-element scattering.
    // Spacing alone cannot get there: the on-resonance response is
    // gamma*f0/chi and the 2D kernel only decays like 1/sqrt(d), so
    // full-strength pixels stay strongly coupled at any desk-scale pitch.
    // Weak elements on a non-integer pitch (avoids in-phase stacking at
    // whole-wavelength multiples) reach the single-scattering limit.
    spec.ris.element_spacing = 2.3;
    spec.ris.on_props = {1.0, 0.1, 0.05};
    spec.ris.off_props = {2.5, 0.1, 0.05};
    spec.ris.segments = {
        {{0.0, 23.0}, {62.1, 23.0}, 7},
        {{0.0, 25.3}, {52.9, 25.3}, 6},
        {{0.0, 27.6}, {52.9, 27.6}, 6},
        {{0.0, 29.9}, {52.9, 29.9}, 6},
    };

    spec.transceivers.tx = {31.0, 11.5};
    spec.transceivers.ue = {31.0, 41.5};
    spec.transceivers.aux.clear();
    for (int i = 0; i < 8; ++i) spec.transceivers.aux.push_back({27.25 + 0.5 * i, 13.8});
    spec.transceivers.props = {1.0, 0.5, 0.1};

    spec.trajectory.vertices = {{27.5, 16.0}, {31.0, 17.5}, {34.5, 16.0}};

    spec.object.props = {1.0, 0.15, 1.0};
    spec.object.default_state = {0.5, Shape::Cross};

    return spec;
}

}  // namespace risim
