#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "risim/types.hpp"

namespace risim {

// ---------------------------------------------------------------------------
// Perturbing object

enum class Shape { Cross, Circle, Square };

inline constexpr int kNumShapes = 3;

const char* shape_name(Shape s);
Shape shape_from_name(const std::string& name);

// Position along the trajectory is the normalized arc length p in [0, 1].
struct PerturberState {
    double p = 0.5;
    Shape shape = Shape::Cross;
};

// Dipole positions for a shape footprint centered at `center`. Footprints are
// perimeter outlines discretized at <= lambda/4 spacing:
//   cross:  two orthogonal 1.2-lambda bars, 6 points each (no shared center)
//   circle: ring of radius 0.5 lambda, 13 points
//   square: 1-lambda side, 16 points starting at the lower-left corner
// Every footprint has its centroid exactly at `center` and fits in a box of
// half-width 0.6 lambda.
std::vector<Vec2> object_footprint(Shape shape, Vec2 center);

// ---------------------------------------------------------------------------
// Geometry specs

struct Trajectory {
    std::vector<Vec2> vertices;

    double length() const;
    // Arc-length interpolation; p is clamped to [0, 1].
    Vec2 point(double p) const;
};

struct RoomSpec {
    // Simple polygon, counterclockwise. May be empty for an open (free-space)
    // scene, in which case no fence dipoles are generated.
    std::vector<Vec2> polygon;
    double fence_spacing = 0.25;
    DipoleProperties wall_props;
};

// A straight run of RIS elements. Elements are placed from `start` towards
// `end` at exact element_spacing; macro-pixel k of the segment owns elements
// [4k, 4k+4).
struct RisSegmentSpec {
    Vec2 start;
    Vec2 end;
    int pixels = 0;
};

struct RisSpec {
    std::vector<RisSegmentSpec> segments;
    double element_spacing = 0.25;
    DipoleProperties on_props;   // resonant at the working frequency
    DipoleProperties off_props;  // detuned

    int total_pixels() const;
};

struct TransceiverSpec {
    Vec2 tx;
    Vec2 ue;
    std::vector<Vec2> aux;
    DipoleProperties props;  // weak probes so they barely load the cavity
};

struct ObjectSpec {
    DipoleProperties props;
    PerturberState default_state;
};

struct ScenarioSpec {
    double frequency = kWorkingFrequency;
    RoomSpec room;
    RisSpec ris;
    TransceiverSpec transceivers;
    Trajectory trajectory;
    ObjectSpec object;
};

// ---------------------------------------------------------------------------
// RIS configuration: one bit per macro-pixel, bit set = element resonant (ON)

struct RISConfig {
    static constexpr int kNumPixels = 25;
    static constexpr std::uint32_t kMask = (1u << kNumPixels) - 1;

    std::uint32_t bits = 0;

    bool get(int pixel) const { return (bits >> pixel) & 1u; }
    void set(int pixel, bool on) {
        const std::uint32_t m = 1u << pixel;
        bits = on ? (bits | m) : (bits & ~m);
    }
    RISConfig with_flipped(int pixel) const { return {bits ^ (1u << pixel)}; }

    bool operator==(const RISConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Compiled scenario: flat dipole list plus index bookkeeping

struct IndexSets {
    int tx = 0;
    int ue = 0;
    std::vector<int> aux;
    std::vector<int> ris;  // element-ordered; pixel m owns entries [4m, 4m+4)
    std::vector<int> wall;
    std::vector<int> object;
};

struct CompiledScenario {
    std::vector<Dipole> dipoles;
    IndexSets sets;
    PerturberState state;
    RISConfig config;  // pattern the dipole properties currently reflect
    DipoleProperties ris_on;
    DipoleProperties ris_off;
    double frequency = kWorkingFrequency;

    int num_pixels() const { return static_cast<int>(sets.ris.size()) / 4; }
    // UE first, then the aux receivers.
    std::vector<int> receivers() const;
};

// Builds the dipole list for one perturber state with all RIS pixels OFF.
// Dipole order: TX, UE, AUX, RIS elements, wall fence, object.
// Throws ValidationError on malformed specs or coincident dipoles.
CompiledScenario compile_scenario(const ScenarioSpec& spec, const PerturberState& state);

// Pure: returns a copy with the RIS element properties matching `config`.
CompiledScenario apply_ris_config(const CompiledScenario& scenario, const RISConfig& config);

// ---------------------------------------------------------------------------
// Validation and persistence

// Human-readable problems; empty means the spec is well-formed. `strict`
// additionally walks the whole trajectory checking the object keeps at least
// fence_spacing clearance from the room boundary for every shape.
std::vector<std::string> validate_scenario(const ScenarioSpec& spec, bool strict = true);

ScenarioSpec scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const ScenarioSpec& spec);
ScenarioSpec load_scenario(const std::string& path);
void save_scenario(const ScenarioSpec& spec, const std::string& path);

// Hash of the canonical JSON form. Artifacts record it so a sweep can refuse
// to run against a scenario other than the one it was calibrated for.
std::uint64_t scenario_hash(const ScenarioSpec& spec);

// Desk-scale room used throughout the tests and shipped as
// data/default_scenario.json: an irregular hexagonal fence (~11 x 8.5
// wavelengths, one corner cut) with four wall-conformal RIS segments.
ScenarioSpec default_scenario_spec();

// Free-space control: no fence, RIS elements spread >= 2 wavelengths apart so
// multiple scattering between elements is negligible. Used to establish the
// linear-regime baseline for the nonlinearity measurements.
ScenarioSpec open_scenario_spec();

// ---------------------------------------------------------------------------
// Geometry helpers (exposed for validation and tests)

bool point_in_polygon(Vec2 pt, const std::vector<Vec2>& polygon);
double distance_to_polygon_boundary(Vec2 pt, const std::vector<Vec2>& polygon);
bool polygon_is_simple(const std::vector<Vec2>& polygon);

}  // namespace risim
