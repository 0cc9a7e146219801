#pragma once

#include <cmath>
#include <complex>

namespace risim {

using Complex = std::complex<double>;

// Natural units: c = 1 and the working frequency is 1, so the working
// wavelength is 1 and every position in the simulation is measured in
// wavelengths. The wavenumber at frequency f is then simply 2*pi*f.
inline constexpr double kWorkingFrequency = 1.0;

inline double wavenumber(double f) { return 2.0 * M_PI * f; }

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

// Lorentzian resonator parameters, frequencies in units of the working
// frequency. chi is the linewidth and doubles as the loss knob; gamma scales
// the coupling strength. gamma = 0 produces a dipole that does not scatter.
struct DipoleProperties {
    double f0 = 1.0;
    double chi = 0.1;
    double gamma = 1.0;

    bool valid() const { return f0 > 0.0 && chi > 0.0 && gamma >= 0.0; }
    bool operator==(const DipoleProperties&) const = default;
};

struct Dipole {
    Vec2 pos;
    DipoleProperties props;
};

}  // namespace risim
