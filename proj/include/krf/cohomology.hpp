#pragma once

// Divisor-class arithmetic on the blow-up of P^m at one point.
//
// A class is written h[H] - e[E] with [H] the hyperplane class pulled back
// from P^m and [E] the exceptional class.  Everything downstream (singular
// time, curve areas, boundary data of the flow) is linear algebra on the
// pair (h, e), so the whole module is pure functions on a small value type.

#include <cmath>
#include <string>

#include "krf/errors.hpp"

namespace krf {

// Equality tolerance for cone-boundary tests (inputs are user-supplied
// decimals; all downstream checks carry far larger tolerances).
inline constexpr double kConeBoundaryTol = 1e-12;

struct KahlerClass {
    int m = 2;      // complex dimension of the fiber, m >= 2
    double h = 0;   // coefficient of [H]
    double e = 0;   // coefficient of [E]; the class is h[H] - e[E]
};

enum class CurveClass {
    Line,                 // a line in P^m missing the blow-up point
    ExcLine,              // a line inside the exceptional divisor
    ProperTransformLine,  // proper transform of a line through the point
};

enum class ScenarioKind {
    ContractExceptional,  // [E] dies first: blow-down to P^m survives
    CollapseFiber,        // the whole fiber class vanishes at T
    OtherBoundary,        // the h-e edge is reached first
};

inline const char* to_string(ScenarioKind s) {
    switch (s) {
        case ScenarioKind::ContractExceptional: return "ContractExceptional";
        case ScenarioKind::CollapseFiber: return "CollapseFiber";
        case ScenarioKind::OtherBoundary: return "OtherBoundary";
    }
    return "?";
}

inline const char* to_string(CurveClass c) {
    switch (c) {
        case CurveClass::Line: return "Line";
        case CurveClass::ExcLine: return "ExcLine";
        case CurveClass::ProperTransformLine: return "ProperTransformLine";
    }
    return "?";
}

// Kähler cone of Bl_p P^m for m >= 2 is {h > e > 0}.  The edge case e == 0
// is admitted as "validation mode": the class lives on plain P^m (no
// exceptional divisor), where the cone is just {h > 0}.
inline bool is_kahler(const KahlerClass& c) {
    if (c.m < 2) return false;
    if (c.e == 0.0) return c.h > 0.0;
    return c.h > c.e && c.e > 0.0;
}

inline bool is_validation_mode(const KahlerClass& c) { return c.e == 0.0; }

inline void require_kahler(const KahlerClass& c, const char* who) {
    if (c.m < 2)
        throw DomainError(std::string(who) + ": fiber dimension m must be >= 2");
    if (!is_kahler(c))
        throw DomainError(std::string(who) + ": class not Kähler (need h > e > 0)");
}

// c_1(Bl_p P^m) = (m+1)[H] - (m-1)[E]  (blow-up adjunction).
inline KahlerClass first_chern(int m) {
    if (m < 2) throw DomainError("first_chern: fiber dimension m must be >= 2");
    return KahlerClass{m, static_cast<double>(m + 1), static_cast<double>(m - 1)};
}

// Class of omega(t): [omega_0] - t c_1.
inline KahlerClass class_at(const KahlerClass& c0, double t) {
    return KahlerClass{c0.m, c0.h - (c0.m + 1) * t, c0.e - (c0.m - 1) * t};
}

// First singular time: the class stays Kähler as long as
// e(t) = e - (m-1) t > 0 and h(t) - e(t) = (h-e) - 2t > 0.
// In validation mode (e == 0, plain P^m) the only constraint is h(t) > 0.
inline double first_singular_time(const KahlerClass& c0) {
    require_kahler(c0, "first_singular_time");
    if (is_validation_mode(c0)) return c0.h / (c0.m + 1);
    return std::min(c0.e / (c0.m - 1), (c0.h - c0.e) / 2.0);
}

inline ScenarioKind classify(const KahlerClass& c0) {
    require_kahler(c0, "classify");
    if (is_validation_mode(c0)) return ScenarioKind::CollapseFiber;
    const double t_exc = c0.e / (c0.m - 1);
    const double t_vol = (c0.h - c0.e) / 2.0;
    if (std::fabs(t_exc - t_vol) <= kConeBoundaryTol) return ScenarioKind::CollapseFiber;
    return t_exc < t_vol ? ScenarioKind::ContractExceptional
                         : ScenarioKind::OtherBoundary;
}

// Intersection pairing of h[H] - e[E] with the named curve:
//   H.Line = 1, E.Line = 0, H.ExcLine = 0, E.ExcLine = -1,
//   ProperTransformLine = Line - ExcLine.
inline double curve_area(const KahlerClass& c, CurveClass curve) {
    switch (curve) {
        case CurveClass::Line: return c.h;
        case CurveClass::ExcLine: return c.e;
        case CurveClass::ProperTransformLine: return c.h - c.e;
    }
    throw DomainError("curve_area: unknown curve class");
}

}  // namespace krf
