#pragma once

#include "abfield/vec3.hpp"

namespace abfield {

// Right-handed orthonormal frame (e1, e2, axis) attached to a symmetry axis.
struct AxisFrame {
    Vec3 origin;
    Vec3 axis; // unit
    Vec3 e1;   // unit, orthogonal to axis
    Vec3 e2;   // axis x e1

    // axis_direction must be unit length within 1e-12.
    AxisFrame(const Vec3& origin_, const Vec3& axis_direction);

    Vec3 from_local(double x, double y, double z) const {
        return origin + e1 * x + e2 * y + axis * z;
    }
    // Cylindrical coordinates of p about the axis: (rho, phi, z).
    void to_cylindrical(const Vec3& p, double& rho, double& phi, double& z) const;
};

// Finite coaxial cylinder; the infinite cylinder of the thought experiment is
// realized by making half_length a large multiple of the source half-length.
struct CylinderRegion {
    AxisFrame frame;
    double radius;
    double half_length;

    CylinderRegion(const Vec3& axis_origin, const Vec3& axis_direction,
                   double radius_, double half_length_);

    bool contains(const Vec3& p) const;
    double volume() const;
};

// Solid torus around `frame.axis`: tube of minor_radius about the circle of
// major_radius. Supports the Poynting surface variant.
struct TorusRegion {
    AxisFrame frame;
    double major_radius;
    double minor_radius; // 0 < minor < major

    TorusRegion(const Vec3& center, const Vec3& axis_direction,
                double major_radius_, double minor_radius_);

    double volume() const;
};

struct SurfaceSample {
    Vec3 point;
    Vec3 normal_inward;  // unit
    double area_weight;  // |dsigma/(du dv)| over the unit square
};

// Closed oriented surface with inward-pointing normals, parametrized panel by
// panel over the unit square. A cylinder surface has three panels (lateral
// wall, top cap, bottom cap); a torus has one.
class OrientedSurface {
public:
    enum class Kind { CylinderWithCaps, Torus };

    static OrientedSurface from_cylinder(const CylinderRegion& region);
    static OrientedSurface from_torus(const TorusRegion& region);

    Kind kind() const { return kind_; }
    int panel_count() const { return kind_ == Kind::Torus ? 1 : 3; }
    SurfaceSample sample(int panel, double u, double v) const;
    // Convenience chart: panel 0 (lateral wall / torus surface).
    SurfaceSample sample(double u, double v) const { return sample(0, u, v); }

    const AxisFrame& frame() const { return frame_; }
    double dim0() const { return dim0_; } // cylinder radius | torus major radius
    double dim1() const { return dim1_; } // cylinder half_length | torus minor radius

private:
    OrientedSurface(Kind kind, const AxisFrame& frame, double r0, double r1);

    Kind kind_;
    AxisFrame frame_;
    double dim0_; // cylinder radius | torus major radius
    double dim1_; // cylinder half_length | torus minor radius
};

} // namespace abfield
