#include "abfield/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace abfield {

namespace {

void require_finite(const Vec3& v, const char* what) {
    if (!is_finite(v)) throw std::invalid_argument(std::string(what) + ": non-finite vector");
}

void require_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw std::invalid_argument(std::string(what) + ": must be positive and finite");
}

} // namespace

AxisFrame::AxisFrame(const Vec3& origin_, const Vec3& axis_direction) : origin(origin_) {
    require_finite(origin_, "AxisFrame origin");
    require_finite(axis_direction, "AxisFrame axis");
    if (std::fabs(norm(axis_direction) - 1.0) > 1e-12)
        throw std::invalid_argument("AxisFrame axis: not unit length within 1e-12");
    axis = axis_direction;
    e1 = orthogonal_unit(axis);
    e2 = cross(axis, e1);
}

void AxisFrame::to_cylindrical(const Vec3& p, double& rho, double& phi, double& z) const {
    const Vec3 d = p - origin;
    z = dot(d, axis);
    const double x = dot(d, e1);
    const double y = dot(d, e2);
    rho = std::hypot(x, y);
    phi = (rho > 0.0) ? std::atan2(y, x) : 0.0;
}

CylinderRegion::CylinderRegion(const Vec3& axis_origin, const Vec3& axis_direction,
                               double radius_, double half_length_)
    : frame(axis_origin, axis_direction), radius(radius_), half_length(half_length_) {
    require_positive(radius_, "CylinderRegion radius");
    require_positive(half_length_, "CylinderRegion half_length");
}

bool CylinderRegion::contains(const Vec3& p) const {
    double rho, phi, z;
    frame.to_cylindrical(p, rho, phi, z);
    return rho <= radius && std::fabs(z) <= half_length;
}

double CylinderRegion::volume() const {
    return M_PI * radius * radius * 2.0 * half_length;
}

TorusRegion::TorusRegion(const Vec3& center, const Vec3& axis_direction,
                         double major_radius_, double minor_radius_)
    : frame(center, axis_direction), major_radius(major_radius_), minor_radius(minor_radius_) {
    require_positive(major_radius_, "TorusRegion major_radius");
    require_positive(minor_radius_, "TorusRegion minor_radius");
    if (!(minor_radius_ < major_radius_))
        throw std::invalid_argument("TorusRegion: minor_radius must be < major_radius");
}

double TorusRegion::volume() const {
    return 2.0 * M_PI * M_PI * major_radius * minor_radius * minor_radius;
}

OrientedSurface::OrientedSurface(Kind kind, const AxisFrame& frame, double d0, double d1)
    : kind_(kind), frame_(frame), dim0_(d0), dim1_(d1) {}

OrientedSurface OrientedSurface::from_cylinder(const CylinderRegion& region) {
    return OrientedSurface(Kind::CylinderWithCaps, region.frame, region.radius, region.half_length);
}

OrientedSurface OrientedSurface::from_torus(const TorusRegion& region) {
    return OrientedSurface(Kind::Torus, region.frame, region.major_radius, region.minor_radius);
}

SurfaceSample OrientedSurface::sample(int panel, double u, double v) const {
    if (panel < 0 || panel >= panel_count())
        throw std::invalid_argument("OrientedSurface::sample: panel out of range");

    SurfaceSample s;
    if (kind_ == Kind::Torus) {
        const double R = dim0_, r = dim1_;
        const double phi = 2.0 * M_PI * u;   // around the main axis
        const double alpha = 2.0 * M_PI * v; // around the tube
        const double ca = std::cos(alpha), sa = std::sin(alpha);
        const double cp = std::cos(phi), sp = std::sin(phi);
        const Vec3 radial = frame_.e1 * cp + frame_.e2 * sp;
        s.point = frame_.origin + radial * (R + r * ca) + frame_.axis * (r * sa);
        const Vec3 outward = radial * ca + frame_.axis * sa;
        s.normal_inward = -outward;
        s.area_weight = 4.0 * M_PI * M_PI * r * (R + r * ca);
        return s;
    }

    const double a = dim0_, h = dim1_;
    switch (panel) {
    case 0: { // lateral wall
        const double phi = 2.0 * M_PI * u;
        const double z = -h + 2.0 * h * v;
        const Vec3 radial = frame_.e1 * std::cos(phi) + frame_.e2 * std::sin(phi);
        s.point = frame_.origin + radial * a + frame_.axis * z;
        s.normal_inward = -radial;
        s.area_weight = 2.0 * M_PI * a * 2.0 * h;
        return s;
    }
    case 1:   // top cap (z = +h)
    case 2: { // bottom cap (z = -h)
        // rho = a sqrt(u) makes the area element uniform over the unit square.
        const double rho = a * std::sqrt(u);
        const double phi = 2.0 * M_PI * v;
        const Vec3 radial = frame_.e1 * std::cos(phi) + frame_.e2 * std::sin(phi);
        const double zsign = (panel == 1) ? 1.0 : -1.0;
        s.point = frame_.origin + radial * rho + frame_.axis * (zsign * h);
        s.normal_inward = frame_.axis * (-zsign);
        s.area_weight = M_PI * a * a;
        return s;
    }
    default:
        throw std::logic_error("unreachable");
    }
}

} // namespace abfield
