#pragma once
#include <span>
#include <variant>
#include <vector>

#include "stablecond/rng.hpp"
#include "stablecond/vec.hpp"

namespace stablecond {

class Direction {
public:
    // normalizes; throws on zero or non-finite input
    explicit Direction(std::vector<double> coords);
    const std::vector<double>& coords() const { return c_; }
    int dim() const { return static_cast<int>(c_.size()); }
    double operator[](size_t i) const { return c_[i]; }

private:
    std::vector<double> c_;
};

struct Cap {
    Direction center;
    double radius;  // geodesic, in (0, pi]
};

class CapSet {
public:
    CapSet(int d, std::vector<Cap> caps);
    static CapSet full_sphere(int d);

    int dim() const { return d_; }
    const std::vector<Cap>& caps() const { return caps_; }
    bool is_full() const;
    // every cap radius grown by delta (clamped at pi)
    CapSet enlarged(double delta) const;
    bool contains(std::span<const double> theta) const;

private:
    int d_;
    std::vector<Cap> caps_;
};

struct BallShape {
    std::vector<double> center;  // frame coordinates, d-1 entries
    double radius;
};
struct BoxShape {
    std::vector<double> lo, hi;  // frame coordinates
};

// Ball or box in the hyperplane {x : (x, v) = 0}. Frame vector i is Gram-Schmidt of the
// standard basis (skipping the one most aligned with v) against v.
class PlanarSet {
public:
    PlanarSet(Direction normal, std::variant<BallShape, BoxShape> shape);

    int dim() const { return normal_.dim(); }
    const Direction& normal() const { return normal_; }
    const std::variant<BallShape, BoxShape>& shape() const { return shape_; }
    const std::vector<std::vector<double>>& frame() const { return frame_; }

    double measure() const;
    // normal coordinate (x, v) and frame coordinates of the projection x^
    double normal_coord(std::span<const double> x) const { return dot(x, normal_.coords()); }
    std::vector<double> plane_coords(std::span<const double> x) const;
    Point from_plane(std::span<const double> coords, double s = 0.0) const;
    // distance inside the hyperplane from frame coordinates to the shape, 0 inside
    double plane_distance(std::span<const double> coords) const;

private:
    Direction normal_;
    std::variant<BallShape, BoxShape> shape_;
    std::vector<std::vector<double>> frame_;
};

struct ShellTarget {
    CapSet S;
    double eps;
    double delta = 0.0;
};
struct SlabTarget {
    PlanarSet D;
    double eps;
    double delta = 0.0;
};
using Target = std::variant<ShellTarget, SlabTarget>;

double angular_distance(const CapSet& S, const Direction& theta);
double surface_measure(const CapSet& S);

struct QuadNode {
    std::vector<double> dir;
    double weight;
};
std::vector<QuadNode> quadrature_nodes(const CapSet& S, size_t n);
size_t default_node_count(int d);

bool in_target(std::span<const double> x, const Target& T);

Point sample_boundary(const CapSet& S, Rng& rng);
Point sample_boundary(const PlanarSet& D, Rng& rng);

// Euclidean distance from a point of R^d to the set
double euclidean_distance(const CapSet& S, std::span<const double> x);
double euclidean_distance(const PlanarSet& D, std::span<const double> x);

Point random_direction(int d, Rng& rng);

namespace detail {
// cap (center, radius) on S^{k-1}; radius may be 0 (empty) or >= pi (everything)
struct RawCap {
    std::vector<double> c;
    double r;
};
// normalized measure of a union of caps on S^{k-1}, k >= 1
double union_measure(int k, const std::vector<RawCap>& caps);
// fraction of the ring {cos psi a + sin psi u : u in S^{k-2}, u perp a} covered by the caps
double ring_fraction(const std::vector<double>& axis, double psi, const std::vector<RawCap>& caps);
// the same, with everything independent of psi computed once
struct RingGeometry {
    RingGeometry(const std::vector<double>& axis, const std::vector<RawCap>& caps);
    double fraction(double psi) const;

    struct Item {
        double cg = 0.0, sg = 0.0, cos_r = 1.0;
        std::vector<double> dir;  // unit, in the complement basis
    };
    int k;
    bool full = false;
    std::vector<Item> items;
};
// psi values in (0, pi) where the ring fraction is not smooth
std::vector<double> ring_breakpoints(const std::vector<double>& axis, const std::vector<RawCap>& caps);
// normalized density of the polar angle on S^{k-1}: sin^{k-2} psi / int_0^pi sin^{k-2}
double polar_weight(int k, double psi);
double sin_power_integral(int n, double rho);
// orthonormal basis of the complement of the unit vector a
std::vector<std::vector<double>> complement_basis(const std::vector<double>& a);
std::vector<RawCap> raw_caps(const CapSet& S);
}  // namespace detail

}  // namespace stablecond
