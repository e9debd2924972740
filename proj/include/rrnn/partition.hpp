#pragma once

// Uniform tensor-product decomposition of a box domain into non-overlapping
// subdomains, the affine maps onto the reference cube [-1,1]^Dim, and the
// boundary / interface collocation sets that glue the local problems together.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rrnn/error.hpp"

namespace rrnn {

template <int Dim>
using Point = std::array<double, Dim>;

/// Absolute tolerance for deciding that a point sits on a facet or inside a box.
inline constexpr double facet_tolerance = 1e-12;

template <int Dim>
std::string format_point(const Point<Dim>& x) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (int d = 0; d < Dim; ++d) os << (d ? ", " : "") << x[d];
    os << ')';
    return os.str();
}

template <int Dim>
struct Domain {
    static_assert(Dim == 1 || Dim == 2, "only 1D and 2D domains are supported");

    Point<Dim> lower{};
    Point<Dim> upper = unit_upper();

    static constexpr Point<Dim> unit_upper() {
        Point<Dim> p{};
        p.fill(1.0);
        return p;
    }

    double measure() const {
        double m = 1.0;
        for (int d = 0; d < Dim; ++d) m *= upper[d] - lower[d];
        return m;
    }

    bool contains(const Point<Dim>& x, double tol = facet_tolerance) const {
        for (int d = 0; d < Dim; ++d)
            if (x[d] < lower[d] - tol || x[d] > upper[d] + tol) return false;
        return true;
    }

    void validate() const {
        for (int d = 0; d < Dim; ++d)
            if (!(lower[d] < upper[d]))
                throw InvalidArgument("domain bounds must satisfy lower < upper on every axis");
    }
};

template <int Dim>
struct Subdomain {
    int id = 0;
    std::array<int, Dim> index{};  ///< position in the tensor grid
    Point<Dim> lo{};
    Point<Dim> hi{};

    Point<Dim> half_widths() const {
        Point<Dim> h;
        for (int d = 0; d < Dim; ++d) h[d] = 0.5 * (hi[d] - lo[d]);
        return h;
    }

    /// Determinant of the reference-to-physical map, prod_d h_d / 2.
    double jacobian() const {
        double j = 1.0;
        for (int d = 0; d < Dim; ++d) j *= 0.5 * (hi[d] - lo[d]);
        return j;
    }

    double measure() const {
        double m = 1.0;
        for (int d = 0; d < Dim; ++d) m *= hi[d] - lo[d];
        return m;
    }

    bool contains(const Point<Dim>& x, double tol = facet_tolerance) const {
        for (int d = 0; d < Dim; ++d)
            if (x[d] < lo[d] - tol || x[d] > hi[d] + tol) return false;
        return true;
    }
};

/// Maps a physical point of `sub` onto [-1,1]^Dim.
template <int Dim>
Point<Dim> to_reference(const Subdomain<Dim>& sub, const Point<Dim>& x) {
    if (!sub.contains(x))
        throw OutOfDomain("point " + format_point<Dim>(x) + " lies outside subdomain " +
                          std::to_string(sub.id));
    Point<Dim> r;
    for (int d = 0; d < Dim; ++d) r[d] = 2.0 * (x[d] - sub.lo[d]) / (sub.hi[d] - sub.lo[d]) - 1.0;
    return r;
}

template <int Dim>
Point<Dim> from_reference(const Subdomain<Dim>& sub, const Point<Dim>& r) {
    Point<Dim> x;
    for (int d = 0; d < Dim; ++d) x[d] = sub.lo[d] + 0.5 * (r[d] + 1.0) * (sub.hi[d] - sub.lo[d]);
    return x;
}

/// Interior facet shared by two subdomains. `left_id` is the subdomain on the
/// lower side along `axis`, so the outward normal of the left side is +e_axis.
template <int Dim>
struct Interface {
    int id = 0;
    int left_id = 0;
    int right_id = 0;
    int axis = 0;
    Point<Dim> lo{};  ///< facet extent; lo[axis] == hi[axis]
    Point<Dim> hi{};

    Point<Dim> normal_left() const {
        Point<Dim> n{};
        n[axis] = 1.0;
        return n;
    }
    Point<Dim> normal_right() const {
        Point<Dim> n{};
        n[axis] = -1.0;
        return n;
    }
};

/// A subdomain facet lying on the boundary of the whole domain.
template <int Dim>
struct BoundaryFacet {
    int owner = 0;
    int axis = 0;
    bool upper_side = false;
    Point<Dim> lo{};
    Point<Dim> hi{};
};

template <int Dim>
class Partition {
public:
    Partition() = default;

    const Domain<Dim>& domain() const { return domain_; }
    const std::array<int, Dim>& counts() const { return counts_; }
    const std::vector<Subdomain<Dim>>& subdomains() const { return subdomains_; }
    const std::vector<Interface<Dim>>& interfaces() const { return interfaces_; }
    const std::vector<BoundaryFacet<Dim>>& boundary_facets() const { return boundary_; }
    const Subdomain<Dim>& subdomain(int id) const { return subdomains_.at(static_cast<std::size_t>(id)); }
    int size() const { return static_cast<int>(subdomains_.size()); }

    int id_of(const std::array<int, Dim>& index) const {
        int id = 0;
        for (int d = Dim - 1; d >= 0; --d) id = id * counts_[d] + index[d];
        return id;
    }

    /// Owning subdomain of x; points on shared facets go to the lowest id.
    int locate(const Point<Dim>& x) const {
        if (!domain_.contains(x))
            throw OutOfDomain("point " + format_point<Dim>(x) + " lies outside the domain");
        std::array<int, Dim> index;
        for (int d = 0; d < Dim; ++d) {
            const double width = (domain_.upper[d] - domain_.lower[d]) / counts_[d];
            int i = static_cast<int>(std::floor((x[d] - domain_.lower[d]) / width));
            i = std::clamp(i, 0, counts_[d] - 1);
            // A point on the lower facet of cell i also belongs to cell i-1.
            if (i > 0 && std::abs(x[d] - lower_edge(d, i)) <= facet_tolerance) --i;
            index[d] = i;
        }
        return id_of(index);
    }

    template <int D>
    friend Partition<D> decompose(const Domain<D>& domain, const std::array<int, D>& counts);

private:
    double lower_edge(int axis, int i) const {
        const double width = (domain_.upper[axis] - domain_.lower[axis]) / counts_[axis];
        return i == counts_[axis] ? domain_.upper[axis] : domain_.lower[axis] + i * width;
    }

    Domain<Dim> domain_{};
    std::array<int, Dim> counts_{};
    std::vector<Subdomain<Dim>> subdomains_;
    std::vector<Interface<Dim>> interfaces_;
    std::vector<BoundaryFacet<Dim>> boundary_;
};

/// Uniform tensor partition. Subdomain ids run with the x index fastest.
template <int Dim>
Partition<Dim> decompose(const Domain<Dim>& domain, const std::array<int, Dim>& counts) {
    domain.validate();
    for (int d = 0; d < Dim; ++d)
        if (counts[d] < 1) throw InvalidArgument("subdomain counts must be positive on every axis");

    Partition<Dim> p;
    p.domain_ = domain;
    p.counts_ = counts;

    int total = 1;
    for (int d = 0; d < Dim; ++d) total *= counts[d];
    p.subdomains_.resize(static_cast<std::size_t>(total));

    for (int id = 0; id < total; ++id) {
        auto& sub = p.subdomains_[static_cast<std::size_t>(id)];
        sub.id = id;
        int rest = id;
        for (int d = 0; d < Dim; ++d) {
            sub.index[d] = rest % counts[d];
            rest /= counts[d];
            sub.lo[d] = p.lower_edge(d, sub.index[d]);
            sub.hi[d] = p.lower_edge(d, sub.index[d] + 1);
        }
    }

    for (const auto& sub : p.subdomains_) {
        for (int axis = 0; axis < Dim; ++axis) {
            if (sub.index[axis] + 1 < counts[axis]) {
                auto next = sub.index;
                ++next[axis];
                Interface<Dim> f;
                f.id = static_cast<int>(p.interfaces_.size());
                f.left_id = sub.id;
                f.right_id = p.id_of(next);
                f.axis = axis;
                f.lo = sub.lo;
                f.hi = sub.hi;
                f.lo[axis] = sub.hi[axis];
                p.interfaces_.push_back(f);
            }
            for (bool upper : {false, true}) {
                const bool on_boundary = upper ? sub.index[axis] == counts[axis] - 1 : sub.index[axis] == 0;
                if (!on_boundary) continue;
                BoundaryFacet<Dim> b;
                b.owner = sub.id;
                b.axis = axis;
                b.upper_side = upper;
                b.lo = sub.lo;
                b.hi = sub.hi;
                if (upper)
                    b.lo[axis] = sub.hi[axis];
                else
                    b.hi[axis] = sub.lo[axis];
                p.boundary_.push_back(b);
            }
        }
    }
    return p;
}

template <int Dim>
struct BoundaryPoint {
    Point<Dim> x{};
    int owner = 0;  ///< subdomain id
};

template <int Dim>
struct InterfacePoint {
    Point<Dim> x{};
    int interface_id = 0;
};

template <int Dim>
struct CollocationSet {
    std::vector<BoundaryPoint<Dim>> boundary;
    std::vector<InterfacePoint<Dim>> interface;

    std::size_t n_boundary() const { return boundary.size(); }
    std::size_t n_interface() const { return interface.size(); }
};

/// Boundary and interface collocation points. In 1D every facet is a single
/// point, so the set is deterministic and the per-facet counts are ignored; in
/// 2D each facet receives its count of uniformly distributed points.
template <int Dim>
CollocationSet<Dim> sample_collocation(const Partition<Dim>& p, int n_bper, int n_cper, std::uint64_t seed) {
    CollocationSet<Dim> set;
    if constexpr (Dim == 1) {
        (void)n_bper;
        (void)n_cper;
        (void)seed;
        for (const auto& b : p.boundary_facets()) set.boundary.push_back({b.lo, b.owner});
        for (const auto& f : p.interfaces()) set.interface.push_back({f.lo, f.id});
    } else {
        if (n_bper < 1 || n_cper < 1)
            throw InvalidArgument("collocation counts per facet must be positive");
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        auto draw = [&](Point<Dim> lo, const Point<Dim>& hi) {
            for (int d = 0; d < Dim; ++d)
                if (hi[d] != lo[d]) lo[d] += unit(rng) * (hi[d] - lo[d]);
            return lo;
        };
        set.boundary.reserve(p.boundary_facets().size() * static_cast<std::size_t>(n_bper));
        for (const auto& b : p.boundary_facets())
            for (int k = 0; k < n_bper; ++k) set.boundary.push_back({draw(b.lo, b.hi), b.owner});
        set.interface.reserve(p.interfaces().size() * static_cast<std::size_t>(n_cper));
        for (const auto& f : p.interfaces())
            for (int k = 0; k < n_cper; ++k) set.interface.push_back({draw(f.lo, f.hi), f.id});
    }
    return set;
}

} // namespace rrnn
