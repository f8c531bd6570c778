#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace torusflow {

/// A point on the flat torus R^2/Z^2, stored as its canonical
/// representative with both coordinates in [0,1).
struct TorusPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Tangent data: velocity components per unit flow time.
struct TorusVector {
    double dx = 0.0;
    double dy = 0.0;

    double norm() const { return std::hypot(dx, dy); }
};

/// Surface parameters for the Maier bound. Only (genus=1, orientable)
/// flows are constructed here; other values are accepted by the bound
/// check but nothing is built on them.
struct SurfaceDescriptor {
    int genus = 1;
    bool orientable = true;
};

/// Canonical representative in [0,1)^2. Values within 1e-12 of an
/// integer snap to 0 so boundary cells are not duplicated.
inline TorusPoint wrap(double raw_x, double raw_y) {
    if (!std::isfinite(raw_x) || !std::isfinite(raw_y))
        throw std::invalid_argument("wrap: non-finite coordinate");
    constexpr double snap = 1e-12;
    double fx = raw_x - std::floor(raw_x);
    if (fx >= 1.0) fx -= 1.0;
    if (fx > 1.0 - snap || fx < snap) fx = 0.0;
    double fy = raw_y - std::floor(raw_y);
    if (fy >= 1.0) fy -= 1.0;
    if (fy > 1.0 - snap || fy < snap) fy = 0.0;
    return TorusPoint{fx, fy};
}

inline TorusPoint wrap(const TorusPoint& p) { return wrap(p.x, p.y); }

/// Geodesic distance in the flat metric; at most sqrt(2)/2.
double torus_distance(const TorusPoint& p, const TorusPoint& q);

/// Shortest displacement q - p with components in [-1/2, 1/2).
TorusVector torus_delta(const TorusPoint& p, const TorusPoint& q);

/// Index of the grid cell containing p on the n x n toroidal grid:
/// floor(n*y)*n + floor(n*x).
int cell_index(const TorusPoint& p, int n);

/// Center of cell `idx` on the n x n grid.
TorusPoint cell_center(int idx, int n);

/// Subset of cells of the n x n toroidal grid, stored as a bitset.
/// Adjacency throughout is the 4-neighborhood with wraparound in both
/// axes; diagonal contact does not connect cells.
class CellSet {
public:
    CellSet() = default;
    explicit CellSet(int resolution);

    int resolution() const { return n_; }
    int cell_count() const { return n_ * n_; }

    void insert(int idx) { bits_[idx >> 6] |= (std::uint64_t(1) << (idx & 63)); }
    void erase(int idx) { bits_[idx >> 6] &= ~(std::uint64_t(1) << (idx & 63)); }
    bool contains(int idx) const { return (bits_[idx >> 6] >> (idx & 63)) & 1; }
    int size() const;
    bool empty() const { return size() == 0; }
    void clear();

    /// Indices of the 4 wraparound neighbors of cell idx.
    std::array<int, 4> neighbors(int idx) const;

    std::vector<int> members() const;

    CellSet complement() const;
    CellSet united(const CellSet& other) const;
    CellSet intersected(const CellSet& other) const;
    CellSet minus(const CellSet& other) const;

    /// One-ring dilation: the set plus every cell edge-adjacent to it.
    /// This is the grid-scale stand-in for topological closure.
    CellSet dilated() const;

    /// Cells all four of whose neighbors are also in the set. The
    /// grid-scale stand-in for topological interior.
    CellSet interior() const;

    int symmetric_difference_size(const CellSet& other) const;

    /// |A xor B| / max(1, |A union B|); the closure-identity tolerance
    /// used when deduplicating quasi-minimal sets.
    double symmetric_difference_fraction(const CellSet& other) const;

    double coverage() const { return double(size()) / double(cell_count()); }

    bool operator==(const CellSet& other) const { return n_ == other.n_ && bits_ == other.bits_; }

private:
    int n_ = 0;
    std::vector<std::uint64_t> bits_;
    friend CellSet cellset_op(const CellSet&, const CellSet&, int);
};

/// Maximal 4-connected (wraparound) components, ordered by smallest
/// member index. Built on union-find; the test suite holds an
/// independent BFS oracle.
std::vector<CellSet> connected_components(const CellSet& s);

/// True iff the complement of s has at most one connected component.
bool is_coconnected(const CellSet& s);

/// Euler characteristic of the 2-complex formed by the cells of s,
/// their shared edges and vertices, on the torus grid. An annulus band
/// and the full torus both give 0; a disk gives 1.
int euler_characteristic(const CellSet& s);

} // namespace torusflow
