#include "torusflow/geometry.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

namespace torusflow {

TorusVector torus_delta(const TorusPoint& p, const TorusPoint& q) {
    double dx = q.x - p.x;
    double dy = q.y - p.y;
    dx -= std::round(dx);
    dy -= std::round(dy);
    return TorusVector{dx, dy};
}

double torus_distance(const TorusPoint& p, const TorusPoint& q) {
    TorusVector d = torus_delta(p, q);
    return std::hypot(d.dx, d.dy);
}

int cell_index(const TorusPoint& p, int n) {
    int cx = static_cast<int>(std::floor(p.x * n));
    int cy = static_cast<int>(std::floor(p.y * n));
    if (cx >= n) cx = n - 1;
    if (cy >= n) cy = n - 1;
    if (cx < 0) cx = 0;
    if (cy < 0) cy = 0;
    return cy * n + cx;
}

TorusPoint cell_center(int idx, int n) {
    int cy = idx / n;
    int cx = idx % n;
    return TorusPoint{(cx + 0.5) / n, (cy + 0.5) / n};
}

CellSet::CellSet(int resolution) : n_(resolution) {
    if (resolution < 1) throw std::invalid_argument("CellSet: resolution must be positive");
    bits_.assign((std::size_t(n_) * n_ + 63) / 64, 0);
}

int CellSet::size() const {
    int c = 0;
    for (std::uint64_t w : bits_) c += std::popcount(w);
    return c;
}

void CellSet::clear() { std::fill(bits_.begin(), bits_.end(), 0); }

std::array<int, 4> CellSet::neighbors(int idx) const {
    int cy = idx / n_, cx = idx % n_;
    int left = cy * n_ + (cx + n_ - 1) % n_;
    int right = cy * n_ + (cx + 1) % n_;
    int down = ((cy + n_ - 1) % n_) * n_ + cx;
    int up = ((cy + 1) % n_) * n_ + cx;
    return {left, right, down, up};
}

std::vector<int> CellSet::members() const {
    std::vector<int> out;
    out.reserve(size());
    for (int i = 0; i < cell_count(); ++i)
        if (contains(i)) out.push_back(i);
    return out;
}

CellSet cellset_op(const CellSet& a, const CellSet& b, int op) {
    if (a.n_ != b.n_) throw std::invalid_argument("CellSet: resolution mismatch");
    CellSet r(a.n_);
    for (std::size_t i = 0; i < a.bits_.size(); ++i) {
        switch (op) {
            case 0: r.bits_[i] = a.bits_[i] | b.bits_[i]; break;
            case 1: r.bits_[i] = a.bits_[i] & b.bits_[i]; break;
            case 2: r.bits_[i] = a.bits_[i] & ~b.bits_[i]; break;
        }
    }
    return r;
}

CellSet CellSet::united(const CellSet& o) const { return cellset_op(*this, o, 0); }
CellSet CellSet::intersected(const CellSet& o) const { return cellset_op(*this, o, 1); }
CellSet CellSet::minus(const CellSet& o) const { return cellset_op(*this, o, 2); }

CellSet CellSet::complement() const {
    CellSet r(n_);
    for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = ~bits_[i];
    // mask tail bits beyond n*n
    int total = cell_count();
    int tail = total & 63;
    if (tail != 0) r.bits_.back() &= (std::uint64_t(1) << tail) - 1;
    return r;
}

CellSet CellSet::dilated() const {
    CellSet r = *this;
    for (int i = 0; i < cell_count(); ++i) {
        if (!contains(i)) continue;
        for (int nb : neighbors(i)) r.insert(nb);
    }
    return r;
}

CellSet CellSet::interior() const {
    CellSet r(n_);
    for (int i = 0; i < cell_count(); ++i) {
        if (!contains(i)) continue;
        auto nb = neighbors(i);
        if (contains(nb[0]) && contains(nb[1]) && contains(nb[2]) && contains(nb[3]))
            r.insert(i);
    }
    return r;
}

int CellSet::symmetric_difference_size(const CellSet& other) const {
    if (n_ != other.n_) throw std::invalid_argument("CellSet: resolution mismatch");
    int c = 0;
    for (std::size_t i = 0; i < bits_.size(); ++i)
        c += std::popcount(bits_[i] ^ other.bits_[i]);
    return c;
}

double CellSet::symmetric_difference_fraction(const CellSet& other) const {
    int un = united(other).size();
    if (un == 0) return 0.0;
    return double(symmetric_difference_size(other)) / double(un);
}

namespace {
// weighted union-find with path halving
struct UnionFind {
    std::vector<int> parent, rank_;
    explicit UnionFind(int n) : parent(n), rank_(n, 0) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }
    void unite(int a, int b) {
        a = find(a); b = find(b);
        if (a == b) return;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
    }
};
} // namespace

std::vector<CellSet> connected_components(const CellSet& s) {
    int n = s.resolution();
    if (n == 0) return {};
    int total = s.cell_count();
    UnionFind uf(total);
    for (int i = 0; i < total; ++i) {
        if (!s.contains(i)) continue;
        int cy = i / n, cx = i % n;
        int right = cy * n + (cx + 1) % n;
        int up = ((cy + 1) % n) * n + cx;
        if (s.contains(right)) uf.unite(i, right);
        if (s.contains(up)) uf.unite(i, up);
    }
    std::vector<int> root_to_slot(total, -1);
    std::vector<CellSet> comps;
    for (int i = 0; i < total; ++i) {
        if (!s.contains(i)) continue;
        int r = uf.find(i);
        if (root_to_slot[r] < 0) {
            root_to_slot[r] = static_cast<int>(comps.size());
            comps.emplace_back(n);
        }
        comps[root_to_slot[r]].insert(i);
    }
    // slots were assigned in increasing order of smallest member, so the
    // ordering contract holds already
    return comps;
}

bool is_coconnected(const CellSet& s) {
    return connected_components(s.complement()).size() <= 1;
}

int euler_characteristic(const CellSet& s) {
    int n = s.resolution();
    int faces = s.size();
    int edges = 0, vertices = 0;
    // Count distinct edges/vertices of the closed cell complex. An edge
    // of the grid belongs to the complex iff one of its two incident
    // cells is in the set; a vertex iff one of its four incident cells is.
    for (int cy = 0; cy < n; ++cy) {
        for (int cx = 0; cx < n; ++cx) {
            int here = cy * n + cx;
            int left = cy * n + (cx + n - 1) % n;
            int below = ((cy + n - 1) % n) * n + cx;
            int diag = ((cy + n - 1) % n) * n + (cx + n - 1) % n;
            // vertical edge between `left` and `here`
            if (s.contains(here) || s.contains(left)) ++edges;
            // horizontal edge between `below` and `here`
            if (s.contains(here) || s.contains(below)) ++edges;
            // vertex at lower-left corner of `here`
            if (s.contains(here) || s.contains(left) || s.contains(below) || s.contains(diag))
                ++vertices;
        }
    }
    return vertices - edges + faces;
}

} // namespace torusflow
