#include "torusflow/circle_map.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace torusflow {

namespace {
double frac(double v) {
    double f = v - std::floor(v);
    return f >= 1.0 ? f - 1.0 : f;
}
} // namespace

double CircleMap::apply(double x) const { return frac(lift(x)); }

RotationMap::RotationMap(double rho) : rho_(frac(rho)) {}

double RotationMap::lift(double x) const { return x + rho_; }

nlohmann::json RotationMap::to_json() const {
    return {{"variant", "rotation"}, {"rho", rho_}};
}

DenjoyMap::DenjoyMap(double rho, std::vector<double> weights)
    : rho_(frac(rho)), weights_(std::move(weights)) {
    if (weights_.empty() || weights_.size() % 2 == 0)
        throw std::invalid_argument("DenjoyMap: weights must have odd length 2N+1");
    big_n_ = static_cast<int>(weights_.size() / 2);
    for (double w : weights_)
        if (!(w > 0.0)) throw std::invalid_argument("DenjoyMap: weights must be positive");

    // Geometric tail: halve the edge weights until they vanish in double
    // precision. This closes the interval chain without changing the
    // declared truncation order.
    std::vector<std::pair<int, double>> lens; // (orbit index, inserted length)
    for (int k = -big_n_; k <= big_n_; ++k) lens.emplace_back(k, weights_[k + big_n_]);
    double wpos = weights_.back(), wneg = weights_.front();
    int j = 1;
    for (; j <= 80; ++j) {
        wpos *= 0.5;
        wneg *= 0.5;
        if (wpos < 1e-300 && wneg < 1e-300) break;
        if (wpos >= 1e-300) lens.emplace_back(big_n_ + j, wpos);
        if (wneg >= 1e-300) lens.emplace_back(-big_n_ - j, wneg);
    }
    ext_n_ = big_n_ + j;

    total_ = 0.0;
    for (auto& [k, l] : lens) total_ += l;

    const int count = static_cast<int>(lens.size());
    std::vector<int> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> theta(count);
    for (int i = 0; i < count; ++i) theta[i] = frac(lens[i].first * rho_);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return theta[a] < theta[b]; });

    theta_sorted_.resize(count);
    k_sorted_.resize(count);
    len_sorted_.resize(count);
    a_sorted_.resize(count);
    slot_of_k_.assign(2 * ext_n_ + 1, -1);
    double prefix = 0.0;
    for (int i = 0; i < count; ++i) {
        int src = order[i];
        theta_sorted_[i] = theta[src];
        k_sorted_[i] = lens[src].first;
        len_sorted_[i] = lens[src].second;
        a_sorted_[i] = (theta_sorted_[i] + prefix) / (1.0 + total_);
        slot_of_k_[lens[src].first + ext_n_] = i;
        prefix += len_sorted_[i];
    }
}

std::pair<double, double> DenjoyMap::interval(int k) const {
    int slot = slot_of_k_.at(k + ext_n_);
    double a = a_sorted_[slot];
    return {a, a + len_sorted_[slot] / (1.0 + total_)};
}

double DenjoyMap::gap_image(double x) const {
    // new-circle position of collapse coordinate x: shift by the total
    // inserted length at or to the left of x. The prefix sums are
    // already encoded in a_sorted_.
    int i = static_cast<int>(std::upper_bound(theta_sorted_.begin(), theta_sorted_.end(), x) -
                             theta_sorted_.begin()) - 1;
    double before = 0.0;
    if (i >= 0)
        before = a_sorted_[i] * (1.0 + total_) - theta_sorted_[i] + len_sorted_[i];
    return (x + before) / (1.0 + total_);
}

double DenjoyMap::apply_base(double y) const {
    // locate the greatest interval start a_i <= y
    int i = static_cast<int>(std::upper_bound(a_sorted_.begin(), a_sorted_.end(), y) -
                             a_sorted_.begin()) - 1;
    if (i >= 0) {
        double w = len_sorted_[i] / (1.0 + total_);
        if (y < a_sorted_[i] + w) {
            int k = k_sorted_[i];
            if (k + 1 <= ext_n_ && slot_of_k_[k + 1 + ext_n_] >= 0) {
                int tgt = slot_of_k_[k + 1 + ext_n_];
                double wt = len_sorted_[tgt] / (1.0 + total_);
                return a_sorted_[tgt] + (y - a_sorted_[i]) * (wt / w);
            }
            // chain end: below double resolution, treat as a gap point
            return gap_image(frac(theta_sorted_[i] + rho_));
        }
    }
    // gap point: invert the collapse and rotate
    double before = 0.0;
    if (i >= 0) {
        // cumulative length through slot i (prefix encoded in a_sorted_)
        before = a_sorted_[i] * (1.0 + total_) - theta_sorted_[i] + len_sorted_[i];
    }
    double x = y * (1.0 + total_) - before;
    double x2 = frac(x + rho_);
    return gap_image(x2);
}

double DenjoyMap::lift(double x) const {
    double fl = std::floor(x);
    double u = x - fl;
    if (u >= 1.0) { u -= 1.0; fl += 1.0; }
    double v = apply_base(u);
    double d = v - u;
    if (d < 0.0) d += 1.0;
    return x + d;
}

nlohmann::json DenjoyMap::to_json() const {
    return {{"variant", "denjoy"}, {"rho", rho_}, {"weights", weights_}};
}

MonotoneMap::MonotoneMap(std::vector<double> values) : values_(std::move(values)) {
    const int m = static_cast<int>(values_.size());
    if (m < 4) throw std::invalid_argument("MonotoneMap: need at least 4 nodes");
    for (int i = 0; i + 1 < m; ++i)
        if (!(values_[i + 1] > values_[i]))
            throw std::invalid_argument("MonotoneMap: lift values must be strictly increasing");
    if (!(values_[0] + 1.0 > values_[m - 1]))
        throw std::invalid_argument("MonotoneMap: degree-one wrap violated");

    // harmonic-mean tangents keep the Hermite interpolant monotone
    std::vector<double> secants(m);
    for (int i = 0; i < m; ++i) {
        double v1 = (i + 1 < m) ? values_[i + 1] : values_[0] + 1.0;
        secants[i] = (v1 - values_[i]) * m;
    }
    slopes_.resize(m);
    for (int i = 0; i < m; ++i) {
        double dl = secants[(i + m - 1) % m];
        double dr = secants[i];
        slopes_[i] = 2.0 * dl * dr / (dl + dr);
    }
}

double MonotoneMap::lift(double x) const {
    const int m = static_cast<int>(values_.size());
    double fl = std::floor(x);
    double u = x - fl;
    if (u >= 1.0) { u -= 1.0; fl += 1.0; }
    double pos = u * m;
    int i = static_cast<int>(pos);
    if (i >= m) i = m - 1;
    double t = pos - i;
    double v0 = values_[i];
    double v1 = (i + 1 < m) ? values_[i + 1] : values_[0] + 1.0;
    double h = 1.0 / m;
    double m0 = slopes_[i] * h;
    double m1 = slopes_[(i + 1) % m] * h;
    double t2 = t * t, t3 = t2 * t;
    double val = (2 * t3 - 3 * t2 + 1) * v0 + (t3 - 2 * t2 + t) * m0 +
                 (-2 * t3 + 3 * t2) * v1 + (t3 - t2) * m1;
    return val + fl;
}

nlohmann::json MonotoneMap::to_json() const {
    return {{"variant", "monotone"}, {"values", values_}};
}

RotationNumberEstimate rotation_number(const CircleMap& map, long iterates) {
    if (iterates < 100) throw std::invalid_argument("rotation_number: need at least 100 iterates");
    double x = 0.0;
    for (long k = 0; k < iterates; ++k) x = map.lift(x);
    return RotationNumberEstimate{frac(x / iterates), 1.0 / double(iterates)};
}

CircleMapPtr circle_map_from_json(const nlohmann::json& j) {
    const std::string variant = j.at("variant").get<std::string>();
    if (variant == "rotation") return std::make_shared<RotationMap>(j.at("rho").get<double>());
    if (variant == "denjoy")
        return std::make_shared<DenjoyMap>(j.at("rho").get<double>(),
                                           j.at("weights").get<std::vector<double>>());
    if (variant == "monotone")
        return std::make_shared<MonotoneMap>(j.at("values").get<std::vector<double>>());
    throw std::invalid_argument("unknown circle map variant: " + variant);
}

} // namespace torusflow
