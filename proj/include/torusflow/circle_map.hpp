#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace torusflow {

/// Orientation-preserving degree-one circle map, exposed through a
/// strictly increasing lift with lift(x+1) = lift(x)+1.
class CircleMap {
public:
    virtual ~CircleMap() = default;

    /// Lift value at any real x.
    virtual double lift(double x) const = 0;

    /// Value on the circle [0,1).
    double apply(double x) const;

    virtual std::string variant() const = 0;
    virtual nlohmann::json to_json() const = 0;
};

using CircleMapPtr = std::shared_ptr<const CircleMap>;

/// Rigid rotation x -> x + rho.
class RotationMap final : public CircleMap {
public:
    explicit RotationMap(double rho);
    double lift(double x) const override;
    double rho() const { return rho_; }
    std::string variant() const override { return "rotation"; }
    nlohmann::json to_json() const override;

private:
    double rho_;
};

/// Denjoy-style map: a rotation by `rho` with intervals inserted along
/// the orbit {k*rho mod 1} for |k| <= N, each interval mapped affinely
/// onto its successor. Beyond the truncation order the interval lengths
/// continue with geometric decay until they fall below double precision,
/// which keeps the lift strictly increasing and the interval chain
/// forward-invariant as far as floating point can see.
class DenjoyMap final : public CircleMap {
public:
    /// weights[k + N] is the inserted length at orbit index k, |k| <= N.
    DenjoyMap(double rho, std::vector<double> weights);

    double lift(double x) const override;
    std::string variant() const override { return "denjoy"; }
    nlohmann::json to_json() const override;

    double rho() const { return rho_; }
    int truncation() const { return big_n_; }

    /// Inserted interval for orbit index k (|k| <= truncation + tail),
    /// as [left, right) on the circle.
    std::pair<double, double> interval(int k) const;

    /// Total inserted length fraction: sum(weights) / (1 + sum(weights)).
    double inserted_fraction() const { return total_ / (1.0 + total_); }

private:
    double rho_;
    int big_n_;                   // declared truncation order
    int ext_n_;                   // truncation + geometric tail
    std::vector<double> weights_; // user weights, index k+big_n_
    double total_;                // sum of all inserted lengths (with tail)

    // sorted by circle position of the orbit point
    std::vector<double> theta_sorted_;  // orbit points {k rho}
    std::vector<int> k_sorted_;         // orbit index at each sorted slot
    std::vector<double> len_sorted_;    // inserted length at each slot
    std::vector<double> a_sorted_;      // interval left endpoint, new circle
    std::vector<int> slot_of_k_;        // inverse permutation

    double gap_image(double x) const;   // new-circle position of collapse coordinate x
    double apply_base(double x) const;  // map on [0,1)
};

/// Strictly increasing degree-one lift tabulated on a uniform grid and
/// interpolated with a monotonicity-preserving cubic (Fritsch-Carlson).
class MonotoneMap final : public CircleMap {
public:
    /// values[i] = lift(i/m) for i = 0..m-1; must be strictly increasing
    /// with values wrapping to values[0] + 1.
    explicit MonotoneMap(std::vector<double> values);

    double lift(double x) const override;
    std::string variant() const override { return "monotone"; }
    nlohmann::json to_json() const override;

    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
    std::vector<double> slopes_; // Hermite endpoint slopes per node
};

/// Birkhoff rotation-number estimate (lift^K(0) - 0)/K mod 1, with the
/// 1/K error bound of the estimator.
struct RotationNumberEstimate {
    double value = 0.0;
    double error_bound = 0.0;
};

RotationNumberEstimate rotation_number(const CircleMap& map, long iterates);

CircleMapPtr circle_map_from_json(const nlohmann::json& j);

} // namespace torusflow
