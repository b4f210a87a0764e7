#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pvtune {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};
struct TooManyUniqueValues : Error {
    using Error::Error;
};
struct IndexOutOfRange : Error {
    using Error::Error;
};
struct SearchSpaceTooLarge : Error {
    using Error::Error;
};
struct NonFiniteObjective : Error {
    using Error::Error;
};
struct DegenerateTrajectory : Error {
    using Error::Error;
};
struct InvalidArity : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct MalformedCSV : Error {
    using Error::Error;
};

enum class Phase { Init, P, V };

const char* phase_name(Phase p);

// One diagnostics row per (iteration, half-step).
struct TraceRecord {
    std::uint64_t run_seed = 0;
    int iteration = 0;
    Phase phase = Phase::Init;
    double loss = 0.0;
    int num_unique = 0;
    double step_norm_rel = 0.0;  // ||x_new - x_old|| / ||x_old||
    std::optional<double> l_subspace;
    std::optional<int> tau_used;
};

// Disjoint nonempty index groups covering [0, dim). Canonical form: indices
// ascending within each group, groups ordered by their smallest index.
class Partition {
public:
    Partition(std::size_t dim, std::vector<std::vector<std::size_t>> groups);

    std::size_t dim() const { return dim_; }
    std::size_t group_count() const { return groups_.size(); }
    const std::vector<std::vector<std::size_t>>& groups() const { return groups_; }
    std::size_t group_of(std::size_t i) const;
    bool same_group(std::size_t i, std::size_t j) const;

    bool operator==(const Partition& other) const = default;

private:
    std::size_t dim_ = 0;
    std::vector<std::vector<std::size_t>> groups_;
    std::vector<std::size_t> group_of_;
};

// A vector whose d entries take at most max_unique distinct values, stored as
// a sorted value set plus per-coordinate assignment indices.
class QuantizedVector {
public:
    QuantizedVector(std::size_t max_unique, std::vector<double> values,
                    std::vector<std::uint32_t> assignments);

    static QuantizedVector from_dense(std::span<const double> x, std::size_t max_unique);

    std::size_t dim() const { return assignments_.size(); }
    std::size_t max_unique() const { return max_unique_; }
    std::size_t num_unique() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    const std::vector<std::uint32_t>& assignments() const { return assignments_; }

    std::vector<double> dense() const;
    double entry(std::size_t i) const { return values_[assignments_[i]]; }

    bool operator==(const QuantizedVector& other) const = default;

private:
    std::size_t max_unique_ = 0;
    std::vector<double> values_;
    std::vector<std::uint32_t> assignments_;
};

std::vector<double> dequantize(const QuantizedVector& q);
QuantizedVector from_dense(std::span<const double> x, std::size_t max_unique);
Partition partition_of(const QuantizedVector& q);

// True iff every group of `fine` is contained in some group of `coarse`,
// i.e. P(coarse) >= P(fine) in the refinement order.
bool refines(const Partition& coarse, const Partition& fine);

// Index of the grid value nearest to target; equidistant ties go to the
// smaller value. Values must be sorted ascending.
std::size_t nearest_index(std::span<const double> sorted_values, double target);
double nearest_value(std::span<const double> sorted_values, double target);

// Evenly spaced grid lo..hi inclusive (count >= 1; count == 1 yields {lo}).
std::vector<double> uniform_values(double lo, double hi, std::size_t count);

double l2_norm(std::span<const double> v);
double l2_dist(std::span<const double> a, std::span<const double> b);
double relative_step_norm(std::span<const double> from, std::span<const double> to);

}  // namespace pvtune
