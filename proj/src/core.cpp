#include "pvtune/core.hpp"

#include <algorithm>
#include <cmath>

namespace pvtune {

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Init: return "init";
        case Phase::P: return "P";
        case Phase::V: return "V";
    }
    return "?";
}

Partition::Partition(std::size_t dim, std::vector<std::vector<std::size_t>> groups)
    : dim_(dim), groups_(std::move(groups)) {
    if (dim_ == 0) throw Error("Partition: dim must be positive");
    group_of_.assign(dim_, static_cast<std::size_t>(-1));
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        if (groups_[g].empty()) throw Error("Partition: empty group");
        std::sort(groups_[g].begin(), groups_[g].end());
        for (std::size_t i : groups_[g]) {
            if (i >= dim_) throw IndexOutOfRange("Partition: index out of range");
            if (group_of_[i] != static_cast<std::size_t>(-1))
                throw Error("Partition: groups overlap");
            group_of_[i] = g;
        }
    }
    for (std::size_t i = 0; i < dim_; ++i)
        if (group_of_[i] == static_cast<std::size_t>(-1))
            throw Error("Partition: groups do not cover every index");
    std::sort(groups_.begin(), groups_.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    for (std::size_t g = 0; g < groups_.size(); ++g)
        for (std::size_t i : groups_[g]) group_of_[i] = g;
}

std::size_t Partition::group_of(std::size_t i) const {
    if (i >= dim_) throw IndexOutOfRange("Partition::group_of: index out of range");
    return group_of_[i];
}

bool Partition::same_group(std::size_t i, std::size_t j) const {
    return group_of(i) == group_of(j);
}

QuantizedVector::QuantizedVector(std::size_t max_unique, std::vector<double> values,
                                 std::vector<std::uint32_t> assignments)
    : max_unique_(max_unique), values_(std::move(values)), assignments_(std::move(assignments)) {
    if (assignments_.empty()) throw Error("QuantizedVector: dim must be positive");
    if (max_unique_ < 1 || max_unique_ > assignments_.size())
        throw Error("QuantizedVector: max_unique must be in [1, dim]");
    if (values_.empty()) throw Error("QuantizedVector: empty value set");
    if (values_.size() > max_unique_)
        throw TooManyUniqueValues("QuantizedVector: more values than max_unique");
    for (double v : values_)
        if (!std::isfinite(v)) throw Error("QuantizedVector: non-finite value");
    for (std::size_t k = 1; k < values_.size(); ++k)
        if (!(values_[k - 1] < values_[k]))
            throw Error("QuantizedVector: values must be strictly ascending");
    std::vector<bool> used(values_.size(), false);
    for (std::uint32_t a : assignments_) {
        if (a >= values_.size())
            throw IndexOutOfRange("QuantizedVector: assignment index out of range");
        used[a] = true;
    }
    for (bool u : used)
        if (!u) throw Error("QuantizedVector: dead value (never assigned)");
}

QuantizedVector QuantizedVector::from_dense(std::span<const double> x, std::size_t max_unique) {
    if (x.empty()) throw Error("from_dense: empty input");
    for (double v : x)
        if (!std::isfinite(v)) throw Error("from_dense: non-finite entry");
    std::vector<double> vals(x.begin(), x.end());
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    if (vals.size() > max_unique)
        throw TooManyUniqueValues("from_dense: " + std::to_string(vals.size()) +
                                  " distinct values exceed max_unique=" +
                                  std::to_string(max_unique));
    std::vector<std::uint32_t> assign(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto it = std::lower_bound(vals.begin(), vals.end(), x[i]);
        assign[i] = static_cast<std::uint32_t>(it - vals.begin());
    }
    return QuantizedVector(max_unique, std::move(vals), std::move(assign));
}

std::vector<double> QuantizedVector::dense() const {
    std::vector<double> out(assignments_.size());
    for (std::size_t i = 0; i < assignments_.size(); ++i) out[i] = values_[assignments_[i]];
    return out;
}

std::vector<double> dequantize(const QuantizedVector& q) { return q.dense(); }

QuantizedVector from_dense(std::span<const double> x, std::size_t max_unique) {
    return QuantizedVector::from_dense(x, max_unique);
}

Partition partition_of(const QuantizedVector& q) {
    std::vector<std::vector<std::size_t>> groups(q.num_unique());
    const auto& a = q.assignments();
    for (std::size_t i = 0; i < a.size(); ++i) groups[a[i]].push_back(i);
    return Partition(q.dim(), std::move(groups));
}

bool refines(const Partition& coarse, const Partition& fine) {
    if (coarse.dim() != fine.dim())
        throw DimensionMismatch("refines: partitions have different dimensions");
    for (const auto& g : fine.groups()) {
        const std::size_t target = coarse.group_of(g.front());
        for (std::size_t i : g)
            if (coarse.group_of(i) != target) return false;
    }
    return true;
}

std::size_t nearest_index(std::span<const double> sorted_values, double target) {
    if (sorted_values.empty()) throw Error("nearest_index: empty value set");
    auto it = std::lower_bound(sorted_values.begin(), sorted_values.end(), target);
    if (it == sorted_values.begin()) return 0;
    if (it == sorted_values.end()) return sorted_values.size() - 1;
    const std::size_t hi = static_cast<std::size_t>(it - sorted_values.begin());
    const std::size_t lo = hi - 1;
    const double dl = target - sorted_values[lo];
    const double dr = sorted_values[hi] - target;
    return (dl <= dr) ? lo : hi;
}

double nearest_value(std::span<const double> sorted_values, double target) {
    return sorted_values[nearest_index(sorted_values, target)];
}

std::vector<double> uniform_values(double lo, double hi, std::size_t count) {
    if (count == 0) throw Error("uniform_values: count must be positive");
    if (count == 1) return {lo};
    std::vector<double> out(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t k = 0; k < count; ++k) out[k] = lo + step * static_cast<double>(k);
    out.back() = hi;
    return out;
}

double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double l2_dist(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch("l2_dist: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double relative_step_norm(std::span<const double> from, std::span<const double> to) {
    const double diff = l2_dist(from, to);
    const double base = l2_norm(from);
    if (base > 0.0) return diff / base;
    return diff;
}

}  // namespace pvtune
