#pragma once

// Execution policy shared by every node-parallel kernel.
//
// Each kernel has a plain serial loop (the reference) and an OpenMP loop.
// Reductions go through block_sum, which fixes the block partition
// independently of the thread count, so serial and parallel runs produce
// bit-identical sums.

#include <cstddef>
#include <span>

namespace plap {

enum class Exec { serial, parallel };

/// Set the OpenMP thread count used by Exec::parallel kernels (k <= 0 keeps the runtime default).
void set_threads(int k);
int max_threads();

/// Neumaier-compensated accumulator.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) noexcept;
    [[nodiscard]] double value() const noexcept { return sum + carry; }
};

inline constexpr std::size_t kSumBlock = 4096;

/// Deterministic sum: compensated per fixed-size block, then compensated over blocks in order.
double block_sum(std::span<const double> values, Exec exec = Exec::parallel);

/// Deterministic dot product with the same fixed blocking as block_sum.
double block_dot(std::span<const double> a, std::span<const double> b, Exec exec = Exec::parallel);

namespace detail {
bool in_parallel();
}

/// body(k) for k in [0, count): an OpenMP static loop for Exec::parallel
/// (unless already inside a parallel region), a plain loop otherwise.
template <class Body>
void for_each_node(std::size_t count, Exec exec, Body&& body)
{
    if (exec == Exec::parallel && !detail::in_parallel()) {
        const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t k = 0; k < n; ++k) body(static_cast<std::size_t>(k));
    } else {
        for (std::size_t k = 0; k < count; ++k) body(k);
    }
}

} // namespace plap
