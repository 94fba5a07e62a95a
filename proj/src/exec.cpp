#include "plap/exec.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <omp.h>

namespace plap {

void set_threads(int k)
{
    if (k > 0) omp_set_num_threads(k);
}

int max_threads() { return omp_get_max_threads(); }

void CompensatedSum::add(double v) noexcept
{
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
        carry += (sum - t) + v;
    else
        carry += (v - t) + sum;
    sum = t;
}

namespace {

double sum_block(std::span<const double> values, std::size_t b)
{
    const std::size_t lo = b * kSumBlock;
    const std::size_t hi = std::min(values.size(), lo + kSumBlock);
    CompensatedSum acc;
    for (std::size_t i = lo; i < hi; ++i) acc.add(values[i]);
    return acc.value();
}

} // namespace

double block_sum(std::span<const double> values, Exec exec)
{
    const std::size_t nblocks = (values.size() + kSumBlock - 1) / kSumBlock;
    std::vector<double> partial(nblocks);
    if (exec == Exec::parallel && nblocks > 1 && !detail::in_parallel()) {
        const auto nb = static_cast<std::ptrdiff_t>(nblocks);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t b = 0; b < nb; ++b)
            partial[static_cast<std::size_t>(b)] = sum_block(values, static_cast<std::size_t>(b));
    } else {
        for (std::size_t b = 0; b < nblocks; ++b) partial[b] = sum_block(values, b);
    }
    CompensatedSum total;
    for (double v : partial) total.add(v);
    return total.value();
}

double block_dot(std::span<const double> a, std::span<const double> b, Exec exec)
{
    const std::size_t nblocks = (a.size() + kSumBlock - 1) / kSumBlock;
    std::vector<double> partial(nblocks);
    auto one = [&](std::size_t blk) {
        const std::size_t lo = blk * kSumBlock;
        const std::size_t hi = std::min(a.size(), lo + kSumBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
        partial[blk] = s;
    };
    if (exec == Exec::parallel && nblocks > 1 && !detail::in_parallel()) {
        const auto nb = static_cast<std::ptrdiff_t>(nblocks);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t blk = 0; blk < nb; ++blk) one(static_cast<std::size_t>(blk));
    } else {
        for (std::size_t blk = 0; blk < nblocks; ++blk) one(blk);
    }
    double s = 0.0;
    for (double v : partial) s += v;
    return s;
}

namespace detail {
bool in_parallel() { return omp_in_parallel() != 0; }
} // namespace detail

} // namespace plap
