#pragma once

#include <cstdint>
#include <span>

namespace acflow {

/// Sum of a buffer by a fixed pairwise binary tree (leaf blocks of 32 summed
/// left to right). The tree shape depends only on the length, so the result
/// is bit-identical regardless of how the buffer was produced or how many
/// workers are active.
double pairwise_sum(std::span<const double> v);

/// Max of |v_i| over the buffer; exact, order-independent.
double sup_abs(std::span<const double> v);

double max_of(std::span<const double> v);

bool all_finite(std::span<const double> v);

}  // namespace acflow
