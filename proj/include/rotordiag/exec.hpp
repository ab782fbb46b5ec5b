// Copyright (c) 2026 rotordiag contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace rotordiag {

/// Execution policy for the data-parallel kernels.
///
/// Every kernel writes each output slot exactly once and performs the same
/// floating-point operations per slot in either mode, so `serial` and
/// `parallel` produce bit-identical results. The serial path is the
/// reference implementation the tests compare against; the parallel path
/// runs the same loop under OpenMP.
enum class Exec { serial, parallel };

template <typename Fn>
void for_each_index(Exec exec, std::ptrdiff_t n, Fn&& fn) {
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            fn(i);
        }
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            fn(i);
        }
    }
}

} // namespace rotordiag
