#pragma once

#include <span>
#include <vector>

#include "bess/lp.hpp"
#include "presolve.hpp"

namespace bess::detail {

/// Gomory mixed-integer cuts read off the optimal tableau rows whose basic
/// variable is a fractional binary. `rows` are the LP's rows in order; the
/// returned cuts are `>=` rows over structural columns, already violated by
/// the current LP point and mutually not near-parallel.
std::vector<Row> gomory_cuts(lp::Simplex& lp, const std::vector<Row>& rows, const std::vector<char>& binary,
                             int max_cuts);

}  // namespace bess::detail
