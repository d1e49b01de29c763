#pragma once

#include <netforge/aig.hpp>

namespace netforge
{

/// Rebuilds every maximal AND supergate as a tree of minimum depth
/// (lowest-level operands paired first). Supergates that are already
/// depth-optimal keep their structure.
Aig balance( Aig const& aig );

/// Replaces 4-input cuts by cheaper implementations of their function.
/// With `zero_cost`, replacements that keep the size are accepted too.
Aig rewrite( Aig const& aig, bool zero_cost = false );

/// Collapses cones of up to 8 leaves to truth tables and re-synthesizes them
/// in factored form; replacements must shrink the cone unless `zero_cost`.
Aig refactor( Aig const& aig, bool zero_cost = false );

/// Re-expresses nodes through one existing divisor or the AND of two divisors,
/// validated exhaustively on an 8-leaf window.
Aig resub( Aig const& aig, bool zero_cost = false );

} // namespace netforge
