#pragma once

#include <netforge/aig.hpp>
#include <netforge/truth_table.hpp>

#include <cstdint>
#include <vector>

namespace netforge::detail
{

using Cut = std::vector<std::uint32_t>;

/// Function of `root` over `leaves` (node indices, at most 8). The leaves must cut every path from the CIs.
TruthTable cone_function( Aig const& aig, std::uint32_t root, Cut const& leaves );

/// Priority k-feasible cuts of every node; each list starts with the trivial cut.
std::vector<std::vector<Cut>> enumerate_cuts( Aig const& aig, std::uint32_t k, std::uint32_t max_cuts );

/// Nodes of the maximal fanout-free cone of `root` bounded by `leaves`, root included.
/// `refs` must hold the fanout counts; it is restored before returning.
std::vector<std::uint32_t> mffc( Aig const& aig, std::uint32_t root, std::vector<std::uint32_t>& refs,
                                 Cut const& leaves );

/// Leaves of a cut grown from `root` by expanding the leaf that adds the fewest new leaves.
Cut reconvergent_cut( Aig const& aig, std::uint32_t root, std::uint32_t max_leaves );

/// Majority tag over nodes (ties go to the smallest tag; untagged nodes ignored).
std::int32_t majority_tag( Aig const& aig, std::vector<std::uint32_t> const& nodes );

} // namespace netforge::detail
