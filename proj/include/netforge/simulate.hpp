#pragma once

#include <netforge/aig.hpp>

#include <cstdint>
#include <vector>

namespace netforge
{

/// Bit-parallel words: `words[i][w]` carries patterns 64w..64w+63 of signal i.
using PatternWords = std::vector<std::vector<std::uint64_t>>;

/// Evaluates every CO for packed CI patterns. Word blocks are spread over
/// OpenMP threads; the result does not depend on the thread count.
PatternWords simulate_words( Aig const& aig, PatternWords const& ci_words );

/// Single-threaded reference for simulate_words.
PatternWords simulate_words_serial( Aig const& aig, PatternWords const& ci_words );

/// One CO assignment per input assignment. Throws InterfaceError on arity mismatch.
std::vector<std::vector<bool>> simulate( Aig const& aig, std::vector<std::vector<bool>> const& vectors );

/// Node-by-node evaluation of a single assignment (reference for the packed path).
std::vector<bool> simulate_scalar( Aig const& aig, std::vector<bool> const& assignment );

} // namespace netforge
