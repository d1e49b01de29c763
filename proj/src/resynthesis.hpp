#pragma once

#include <netforge/aig.hpp>
#include <netforge/truth_table.hpp>

#include <cstdint>
#include <set>
#include <vector>

namespace netforge::detail
{

/// Straight-line AND program over leaf literals.
///
/// Program literals use ref*2+complement where ref 0 is constant false,
/// refs 1..k are the leaves and refs k+1.. are the ops in order.
struct Program
{
  std::uint32_t num_leaves = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> ops;
  std::uint32_t output = 0;
};

/// Cube over at most 8 variables: `mask` selects the literals, `polarity` their phase.
struct Cube
{
  std::uint32_t mask = 0;
  std::uint32_t polarity = 0;
};

/// Irredundant sum of products of `f` (Minato-Morreale).
std::vector<Cube> isop( TruthTable const& f );

/// Candidate implementations of `f`: factored ISOPs of both phases and a
/// decomposition-first form. Deterministic order.
std::vector<Program> synthesize( TruthTable const& f );

struct ProgramCost
{
  /// Nodes that must exist for the program: new nodes plus reused doomed nodes.
  std::uint32_t cost = 0;
  /// Nodes that do not exist yet.
  std::uint32_t added = 0;
  /// Output literal if the whole program resolves to existing nodes.
  std::optional<Lit> existing;
};

/// Dry run against `aig` with the given leaf images. `doomed` holds nodes that
/// disappear unless the program reuses them.
ProgramCost evaluate( Program const& program, Aig const& aig, std::vector<Lit> const& leaves,
                      std::set<std::uint32_t> const& doomed );

Lit instantiate( Program const& program, Aig& aig, std::vector<Lit> const& leaves );

/// Program evaluated as a truth table over its leaves (testing aid).
TruthTable program_function( Program const& program );

} // namespace netforge::detail
