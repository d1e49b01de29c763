#pragma once

#include <netforge/aig.hpp>
#include <netforge/netlist.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace netforge
{

enum class EquivalenceStatus
{
  EquivalentExhaustive,
  NotEquivalent,
  Unfalsified
};

std::string_view to_string( EquivalenceStatus status );

struct EquivalenceBudget
{
  std::uint32_t max_exhaustive_inputs = 12;
  std::uint64_t n_random = 4096;
  std::uint64_t seed = 0x5eed;
};

struct EquivalenceVerdict
{
  EquivalenceStatus status = EquivalenceStatus::EquivalentExhaustive;
  /// Combinational input names (primary inputs, then latch outputs) of the first circuit.
  std::vector<std::string> input_names;
  /// Replayable assignment in input_names order (NotEquivalent only).
  std::vector<bool> counterexample;
  std::string failing_output;
  std::uint64_t vectors = 0;
  std::uint64_t seed = 0;

  bool equivalent() const noexcept { return status != EquivalenceStatus::NotEquivalent; }
};

/// Exhaustive when the input count is within budget, seeded random vectors
/// otherwise. Inputs and outputs are matched by name; latches by their output
/// net name. Throws InterfaceError when the name sets differ.
EquivalenceVerdict check_equivalence( Aig const& a, Aig const& b, EquivalenceBudget const& budget = {} );
EquivalenceVerdict check_equivalence( Netlist const& a, Netlist const& b, EquivalenceBudget const& budget = {} );

} // namespace netforge
