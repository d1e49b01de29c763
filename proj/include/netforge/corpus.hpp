#pragma once

#include <netforge/adapter.hpp>
#include <netforge/context.hpp>
#include <netforge/netlist.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace netforge
{

/// One circuit an episode can start from. Trojan and RE ground truth rides on
/// the cell tags; obfuscated entries also carry their key.
struct PoolEntry
{
  std::string name;
  Netlist circuit;
  std::vector<std::string> key_inputs;
  std::vector<bool> key;
};

using Pools = std::array<std::vector<PoolEntry>, num_contexts>;

Netlist full_adder_circuit();
Netlist c17_circuit();

struct NamedCircuit
{
  std::string name;
  Netlist netlist;
};

/// Twenty small circuits (at most 12 inputs each): full adder, c17, adders,
/// subtractors, multipliers, comparators, mux blocks, random logic, a small
/// sequential circuit, two locked and two Trojan-infested instances.
std::vector<NamedCircuit> desk_corpus();

/// Applies a3 until the structure stops changing. Empty when no fixed point is
/// reached within `max_passes`.
std::optional<Netlist> nand_normal_form( Netlist const& netlist, unsigned max_passes = 8 );

/// Pools and surrogate models for all four contexts, fully determined by the code.
///
/// Piracy: NAND2 normal forms that a3..a6 leave within the similarity
/// threshold, so only the AND-style actions evade. Trojan, RE and key oracles
/// are trained on twenty generated instances; the pool is the first
/// `per_context` of them.
struct DeskSetup
{
  Pools pools;
  SurrogateModels models;
};

DeskSetup desk_setup( std::size_t per_context = 10 );

} // namespace netforge
