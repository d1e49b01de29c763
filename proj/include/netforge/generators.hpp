#pragma once

#include <netforge/aig.hpp>
#include <netforge/netlist.hpp>
#include <netforge/oracles.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace netforge
{

/// Tags written by the generators. Transforms carry cell tags forward, so
/// ground truth for a rewritten circuit is read back with labels_from_tags.
inline constexpr std::int32_t tag_free = 0;
inline constexpr std::int32_t tag_ht = 1;
inline constexpr std::int32_t tag_key_gate = 1;

/// Maps tag t to names[t]; untagged or unknown tags give an empty label.
NodeLabels labels_from_tags( Netlist const& netlist, std::vector<std::string> const& names );
NodeLabels trojan_truth( Netlist const& netlist );
NodeLabels re_truth( Netlist const& netlist );
/// Inverse of labels_from_tags: cells labeled names[t] get tag t, others -1.
/// Throws Error on a label outside `names`.
void tags_from_labels( Netlist& netlist, NodeLabels const& labels, std::vector<std::string> const& names );
std::vector<std::string> trojan_label_names();
std::vector<std::string> re_label_names();

/// Random AND network over `pis` inputs; outputs favour late nodes so most
/// logic stays reachable. Dangling logic is swept.
Aig random_aig( std::uint32_t pis, std::uint32_t ands, std::uint32_t pos, std::uint64_t seed );

struct TrojanInstance
{
  Netlist netlist;
  NodeLabels truth;
  std::vector<std::string> trigger_inputs;
  /// Input values that fire the trigger, one per trigger input.
  std::vector<bool> trigger_pattern;
  std::string payload_output;
};

/// AND-tree trigger over `trigger_width` seeded input literals (never the
/// all-zero pattern) XORed into one cell-driven output. Throws Error when the
/// host has fewer inputs than `trigger_width` or no cell-driven output.
TrojanInstance gen_trojan( Netlist const& host, unsigned trigger_width, std::uint64_t seed );

struct ObfuscatedInstance
{
  Netlist netlist;
  std::vector<bool> key;
  std::vector<std::string> key_inputs;
  std::vector<KeyGate> key_gates;
};

/// XOR (key bit 0) / XNOR (key bit 1) locking on `n_keys` seeded cell-driven
/// nets. Half the bits (rounded down) are 1. Throws Error when too few nets qualify.
ObfuscatedInstance gen_obfuscated( Netlist const& netlist, unsigned n_keys, std::uint64_t seed );

/// Ties the named key inputs to constants, removing them from the input list.
Netlist apply_key( Netlist const& netlist, std::vector<std::string> const& key_inputs, std::vector<bool> const& key );

enum class BlockKind : std::uint8_t
{
  Add,
  Sub,
  Cmp,
  Mul,
  Ctrl
};

std::string_view to_string( BlockKind kind );
std::optional<BlockKind> block_kind_from_string( std::string_view name );

struct ReInstance
{
  Netlist netlist;
  NodeLabels truth;
};

/// Ripple adders (with carry-in), ripple subtractors, equality comparators,
/// array multipliers and mux control blocks over shared operand inputs
/// a0.., b0.. (plus `cin`/`sel` when needed). `widths` holds one width for all
/// blocks or one per block; each width is 2, 4 or 8.
ReInstance gen_re_blocks( std::vector<unsigned> const& widths, std::vector<BlockKind> const& kinds,
                          std::uint64_t seed );

} // namespace netforge
