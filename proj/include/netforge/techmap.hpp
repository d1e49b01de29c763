#pragma once

#include <netforge/aig.hpp>
#include <netforge/netlist.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace netforge
{

/// The ten standard-cell strategies followed by the no-op, in that order.
enum class ActionId : std::uint8_t
{
  A1,
  A2,
  A3,
  A4,
  A5,
  A6,
  A7,
  A8,
  A9,
  A10,
  Noop
};

inline constexpr std::size_t num_actions = 11;

std::string_view to_string( ActionId action );
std::optional<ActionId> action_from_string( std::string_view name );
inline ActionId action_from_index( std::size_t i ) { return static_cast<ActionId>( i ); }
inline std::size_t index_of( ActionId a ) { return static_cast<std::size_t>( a ); }

enum class CellFamily : std::uint8_t
{
  And2Or2,
  Nand2Nor2,
  AndOrWide,
  NandNorWide,
  XorXnor,
  InvBuf
};

inline constexpr std::size_t num_cell_families = 6;

/// Set of allowed standard-cell families.
///
/// Constants and flip-flops are outside the six families and always allowed;
/// OTHER cells never are. Construction requires a universal basis
/// ({NAND2, INV} or {AND2, OR2, INV}).
class CellLibrary
{
public:
  explicit CellLibrary( std::array<bool, num_cell_families> allowed, std::uint32_t max_wide_fanin = 8 );

  bool allows( CellFamily family ) const { return allowed_[static_cast<std::size_t>( family )]; }
  bool allows( GateType type ) const;
  std::uint32_t max_wide_fanin() const noexcept { return max_wide_fanin_; }
  /// e.g. "AND2/OR2 NAND2/NOR2 XOR/XNOR INV/BUF".
  std::string describe() const;

private:
  std::array<bool, num_cell_families> allowed_;
  std::uint32_t max_wide_fanin_;
};

/// One row of the action table. Throws Error for NOOP.
CellLibrary library_for_action( ActionId action );

/// Covers the AIG with allowed cells: XOR/XNOR recognition and wide-gate
/// collapsing where the library permits, area-flow choice between the
/// AND-like and OR-like readings of every node otherwise.
Netlist map( Aig const& aig, CellLibrary const& library, std::string const& name = "mapped" );

/// NOOP returns the netlist unchanged; otherwise rewrite, balance, refactor
/// and map to the action's library.
Netlist apply_action( Netlist const& netlist, ActionId action, bool zero_cost = false );

/// Cells that the action's library prohibits (empty when clean).
std::vector<CellId> allowlist_violations( Netlist const& netlist, ActionId action );

} // namespace netforge
