#pragma once

#include <netforge/netlist.hpp>

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace netforge
{

/// Edge into an AIG node: node index times two plus a complement bit.
class Lit
{
public:
  constexpr Lit() = default;
  constexpr explicit Lit( std::uint32_t raw ) : raw_( raw ) {}
  static constexpr Lit make( std::uint32_t node, bool complemented = false )
  {
    return Lit( ( node << 1 ) | static_cast<std::uint32_t>( complemented ) );
  }

  constexpr std::uint32_t raw() const noexcept { return raw_; }
  constexpr std::uint32_t node() const noexcept { return raw_ >> 1; }
  constexpr bool complemented() const noexcept { return raw_ & 1u; }
  constexpr Lit regular() const noexcept { return Lit( raw_ & ~1u ); }
  constexpr Lit operator!() const noexcept { return Lit( raw_ ^ 1u ); }
  constexpr Lit operator^( bool c ) const noexcept { return Lit( raw_ ^ static_cast<std::uint32_t>( c ) ); }

  constexpr auto operator<=>( Lit const& ) const = default;

private:
  std::uint32_t raw_ = 0;
};

inline constexpr Lit lit_false = Lit( 0 );
inline constexpr Lit lit_true = Lit( 1 );

enum class NodeKind : std::uint8_t
{
  Const,
  Ci,
  And
};

struct AigNode
{
  NodeKind kind = NodeKind::Const;
  Lit fanin0;
  Lit fanin1;
  std::int32_t tag = -1;
};

/// And-inverter graph with structural hashing.
///
/// Node 0 is constant false. Combinational inputs (CIs) are the primary
/// inputs followed by one pseudo input per latch; combinational outputs (COs)
/// are the primary outputs followed by the next-state function of every latch.
/// Nodes are created in topological order, so fanins always have smaller indices.
class Aig
{
public:
  Aig();

  Lit create_pi( std::string name );
  void create_po( Lit driver, std::string name );
  /// Adds a latch; returns its output (a CI). Its next state is set with set_latch_next.
  Lit create_latch( std::string name, std::int32_t tag = -1 );
  void set_latch_next( std::size_t latch, Lit next );

  /// AND with trivial simplification and structural hashing. New nodes carry the current tag.
  Lit create_and( Lit a, Lit b );
  Lit create_or( Lit a, Lit b ) { return !create_and( !a, !b ); }
  Lit create_xor( Lit a, Lit b );
  /// The literal create_and would return, if no new node is needed.
  std::optional<Lit> find_and( Lit a, Lit b ) const;

  void set_current_tag( std::int32_t tag ) noexcept { current_tag_ = tag; }
  std::int32_t current_tag() const noexcept { return current_tag_; }

  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t num_ands() const noexcept { return num_ands_; }
  AigNode const& node( std::uint32_t index ) const { return nodes_[index]; }
  bool is_and( std::uint32_t index ) const { return nodes_[index].kind == NodeKind::And; }
  bool is_ci( std::uint32_t index ) const { return nodes_[index].kind == NodeKind::Ci; }
  void set_tag( std::uint32_t index, std::int32_t tag ) { nodes_[index].tag = tag; }

  std::size_t num_pis() const noexcept { return num_pis_; }
  std::size_t num_pos() const noexcept { return num_pos_; }
  std::size_t num_latches() const noexcept { return latch_tags_.size(); }
  std::size_t num_cis() const noexcept { return cis_.size(); }
  std::size_t num_cos() const noexcept { return cos_.size(); }
  std::vector<std::uint32_t> const& cis() const noexcept { return cis_; }
  std::vector<Lit> const& cos() const noexcept { return cos_; }
  std::string const& ci_name( std::size_t i ) const { return ci_names_[i]; }
  std::string const& co_name( std::size_t i ) const { return co_names_[i]; }
  std::int32_t latch_tag( std::size_t latch ) const { return latch_tags_[latch]; }
  /// Position of a CI node in cis(), or -1.
  std::int64_t ci_index( std::uint32_t node ) const;

  /// Preferred net name for a literal (empty when none).
  std::string const& hint( Lit lit ) const;
  /// Sets the hint unless the literal already has one.
  void add_hint( Lit lit, std::string const& name );

  /// Copy without nodes unreachable from the outputs; names, tags and CI/CO order kept.
  Aig cleanup() const;

  /// Logic level of every node (CIs and constant at 0).
  std::vector<std::uint32_t> levels() const;
  std::uint32_t depth() const;
  /// Number of references to every node from AND fanins and COs.
  std::vector<std::uint32_t> fanout_counts() const;

  /// Checks topological order, hashing and CO bookkeeping; throws Error on violation.
  void check() const;

private:
  std::uint64_t key( Lit a, Lit b ) const { return ( std::uint64_t{ a.raw() } << 32 ) | b.raw(); }

  std::vector<AigNode> nodes_;
  std::vector<std::string> hints_;
  std::unordered_map<std::uint64_t, std::uint32_t> strash_;
  std::vector<std::uint32_t> cis_;
  std::vector<std::string> ci_names_;
  std::vector<Lit> cos_;
  std::vector<std::string> co_names_;
  std::vector<std::int32_t> latch_tags_;
  std::unordered_map<std::uint32_t, std::uint32_t> ci_position_;
  std::size_t num_pis_ = 0;
  std::size_t num_pos_ = 0;
  std::size_t num_ands_ = 0;
  std::int32_t current_tag_ = -1;
};

/// Expands every cell into AND/INV form. DFF outputs become latch CIs and
/// their data inputs latch COs. Throws Error for OTHER cells without a function.
Aig netlist_to_aig( Netlist const& netlist );

/// Raw AND/INV netlist of an AIG (the CO names become output ports).
Netlist aig_to_netlist( Aig const& aig, std::string const& name = "aig" );

} // namespace netforge
