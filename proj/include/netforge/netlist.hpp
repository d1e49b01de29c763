#pragma once

#include <netforge/gate.hpp>
#include <netforge/truth_table.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace netforge
{

using NetId = std::uint32_t;
using CellId = std::uint32_t;

/// Prefix of every net name invented by a transform or generator.
inline constexpr std::string_view fresh_prefix = "_nf";

struct Cell
{
  GateKind kind;
  std::vector<NetId> inputs;
  NetId output;
  /// Library/subcircuit name, only meaningful for OTHER cells.
  std::string type_name;
  /// Provenance tag carried through transforms; -1 when untagged.
  std::int32_t tag = -1;

  GateType type() const { return { kind, static_cast<std::uint32_t>( inputs.size() ) }; }
};

struct OutputPort
{
  std::string name;
  NetId net;
};

/// Named gate-level circuit.
///
/// Nets are identified by dense ids and have unique names. A DFF cell marks
/// the register boundary: its output is a pseudo primary input and its data
/// input a pseudo primary output of the combinational core.
class Netlist
{
public:
  Netlist() = default;
  explicit Netlist( std::string name ) : name_( std::move( name ) ) {}

  std::string const& name() const noexcept { return name_; }
  void set_name( std::string name ) { name_ = std::move( name ); }

  /// Adds a net; throws if the name is taken.
  NetId add_net( std::string name );
  /// Returns the net with this name, creating it when absent.
  NetId get_or_add_net( std::string const& name );
  std::optional<NetId> find_net( std::string_view name ) const;
  bool has_net( std::string_view name ) const { return find_net( name ).has_value(); }
  std::string const& net_name( NetId net ) const { return net_names_.at( net ); }
  std::size_t num_nets() const noexcept { return net_names_.size(); }
  /// A name starting with the reserved prefix that is not used yet.
  std::string fresh_net_name( std::string_view hint = {} );

  NetId add_input( std::string name );
  void add_input_net( NetId net );
  void add_output( NetId net, std::string port_name = {} );
  CellId add_cell( GateKind kind, std::vector<NetId> inputs, NetId output, std::int32_t tag = -1,
                   std::string type_name = {} );

  std::vector<NetId> const& inputs() const noexcept { return inputs_; }
  std::vector<OutputPort> const& outputs() const noexcept { return outputs_; }
  std::vector<Cell> const& cells() const noexcept { return cells_; }
  Cell const& cell( CellId id ) const { return cells_.at( id ); }
  std::size_t num_cells() const noexcept { return cells_.size(); }

  void set_cell_tag( CellId id, std::int32_t tag ) { cells_.at( id ).tag = tag; }
  void set_cell_output( CellId id, NetId net ) { cells_.at( id ).output = net; }
  void set_cell_input( CellId id, std::size_t pin, NetId net ) { cells_.at( id ).inputs.at( pin ) = net; }
  void set_output_net( std::size_t index, NetId net ) { outputs_.at( index ).net = net; }
  void rename_net( NetId net, std::string name );

  bool is_input( NetId net ) const;

  /// Functions of OTHER cell types, keyed by type name.
  std::map<std::string, TruthTable> const& cell_functions() const noexcept { return cell_functions_; }
  void register_function( std::string const& type_name, TruthTable const& function );

  /// Driving cell of every net (nullopt for primary inputs and undriven nets).
  /// When a net has several drivers the first one wins.
  std::vector<std::optional<CellId>> drivers() const;
  /// Cells reading every net, in cell order.
  std::vector<std::vector<CellId>> fanouts() const;
  /// Combinational cells in topological order (DFFs first, as sources). Throws DesignRuleError on a cycle.
  std::vector<CellId> topological_order() const;

private:
  std::string name_;
  std::vector<std::string> net_names_;
  std::unordered_map<std::string, NetId> net_by_name_;
  std::vector<NetId> inputs_;
  std::vector<OutputPort> outputs_;
  std::vector<Cell> cells_;
  std::map<std::string, TruthTable> cell_functions_;
  std::uint64_t fresh_counter_ = 0;
};

enum class Rule
{
  MultiDriver,
  Undriven,
  Cycle,
  Arity,
  DuplicatePort,
  UnknownFunction
};

std::string_view to_string( Rule rule );

struct Diagnostic
{
  Rule rule;
  std::string message;
  /// Offending net ids (MultiDriver, Undriven, DuplicatePort) or cell ids (Cycle, Arity, UnknownFunction).
  std::vector<std::uint32_t> ids;
};

/// Checks every structural invariant; an empty result means the netlist is valid.
std::vector<Diagnostic> validate( Netlist const& netlist );

/// Throws DesignRuleError carrying the first diagnostic.
void require_valid( Netlist const& netlist );

} // namespace netforge
