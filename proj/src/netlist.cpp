#include <netforge/netlist.hpp>

#include <netforge/error.hpp>

#include <algorithm>
#include <deque>
#include <functional>
#include <set>

namespace netforge
{

NetId Netlist::add_net( std::string name )
{
  if ( name.empty() )
    throw Error( "net name must not be empty" );
  auto const id = static_cast<NetId>( net_names_.size() );
  auto [it, inserted] = net_by_name_.emplace( name, id );
  if ( !inserted )
    throw Error( "duplicate net name '" + name + "'" );
  net_names_.push_back( std::move( name ) );
  return id;
}

NetId Netlist::get_or_add_net( std::string const& name )
{
  if ( auto const id = find_net( name ) )
    return *id;
  return add_net( name );
}

std::optional<NetId> Netlist::find_net( std::string_view name ) const
{
  auto const it = net_by_name_.find( std::string( name ) );
  if ( it == net_by_name_.end() )
    return std::nullopt;
  return it->second;
}

std::string Netlist::fresh_net_name( std::string_view hint )
{
  while ( true )
  {
    std::string candidate = std::string( fresh_prefix );
    if ( !hint.empty() )
    {
      candidate += '_';
      candidate += hint;
    }
    candidate += '_' + std::to_string( fresh_counter_++ );
    if ( !has_net( candidate ) )
      return candidate;
  }
}

void Netlist::rename_net( NetId net, std::string name )
{
  if ( net_names_.at( net ) == name )
    return;
  if ( has_net( name ) )
    throw Error( "duplicate net name '" + name + "'" );
  net_by_name_.erase( net_names_[net] );
  net_by_name_.emplace( name, net );
  net_names_[net] = std::move( name );
}

NetId Netlist::add_input( std::string name )
{
  auto const id = add_net( std::move( name ) );
  inputs_.push_back( id );
  return id;
}

void Netlist::add_input_net( NetId net )
{
  inputs_.push_back( net );
}

void Netlist::add_output( NetId net, std::string port_name )
{
  if ( port_name.empty() )
    port_name = net_name( net );
  outputs_.push_back( { std::move( port_name ), net } );
}

CellId Netlist::add_cell( GateKind kind, std::vector<NetId> inputs, NetId output, std::int32_t tag, std::string type_name )
{
  auto const id = static_cast<CellId>( cells_.size() );
  cells_.push_back( { kind, std::move( inputs ), output, std::move( type_name ), tag } );
  return id;
}

bool Netlist::is_input( NetId net ) const
{
  return std::find( inputs_.begin(), inputs_.end(), net ) != inputs_.end();
}

void Netlist::register_function( std::string const& type_name, TruthTable const& function )
{
  cell_functions_[type_name] = function;
}

std::vector<std::optional<CellId>> Netlist::drivers() const
{
  std::vector<std::optional<CellId>> result( net_names_.size() );
  for ( CellId c = 0; c < cells_.size(); ++c )
  {
    auto& slot = result[cells_[c].output];
    if ( !slot )
      slot = c;
  }
  return result;
}

std::vector<std::vector<CellId>> Netlist::fanouts() const
{
  std::vector<std::vector<CellId>> result( net_names_.size() );
  for ( CellId c = 0; c < cells_.size(); ++c )
  {
    for ( auto const in : cells_[c].inputs )
    {
      auto& list = result[in];
      if ( list.empty() || list.back() != c )
        list.push_back( c );
    }
  }
  return result;
}

std::vector<CellId> Netlist::topological_order() const
{
  auto const drv = drivers();
  auto const fo = fanouts();
  std::vector<std::uint32_t> pending( cells_.size(), 0 );
  std::vector<CellId> order;
  order.reserve( cells_.size() );
  std::deque<CellId> ready;
  for ( CellId c = 0; c < cells_.size(); ++c )
  {
    if ( cells_[c].kind == GateKind::Dff )
    {
      order.push_back( c );
      continue;
    }
    for ( auto const in : cells_[c].inputs )
    {
      if ( drv[in] && cells_[*drv[in]].kind != GateKind::Dff )
        ++pending[c];
    }
    if ( pending[c] == 0 )
      ready.push_back( c );
  }
  while ( !ready.empty() )
  {
    auto const c = ready.front();
    ready.pop_front();
    order.push_back( c );
    for ( auto const reader : fo[cells_[c].output] )
    {
      if ( cells_[reader].kind == GateKind::Dff )
        continue;
      for ( auto const in : cells_[reader].inputs )
      {
        if ( in == cells_[c].output && --pending[reader] == 0 )
          ready.push_back( reader );
      }
    }
  }
  if ( order.size() != cells_.size() )
    throw DesignRuleError( "combinational cycle in netlist '" + name_ + "'" );
  return order;
}

std::string_view to_string( Rule rule )
{
  switch ( rule )
  {
  case Rule::MultiDriver:
    return "multi-driver";
  case Rule::Undriven:
    return "undriven";
  case Rule::Cycle:
    return "cycle";
  case Rule::Arity:
    return "arity";
  case Rule::DuplicatePort:
    return "duplicate-port";
  case Rule::UnknownFunction:
    return "unknown-function";
  }
  return "?";
}

namespace
{

/// Strongly connected components of the combinational cell graph (iterative Tarjan).
std::vector<std::vector<CellId>> combinational_cycles( Netlist const& n )
{
  auto const& cells = n.cells();
  std::vector<std::vector<CellId>> drivers_of( n.num_nets() );
  for ( CellId c = 0; c < cells.size(); ++c )
    drivers_of[cells[c].output].push_back( c );

  // successor lists: driver cell -> reader cell, DFFs excluded on both ends
  std::vector<std::vector<CellId>> succ( cells.size() );
  for ( CellId c = 0; c < cells.size(); ++c )
  {
    if ( cells[c].kind == GateKind::Dff )
      continue;
    for ( auto const in : cells[c].inputs )
    {
      for ( auto const d : drivers_of[in] )
      {
        if ( cells[d].kind != GateKind::Dff )
          succ[d].push_back( c );
      }
    }
  }

  constexpr std::uint32_t unvisited = ~0u;
  std::vector<std::uint32_t> index( cells.size(), unvisited ), low( cells.size(), 0 );
  std::vector<bool> on_stack( cells.size(), false );
  std::vector<CellId> stack;
  std::vector<std::vector<CellId>> result;
  std::uint32_t counter = 0;

  for ( CellId root = 0; root < cells.size(); ++root )
  {
    if ( index[root] != unvisited )
      continue;
    std::vector<std::pair<CellId, std::size_t>> frames{ { root, 0 } };
    index[root] = low[root] = counter++;
    stack.push_back( root );
    on_stack[root] = true;
    while ( !frames.empty() )
    {
      auto& [v, next] = frames.back();
      if ( next < succ[v].size() )
      {
        auto const w = succ[v][next++];
        if ( index[w] == unvisited )
        {
          index[w] = low[w] = counter++;
          stack.push_back( w );
          on_stack[w] = true;
          frames.emplace_back( w, 0 );
        }
        else if ( on_stack[w] )
        {
          low[v] = std::min( low[v], index[w] );
        }
        continue;
      }
      if ( low[v] == index[v] )
      {
        std::vector<CellId> component;
        CellId w;
        do
        {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          component.push_back( w );
        } while ( w != v );
        bool const self_loop = std::find( succ[v].begin(), succ[v].end(), v ) != succ[v].end();
        if ( component.size() > 1 || self_loop )
        {
          std::sort( component.begin(), component.end() );
          result.push_back( std::move( component ) );
        }
      }
      auto const finished = v;
      frames.pop_back();
      if ( !frames.empty() )
        low[frames.back().first] = std::min( low[frames.back().first], low[finished] );
    }
  }
  std::sort( result.begin(), result.end() );
  return result;
}

std::string join_names( Netlist const& n, std::vector<std::uint32_t> const& nets )
{
  std::string s;
  for ( auto const id : nets )
  {
    if ( !s.empty() )
      s += ", ";
    s += n.net_name( id );
  }
  return s;
}

} // namespace

std::vector<Diagnostic> validate( Netlist const& n )
{
  std::vector<Diagnostic> diags;
  auto const& cells = n.cells();

  for ( CellId c = 0; c < cells.size(); ++c )
  {
    auto const& cell = cells[c];
    if ( !arity_ok( cell.kind, cell.inputs.size() ) )
    {
      diags.push_back( { Rule::Arity,
                         std::string( to_string( cell.kind ) ) + " cell driving '" + n.net_name( cell.output ) + "' has " +
                             std::to_string( cell.inputs.size() ) + " inputs",
                         { c } } );
    }
    if ( cell.kind == GateKind::Other )
    {
      auto const it = n.cell_functions().find( cell.type_name );
      if ( it != n.cell_functions().end() && it->second.num_vars() != cell.inputs.size() )
      {
        diags.push_back( { Rule::UnknownFunction,
                           "function of cell type '" + cell.type_name + "' does not match its arity",
                           { c } } );
      }
    }
  }

  std::vector<std::uint32_t> driver_count( n.num_nets(), 0 );
  for ( auto const in : n.inputs() )
    ++driver_count[in];
  for ( auto const& cell : cells )
    ++driver_count[cell.output];

  for ( NetId net = 0; net < n.num_nets(); ++net )
  {
    if ( driver_count[net] > 1 )
      diags.push_back( { Rule::MultiDriver,
                         "net '" + n.net_name( net ) + "' has " + std::to_string( driver_count[net] ) + " drivers",
                         { net } } );
  }

  std::vector<bool> used( n.num_nets(), false );
  for ( auto const& cell : cells )
    for ( auto const in : cell.inputs )
      used[in] = true;
  for ( auto const& port : n.outputs() )
    used[port.net] = true;
  std::vector<std::uint32_t> undriven;
  for ( NetId net = 0; net < n.num_nets(); ++net )
  {
    if ( used[net] && driver_count[net] == 0 )
      undriven.push_back( net );
  }
  for ( auto const net : undriven )
    diags.push_back( { Rule::Undriven, "net '" + n.net_name( net ) + "' is read but never driven", { net } } );

  std::set<std::string> port_names;
  for ( auto const& port : n.outputs() )
  {
    if ( !port_names.insert( port.name ).second )
      diags.push_back( { Rule::DuplicatePort, "output port '" + port.name + "' declared twice", { port.net } } );
  }
  std::set<NetId> input_set;
  for ( auto const in : n.inputs() )
  {
    if ( !input_set.insert( in ).second )
      diags.push_back( { Rule::DuplicatePort, "input '" + n.net_name( in ) + "' declared twice", { in } } );
  }

  for ( auto& component : combinational_cycles( n ) )
  {
    std::vector<std::uint32_t> nets;
    for ( auto const c : component )
      nets.push_back( cells[c].output );
    diags.push_back( { Rule::Cycle, "combinational cycle through " + join_names( n, nets ), std::move( component ) } );
  }
  return diags;
}

void require_valid( Netlist const& netlist )
{
  auto const diags = validate( netlist );
  if ( !diags.empty() )
    throw DesignRuleError( std::string( to_string( diags.front().rule ) ) + ": " + diags.front().message );
}

} // namespace netforge
