#pragma once

#include <netforge/generators.hpp>
#include <netforge/io.hpp>
#include <netforge/netlist.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <random>
#include <vector>

namespace test
{

inline std::filesystem::path data_path( std::string const& name )
{
  return std::filesystem::path( NETFORGE_DATA_DIR ) / name;
}

inline netforge::Netlist full_adder()
{
  return netforge::read_netlist_file( data_path( "full_adder.blif" ) );
}

inline netforge::Netlist c17()
{
  return netforge::read_netlist_file( data_path( "c17.v" ) );
}

/// Structural fingerprint of the cone driving each output, independent of internal net names.
inline std::vector<std::string> structure( netforge::Netlist const& n )
{
  using namespace netforge;
  auto const drv = n.drivers();
  std::map<NetId, std::string> memo;
  auto rec = [&]( auto&& self, NetId net ) -> std::string {
    if ( auto it = memo.find( net ); it != memo.end() )
      return it->second;
    std::string s;
    if ( !drv[net] )
    {
      s = "pi:" + n.net_name( net );
    }
    else
    {
      auto const& cell = n.cell( *drv[net] );
      if ( cell.kind == GateKind::Dff )
      {
        s = "dff";
      }
      else
      {
        std::vector<std::string> kids;
        for ( auto const in : cell.inputs )
          kids.push_back( self( self, in ) );
        if ( cell.kind != GateKind::Other )
          std::sort( kids.begin(), kids.end() );
        s = std::string( to_string( cell.kind ) ) + cell.type_name + "(";
        for ( auto const& k : kids )
          s += k + ",";
        s += ")";
      }
    }
    memo[net] = s;
    return s;
  };
  std::vector<std::string> result;
  for ( auto const& port : n.outputs() )
    result.push_back( port.name + "=" + rec( rec, port.net ) );
  return result;
}

inline std::map<netforge::GateType, int, bool ( * )( netforge::GateType const&, netforge::GateType const& )>
cell_multiset( netforge::Netlist const& n )
{
  auto less = +[]( netforge::GateType const& a, netforge::GateType const& b ) {
    return std::pair( a.kind, a.fan_in ) < std::pair( b.kind, b.fan_in );
  };
  std::map<netforge::GateType, int, bool ( * )( netforge::GateType const&, netforge::GateType const& )> m( less );
  for ( auto const& c : n.cells() )
    ++m[c.type()];
  return m;
}

using netforge::random_aig;

} // namespace test
