#include <netforge/features.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace netforge
{

namespace
{

constexpr std::array<std::string_view, num_contexts> context_names = { "piracy", "trojan_loc", "reverse_eng",
                                                                       "obfuscation" };

std::size_t slot_of( GateKind kind )
{
  switch ( kind )
  {
  case GateKind::And:
    return 4;
  case GateKind::Or:
    return 5;
  case GateKind::Nand:
    return 6;
  case GateKind::Nor:
    return 7;
  case GateKind::Inv:
    return 8;
  case GateKind::Buf:
    return 9;
  case GateKind::Xor:
    return 10;
  case GateKind::Xnor:
    return 11;
  default:
    return 12;
  }
}

} // namespace

std::string_view to_string( Context c )
{
  return context_names.at( index_of( c ) );
}

std::optional<Context> context_from_string( std::string_view name )
{
  for ( auto const c : all_contexts )
  {
    if ( context_names[index_of( c )] == name )
      return c;
  }
  return std::nullopt;
}

FeatureVector extract_features( Netlist const& netlist )
{
  FeatureVector f{};
  f[0] = netlist.inputs().size();
  f[1] = netlist.outputs().size();
  f[2] = netlist.num_cells();
  f[3] = netlist.num_nets();
  for ( auto const& cell : netlist.cells() )
    ++f[slot_of( cell.kind )];
  return f;
}

Observation make_observation( FeatureVector const& features, FeatureVector const& reference, Context context )
{
  Observation obs{};
  auto const bits = one_hot( context );
  std::copy( bits.begin(), bits.end(), obs.begin() );
  double const scale = std::log1p( static_cast<double>( std::max<std::uint64_t>( reference[2], 1 ) ) );
  for ( std::size_t i = 0; i < num_features; ++i )
  {
    double const v = std::log1p( static_cast<double>( features[i] ) ) / scale;
    obs[num_contexts + i] = static_cast<float>( std::clamp( v, 0.0, 4.0 ) );
  }
  return obs;
}

std::string features_csv_header()
{
  std::string s;
  for ( std::size_t i = 0; i < num_features; ++i )
  {
    if ( i )
      s += ',';
    s += feature_names[i];
  }
  return s;
}

std::string features_csv_row( FeatureVector const& features )
{
  std::string s;
  for ( std::size_t i = 0; i < num_features; ++i )
  {
    if ( i )
      s += ',';
    s += std::to_string( features[i] );
  }
  return s;
}

} // namespace netforge
