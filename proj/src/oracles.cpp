#include <netforge/oracles.hpp>

#include <netforge/error.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace netforge
{

namespace
{

std::uint64_t mix( std::uint64_t x )
{
  x += 0x9e3779b97f4a7c15ull;
  x = ( x ^ ( x >> 30 ) ) * 0xbf58476d1ce4e5b9ull;
  x = ( x ^ ( x >> 27 ) ) * 0x94d049bb133111ebull;
  return x ^ ( x >> 31 );
}

std::uint64_t combine( std::uint64_t seed, std::uint64_t v )
{
  return mix( seed ^ mix( v ) );
}

std::uint64_t hash_string( std::string_view s )
{
  std::uint64_t h = 0xcbf29ce484222325ull;
  for ( unsigned char c : s )
    h = ( h ^ c ) * 0x100000001b3ull;
  return mix( h );
}

std::uint64_t const pi_label = hash_string( "<pi>" );
std::uint64_t const po_label = hash_string( "<po>" );
std::uint64_t const fanout_separator = hash_string( "<fanout>" );

struct Adjacency
{
  std::vector<std::uint64_t> kind;
  /// Per cell: fanin driver cells (-1 for a primary input or undriven net).
  std::vector<std::vector<std::int64_t>> fanin;
  std::vector<std::vector<CellId>> fanout;
  std::vector<std::uint32_t> port_count;
};

Adjacency adjacency( Netlist const& n )
{
  Adjacency a;
  auto const drivers = n.drivers();
  auto const readers = n.fanouts();
  std::vector<std::uint32_t> ports( n.num_nets(), 0 );
  for ( auto const& p : n.outputs() )
    ++ports[p.net];
  for ( auto const& cell : n.cells() )
  {
    std::string k( to_string( cell.kind ) );
    if ( cell.kind == GateKind::Other )
      k += ":" + cell.type_name;
    a.kind.push_back( hash_string( k ) );
    std::vector<std::int64_t> fi;
    for ( auto const net : cell.inputs )
      fi.push_back( drivers[net] ? static_cast<std::int64_t>( *drivers[net] ) : -1 );
    a.fanin.push_back( std::move( fi ) );
    a.fanout.push_back( readers[cell.output] );
    a.port_count.push_back( ports[cell.output] );
  }
  return a;
}

std::uint64_t refine( Adjacency const& a, std::vector<std::uint64_t> const& prev, std::size_t c )
{
  std::vector<std::uint64_t> in, out;
  for ( auto const d : a.fanin[c] )
    in.push_back( d < 0 ? pi_label : prev[static_cast<std::size_t>( d )] );
  for ( auto const r : a.fanout[c] )
    out.push_back( prev[r] );
  out.insert( out.end(), a.port_count[c], po_label );
  std::sort( in.begin(), in.end() );
  std::sort( out.begin(), out.end() );
  auto h = a.kind[c];
  for ( auto const v : in )
    h = combine( h, v );
  h = combine( h, fanout_separator );
  for ( auto const v : out )
    h = combine( h, v );
  return h;
}

template<bool Parallel>
std::vector<std::vector<std::uint64_t>> label_layers( Netlist const& netlist, unsigned iterations )
{
  auto const a = adjacency( netlist );
  std::vector<std::vector<std::uint64_t>> layers{ a.kind };
  auto const n = static_cast<std::int64_t>( a.kind.size() );
  for ( unsigned it = 0; it < iterations; ++it )
  {
    auto const& prev = layers.back();
    std::vector<std::uint64_t> next( a.kind.size() );
    if constexpr ( Parallel )
    {
#pragma omp parallel for schedule( static )
      for ( std::int64_t c = 0; c < n; ++c )
        next[c] = refine( a, prev, static_cast<std::size_t>( c ) );
    }
    else
    {
      for ( std::int64_t c = 0; c < n; ++c )
        next[c] = refine( a, prev, static_cast<std::size_t>( c ) );
    }
    layers.push_back( std::move( next ) );
  }
  return layers;
}

// Vote weighted by inverse class size, so a rare class is not drowned out.
std::size_t argmax_class( std::vector<std::uint64_t> const& counts, std::vector<std::uint64_t> const& sizes )
{
  std::size_t best = 0;
  for ( std::size_t k = 1; k < counts.size(); ++k )
  {
    if ( counts[k] * sizes[best] > counts[best] * sizes[k] )
      best = k;
  }
  return best;
}

OracleScore make_score( Context c, double value, Netlist const& n, std::vector<CellId> const& cells,
                        std::vector<std::string> const& predicted )
{
  OracleScore s;
  s.context = c;
  s.metric = metric_for( c );
  s.value = value;
  for ( std::size_t i = 0; i < cells.size(); ++i )
    s.per_node[n.net_name( n.cell( cells[i] ).output )] = predicted[i];
  return s;
}

std::vector<CellId> all_cells( Netlist const& n )
{
  std::vector<CellId> cells( n.num_cells() );
  for ( CellId c = 0; c < n.num_cells(); ++c )
    cells[c] = c;
  return cells;
}

} // namespace

std::string_view to_string( Metric m )
{
  switch ( m )
  {
  case Metric::Similarity:
    return "similarity";
  case Metric::TsScore:
    return "ts_score";
  case Metric::Accuracy:
    return "accuracy";
  case Metric::Kpa:
    return "kpa";
  }
  return "?";
}

Metric metric_for( Context c )
{
  switch ( c )
  {
  case Context::Piracy:
    return Metric::Similarity;
  case Context::TrojanLoc:
    return Metric::TsScore;
  case Context::ReverseEng:
    return Metric::Accuracy;
  case Context::Obfuscation:
    return Metric::Kpa;
  }
  return Metric::Similarity;
}

void check_range( OracleScore const& score )
{
  double const lo = score.metric == Metric::Similarity ? -1.0 : 0.0;
  if ( !std::isfinite( score.value ) || score.value < lo || score.value > 1.0 )
    throw InterfaceError( std::string( to_string( score.metric ) ) + " value " + std::to_string( score.value ) +
                          " out of range" );
}

std::vector<std::vector<std::uint64_t>> wl_label_layers( Netlist const& netlist, unsigned iterations )
{
  return label_layers<true>( netlist, iterations );
}

std::vector<std::vector<std::uint64_t>> wl_label_layers_serial( Netlist const& netlist, unsigned iterations )
{
  return label_layers<false>( netlist, iterations );
}

WlSignature wl_signature( Netlist const& netlist, unsigned iterations )
{
  WlSignature sig;
  auto const layers = wl_label_layers( netlist, iterations );
  for ( auto const l : layers.back() )
    ++sig.histogram[l];
  return sig;
}

double cosine( WlSignature const& a, WlSignature const& b )
{
  double dot = 0.0, na = 0.0, nb = 0.0;
  for ( auto const& [label, count] : a.histogram )
  {
    na += static_cast<double>( count ) * static_cast<double>( count );
    if ( auto it = b.histogram.find( label ); it != b.histogram.end() )
      dot += static_cast<double>( count ) * static_cast<double>( it->second );
  }
  for ( auto const& [label, count] : b.histogram )
    nb += static_cast<double>( count ) * static_cast<double>( count );
  if ( na == 0.0 || nb == 0.0 )
    return na == nb ? 1.0 : 0.0;
  return dot / std::sqrt( na * nb );
}

OracleScore piracy_score( Netlist const& candidate, Netlist const& original, double tau, unsigned iterations )
{
  if ( !( tau > 0.0 && tau < 1.0 ) )
    throw Error( "tau must lie in (0, 1)" );
  OracleScore s;
  s.context = Context::Piracy;
  s.metric = Metric::Similarity;
  s.value = cosine( wl_signature( candidate, iterations ), wl_signature( original, iterations ) ) - tau;
  return s;
}

NodeModel train_node_oracle( std::vector<std::pair<Netlist, NodeLabels>> const& dataset, unsigned h,
                             NodeModel::Mode mode )
{
  if ( dataset.empty() )
    throw Error( "empty training dataset" );
  NodeModel m;
  m.mode = mode;
  m.h = h;
  std::set<std::string> names;
  for ( auto const& [n, labels] : dataset )
  {
    if ( labels.size() != n.num_cells() )
      throw Error( "label count does not match cell count in '" + n.name() + "'" );
    for ( auto const& l : labels )
    {
      if ( !l.empty() )
        names.insert( l );
    }
  }
  if ( names.empty() )
    throw Error( "training dataset has no labeled cells" );
  m.classes.assign( names.begin(), names.end() );
  m.class_sizes.assign( m.classes.size(), 0 );
  m.tables.resize( h + 1 );
  for ( auto const& [n, labels] : dataset )
  {
    auto const layers = wl_label_layers( n, h );
    for ( CellId c = 0; c < n.num_cells(); ++c )
    {
      if ( labels[c].empty() )
        continue;
      auto const k = static_cast<std::size_t>(
          std::lower_bound( m.classes.begin(), m.classes.end(), labels[c] ) - m.classes.begin() );
      ++m.class_sizes[k];
      for ( unsigned d = 0; d <= h; ++d )
      {
        auto& counts = m.tables[d][layers[d][c]];
        counts.resize( m.classes.size(), 0 );
        ++counts[k];
      }
    }
  }
  return m;
}

std::vector<std::string> NodeModel::predict( Netlist const& netlist ) const
{
  return predict( netlist, all_cells( netlist ) );
}

std::vector<std::string> NodeModel::predict( Netlist const& netlist, std::vector<CellId> const& cells ) const
{
  auto const layers = wl_label_layers( netlist, h );
  auto const k = classes.size();

  // squared centroid norms
  std::vector<double> norm2( k, 0.0 );
  if ( mode == Mode::Centroid )
  {
    for ( auto const& table : tables )
    {
      for ( auto const& [label, counts] : table )
      {
        for ( std::size_t j = 0; j < k; ++j )
        {
          double const c = static_cast<double>( counts[j] ) / static_cast<double>( class_sizes[j] );
          norm2[j] += c * c;
        }
      }
    }
  }

  std::vector<std::string> out;
  out.reserve( cells.size() );
  for ( auto const cell : cells )
  {
    if ( cell >= netlist.num_cells() )
      throw Error( "cell id " + std::to_string( cell ) + " out of range" );
    std::size_t choice = 0;
    bool decided = false;
    for ( int d = static_cast<int>( h ); d >= 0 && !decided; --d )
    {
      if ( auto it = tables[d].find( layers[d][cell] ); it != tables[d].end() )
      {
        choice = argmax_class( it->second, class_sizes );
        decided = true;
      }
      if ( mode == Mode::Centroid )
        break;
    }
    if ( !decided && mode == Mode::Centroid )
    {
      double best = std::numeric_limits<double>::infinity();
      for ( std::size_t j = 0; j < k; ++j )
      {
        double dist = norm2[j];
        for ( unsigned d = 0; d <= h; ++d )
        {
          double c = 0.0;
          if ( auto it = tables[d].find( layers[d][cell] ); it != tables[d].end() )
            c = static_cast<double>( it->second[j] ) / static_cast<double>( class_sizes[j] );
          dist += 1.0 - 2.0 * c;
        }
        if ( dist < best )
        {
          best = dist;
          choice = j;
        }
      }
    }
    out.push_back( classes[choice] );
  }
  return out;
}

nlohmann::json NodeModel::to_json() const
{
  nlohmann::json t = nlohmann::json::array();
  for ( auto const& table : tables )
  {
    nlohmann::json rows = nlohmann::json::array();
    for ( auto const& [label, counts] : table )
      rows.push_back( { label, counts } );
    t.push_back( rows );
  }
  return { { "mode", mode == Mode::Centroid ? "centroid" : "majority" },
           { "h", h },
           { "classes", classes },
           { "class_sizes", class_sizes },
           { "tables", t } };
}

NodeModel NodeModel::from_json( nlohmann::json const& j )
{
  try
  {
    NodeModel m;
    auto const mode = j.at( "mode" ).get<std::string>();
    if ( mode != "centroid" && mode != "majority" )
      throw Error( "unknown node model mode '" + mode + "'" );
    m.mode = mode == "centroid" ? Mode::Centroid : Mode::Majority;
    m.h = j.at( "h" ).get<unsigned>();
    m.classes = j.at( "classes" ).get<std::vector<std::string>>();
    m.class_sizes = j.at( "class_sizes" ).get<std::vector<std::uint64_t>>();
    for ( auto const& rows : j.at( "tables" ) )
    {
      auto& table = m.tables.emplace_back();
      for ( auto const& row : rows )
        table[row.at( 0 ).get<std::uint64_t>()] = row.at( 1 ).get<std::vector<std::uint64_t>>();
    }
    if ( m.tables.size() != m.h + 1 || m.class_sizes.size() != m.classes.size() || m.classes.empty() )
      throw Error( "inconsistent node model" );
    return m;
  }
  catch ( nlohmann::json::exception const& e )
  {
    throw Error( std::string( "malformed node model: " ) + e.what() );
  }
}

OracleScore trojan_loc_score( Netlist const& netlist, NodeLabels const& truth, NodeModel const& model )
{
  if ( truth.size() != netlist.num_cells() )
    throw Error( "truth does not cover every cell" );
  std::vector<CellId> cells;
  for ( CellId c = 0; c < netlist.num_cells(); ++c )
  {
    if ( !truth[c].empty() )
      cells.push_back( c );
  }
  if ( cells.empty() )
    throw Error( "empty truth" );
  auto const predicted = model.predict( netlist, cells );
  std::uint64_t tp = 0, pos = 0, tn = 0, neg = 0;
  for ( std::size_t i = 0; i < cells.size(); ++i )
  {
    bool const is_ht = truth[cells[i]] == label_ht;
    bool const said_ht = predicted[i] == label_ht;
    ( is_ht ? pos : neg )++;
    if ( is_ht && said_ht )
      ++tp;
    if ( !is_ht && !said_ht )
      ++tn;
  }
  double const tpr = pos ? static_cast<double>( tp ) / static_cast<double>( pos ) : 1.0;
  double const tnr = neg ? static_cast<double>( tn ) / static_cast<double>( neg ) : 1.0;
  return make_score( Context::TrojanLoc, ( tpr + tnr ) / 2.0, netlist, cells, predicted );
}

OracleScore re_accuracy( Netlist const& netlist, NodeLabels const& truth, NodeModel const& model )
{
  if ( truth.size() != netlist.num_cells() )
    throw Error( "truth does not cover every cell" );
  std::vector<CellId> cells;
  for ( CellId c = 0; c < netlist.num_cells(); ++c )
  {
    if ( !truth[c].empty() )
      cells.push_back( c );
  }
  if ( cells.empty() )
    throw Error( "empty truth" );
  auto const predicted = model.predict( netlist, cells );
  std::uint64_t hit = 0;
  for ( std::size_t i = 0; i < cells.size(); ++i )
    hit += predicted[i] == truth[cells[i]];
  return make_score( Context::ReverseEng, static_cast<double>( hit ) / static_cast<double>( cells.size() ), netlist,
                     cells, predicted );
}

std::vector<CellId> locate_key_gates( Netlist const& netlist, std::vector<std::string> const& key_inputs )
{
  auto const readers = netlist.fanouts();
  std::vector<CellId> gates;
  for ( auto const& name : key_inputs )
  {
    auto const net = netlist.find_net( name );
    if ( !net || readers[*net].empty() )
      throw Error( "key input '" + name + "' drives no cell" );
    gates.push_back( readers[*net].front() );
  }
  return gates;
}

NodeModel train_key_oracle( std::vector<std::pair<Netlist, std::vector<KeyGate>>> const& dataset, unsigned h )
{
  std::vector<std::pair<Netlist, NodeLabels>> labeled;
  for ( auto const& [n, keys] : dataset )
  {
    NodeLabels labels( n.num_cells() );
    for ( auto const& k : keys )
    {
      if ( k.cell >= n.num_cells() )
        throw Error( "key gate id out of range" );
      labels[k.cell] = k.bit ? "1" : "0";
    }
    labeled.emplace_back( n, std::move( labels ) );
  }
  return train_node_oracle( labeled, h, NodeModel::Mode::Majority );
}

OracleScore key_prediction_accuracy( Netlist const& obf, std::vector<KeyGate> const& key_gates,
                                     NodeModel const& model )
{
  if ( key_gates.empty() )
    throw Error( "empty key" );
  std::vector<CellId> cells;
  for ( auto const& k : key_gates )
    cells.push_back( k.cell );
  auto const predicted = model.predict( obf, cells );
  std::uint64_t hit = 0;
  for ( std::size_t i = 0; i < cells.size(); ++i )
    hit += predicted[i] == ( key_gates[i].bit ? "1" : "0" );
  return make_score( Context::Obfuscation, static_cast<double>( hit ) / static_cast<double>( cells.size() ), obf,
                     cells, predicted );
}

} // namespace netforge
