#include <netforge/corpus.hpp>

#include <netforge/error.hpp>
#include <netforge/generators.hpp>
#include <netforge/io.hpp>
#include <netforge/techmap.hpp>

#include <algorithm>
#include <random>

namespace netforge
{

namespace
{

constexpr char const* full_adder_blif = R"(.model full_adder
.inputs a b cin
.outputs s cout
.names a b x1
01 1
10 1
.names x1 cin s
01 1
10 1
.names a b g1
11 1
.names x1 cin g2
11 1
.names g1 g2 cout
1- 1
-1 1
.end
)";

constexpr char const* c17_verilog = R"(module c17 (N1, N2, N3, N6, N7, N22, N23);
input N1, N2, N3, N6, N7;
output N22, N23;
wire N10, N11, N16, N19;
nand NAND2_1 (N10, N1, N3);
nand NAND2_2 (N11, N3, N6);
nand NAND2_3 (N16, N2, N11);
nand NAND2_4 (N19, N11, N7);
nand NAND2_5 (N22, N10, N16);
nand NAND2_6 (N23, N16, N19);
endmodule
)";

// two-bit counter with enable and synchronous clear
constexpr char const* counter_blif = R"(.model counter2
.inputs en clr
.outputs q0 q1 wrap
.latch d0 q0 0
.latch d1 q1 0
.names en clr q0 d0
100 1
001 1
.names en clr q0 q1 d1
1010 1
1001 1
00-1 1
.names en clr q0 q1 wrap
1011 1
.end
)";

constexpr std::array<BlockKind, 5> all_kinds = { BlockKind::Add, BlockKind::Sub, BlockKind::Cmp, BlockKind::Mul,
                                                 BlockKind::Ctrl };

std::vector<BlockKind> shuffled_kinds( std::uint64_t seed, std::size_t keep )
{
  std::vector<BlockKind> k( all_kinds.begin(), all_kinds.end() );
  std::mt19937_64 rng( seed );
  std::shuffle( k.begin(), k.end(), rng );
  k.resize( keep );
  return k;
}

Netlist named( Netlist n, std::string const& name )
{
  n.set_name( name );
  return n;
}

// Hosts in the styles a flow without cell restrictions tends to produce.
Netlist host_circuit( std::uint64_t s, bool narrow )
{
  static constexpr std::array<ActionId, 4> styles = { ActionId::A1, ActionId::A7, ActionId::A2, ActionId::A8 };
  unsigned const width = ( !narrow && s % 3 == 2 ) ? 4 : 2;
  auto const r = gen_re_blocks( { width }, shuffled_kinds( s, 2 ), s );
  auto host = apply_action( r.netlist, styles[s % styles.size()] );
  for ( CellId c = 0; c < host.num_cells(); ++c )
    host.set_cell_tag( c, -1 );
  host.set_name( "host" + std::to_string( s ) );
  return host;
}

bool evades( Netlist const& candidate, Netlist const& reference )
{
  return piracy_score( candidate, reference ).value < 0.0;
}

constexpr std::size_t train_instances = 20;

} // namespace

Netlist full_adder_circuit()
{
  return parse_blif( full_adder_blif );
}

Netlist c17_circuit()
{
  return parse_structural_verilog( c17_verilog );
}

std::vector<NamedCircuit> desk_corpus()
{
  using BK = BlockKind;
  std::vector<NamedCircuit> out;
  auto add = [&]( std::string name, Netlist n ) { out.push_back( { name, named( std::move( n ), name ) } ); };
  auto blocks = [&]( std::string name, unsigned w, std::vector<BK> kinds, std::uint64_t seed ) {
    add( std::move( name ), gen_re_blocks( { w }, kinds, seed ).netlist );
  };

  add( "full_adder", full_adder_circuit() );
  add( "c17", c17_circuit() );
  blocks( "add2", 2, { BK::Add }, 1 );
  blocks( "add4", 4, { BK::Add }, 2 );
  blocks( "sub4", 4, { BK::Sub }, 3 );
  blocks( "mul2", 2, { BK::Mul }, 4 );
  blocks( "mul4", 4, { BK::Mul }, 5 );
  blocks( "cmp4", 4, { BK::Cmp }, 6 );
  blocks( "ctrl4", 4, { BK::Ctrl }, 7 );
  blocks( "add2_mul2", 2, { BK::Add, BK::Mul }, 8 );
  blocks( "alu2", 2, { BK::Add, BK::Sub, BK::Cmp, BK::Mul, BK::Ctrl }, 9 );
  add( "rand8", aig_to_netlist( random_aig( 8, 40, 3, 11 ) ) );
  add( "rand10", aig_to_netlist( random_aig( 10, 60, 4, 12 ) ) );
  add( "rand12", aig_to_netlist( random_aig( 12, 80, 4, 13 ) ) );
  add( "counter2", parse_blif( counter_blif ) );
  add( "c17_nand", apply_action( c17_circuit(), ActionId::A3 ) );
  add( "c17_locked", gen_obfuscated( c17_circuit(), 4, 14 ).netlist );
  add( "add2_locked", gen_obfuscated( gen_re_blocks( { 2 }, { BK::Add }, 15 ).netlist, 4, 15 ).netlist );
  add( "add4_trojan", gen_trojan( gen_re_blocks( { 4 }, { BK::Add }, 16 ).netlist, 4, 16 ).netlist );
  add( "mul2_trojan", gen_trojan( gen_re_blocks( { 2 }, { BK::Mul }, 17 ).netlist, 3, 17 ).netlist );
  return out;
}

std::optional<Netlist> nand_normal_form( Netlist const& netlist, unsigned max_passes )
{
  auto current = apply_action( netlist, ActionId::A3 );
  for ( unsigned pass = 1; pass < max_passes; ++pass )
  {
    auto next = apply_action( current, ActionId::A3 );
    if ( wl_signature( next ).histogram == wl_signature( current ).histogram )
      return current;
    current = std::move( next );
  }
  return std::nullopt;
}

DeskSetup desk_setup( std::size_t per_context )
{
  if ( per_context == 0 || per_context > train_instances )
    throw Error( "pool size must be in 1.." + std::to_string( train_instances ) );
  DeskSetup d;

  // piracy: candidates in a fixed order, kept when the NAND-family actions cannot evade
  {
    auto& pool = d.pools[index_of( Context::Piracy )];
    std::vector<NamedCircuit> candidates = { { "full_adder", full_adder_circuit() }, { "c17", c17_circuit() } };
    for ( std::uint64_t s = 0; candidates.size() < 200; ++s )
    {
      unsigned const width = s % 3 == 2 ? 4 : 2;
      candidates.push_back(
          { "blocks" + std::to_string( s ), gen_re_blocks( { width }, shuffled_kinds( s + 100, 1 + s % 2 ), s ).netlist } );
    }
    for ( auto const& c : candidates )
    {
      if ( pool.size() == per_context )
        break;
      auto const nf = nand_normal_form( c.netlist );
      if ( !nf )
        continue;
      bool keep = evades( apply_action( *nf, ActionId::A1 ), *nf );
      for ( auto const a : { ActionId::A3, ActionId::A4, ActionId::A5, ActionId::A6 } )
        keep = keep && !evades( apply_action( *nf, a ), *nf );
      if ( keep )
        pool.push_back( { "piracy_" + c.name, named( *nf, "piracy_" + c.name ), {}, {} } );
    }
    if ( pool.size() < per_context )
      throw Error( "not enough piracy pool candidates" );
  }

  // trojan
  {
    std::vector<std::pair<Netlist, NodeLabels>> train;
    for ( std::uint64_t s = 0; s < train_instances; ++s )
    {
      auto t = gen_trojan( host_circuit( s, false ), 4, s );
      auto const name = "trojan" + std::to_string( s );
      t.netlist.set_name( name );
      if ( s < per_context )
        d.pools[index_of( Context::TrojanLoc )].push_back( { name, t.netlist, {}, {} } );
      train.emplace_back( std::move( t.netlist ), std::move( t.truth ) );
    }
    d.models.trojan = train_node_oracle( train, d.models.h, NodeModel::Mode::Majority );
  }

  // reverse engineering: all five block kinds, mixed widths
  {
    std::vector<std::pair<Netlist, NodeLabels>> train;
    for ( std::uint64_t s = 0; s < train_instances; ++s )
    {
      auto const kinds = shuffled_kinds( s, all_kinds.size() );
      std::vector<unsigned> widths = { 2 };
      if ( s % 2 == 1 )
      {
        widths.clear();
        for ( auto const k : kinds )
          widths.push_back( k == BlockKind::Mul ? 2 : 4 );
      }
      auto r = gen_re_blocks( widths, kinds, s );
      auto const name = "re" + std::to_string( s );
      r.netlist.set_name( name );
      if ( s < per_context )
        d.pools[index_of( Context::ReverseEng )].push_back( { name, r.netlist, {}, {} } );
      train.emplace_back( std::move( r.netlist ), std::move( r.truth ) );
    }
    d.models.reverse_eng = train_node_oracle( train, d.models.h, NodeModel::Mode::Centroid );
  }

  // obfuscation
  {
    std::vector<std::pair<Netlist, std::vector<KeyGate>>> train;
    for ( std::uint64_t s = 0; s < train_instances; ++s )
    {
      auto o = gen_obfuscated( host_circuit( s, true ), 4, s );
      auto const name = "locked" + std::to_string( s );
      o.netlist.set_name( name );
      if ( s < per_context )
        d.pools[index_of( Context::Obfuscation )].push_back( { name, o.netlist, o.key_inputs, o.key } );
      train.emplace_back( std::move( o.netlist ), std::move( o.key_gates ) );
    }
    d.models.key = train_key_oracle( train, d.models.h );
  }
  return d;
}

} // namespace netforge
