#include "helpers.hpp"

#include <netforge/equivalence.hpp>
#include <netforge/error.hpp>
#include <netforge/simulate.hpp>
#include <netforge/transforms.hpp>

#include <doctest.h>

#include <functional>

using namespace netforge;

namespace
{

bool exhaustive_equal( Aig const& a, Aig const& b )
{
  return check_equivalence( a, b ).status == EquivalenceStatus::EquivalentExhaustive;
}

Aig and_chain( std::uint32_t n )
{
  Aig aig;
  Lit acc = aig.create_pi( "x0" );
  for ( std::uint32_t i = 1; i < n; ++i )
    acc = aig.create_and( acc, aig.create_pi( "x" + std::to_string( i ) ) );
  aig.create_po( acc, "y" );
  return aig;
}

} // namespace

TEST_CASE( "netlist to aig" )
{
  SUBCASE( "inverter" )
  {
    auto const n = parse_blif( ".model t\n.inputs a\n.outputs y\n.names a y\n0 1\n.end\n" );
    auto const aig = netlist_to_aig( n );
    CHECK( aig.num_ands() == 0 );
    CHECK( aig.cos()[0] == !Lit::make( aig.cis()[0] ) );
  }
  SUBCASE( "xor" )
  {
    auto const n = parse_blif( ".model t\n.inputs a b\n.outputs y\n.names a b y\n01 1\n10 1\n.end\n" );
    CHECK( netlist_to_aig( n ).num_ands() == 3 );
  }
  SUBCASE( "full adder matches arithmetic" )
  {
    auto const aig = netlist_to_aig( test::full_adder() );
    for ( std::uint32_t v = 0; v < 8; ++v )
    {
      std::vector<bool> in{ bool( v & 1 ), bool( v & 2 ), bool( v & 4 ) };
      auto const out = simulate_scalar( aig, in );
      auto const sum = ( v & 1 ) + ( ( v >> 1 ) & 1 ) + ( ( v >> 2 ) & 1 );
      CHECK( out[0] == bool( sum & 1 ) );
      CHECK( out[1] == bool( sum >> 1 ) );
    }
  }
  SUBCASE( "OTHER without function" )
  {
    Netlist n( "o" );
    auto const a = n.add_input( "a" );
    auto const y = n.add_net( "y" );
    n.add_cell( GateKind::Other, { a }, y, -1, "BOX" );
    n.add_output( y );
    CHECK_THROWS_AS( netlist_to_aig( n ), Error );
  }
  SUBCASE( "latches become pseudo ports" )
  {
    auto const n = parse_blif( ".model t\n.inputs a\n.outputs q\n.latch d q 0\n.names a q d\n01 1\n10 1\n.end\n" );
    auto const aig = netlist_to_aig( n );
    CHECK( aig.num_pis() == 1 );
    CHECK( aig.num_latches() == 1 );
    CHECK( aig.num_cos() == 2 );
  }
  SUBCASE( "aig to netlist round trip" )
  {
    auto const aig = netlist_to_aig( test::c17() );
    auto const back = aig_to_netlist( aig );
    CHECK( validate( back ).empty() );
    CHECK( exhaustive_equal( aig, netlist_to_aig( back ) ) );
  }
}

TEST_CASE( "balance" )
{
  SUBCASE( "8-input chain" )
  {
    auto const chain = and_chain( 8 );
    CHECK( chain.num_ands() == 7 );
    CHECK( chain.depth() == 7 );
    auto const b = balance( chain );
    CHECK( b.num_ands() == 7 );
    CHECK( b.depth() == 3 );
    CHECK( exhaustive_equal( chain, b ) );
  }
  SUBCASE( "balanced tree is a fixpoint" )
  {
    Aig aig;
    std::vector<Lit> x;
    for ( int i = 0; i < 4; ++i )
      x.push_back( aig.create_pi( "x" + std::to_string( i ) ) );
    auto const l = aig.create_and( x[0], x[2] );
    auto const r = aig.create_and( x[1], x[3] );
    aig.create_po( aig.create_and( l, r ), "y" );
    auto const b = balance( aig );
    REQUIRE( b.size() == aig.size() );
    for ( std::uint32_t i = 0; i < aig.size(); ++i )
    {
      CHECK( b.node( i ).fanin0 == aig.node( i ).fanin0 );
      CHECK( b.node( i ).fanin1 == aig.node( i ).fanin1 );
    }
  }
  SUBCASE( "full adder" )
  {
    auto const fa = netlist_to_aig( test::full_adder() );
    CHECK( exhaustive_equal( fa, balance( fa ) ) );
  }
}

TEST_CASE( "rewrite" )
{
  SUBCASE( "a and a collapses" )
  {
    Aig aig;
    auto const a = aig.create_pi( "a" );
    aig.create_po( aig.create_and( a, a ), "y" );
    CHECK( aig.num_ands() == 0 );
    CHECK( rewrite( aig ).num_ands() == 0 );
  }
  SUBCASE( "shared literal" )
  {
    Aig aig;
    auto const a = aig.create_pi( "a" ), b = aig.create_pi( "b" ), c = aig.create_pi( "c" );
    aig.create_po( aig.create_and( aig.create_and( a, b ), aig.create_and( a, c ) ), "y" );
    auto const r = rewrite( aig );
    CHECK( r.num_ands() <= 3 );
    CHECK( r.num_ands() == 2 );
    CHECK( exhaustive_equal( aig, r ) );
  }
  SUBCASE( "zero cost keeps the size on a size-optimal full adder" )
  {
    auto const original = netlist_to_aig( test::full_adder() );
    CHECK( original.num_ands() == 9 );
    auto const fa = rewrite( rewrite( original, true ), true );
    CHECK( fa.num_ands() == 7 );
    auto const z = rewrite( fa, true );
    CHECK( z.num_ands() == fa.num_ands() );
    CHECK( exhaustive_equal( original, z ) );
  }
}

TEST_CASE( "refactor" )
{
  SUBCASE( "distributes a common literal" )
  {
    Aig aig;
    auto const a = aig.create_pi( "a" ), b = aig.create_pi( "b" ), c = aig.create_pi( "c" );
    aig.create_po( aig.create_or( aig.create_and( a, b ), aig.create_and( a, c ) ), "y" );
    CHECK( aig.num_ands() == 3 );
    auto const r = refactor( aig );
    CHECK( r.num_ands() == 2 );
    CHECK( exhaustive_equal( aig, r ) );
  }
  SUBCASE( "minimal cone unchanged" )
  {
    Aig aig;
    auto const a = aig.create_pi( "a" ), b = aig.create_pi( "b" );
    aig.create_po( aig.create_and( a, b ), "y" );
    auto const r = refactor( aig );
    CHECK( r.num_ands() == 1 );
    CHECK( r.node( 3 ).fanin0 == aig.node( 3 ).fanin0 );
  }
  SUBCASE( "random 6-input cones" )
  {
    for ( std::uint64_t seed = 0; seed < 100; ++seed )
    {
      auto const aig = test::random_aig( 6, 20, 1, seed );
      auto const r = refactor( aig );
      CHECK( exhaustive_equal( aig, r ) );
      CHECK( r.num_ands() <= aig.num_ands() );
    }
  }
}

TEST_CASE( "resub" )
{
  SUBCASE( "duplicate cone is merged" )
  {
    Aig aig;
    auto const a = aig.create_pi( "a" ), b = aig.create_pi( "b" ), c = aig.create_pi( "c" );
    auto const f = aig.create_and( aig.create_and( a, b ), c );
    // same function built in another order
    auto const g = aig.create_and( aig.create_and( a, c ), b );
    aig.create_po( f, "y0" );
    aig.create_po( g, "y1" );
    CHECK( aig.num_ands() == 4 );
    auto const r = resub( aig );
    CHECK( r.num_ands() < aig.num_ands() );
    CHECK( exhaustive_equal( aig, r ) );
  }
  SUBCASE( "no divisors" )
  {
    Aig aig;
    auto const a = aig.create_pi( "a" ), b = aig.create_pi( "b" );
    aig.create_po( aig.create_and( a, b ), "y" );
    CHECK( resub( aig ).num_ands() == 1 );
  }
  SUBCASE( "random 8-input AIGs" )
  {
    for ( std::uint64_t seed = 0; seed < 10; ++seed )
    {
      auto const aig = test::random_aig( 8, 60, 4, 100 + seed );
      auto const r = resub( aig );
      CHECK( exhaustive_equal( aig, r ) );
      CHECK( r.num_ands() <= aig.num_ands() );
    }
  }
}

TEST_CASE( "transforms preserve function, hashing and determinism" )
{
  using Transform = std::function<Aig( Aig const& )>;
  std::vector<std::pair<std::string, Transform>> transforms = {
      { "balance", []( Aig const& a ) { return balance( a ); } },
      { "rewrite", []( Aig const& a ) { return rewrite( a ); } },
      { "rewrite -z", []( Aig const& a ) { return rewrite( a, true ); } },
      { "refactor", []( Aig const& a ) { return refactor( a ); } },
      { "refactor -z", []( Aig const& a ) { return refactor( a, true ); } },
      { "resub", []( Aig const& a ) { return resub( a ); } },
      { "resub -z", []( Aig const& a ) { return resub( a, true ); } } };
  for ( std::uint64_t seed = 0; seed < 150; ++seed )
  {
    auto const aig = test::random_aig( 3 + seed % 8, 10 + seed % 50, 1 + seed % 4, 1000 + seed );
    for ( auto const& [name, t] : transforms )
    {
      CAPTURE( name );
      CAPTURE( seed );
      auto const r = t( aig );
      CHECK_NOTHROW( r.check() );
      CHECK( exhaustive_equal( aig, r ) );
      auto const again = t( aig );
      REQUIRE( again.size() == r.size() );
      bool same = true;
      for ( std::uint32_t i = 0; i < r.size(); ++i )
        same &= again.node( i ).fanin0 == r.node( i ).fanin0 && again.node( i ).fanin1 == r.node( i ).fanin1;
      CHECK( same );
      if ( name != "balance" )
        CHECK( r.num_ands() <= aig.num_ands() );
    }
  }
}

TEST_CASE( "strash holds on random AIGs" )
{
  for ( std::uint64_t seed = 0; seed < 1000; ++seed )
  {
    auto const aig = test::random_aig( 2 + seed % 10, 5 + seed % 40, 1 + seed % 3, seed );
    CHECK_NOTHROW( rewrite( aig ).check() );
  }
}

TEST_CASE( "simulation" )
{
  SUBCASE( "and2" )
  {
    Aig aig;
    auto const a = aig.create_pi( "a" ), b = aig.create_pi( "b" );
    aig.create_po( aig.create_and( a, b ), "y" );
    auto const out = simulate( aig, { { true, true }, { true, false } } );
    CHECK( out[0][0] );
    CHECK_FALSE( out[1][0] );
    CHECK_THROWS_AS( simulate( aig, { { true } } ), InterfaceError );
  }
  SUBCASE( "packed matches scalar" )
  {
    auto const aig = test::random_aig( 7, 40, 3, 7 );
    std::mt19937_64 rng( 3 );
    std::vector<std::vector<bool>> vectors( 64, std::vector<bool>( 7 ) );
    for ( auto& v : vectors )
      for ( std::size_t i = 0; i < v.size(); ++i )
        v[i] = rng() & 1u;
    auto const packed = simulate( aig, vectors );
    for ( std::size_t v = 0; v < vectors.size(); ++v )
      CHECK( packed[v] == simulate_scalar( aig, vectors[v] ) );
  }
  SUBCASE( "parallel matches serial" )
  {
    auto const aig = test::random_aig( 10, 80, 4, 11 );
    PatternWords in( 10, std::vector<std::uint64_t>( 37 ) );
    std::mt19937_64 rng( 5 );
    for ( auto& w : in )
      for ( auto& x : w )
        x = rng();
    CHECK( simulate_words( aig, in ) == simulate_words_serial( aig, in ) );
  }
  SUBCASE( "consistent with truth tables" )
  {
    for ( std::uint64_t seed = 0; seed < 50; ++seed )
    {
      auto const aig = test::random_aig( 1 + seed % 8, 20, 2, seed );
      auto const k = aig.num_cis();
      for ( std::uint32_t m = 0; m < ( 1u << k ); ++m )
      {
        std::vector<bool> in( k );
        for ( std::size_t i = 0; i < k; ++i )
          in[i] = ( m >> i ) & 1u;
        CHECK( simulate( aig, { in } )[0] == simulate_scalar( aig, in ) );
      }
    }
  }
}

TEST_CASE( "equivalence" )
{
  auto const fa = test::full_adder();
  SUBCASE( "balanced full adder" )
  {
    auto const v = check_equivalence( netlist_to_aig( fa ), balance( netlist_to_aig( fa ) ) );
    CHECK( v.status == EquivalenceStatus::EquivalentExhaustive );
    CHECK( v.vectors == 8 );
  }
  SUBCASE( "xor flipped to xnor" )
  {
    auto text = write_blif( fa );
    auto const broken = parse_blif(
        ".model fa\n.inputs a b cin\n.outputs s cout\n.names a b x1\n00 1\n11 1\n.names x1 cin s\n01 1\n10 1\n"
        ".names a b g1\n11 1\n.names x1 cin g2\n11 1\n.names g1 g2 cout\n1- 1\n-1 1\n.end\n" );
    auto const v = check_equivalence( fa, broken );
    REQUIRE( v.status == EquivalenceStatus::NotEquivalent );
    REQUIRE( v.counterexample.size() == 3 );
    // replay
    auto const oa = simulate_scalar( netlist_to_aig( fa ), v.counterexample );
    auto const ob = simulate_scalar( netlist_to_aig( broken ), v.counterexample );
    CHECK( oa != ob );
    CHECK( v.failing_output == "s" );
  }
  SUBCASE( "wide circuit is unfalsified" )
  {
    auto const aig = test::random_aig( 20, 100, 3, 99 );
    auto const v = check_equivalence( aig, aig );
    CHECK( v.status == EquivalenceStatus::Unfalsified );
    CHECK( v.vectors == 4096 );
    CHECK( v.seed == EquivalenceBudget{}.seed );
  }
  SUBCASE( "name mismatch" )
  {
    auto const other = parse_blif( ".model t\n.inputs a b c\n.outputs s q\n.names a b s\n11 1\n.names a c q\n11 1\n.end\n" );
    CHECK_THROWS_AS( check_equivalence( fa, other ), InterfaceError );
  }
}
