#include "helpers.hpp"

#include <doctest.h>

#include <netforge/features.hpp>
#include <netforge/io.hpp>
#include <netforge/techmap.hpp>

#include <random>

using namespace netforge;

TEST_CASE( "feature extraction" )
{
  CHECK( extract_features( test::full_adder() ) == FeatureVector{ 3, 2, 5, 8, 2, 1, 0, 0, 0, 0, 2, 0, 0 } );

  auto const c17 = extract_features( test::c17() );
  CHECK( c17[2] == 6 );
  CHECK( c17[6] == 6 );
  CHECK( c17[0] == 5 );
  CHECK( c17[1] == 2 );

  auto const pass = parse_blif( ".model p\n.inputs a\n.outputs y\n.names a y\n1 1\n.end\n" );
  CHECK( extract_features( pass ) == FeatureVector{ 1, 1, 1, 2, 0, 0, 0, 0, 0, 1, 0, 0, 0 } );

  auto const seq = parse_blif( ".model s\n.inputs a\n.outputs y\n.latch d y 0\n.names a y d\n11 1\n.end\n" );
  auto const f = extract_features( seq );
  CHECK( f[0] == 1 );
  CHECK( f[1] == 1 );
  CHECK( f[4] == 1 );
  CHECK( f[12] == 1 );

  SUBCASE( "wide gates count with their family" )
  {
    auto const w = parse_blif( ".model w\n.inputs a b c d\n.outputs y\n.names a b c d y\n0000 1\n.end\n" );
    auto const v = extract_features( w );
    CHECK( v[7] == 1 );
    CHECK( v[2] == 1 );
  }
  SUBCASE( "gate total" )
  {
    for ( auto const& n : { test::full_adder(), test::c17(), apply_action( test::c17(), ActionId::A6 ) } )
    {
      auto const v = extract_features( n );
      std::uint64_t sum = 0;
      for ( std::size_t i = 4; i < num_features; ++i )
        sum += v[i];
      CHECK( sum == v[2] );
    }
  }
  SUBCASE( "noop keeps the state" )
  {
    CHECK( extract_features( apply_action( test::c17(), ActionId::Noop ) ) == c17 );
  }
}

TEST_CASE( "observation" )
{
  auto const ref = extract_features( test::full_adder() );
  auto const obs = make_observation( ref, ref, Context::Piracy );
  CHECK( obs.size() == 17 );
  CHECK( obs[0] == 1.0f );
  CHECK( obs[1] == 0.0f );
  CHECK( obs[2] == 0.0f );
  CHECK( obs[3] == 0.0f );
  CHECK( obs[4 + 2] == doctest::Approx( 1.0 ) );
  for ( std::size_t i = 4; i < obs.size(); ++i )
  {
    CHECK( std::isfinite( obs[i] ) );
    CHECK( obs[i] >= 0.0f );
    CHECK( obs[i] <= 4.0f );
  }
  CHECK( obs[4 + 5] == doctest::Approx( std::log1p( 1.0 ) / std::log1p( 5.0 ) ) );
  CHECK( obs[4 + 6] == 0.0f );

  CHECK( make_observation( ref, ref, Context::Obfuscation )[3] == 1.0f );

  SUBCASE( "monotone and bounded" )
  {
    std::mt19937_64 rng( 7 );
    for ( int trial = 0; trial < 200; ++trial )
    {
      FeatureVector f{}, r{};
      for ( auto& x : f )
        x = rng() % 1000;
      r[2] = 1 + rng() % 50;
      auto doubled = f;
      for ( auto& x : doubled )
        x *= 2;
      auto const a = make_observation( f, r, Context::TrojanLoc );
      auto const b = make_observation( doubled, r, Context::TrojanLoc );
      for ( std::size_t i = 4; i < a.size(); ++i )
      {
        CHECK( a[i] <= 4.0f );
        if ( f[i - 4] > 0 && a[i] < 4.0f )
          CHECK( b[i] > a[i] );
      }
    }
  }
}

TEST_CASE( "feature csv" )
{
  CHECK( features_csv_header() == "inputs,outputs,gates,wires,and,or,nand,nor,inv,buf,xor,xnor,other" );
  CHECK( features_csv_row( extract_features( test::full_adder() ) ) == "3,2,5,8,2,1,0,0,0,0,2,0,0" );
}

TEST_CASE( "context names" )
{
  for ( auto const c : all_contexts )
    CHECK( context_from_string( to_string( c ) ) == c );
  CHECK_FALSE( context_from_string( "bogus" ).has_value() );
}
