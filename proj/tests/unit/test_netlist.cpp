#include "helpers.hpp"

#include <netforge/error.hpp>

#include <doctest.h>

using namespace netforge;

TEST_CASE( "blif and table becomes AND2" )
{
  auto const n = parse_blif( ".model t\n.inputs a b\n.outputs y\n.names a b y\n11 1\n.end\n" );
  REQUIRE( n.num_cells() == 1 );
  CHECK( n.cell( 0 ).kind == GateKind::And );
  CHECK( n.cell( 0 ).inputs.size() == 2 );
  CHECK( n.inputs().size() == 2 );
  CHECK( n.outputs().size() == 1 );
}

TEST_CASE( "blif recognizes gate tables" )
{
  auto kind_of = []( std::string const& body ) {
    auto const n = parse_blif( ".model t\n.inputs a b\n.outputs y\n.names a b y\n" + body + ".end\n" );
    return n.cell( n.num_cells() - 1 ).kind;
  };
  CHECK( kind_of( "1- 1\n-1 1\n" ) == GateKind::Or );
  CHECK( kind_of( "0- 1\n-0 1\n" ) == GateKind::Nand );
  CHECK( kind_of( "00 1\n" ) == GateKind::Nor );
  CHECK( kind_of( "01 1\n10 1\n" ) == GateKind::Xor );
  CHECK( kind_of( "01 0\n10 0\n" ) == GateKind::Xnor );
  CHECK( kind_of( "11 0\n" ) == GateKind::Nand );
}

TEST_CASE( "blif single-minterm table inserts inverters" )
{
  auto const n = parse_blif( ".model t\n.inputs a b\n.outputs y\n.names a b y\n10 1\n.end\n" );
  REQUIRE( n.num_cells() == 2 );
  CHECK( n.cell( 0 ).kind == GateKind::Inv );
  CHECK( n.cell( 1 ).kind == GateKind::And );
}

TEST_CASE( "blif unrecognized function becomes OTHER" )
{
  auto const n = parse_blif( ".model t\n.inputs a b c\n.outputs y\n.names a b c y\n11- 1\n--1 1\n.end\n" );
  REQUIRE( n.num_cells() == 1 );
  CHECK( n.cell( 0 ).kind == GateKind::Other );
  CHECK( n.cell_functions().contains( n.cell( 0 ).type_name ) );
}

TEST_CASE( "blif errors" )
{
  CHECK_THROWS_AS( parse_blif( ".model t\n.inputs a b\n.outputs y\n.names a y\n1 1\n.names b y\n1 1\n.end\n" ),
                   DesignRuleError );
  CHECK_THROWS_AS( parse_blif( ".model t\n.inputs a\n.outputs y\n.names a q y\n11 1\n.end\n" ), DesignRuleError );
  CHECK_THROWS_AS( parse_blif( ".model t\n.inputs a\n.outputs y\n.names a y z\n11 1\n.names y z\n1 1\n.end\n" ),
                   DesignRuleError );
  try
  {
    parse_blif( ".model t\n.inputs a\n.outputs y\n.names a y\n1x 1\n.end\n" );
    FAIL( "expected a parse error" );
  }
  catch ( ParseError const& e )
  {
    CHECK( e.line() == 5 );
  }
  CHECK_THROWS_AS( parse_blif( ".model t\n.gate foo\n.end\n" ), ParseError );
}

TEST_CASE( "blif continuation and comments" )
{
  auto const n = parse_blif( "# c\n.model t\n.inputs a \\\n b\n.outputs y # out\n.names a b y\n11 1\n.end\n" );
  CHECK( n.inputs().size() == 2 );
}

TEST_CASE( "full adder" )
{
  auto const n = test::full_adder();
  CHECK( n.num_cells() == 5 );
  CHECK( n.num_nets() == 8 );
  CHECK( validate( n ).empty() );
}

TEST_CASE( "blif latch becomes DFF" )
{
  auto const n = parse_blif( ".model t\n.inputs a\n.outputs q\n.latch d q re clk 0\n.names a q d\n11 1\n.end\n" );
  REQUIRE( n.num_cells() == 2 );
  CHECK( n.cell( 0 ).kind == GateKind::Dff );
  CHECK( validate( n ).empty() );
}

TEST_CASE( "blif round trip" )
{
  for ( auto const& n : { test::full_adder(), test::c17() } )
  {
    auto const back = parse_blif( write_blif( n ) );
    CHECK( test::structure( back ) == test::structure( n ) );
    CHECK( test::cell_multiset( back ) == test::cell_multiset( n ) );
  }
}

TEST_CASE( "blif round trip with OTHER cell" )
{
  Netlist n( "o" );
  auto const a = n.add_input( "a" );
  auto const b = n.add_input( "b" );
  auto const c = n.add_input( "c" );
  auto const y = n.add_net( "y" );
  auto const maj = TruthTable::from_hex( 3, "e8" );
  n.register_function( "MAJ3", maj );
  n.add_cell( GateKind::Other, { a, b, c }, y, -1, "MAJ3" );
  n.add_output( y );
  auto const text = write_blif( n );
  CHECK( text.find( ".subckt MAJ3" ) != std::string::npos );
  auto const back = parse_blif( text );
  REQUIRE( back.num_cells() == 1 );
  CHECK( back.cell( 0 ).type_name == "MAJ3" );
  CHECK( back.cell_functions().at( "MAJ3" ) == maj );
  CHECK( test::structure( back ) == test::structure( n ) );
}

TEST_CASE( "blackbox subcircuit round trips" )
{
  Netlist n( "bb" );
  auto const a = n.add_input( "a" );
  auto const y = n.add_net( "y" );
  n.add_cell( GateKind::Other, { a }, y, -1, "MYSTERY" );
  n.add_output( y );
  auto const back = parse_blif( write_blif( n ) );
  CHECK( back.cell( 0 ).type_name == "MYSTERY" );
  CHECK_FALSE( back.cell_functions().contains( "MYSTERY" ) );
}

TEST_CASE( "passthrough writes a buffer" )
{
  Netlist n( "wire" );
  auto const a = n.add_input( "a" );
  n.add_output( a, "y" );
  auto const text = write_blif( n );
  auto const back = parse_blif( text );
  REQUIRE( back.num_cells() == 1 );
  CHECK( back.cell( 0 ).kind == GateKind::Buf );
}

TEST_CASE( "verilog primitives" )
{
  auto const n = parse_structural_verilog( "module m(a,b,y); input a,b; output y; nand g1(y, a, b); endmodule" );
  REQUIRE( n.num_cells() == 1 );
  CHECK( n.cell( 0 ).kind == GateKind::Nand );
  CHECK( n.cell( 0 ).inputs.size() == 2 );
}

TEST_CASE( "verilog c17" )
{
  auto const n = test::c17();
  CHECK( n.num_cells() == 6 );
  CHECK( n.inputs().size() == 5 );
  CHECK( n.outputs().size() == 2 );
  for ( auto const& c : n.cells() )
    CHECK( c.kind == GateKind::Nand );
  CHECK( n.net_name( n.cell( 0 ).output ) == "N10" );
  CHECK( n.net_name( n.cell( 5 ).output ) == "N23" );
}

TEST_CASE( "verilog errors" )
{
  auto message = []( std::string const& text ) -> std::string {
    try
    {
      parse_structural_verilog( text );
    }
    catch ( ParseError const& e )
    {
      return e.what();
    }
    return "";
  };
  CHECK( message( "module m(a,b,y); input a,b; output y; assign y = a & b; endmodule" ).find( "assign" ) !=
         std::string::npos );
  CHECK( message( "module m(a,y); input a; output y; and g(y, a, q); endmodule" ).find( "undeclared" ) !=
         std::string::npos );
  CHECK( message( "module m(a,b,c,y); input a,b,c; output y; xor g(y, a, b, c); endmodule" ).find( "arity" ) !=
         std::string::npos );
  CHECK( message( "module m(a,y); input a; output y; foo g(y, a); endmodule" ).find( "foo" ) != std::string::npos );
}

TEST_CASE( "verilog dff pin styles" )
{
  auto const pos = parse_structural_verilog(
      "module s(clk,a,q); input clk,a; output q; wire d; dff r(clk, q, d); and g(d, a, q); endmodule" );
  CHECK( pos.cell( 0 ).kind == GateKind::Dff );
  CHECK( pos.net_name( pos.cell( 0 ).inputs[0] ) == "d" );
  auto const named = parse_structural_verilog(
      "module s(clk,a,q); input clk,a; output q; wire d; dff r(.D(d), .CK(clk), .Q(q)); and g(d, a, q); endmodule" );
  CHECK( named.net_name( named.cell( 0 ).output ) == "q" );
}

TEST_CASE( "validate" )
{
  SUBCASE( "multi-driver" )
  {
    auto n = test::full_adder();
    // second driver on an internal gate input, as in an illegal perturbation
    auto const x1 = *n.find_net( "x1" );
    n.add_cell( GateKind::And, { n.inputs()[0], n.inputs()[2] }, x1 );
    auto const d = validate( n );
    REQUIRE( d.size() == 1 );
    CHECK( d[0].rule == Rule::MultiDriver );
    CHECK( d[0].ids == std::vector<std::uint32_t>{ x1 } );
  }
  SUBCASE( "valid" ) { CHECK( validate( test::full_adder() ).empty() ); }
  SUBCASE( "self loop" )
  {
    Netlist n( "loop" );
    auto const a = n.add_input( "a" );
    auto const y = n.add_net( "y" );
    n.add_cell( GateKind::And, { a, y }, y );
    n.add_output( y );
    auto const d = validate( n );
    REQUIRE( d.size() == 1 );
    CHECK( d[0].rule == Rule::Cycle );
  }
  SUBCASE( "undriven" )
  {
    Netlist n( "u" );
    auto const a = n.add_input( "a" );
    auto const q = n.add_net( "q" );
    auto const y = n.add_net( "y" );
    n.add_cell( GateKind::And, { a, q }, y );
    n.add_output( y );
    auto const d = validate( n );
    REQUIRE( d.size() == 1 );
    CHECK( d[0].rule == Rule::Undriven );
  }
  SUBCASE( "arity" )
  {
    Netlist n( "ar" );
    auto const a = n.add_input( "a" );
    auto const y = n.add_net( "y" );
    n.add_cell( GateKind::Xor, { a }, y );
    n.add_output( y );
    CHECK( validate( n ).at( 0 ).rule == Rule::Arity );
  }
  SUBCASE( "cycle through a DFF is fine" )
  {
    Netlist n( "seq" );
    auto const a = n.add_input( "a" );
    auto const q = n.add_net( "q" );
    auto const d = n.add_net( "d" );
    n.add_cell( GateKind::Dff, { d }, q );
    n.add_cell( GateKind::Xor, { a, q }, d );
    n.add_output( q );
    CHECK( validate( n ).empty() );
  }
}
