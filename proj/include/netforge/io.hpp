#pragma once

#include <netforge/netlist.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace netforge
{

/// Parses the BLIF subset `.model .inputs .outputs .names .latch .subckt .blackbox .end`.
///
/// The first model is the circuit; later models define OTHER cell types used
/// through `.subckt`. A `.names` table becomes a single gate when its function
/// is one gate kind, possibly with inverted inputs (an INV is inserted per
/// inverted net); anything else becomes an OTHER cell with a registered function.
/// Throws ParseError on malformed text and DesignRuleError on an invalid circuit.
Netlist parse_blif( std::string_view text );

/// Canonical BLIF text. OTHER cells are written as `.subckt` references followed
/// by one model per cell type (a `.names` body, or `.blackbox` when unknown).
std::string write_blif( Netlist const& netlist );

/// Parses a structural Verilog module made of primitive gates
/// (and/or/nand/nor/xor/xnor/not/buf) and `dff` instances.
///
/// Flip-flops use the ISCAS'89 positional order `dff name(CK, Q, D);` or named
/// pins `.CK() .Q() .D()` (`.CLK`/`.C` also accepted for the clock).
/// Throws ParseError for unsupported constructs, undeclared wires and arity mismatches.
Netlist parse_structural_verilog( std::string_view text );

std::string read_text_file( std::filesystem::path const& path );
void write_text_file( std::filesystem::path const& path, std::string_view text );

/// Dispatches on extension: `.v` is structural Verilog, everything else BLIF.
Netlist read_netlist_file( std::filesystem::path const& path );

} // namespace netforge
