#include <netforge/gate.hpp>

#include <array>

namespace netforge
{

namespace
{
constexpr std::array<std::string_view, num_gate_kinds> kind_names = {
    "AND", "OR", "NAND", "NOR", "XOR", "XNOR", "INV", "BUF", "CONST0", "CONST1", "DFF", "OTHER" };
}

std::string_view to_string( GateKind kind )
{
  return kind_names[static_cast<std::size_t>( kind )];
}

std::optional<GateKind> gate_kind_from_string( std::string_view name )
{
  for ( std::size_t i = 0; i < kind_names.size(); ++i )
  {
    if ( kind_names[i] == name )
      return static_cast<GateKind>( i );
  }
  return std::nullopt;
}

bool arity_ok( GateKind kind, std::size_t fan_in )
{
  switch ( kind )
  {
  case GateKind::Inv:
  case GateKind::Buf:
  case GateKind::Dff:
    return fan_in == 1;
  case GateKind::Xor:
  case GateKind::Xnor:
    return fan_in == 2;
  case GateKind::And:
  case GateKind::Or:
  case GateKind::Nand:
  case GateKind::Nor:
    return fan_in >= 2;
  case GateKind::Const0:
  case GateKind::Const1:
    return fan_in == 0;
  case GateKind::Other:
    return true;
  }
  return false;
}

std::uint64_t evaluate_gate( GateKind kind, std::uint64_t const* inputs, std::size_t fan_in )
{
  switch ( kind )
  {
  case GateKind::And:
  case GateKind::Nand:
  {
    std::uint64_t v = ~std::uint64_t{ 0 };
    for ( std::size_t i = 0; i < fan_in; ++i )
      v &= inputs[i];
    return kind == GateKind::And ? v : ~v;
  }
  case GateKind::Or:
  case GateKind::Nor:
  {
    std::uint64_t v = 0;
    for ( std::size_t i = 0; i < fan_in; ++i )
      v |= inputs[i];
    return kind == GateKind::Or ? v : ~v;
  }
  case GateKind::Xor:
    return inputs[0] ^ inputs[1];
  case GateKind::Xnor:
    return ~( inputs[0] ^ inputs[1] );
  case GateKind::Inv:
    return ~inputs[0];
  case GateKind::Buf:
    return inputs[0];
  case GateKind::Const0:
    return 0;
  case GateKind::Const1:
    return ~std::uint64_t{ 0 };
  case GateKind::Dff:
  case GateKind::Other:
    break;
  }
  return 0;
}

} // namespace netforge
