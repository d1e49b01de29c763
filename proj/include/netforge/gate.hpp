#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace netforge
{

enum class GateKind : std::uint8_t
{
  And,
  Or,
  Nand,
  Nor,
  Xor,
  Xnor,
  Inv,
  Buf,
  Const0,
  Const1,
  Dff,
  Other
};

inline constexpr std::size_t num_gate_kinds = 12;

/// A gate kind together with its input count, e.g. NAND3.
struct GateType
{
  GateKind kind;
  std::uint32_t fan_in;

  bool operator==( GateType const& ) const = default;
};

std::string_view to_string( GateKind kind );
std::optional<GateKind> gate_kind_from_string( std::string_view name );

/// Arity rule: INV/BUF/DFF take one input, XOR/XNOR two, AND/OR/NAND/NOR two or more,
/// constants none. OTHER cells accept any arity.
bool arity_ok( GateKind kind, std::size_t fan_in );

/// Evaluate a (non-DFF, non-OTHER) gate over 64 packed patterns.
std::uint64_t evaluate_gate( GateKind kind, std::uint64_t const* inputs, std::size_t fan_in );

/// True for the kinds that compute a Boolean function of their inputs
/// (excludes constants, DFF and OTHER).
constexpr bool is_logic_gate( GateKind kind )
{
  return kind != GateKind::Const0 && kind != GateKind::Const1 && kind != GateKind::Dff && kind != GateKind::Other;
}

} // namespace netforge
