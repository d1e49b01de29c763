#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace netforge
{

/// Attack goal; the one-hot encoding is 1000, 0100, 0010, 0001 in this order.
enum class Context : std::uint8_t
{
  Piracy,
  TrojanLoc,
  ReverseEng,
  Obfuscation
};

inline constexpr std::size_t num_contexts = 4;
inline constexpr std::array<Context, num_contexts> all_contexts = { Context::Piracy, Context::TrojanLoc,
                                                                    Context::ReverseEng, Context::Obfuscation };

inline std::size_t index_of( Context c ) { return static_cast<std::size_t>( c ); }

/// Wire names: "piracy", "trojan_loc", "reverse_eng", "obfuscation".
std::string_view to_string( Context c );
std::optional<Context> context_from_string( std::string_view name );

inline std::array<float, num_contexts> one_hot( Context c )
{
  std::array<float, num_contexts> bits{};
  bits[index_of( c )] = 1.0f;
  return bits;
}

} // namespace netforge
