#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <string>

namespace netforge
{

/// Complete truth table over at most 8 variables (256 bits).
///
/// Bit `m` holds the function value on minterm `m`, where variable `i`
/// takes the value of bit `i` of `m`. Bits above 2^num_vars are kept zero.
class TruthTable
{
public:
  static constexpr std::uint32_t max_vars = 8;

  TruthTable() = default;
  explicit TruthTable( std::uint32_t num_vars );

  static TruthTable constant( std::uint32_t num_vars, bool value );
  static TruthTable nth_var( std::uint32_t num_vars, std::uint32_t var );
  /// Parse a hex string, most significant nibble first (kitty/ABC convention).
  static TruthTable from_hex( std::uint32_t num_vars, std::string const& hex );

  std::uint32_t num_vars() const noexcept { return num_vars_; }
  std::uint32_t num_bits() const noexcept { return 1u << num_vars_; }

  bool get_bit( std::uint32_t minterm ) const noexcept
  {
    return ( words_[minterm >> 6] >> ( minterm & 63 ) ) & 1u;
  }
  void set_bit( std::uint32_t minterm, bool value = true ) noexcept
  {
    auto const mask = std::uint64_t{ 1 } << ( minterm & 63 );
    if ( value )
      words_[minterm >> 6] |= mask;
    else
      words_[minterm >> 6] &= ~mask;
  }

  bool is_const0() const noexcept;
  bool is_const1() const noexcept;
  std::uint32_t count_ones() const noexcept;
  bool depends_on( std::uint32_t var ) const noexcept;

  /// Cofactor with respect to `var` = value; the result keeps the same variable count.
  TruthTable cofactor( std::uint32_t var, bool value ) const;

  std::string to_hex() const;

  TruthTable operator~() const;
  TruthTable operator&( TruthTable const& other ) const;
  TruthTable operator|( TruthTable const& other ) const;
  TruthTable operator^( TruthTable const& other ) const;
  bool operator==( TruthTable const& other ) const = default;

  /// `*this` implies `other` (every one of this is a one of other).
  bool implies( TruthTable const& other ) const noexcept;

  std::array<std::uint64_t, 4> const& words() const noexcept { return words_; }

private:
  void mask_unused() noexcept;

  std::uint32_t num_vars_ = 0;
  std::array<std::uint64_t, 4> words_{};
};

} // namespace netforge
