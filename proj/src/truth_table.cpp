#include <netforge/truth_table.hpp>

#include <netforge/error.hpp>

#include <algorithm>

namespace netforge
{

namespace
{
constexpr std::array<std::uint64_t, 6> var_masks = {
    0xaaaaaaaaaaaaaaaaull, 0xccccccccccccccccull, 0xf0f0f0f0f0f0f0f0ull,
    0xff00ff00ff00ff00ull, 0xffff0000ffff0000ull, 0xffffffff00000000ull };

std::uint32_t num_words( std::uint32_t num_vars )
{
  return num_vars <= 6 ? 1u : 1u << ( num_vars - 6 );
}
} // namespace

TruthTable::TruthTable( std::uint32_t num_vars ) : num_vars_( num_vars )
{
  if ( num_vars > max_vars )
    throw Error( "truth table supports at most 8 variables, got " + std::to_string( num_vars ) );
}

TruthTable TruthTable::constant( std::uint32_t num_vars, bool value )
{
  TruthTable tt( num_vars );
  if ( value )
  {
    tt.words_.fill( ~std::uint64_t{ 0 } );
    tt.mask_unused();
  }
  return tt;
}

TruthTable TruthTable::nth_var( std::uint32_t num_vars, std::uint32_t var )
{
  TruthTable tt( num_vars );
  if ( var >= num_vars )
    throw Error( "variable index out of range" );
  if ( var < 6 )
  {
    tt.words_.fill( var_masks[var] );
  }
  else
  {
    for ( std::uint32_t w = 0; w < 4; ++w )
      tt.words_[w] = ( ( w >> ( var - 6 ) ) & 1u ) ? ~std::uint64_t{ 0 } : 0;
  }
  tt.mask_unused();
  return tt;
}

TruthTable TruthTable::from_hex( std::uint32_t num_vars, std::string const& hex )
{
  TruthTable tt( num_vars );
  auto const nibbles = std::max<std::uint32_t>( 1u, tt.num_bits() / 4 );
  if ( hex.size() != nibbles )
    throw Error( "hex truth table has wrong length" );
  for ( std::uint32_t i = 0; i < nibbles; ++i )
  {
    char const c = hex[nibbles - 1 - i];
    std::uint32_t v;
    if ( c >= '0' && c <= '9' )
      v = c - '0';
    else if ( c >= 'a' && c <= 'f' )
      v = c - 'a' + 10;
    else if ( c >= 'A' && c <= 'F' )
      v = c - 'A' + 10;
    else
      throw Error( "bad hex digit in truth table" );
    for ( std::uint32_t b = 0; b < 4 && 4 * i + b < tt.num_bits(); ++b )
      tt.set_bit( 4 * i + b, ( v >> b ) & 1u );
  }
  return tt;
}

void TruthTable::mask_unused() noexcept
{
  auto const words = num_words( num_vars_ );
  if ( num_vars_ < 6 )
    words_[0] &= ( std::uint64_t{ 1 } << ( 1u << num_vars_ ) ) - 1;
  for ( auto w = words; w < 4; ++w )
    words_[w] = 0;
}

bool TruthTable::is_const0() const noexcept
{
  return ( words_[0] | words_[1] | words_[2] | words_[3] ) == 0;
}

bool TruthTable::is_const1() const noexcept
{
  return *this == constant( num_vars_, true );
}

std::uint32_t TruthTable::count_ones() const noexcept
{
  std::uint32_t n = 0;
  for ( auto w : words_ )
    n += std::popcount( w );
  return n;
}

bool TruthTable::depends_on( std::uint32_t var ) const noexcept
{
  return cofactor( var, false ) != cofactor( var, true );
}

TruthTable TruthTable::cofactor( std::uint32_t var, bool value ) const
{
  TruthTable r( num_vars_ );
  if ( var < 6 )
  {
    auto const shift = 1u << var;
    auto const mask = var_masks[var];
    for ( std::uint32_t w = 0; w < 4; ++w )
    {
      auto const x = words_[w];
      r.words_[w] = value ? ( ( x & mask ) | ( ( x & mask ) >> shift ) ) : ( ( x & ~mask ) | ( ( x & ~mask ) << shift ) );
    }
  }
  else
  {
    auto const step = 1u << ( var - 6 );
    for ( std::uint32_t w = 0; w < 4; ++w )
    {
      auto const src = value ? ( w | step ) : ( w & ~step );
      r.words_[w] = words_[src];
    }
  }
  r.mask_unused();
  return r;
}

std::string TruthTable::to_hex() const
{
  static constexpr char digits[] = "0123456789abcdef";
  auto const nibbles = std::max<std::uint32_t>( 1u, num_bits() / 4 );
  std::string s( nibbles, '0' );
  for ( std::uint32_t i = 0; i < nibbles; ++i )
  {
    std::uint32_t v = 0;
    for ( std::uint32_t b = 0; b < 4 && 4 * i + b < num_bits(); ++b )
      v |= static_cast<std::uint32_t>( get_bit( 4 * i + b ) ) << b;
    s[nibbles - 1 - i] = digits[v];
  }
  return s;
}

TruthTable TruthTable::operator~() const
{
  TruthTable r = *this;
  for ( auto& w : r.words_ )
    w = ~w;
  r.mask_unused();
  return r;
}

TruthTable TruthTable::operator&( TruthTable const& other ) const
{
  TruthTable r = *this;
  for ( std::size_t i = 0; i < 4; ++i )
    r.words_[i] &= other.words_[i];
  return r;
}

TruthTable TruthTable::operator|( TruthTable const& other ) const
{
  TruthTable r = *this;
  for ( std::size_t i = 0; i < 4; ++i )
    r.words_[i] |= other.words_[i];
  return r;
}

TruthTable TruthTable::operator^( TruthTable const& other ) const
{
  TruthTable r = *this;
  for ( std::size_t i = 0; i < 4; ++i )
    r.words_[i] ^= other.words_[i];
  return r;
}

bool TruthTable::implies( TruthTable const& other ) const noexcept
{
  for ( std::size_t i = 0; i < 4; ++i )
  {
    if ( words_[i] & ~other.words_[i] )
      return false;
  }
  return true;
}

} // namespace netforge
