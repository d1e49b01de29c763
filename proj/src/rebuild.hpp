#pragma once

#include <netforge/aig.hpp>

#include <vector>

namespace netforge::detail
{

/// Copies an AIG node by node into a fresh one; transforms override single nodes.
class Rebuild
{
public:
  explicit Rebuild( Aig const& src ) : src_( src ), map_( src.size() ), set_( src.size(), false )
  {
    for ( std::size_t i = 0; i < src.num_pis(); ++i )
      assign( src.cis()[i], dst_.create_pi( src.ci_name( i ) ) );
    for ( std::size_t l = 0; l < src.num_latches(); ++l )
      assign( src.cis()[src.num_pis() + l], dst_.create_latch( src.ci_name( src.num_pis() + l ), src.latch_tag( l ) ) );
    set_[0] = true;
  }

  Aig const& src() const noexcept { return src_; }
  Aig& dst() noexcept { return dst_; }
  Lit image( Lit l ) const { return map_[l.node()] ^ l.complemented(); }
  Lit image( std::uint32_t node ) const { return map_[node]; }

  void assign( std::uint32_t node, Lit l )
  {
    map_[node] = l;
    set_[node] = true;
  }

  void copy( std::uint32_t node )
  {
    auto const& n = src_.node( node );
    dst_.set_current_tag( n.tag );
    assign( node, dst_.create_and( image( n.fanin0 ), image( n.fanin1 ) ) );
  }

  Aig finish()
  {
    for ( std::uint32_t i = 1; i < src_.size(); ++i )
    {
      if ( !set_[i] )
        continue;
      dst_.add_hint( map_[i], src_.hint( Lit::make( i ) ) );
      dst_.add_hint( !map_[i], src_.hint( Lit::make( i, true ) ) );
    }
    dst_.set_current_tag( -1 );
    for ( std::size_t o = 0; o < src_.num_pos(); ++o )
      dst_.create_po( image( src_.cos()[o] ), src_.co_name( o ) );
    for ( std::size_t l = 0; l < src_.num_latches(); ++l )
      dst_.set_latch_next( l, image( src_.cos()[src_.num_pos() + l] ) );
    return dst_.cleanup();
  }

private:
  Aig const& src_;
  Aig dst_;
  std::vector<Lit> map_;
  std::vector<bool> set_;
};

} // namespace netforge::detail
