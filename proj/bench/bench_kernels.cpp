// Serial reference vs OpenMP kernels. Set OMP_NUM_THREADS to vary the team size.

#include <netforge/corpus.hpp>
#include <netforge/env.hpp>
#include <netforge/generators.hpp>
#include <netforge/oracles.hpp>
#include <netforge/ppo.hpp>
#include <netforge/simulate.hpp>
#include <netforge/techmap.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace netforge;

namespace
{

Aig const& big_aig()
{
  static Aig const a = random_aig( 32, 20000, 16, 7 );
  return a;
}

PatternWords const& patterns()
{
  static PatternWords const p = [] {
    std::mt19937_64 rng( 3 );
    PatternWords w( big_aig().num_cis(), std::vector<std::uint64_t>( 256 ) );
    for ( auto& row : w )
      for ( auto& x : row )
        x = rng();
    return w;
  }();
  return p;
}

Netlist const& big_netlist()
{
  static Netlist const n = map( big_aig(), library_for_action( ActionId::A1 ) );
  return n;
}

void BM_SimulateSerial( benchmark::State& state )
{
  for ( auto _ : state )
    benchmark::DoNotOptimize( simulate_words_serial( big_aig(), patterns() ) );
}

void BM_SimulateParallel( benchmark::State& state )
{
  for ( auto _ : state )
    benchmark::DoNotOptimize( simulate_words( big_aig(), patterns() ) );
}

void BM_WlLayersSerial( benchmark::State& state )
{
  for ( auto _ : state )
    benchmark::DoNotOptimize( wl_label_layers_serial( big_netlist(), 3 ) );
}

void BM_WlLayersParallel( benchmark::State& state )
{
  for ( auto _ : state )
    benchmark::DoNotOptimize( wl_label_layers( big_netlist(), 3 ) );
}

// Environment steps spread over `workers` environments.
void BM_Rollout( benchmark::State& state )
{
  static DeskSetup const desk = desk_setup();
  auto const workers = static_cast<std::size_t>( state.range( 0 ) );
  auto oracle = std::make_shared<BuiltinOracle>( desk.models );
  std::mt19937_64 prng( 1 );
  auto const params = make_policy( prng );
  for ( auto _ : state )
  {
    state.PauseTiming();
    std::vector<CircuitEnv> envs;
    for ( std::size_t w = 0; w < workers; ++w )
      envs.emplace_back( desk.pools, oracle, EnvOptions{}, w );
    std::mt19937_64 rng( 2 );
    state.ResumeTiming();
    benchmark::DoNotOptimize( rollout( params, envs, 64, rng ) );
  }
}

} // namespace

BENCHMARK( BM_SimulateSerial )->Unit( benchmark::kMillisecond );
BENCHMARK( BM_SimulateParallel )->Unit( benchmark::kMillisecond );
BENCHMARK( BM_WlLayersSerial )->Unit( benchmark::kMillisecond );
BENCHMARK( BM_WlLayersParallel )->Unit( benchmark::kMillisecond );
BENCHMARK( BM_Rollout )->Arg( 1 )->Arg( 4 )->Unit( benchmark::kMillisecond );

BENCHMARK_MAIN();
