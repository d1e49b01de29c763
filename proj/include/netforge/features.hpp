#pragma once

#include <netforge/context.hpp>
#include <netforge/netlist.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace netforge
{

inline constexpr std::size_t num_features = 13;
inline constexpr std::size_t observation_size = num_contexts + num_features;

/// [#inputs, #outputs, #gates, #wires, #AND, #OR, #NAND, #NOR, #INV, #BUF, #XOR, #XNOR, #other]
using FeatureVector = std::array<std::uint64_t, num_features>;
using Observation = std::array<float, observation_size>;

inline constexpr std::array<std::string_view, num_features> feature_names = {
    "inputs", "outputs", "gates", "wires", "and", "or", "nand", "nor", "inv", "buf", "xor", "xnor", "other" };

/// Wide gates count with their 2-input family; DFF, constants and OTHER go to #other.
/// #wires is the number of distinct nets.
FeatureVector extract_features( Netlist const& netlist );

/// Context bits followed by log1p(count) / log1p(reference #gates), clamped to [0, 4].
Observation make_observation( FeatureVector const& features, FeatureVector const& reference, Context context );

std::string features_csv_header();
std::string features_csv_row( FeatureVector const& features );

} // namespace netforge
