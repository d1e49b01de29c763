#pragma once

#include <netforge/context.hpp>
#include <netforge/netlist.hpp>

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace netforge
{

enum class Metric : std::uint8_t
{
  Similarity,
  TsScore,
  Accuracy,
  Kpa
};

std::string_view to_string( Metric m );
Metric metric_for( Context c );

struct OracleScore
{
  Context context = Context::Piracy;
  double value = 0.0;
  /// Output net name of a cell -> predicted label.
  std::map<std::string, std::string> per_node;
  Metric metric = Metric::Similarity;
};

/// Throws InterfaceError when `value` lies outside the metric's range
/// ([-1, 1] for similarity, [0, 1] otherwise) or is not finite.
void check_range( OracleScore const& score );

/// Per-cell Weisfeiler-Lehman labels for every depth 0..iterations; `layers[d][cell]`.
///
/// Depth 0 is the gate kind (plus type name for OTHER cells). Depth d hashes the
/// kind with the sorted depth d-1 labels of fanin drivers and fanout readers;
/// primary inputs and output ports appear as fixed pseudo-labels.
std::vector<std::vector<std::uint64_t>> wl_label_layers( Netlist const& netlist, unsigned iterations );
/// Single-threaded reference for wl_label_layers.
std::vector<std::vector<std::uint64_t>> wl_label_layers_serial( Netlist const& netlist, unsigned iterations );

struct WlSignature
{
  std::map<std::uint64_t, std::uint64_t> histogram;
};

WlSignature wl_signature( Netlist const& netlist, unsigned iterations = 2 );
double cosine( WlSignature const& a, WlSignature const& b );

inline constexpr double default_tau = 0.85;

/// cosine(candidate, original) - tau; positive means flagged as pirated.
OracleScore piracy_score( Netlist const& candidate, Netlist const& original, double tau = default_tau,
                          unsigned iterations = 2 );

/// Per-cell class labels; an empty string marks an unlabeled cell.
using NodeLabels = std::vector<std::string>;

/// Surrogate node classifier over WL labels.
///
/// Cells whose depth-h label was seen in training take the majority class of
/// that label. In Centroid mode the rest go to the nearest class centroid of
/// one-hot (depth, label) features; in Majority mode they back off to shallower
/// depths. Ties and unknown labels resolve to the lexicographically smallest class.
struct NodeModel
{
  enum class Mode : std::uint8_t
  {
    Centroid,
    Majority
  };

  Mode mode = Mode::Centroid;
  unsigned h = 2;
  /// Sorted class names.
  std::vector<std::string> classes;
  /// Per depth: label -> per-class counts.
  std::vector<std::map<std::uint64_t, std::vector<std::uint64_t>>> tables;
  /// Per class: total labeled cells.
  std::vector<std::uint64_t> class_sizes;

  std::vector<std::string> predict( Netlist const& netlist ) const;
  /// Prediction for selected cells only.
  std::vector<std::string> predict( Netlist const& netlist, std::vector<CellId> const& cells ) const;

  nlohmann::json to_json() const;
  static NodeModel from_json( nlohmann::json const& j );

  bool operator==( NodeModel const& ) const = default;
};

/// Throws Error on an empty dataset or when no cell is labeled.
NodeModel train_node_oracle( std::vector<std::pair<Netlist, NodeLabels>> const& dataset, unsigned h = 2,
                             NodeModel::Mode mode = NodeModel::Mode::Centroid );

inline constexpr std::string_view label_ht = "HT";
inline constexpr std::string_view label_free = "FREE";

/// (TPR + TNR) / 2 with HT as the positive class. A class absent from the truth
/// counts as fully recalled. Unlabeled truth entries are ignored.
OracleScore trojan_loc_score( Netlist const& netlist, NodeLabels const& truth, NodeModel const& model );

inline constexpr std::array<std::string_view, 5> re_classes = { "ADD", "SUB", "CMP", "MUL", "CTRL" };

/// Fraction of labeled cells whose predicted class matches.
OracleScore re_accuracy( Netlist const& netlist, NodeLabels const& truth, NodeModel const& model );

struct KeyGate
{
  CellId cell;
  bool bit;
};

/// Cells reading each key input, in key order; the first reader is the key gate.
/// Throws Error when a key input has no reader.
std::vector<CellId> locate_key_gates( Netlist const& netlist, std::vector<std::string> const& key_inputs );

NodeModel train_key_oracle( std::vector<std::pair<Netlist, std::vector<KeyGate>>> const& dataset, unsigned h = 2 );

/// Fraction of key bits predicted correctly. Throws Error for an empty key or
/// an out-of-range cell id.
OracleScore key_prediction_accuracy( Netlist const& obf, std::vector<KeyGate> const& key_gates,
                                     NodeModel const& model );

} // namespace netforge
