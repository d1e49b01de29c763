#pragma once

#include <netforge/context.hpp>
#include <netforge/oracles.hpp>

#include <json.hpp>

#include <chrono>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace netforge
{

/// One classifier query. `truth` maps cell output nets to labels; `key_gates`
/// is a list of {"net": name, "bit": 0|1}.
struct OracleRequest
{
  Context context = Context::Piracy;
  std::string circuit_blif;
  std::optional<std::string> reference_blif;
  std::optional<nlohmann::json> truth;
  std::optional<nlohmann::json> key_gates;
};

nlohmann::json encode_request( std::uint64_t id, OracleRequest const& request );
/// Throws ProtocolError on a malformed message.
std::pair<std::uint64_t, OracleRequest> decode_request( nlohmann::json const& message );

/// Validates id, field types and the metric range. Throws ProtocolError on a
/// malformed or mismatched message and InterfaceError on an out-of-range value.
OracleScore decode_response( std::string const& line, std::uint64_t expected_id, Context context );

/// Request payload for a netlist whose cells carry ground truth.
nlohmann::json truth_payload( Netlist const& netlist, NodeLabels const& truth );
nlohmann::json key_payload( Netlist const& netlist, std::vector<KeyGate> const& key_gates );

/// Classifier adapter running as a child process that speaks one JSON message
/// per line on stdin/stdout. Queries are serialized.
class AdapterProcess
{
public:
  explicit AdapterProcess( std::vector<std::string> argv,
                           std::chrono::milliseconds timeout = std::chrono::seconds( 120 ) );
  ~AdapterProcess();
  AdapterProcess( AdapterProcess const& ) = delete;
  AdapterProcess& operator=( AdapterProcess const& ) = delete;

  /// Throws TimeoutError when no full line arrives in time, ProtocolError when
  /// the process dies or answers out of protocol.
  OracleScore query( OracleRequest const& request );
  /// Sends a raw line and returns the raw reply (protocol testing aid).
  std::string exchange( std::string const& line );

private:
  std::string read_line();

  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::chrono::milliseconds timeout_;
  std::uint64_t next_id_ = 1;
  std::string buffer_;
};

/// Models used by the built-in surrogate server.
struct SurrogateModels
{
  double tau = default_tau;
  unsigned h = 2;
  std::optional<NodeModel> trojan;
  std::optional<NodeModel> reverse_eng;
  std::optional<NodeModel> key;
};

/// Scores one request in-process exactly as the server would.
OracleScore score_request( OracleRequest const& request, SurrogateModels const& models );

/// Answers requests line by line until end of input. A bad request gets
/// {"id": ..., "error": "..."} and the loop continues.
void serve( std::istream& in, std::ostream& out, SurrogateModels const& models );

} // namespace netforge
