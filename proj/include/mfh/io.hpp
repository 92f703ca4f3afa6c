#pragma once

#include "mfh/model.hpp"
#include "mfh/moments.hpp"
#include "mfh/recursions.hpp"
#include "mfh/simulate.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>

namespace mfh::io {

using Json = nlohmann::json;

/// A system file: the system plus an optional attenuation level.
struct SystemDocument {
  MeanFieldSystem system;
  std::optional<double> gamma;
};

/// Parses a system document. Throws ParseError naming the field path
/// (e.g. "stages[1].D") and DimensionError for shape mismatches.
SystemDocument parse_system(const Json& doc);
SystemDocument load_system(const std::string& path);
Json to_json(const SystemDocument& doc);
void save_system(const SystemDocument& doc, const std::string& path);
/// Two-space indented JSON with each matrix row on one line.
std::string pretty(const Json& j);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& path);

Json to_json(const H2HinfSolution& sol);
H2HinfSolution h2hinf_from_json(const Json& j);
Json to_json(const SbrlSolution& sol);
Json to_json(const LqSolution& sol);
Json to_json(const FeasibilityFailure& failure);
Json to_json(const GammaSearchResult& result);
Json to_json(const McEstimate& estimate);
Json to_json(const ParticleReport& report);

/// Sequence CSV with header "k,row,col,value".
void write_sequence_csv(std::ostream& out, const MatrixSeq& seq);
MatrixSeq read_sequence_csv(std::istream& in);

/// Long-format CSV with header "k,quantity,value".
void write_moments_csv(std::ostream& out, const MomentTrajectory& t);
void write_costs_csv(std::ostream& out, const CostBreakdown& c);
void write_estimate_csv(std::ostream& out, const McEstimate& e);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mfh::io
