#pragma once

#include <iosfwd>
#include <string>

#include "ccfr/ccfr.hpp"

namespace ccfr {

/// Result document: config echo, bound constants, the checkpoint table without
/// wall times, and both players' average strategies labelled by sequence.
/// `config_echo` must be a JSON document; it is embedded verbatim as an object.
/// Non-finite numbers are written as the strings "inf", "-inf", "nan".
void write_result_json(std::ostream& out, const StrategicGame& game, const ConstraintSet& constraints,
                       const CcfrConfig& config, const CcfrResult& result, const std::string& config_echo);

/// One row per checkpoint. The first line is "# config: <echo>"; wall time is
/// the last column so the rest of the file is reproducible.
void write_diagnostics_csv(std::ostream& out, const ConstraintSet& constraints, const CcfrResult& result,
                           const std::string& config_echo);

/// "# config: " followed by the echo collapsed onto one line.
std::string config_comment(const std::string& config_echo);

}  // namespace ccfr
