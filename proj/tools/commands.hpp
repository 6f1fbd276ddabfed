#pragma once

#include <string>

#include "physio/config.hpp"

namespace physio::cli {

// Each command reads what it needs from the resolved config and writes under
// cfg.get("out"). Errors propagate as physio::Error.
void cmd_synth(const RunConfig& cfg);
void cmd_encode(const RunConfig& cfg);
void cmd_features(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_xmatrix(const RunConfig& cfg);
void cmd_combined(const RunConfig& cfg);
void cmd_compare(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);
void cmd_encoders(const RunConfig& cfg);

}  // namespace physio::cli
