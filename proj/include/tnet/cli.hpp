#pragma once

#include "tnet/config.hpp"

#include <string>

namespace tnet::cli {

// Pipeline stages. Each reads/writes only the documented artifacts under
// the configured directories and throws on failure; the binary maps that
// to exit code 1 with a message naming the stage.
void run_synth(const RunConfig& config);
void run_ingest(const RunConfig& config);
void run_features(const RunConfig& config);
void run_label(const RunConfig& config);
void run_train(const RunConfig& config);
void run_predict(const RunConfig& config);
void run_evaluate(const RunConfig& config);
void run_report(const RunConfig& config);
void run_pipeline(const RunConfig& config);

void write_run_manifest(const RunConfig& config, const std::string& stage);

inline constexpr const char* kVersion = "1.0.0";

} // namespace tnet::cli
