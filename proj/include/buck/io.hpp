#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "buck/harness.hpp"
#include "buck/neural.hpp"

namespace buck::io {

/// Shortest round-trip decimal representation ("nan"/"inf" for non-finite values).
std::string format_double(double x);

inline constexpr const char* kTraceHeader = "t,i_l,v_o,duty,s,v_lyap,f_hat,r_load,v_in";
inline constexpr const char* kDatasetHeader = "e,edot,f";
inline constexpr const char* kReportHeader = "controller,experiment,settling_ms,overshoot_v,recovery_ms,ripple_pp_v,ss_error_v";
inline constexpr const char* kHistoryHeader = "epoch,cost,rmse";
inline constexpr const char* kSweepHeader = "optimizer,activation,rmse,best";

void write_trace_csv(std::ostream& os, const Trace& trace);
void write_dataset_csv(std::ostream& os, const Dataset& data);
Dataset read_dataset_csv(std::istream& is);
void write_report_csv(std::ostream& os, const ComparisonReport& report);
void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history);
void write_sweep_csv(std::ostream& os, const SweepTable& table);

std::string model_to_json(const Mlp& net);
Mlp model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const Mlp& net);
Mlp load_model(const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Throws std::runtime_error when the file cannot be opened or written.
void write_file(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace buck::io
