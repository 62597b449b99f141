#pragma once

#include "mfbm/asymptotics.hpp"
#include "mfbm/estimation.hpp"
#include "mfbm/filtering.hpp"
#include "mfbm/model.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <filesystem>
#include <string>

namespace mfbm::io {

using json = nlohmann::json;

/// {p, H, sigma, rho, eta}. `rho` and `eta` default to I and 0 when absent.
MfbmParams params_from_json(const json& j);
json params_to_json(const MfbmParams& params);
MfbmParams read_params(const std::filesystem::path& file);
void write_params(const std::filesystem::path& file, const MfbmParams& params);

/// CSV with header x1,...,xp and one row per time point, values printed with
/// 17 significant digits so that reading back is exact.
void write_path_csv(const std::filesystem::path& file, const Eigen::MatrixXd& values);
Eigen::MatrixXd read_path_csv(const std::filesystem::path& file);

/// "MFBP", u32 version, u64 n, u64 p, then n·p little-endian doubles, row-major.
void write_path_binary(const std::filesystem::path& file, const Eigen::MatrixXd& values);
Eigen::MatrixXd read_path_binary(const std::filesystem::path& file);

/// Dispatches on the extension: ".bin" is binary, anything else CSV.
Eigen::MatrixXd read_path(const std::filesystem::path& file);

/// u64 rows, u64 cols, then little-endian doubles, row-major.
void write_matrix_binary(const std::filesystem::path& file, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_binary(const std::filesystem::path& file);
/// Plain CSV without header, 17 significant digits.
void write_matrix_csv(const std::filesystem::path& file, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& file);

/// A JSON array of taps, or an object {"name": ..., "taps": [...]}.
Filter read_filter(const std::filesystem::path& file);

/// Parses "a:b" (inclusive range) or "a,b,c".
std::vector<int> parse_dilations(const std::string& text);
/// Parses "wv,wc,wd" or a preset letter v, c, d.
Weights parse_weights(const std::string& text);

json result_to_json(const EstimationResult& result);
json intervals_to_json(const ConfidenceReport& report);

json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

void write_text(const std::filesystem::path& file, const std::string& text);
std::string read_text(const std::filesystem::path& file);

}  // namespace mfbm::io
