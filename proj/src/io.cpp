#include "mfbm/io.hpp"

#include "mfbm/errors.hpp"

#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mfbm::io {

namespace {

constexpr char kPathMagic[4] = {'M', 'F', 'B', 'P'};
constexpr std::uint32_t kPathVersion = 1;

void put_u64(std::ostream& os, std::uint64_t v) {
  char bytes[8];
  for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  os.write(bytes, 8);
}

void put_u32(std::ostream& os, std::uint32_t v) {
  char bytes[4];
  for (int k = 0; k < 4; ++k) bytes[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  os.write(bytes, 4);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char bytes[8];
  if (!is.read(reinterpret_cast<char*>(bytes), 8)) throw InvalidParams("truncated binary file");
  std::uint64_t v = 0;
  for (int k = 7; k >= 0; --k) v = (v << 8) | bytes[k];
  return v;
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char bytes[4];
  if (!is.read(reinterpret_cast<char*>(bytes), 4)) throw InvalidParams("truncated binary file");
  std::uint32_t v = 0;
  for (int k = 3; k >= 0; --k) v = (v << 8) | bytes[k];
  return v;
}

void put_double(std::ostream& os, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  put_u64(os, bits);
}

double get_double(std::istream& is) {
  const std::uint64_t bits = get_u64(is);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

std::ofstream open_out(const std::filesystem::path& file, bool binary) {
  std::ofstream os(file, binary ? std::ios::binary : std::ios::out);
  if (!os) throw InvalidParams("cannot write '" + file.string() + "'");
  return os;
}

std::ifstream open_in(const std::filesystem::path& file, bool binary) {
  std::ifstream is(file, binary ? std::ios::binary : std::ios::in);
  if (!is) throw InvalidParams("cannot read '" + file.string() + "'");
  return is;
}

double parse_double(std::string_view field, const std::string& where) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw InvalidParams("malformed number '" + std::string(field) + "' in " + where);
  }
  return x;
}

std::vector<std::vector<double>> parse_csv_rows(std::istream& is, const std::string& where,
                                                bool skip_header) {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first && skip_header) {
      first = false;
      continue;
    }
    first = false;
    std::vector<double> row;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      row.push_back(parse_double(rest.substr(0, comma), where));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InvalidParams("ragged row in " + where);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd rows_to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j, const char* name) {
  if (!j.is_array()) throw InvalidParams(std::string("'") + name + "' must be an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) v(k) = j[k].get<double>();
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json j = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) j.push_back(v(k));
  return j;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json j = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(row);
  }
  return j;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array()) throw InvalidParams("matrix must be an array of rows");
  if (j.empty()) return {};
  const std::size_t cols = j.front().size();
  Eigen::MatrixXd m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw InvalidParams("ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

MfbmParams params_from_json(const json& j) {
  try {
    MfbmParams params;
    params.H = vector_from_json(j.at("H"), "H");
    const auto p = params.H.size();
    if (j.contains("p") && j.at("p").get<Eigen::Index>() != p) {
      throw InvalidParams("'p' does not match the length of 'H'");
    }
    params.sigma = j.contains("sigma") ? vector_from_json(j.at("sigma"), "sigma")
                                       : Eigen::VectorXd::Ones(p);
    params.rho = j.contains("rho") ? matrix_from_json(j.at("rho")) : Eigen::MatrixXd::Identity(p, p);
    params.eta = j.contains("eta") ? matrix_from_json(j.at("eta")) : Eigen::MatrixXd::Zero(p, p);
    params.check_dimensions();
    return params;
  } catch (const json::exception& e) {
    throw InvalidParams(std::string("malformed parameter document: ") + e.what());
  }
}

json params_to_json(const MfbmParams& params) {
  return json{{"p", params.p()},
              {"H", vector_to_json(params.H)},
              {"sigma", vector_to_json(params.sigma)},
              {"rho", matrix_to_json(params.rho)},
              {"eta", matrix_to_json(params.eta)}};
}

MfbmParams read_params(const std::filesystem::path& file) {
  try {
    return params_from_json(json::parse(read_text(file)));
  } catch (const json::parse_error& e) {
    throw InvalidParams("cannot parse '" + file.string() + "': " + e.what());
  }
}

void write_params(const std::filesystem::path& file, const MfbmParams& params) {
  write_text(file, params_to_json(params).dump(2) + "\n");
}

void write_path_csv(const std::filesystem::path& file, const Eigen::MatrixXd& values) {
  auto os = open_out(file, false);
  for (Eigen::Index c = 0; c < values.cols(); ++c) os << (c ? "," : "") << 'x' << c + 1;
  os << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", values(r, c));
      os << (c ? "," : "") << buf;
    }
    os << '\n';
  }
}

Eigen::MatrixXd read_path_csv(const std::filesystem::path& file) {
  auto is = open_in(file, false);
  return rows_to_matrix(parse_csv_rows(is, file.string(), true));
}

void write_path_binary(const std::filesystem::path& file, const Eigen::MatrixXd& values) {
  auto os = open_out(file, true);
  os.write(kPathMagic, 4);
  put_u32(os, kPathVersion);
  put_u64(os, static_cast<std::uint64_t>(values.rows()));
  put_u64(os, static_cast<std::uint64_t>(values.cols()));
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) put_double(os, values(r, c));
  }
}

Eigen::MatrixXd read_path_binary(const std::filesystem::path& file) {
  auto is = open_in(file, true);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kPathMagic, 4) != 0) {
    throw InvalidParams("'" + file.string() + "' is not a path file");
  }
  if (const auto v = get_u32(is); v != kPathVersion) {
    throw InvalidParams("unsupported path file version " + std::to_string(v));
  }
  const auto n = get_u64(is);
  const auto p = get_u64(is);
  Eigen::MatrixXd m(n, p);
  for (std::uint64_t r = 0; r < n; ++r) {
    for (std::uint64_t c = 0; c < p; ++c) m(r, c) = get_double(is);
  }
  return m;
}

Eigen::MatrixXd read_path(const std::filesystem::path& file) {
  return file.extension() == ".bin" ? read_path_binary(file) : read_path_csv(file);
}

void write_matrix_binary(const std::filesystem::path& file, const Eigen::MatrixXd& m) {
  auto os = open_out(file, true);
  put_u64(os, static_cast<std::uint64_t>(m.rows()));
  put_u64(os, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_double(os, m(r, c));
  }
}

Eigen::MatrixXd read_matrix_binary(const std::filesystem::path& file) {
  auto is = open_in(file, true);
  const auto rows = get_u64(is);
  const auto cols = get_u64(is);
  Eigen::MatrixXd m(rows, cols);
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (std::uint64_t c = 0; c < cols; ++c) m(r, c) = get_double(is);
  }
  return m;
}

void write_matrix_csv(const std::filesystem::path& file, const Eigen::MatrixXd& m) {
  auto os = open_out(file, false);
  char buf[32];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      os << (c ? "," : "") << buf;
    }
    os << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& file) {
  auto is = open_in(file, false);
  return rows_to_matrix(parse_csv_rows(is, file.string(), false));
}

Filter read_filter(const std::filesystem::path& file) {
  try {
    const auto j = json::parse(read_text(file));
    if (j.is_array()) return filter_from_taps(file.stem().string(), j.get<std::vector<double>>());
    return filter_from_taps(j.value("name", file.stem().string()),
                            j.at("taps").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw InvalidParams("cannot read filter '" + file.string() + "': " + e.what());
  }
}

std::vector<int> parse_dilations(const std::string& text) {
  auto to_int = [&](std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw InvalidParams("malformed dilation list '" + text + "'");
    }
    return v;
  };
  std::vector<int> out;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    const int a = to_int(std::string_view(text).substr(0, colon));
    const int b = to_int(std::string_view(text).substr(colon + 1));
    if (b < a) throw InvalidParams("empty dilation range '" + text + "'");
    for (int m = a; m <= b; ++m) out.push_back(m);
    return out;
  }
  std::string_view rest(text);
  for (;;) {
    const auto comma = rest.find(',');
    out.push_back(to_int(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

Weights parse_weights(const std::string& text) {
  if (text.size() == 1 && (text == "v" || text == "c" || text == "d")) {
    return Weights::preset(text[0]);
  }
  std::vector<double> w;
  std::string_view rest(text);
  for (;;) {
    const auto comma = rest.find(',');
    w.push_back(parse_double(rest.substr(0, comma), "weights"));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (w.size() != 3) throw InvalidParams("weights need three values wv,wc,wd");
  return {w[0], w[1], w[2]};
}

json result_to_json(const EstimationResult& r) {
  const int p = static_cast<int>(r.H_hat.size());
  json unreliable = json::array();
  for (const auto& [i, j] : r.unreliable_pairs()) unreliable.push_back({i + 1, j + 1});
  json pairs = json::array();
  for (int k = 0; k < pair_count(p); ++k) {
    const auto [i, j] = pair_components(k, p);
    pairs.push_back({i + 1, j + 1});
  }
  return json{
      {"p", p},
      {"n", r.n_used},
      {"H", vector_to_json(r.H_hat)},
      {"sigma2", vector_to_json(r.sigma2_hat)},
      {"rho", matrix_to_json(r.rho_hat)},
      {"eta", matrix_to_json(r.eta_hat)},
      {"intercepts",
       {{"alpha", vector_to_json(r.intercepts.alpha)},
        {"mu", matrix_to_json(r.intercepts.mu)},
        {"nu", matrix_to_json(r.intercepts.nu)}}},
      {"regression_inputs",
       {{"v", matrix_to_json(r.inputs.v)},
        {"c", matrix_to_json(r.inputs.c)},
        {"d", matrix_to_json(r.inputs.d)},
        {"pairs", pairs}}},
      {"unreliable_pairs", unreliable},
      {"config",
       {{"filter", r.config.filter.name},
        {"taps", r.config.filter.taps},
        {"q", r.config.filter.q},
        {"dilations", r.config.dilations},
        {"weights", {r.config.weights.v, r.config.weights.c, r.config.weights.d}},
        {"sign_dilation", r.config.dilations[r.config.sign_index()]}}},
  };
}

json intervals_to_json(const ConfidenceReport& report) {
  json list = json::array();
  for (const auto& ci : report.intervals) {
    list.push_back({{"parameter", ci.label},
                    {"estimate", ci.estimate},
                    {"std_error", ci.std_error},
                    {"lower", ci.lower},
                    {"upper", ci.upper}});
  }
  return json{{"level", report.level},
              {"lag_cutoff", report.lag_cutoff},
              {"tail_bound", report.tail_bound},
              {"intervals", list}};
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  auto os = open_out(file, false);
  os << text;
}

std::string read_text(const std::filesystem::path& file) {
  auto is = open_in(file, false);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace mfbm::io
