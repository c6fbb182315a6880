#include "arraycalib/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "arraycalib/dof.hpp"

namespace arraycalib {
namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path,
                const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw InvalidInputError("cannot write " + path.string());
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (end == text.size()) break;
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(
        start, comma == std::string::npos ? std::string::npos
                                          : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string trimmed(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// 1-based positions in messages; that is what editors and spreadsheets
// show.
[[noreturn]] void cell_error(const std::filesystem::path& path, int row,
                             int col, const std::string& what) {
  throw ParseError(path.string() + ": row " + std::to_string(row + 1) +
                   ", column " + std::to_string(col + 1) + ": " + what);
}

double parse_double_cell(const std::filesystem::path& path, int row, int col,
                         const std::string& raw) {
  const std::string cell = trimmed(raw);
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    cell_error(path, row, col, "cannot parse '" + cell + "' as a number");
  return value;
}

int parse_int_cell(const std::filesystem::path& path, int row, int col,
                   const std::string& raw) {
  const std::string cell = trimmed(raw);
  int value = 0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    cell_error(path, row, col, "cannot parse '" + cell + "' as an index");
  return value;
}

Eigen::MatrixXd parse_rectangular_csv(const std::filesystem::path& path,
                                      const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw ParseError(path.string() + ": file is empty");
  std::vector<std::vector<std::string>> rows;
  for (const std::string& line : lines) rows.push_back(split_cells(line));
  const std::size_t cols = rows.front().size();
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (rows[r].size() != cols)
      throw ParseError(path.string() + ": row " + std::to_string(r + 1) +
                       " has " + std::to_string(rows[r].size()) +
                       " cells, expected " + std::to_string(cols));
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols; ++c)
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_double_cell(path, static_cast<int>(r), static_cast<int>(c),
                            rows[r][c]);
  return a;
}

void check_coverage(const std::filesystem::path& path, const ToaMatrix& t) {
  for (int mm = 0; mm < t.m(); ++mm)
    if (!t.mask.row(mm).any())
      throw ParseError(path.string() + ": row " + std::to_string(mm + 1) +
                       " has no observed entries");
  for (int kk = 0; kk < t.k(); ++kk)
    if (!t.mask.col(kk).any())
      throw ParseError(path.string() + ": column " + std::to_string(kk + 1) +
                       " has no observed entries");
  for (int kk = 0; kk < t.k(); ++kk)
    for (int mm = 0; mm < t.m(); ++mm)
      if (t.mask(mm, kk) && !std::isfinite(t.t(mm, kk)))
        cell_error(path, mm, kk, "observed entry is not finite");
}

ToaMatrix read_toa_csv(const std::filesystem::path& path) {
  ToaMatrix t;
  t.t = parse_rectangular_csv(path, read_file(path));
  t.mask.setConstant(t.t.rows(), t.t.cols(), true);

  const std::filesystem::path mask_path = mask_path_for(path);
  if (std::filesystem::exists(mask_path)) {
    const Eigen::MatrixXd raw =
        parse_rectangular_csv(mask_path, read_file(mask_path));
    if (raw.rows() != t.t.rows() || raw.cols() != t.t.cols())
      throw ParseError(mask_path.string() +
                       ": mask shape differs from the TOA matrix");
    for (int kk = 0; kk < raw.cols(); ++kk)
      for (int mm = 0; mm < raw.rows(); ++mm) {
        if (raw(mm, kk) != 0.0 && raw(mm, kk) != 1.0)
          cell_error(mask_path, mm, kk, "mask cells must be 0 or 1");
        t.mask(mm, kk) = raw(mm, kk) == 1.0;
      }
  }
  check_coverage(path, t);
  t.validate();
  return t;
}

json parse_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

ToaMatrix read_toa_json(const std::filesystem::path& path) {
  const json j = parse_json_file(path);
  if (!j.is_object() || !j.contains("toa") || !j["toa"].is_array() ||
      j["toa"].empty())
    throw ParseError(path.string() +
                     ": expected an object with a non-empty \"toa\" array");
  const json& rows = j["toa"];
  const std::size_t m = rows.size();
  if (!rows[0].is_array() || rows[0].empty())
    throw ParseError(path.string() + ": \"toa\" rows must be arrays");
  const std::size_t k = rows[0].size();

  ToaMatrix t;
  t.t.setConstant(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k),
                  std::numeric_limits<double>::quiet_NaN());
  t.mask.setConstant(static_cast<Eigen::Index>(m),
                     static_cast<Eigen::Index>(k), false);
  for (std::size_t r = 0; r < m; ++r) {
    if (!rows[r].is_array() || rows[r].size() != k)
      throw ParseError(path.string() + ": row " + std::to_string(r + 1) +
                       " has " + std::to_string(rows[r].size()) +
                       " entries, expected " + std::to_string(k));
    for (std::size_t c = 0; c < k; ++c) {
      const json& cell = rows[r][c];
      if (cell.is_null()) continue;
      if (!cell.is_number())
        cell_error(path, static_cast<int>(r), static_cast<int>(c),
                   "entries must be numbers or null");
      t.t(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          cell.get<double>();
      t.mask(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          true;
    }
  }

  if (j.contains("mask")) {
    const json& mask = j["mask"];
    if (!mask.is_array() || mask.size() != m)
      throw ParseError(path.string() +
                       ": \"mask\" shape differs from \"toa\"");
    for (std::size_t r = 0; r < m; ++r) {
      if (!mask[r].is_array() || mask[r].size() != k)
        throw ParseError(path.string() +
                         ": \"mask\" shape differs from \"toa\"");
      for (std::size_t c = 0; c < k; ++c) {
        if (!mask[r][c].is_boolean())
          cell_error(path, static_cast<int>(r), static_cast<int>(c),
                     "mask entries must be booleans");
        const bool observed = mask[r][c].get<bool>();
        if (observed &&
            !t.mask(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)))
          cell_error(path, static_cast<int>(r), static_cast<int>(c),
                     "null entry marked observed");
        t.mask(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            observed;
      }
    }
  }

  if (j.contains("speed")) {
    if (!j["speed"].is_number() || !(j["speed"].get<double>() > 0.0))
      throw ParseError(path.string() + ": \"speed\" must be positive");
    t.speed = j["speed"].get<double>();
  }
  for (const auto& item : j.items())
    if (item.key() != "toa" && item.key() != "mask" && item.key() != "speed")
      throw ParseError(path.string() + ": unknown key \"" + item.key() +
                       "\"");
  check_coverage(path, t);
  t.validate();
  return t;
}

json matrix_rows_json(const Eigen::MatrixXd& a) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd matrix_from_rows_json(const std::filesystem::path& path,
                                      const json& rows,
                                      const std::string& field) {
  if (!rows.is_array() || rows.empty() || !rows[0].is_array() ||
      rows[0].empty())
    throw ParseError(path.string() + ": \"" + field +
                     "\" must be a non-empty array of rows");
  const std::size_t cols = rows[0].size();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array() || rows[r].size() != cols)
      throw ParseError(path.string() + ": \"" + field + "\" row " +
                       std::to_string(r + 1) + " has the wrong length");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!rows[r][c].is_number())
        throw ParseError(path.string() + ": \"" + field +
                         "\" entries must be numbers");
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c].get<double>();
    }
  }
  return a;
}

Eigen::VectorXd vector_from_json(const std::filesystem::path& path,
                                 const json& arr, const std::string& field) {
  if (!arr.is_array())
    throw ParseError(path.string() + ": \"" + field + "\" must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number())
      throw ParseError(path.string() + ": \"" + field +
                       "\" entries must be numbers");
    v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  }
  return v;
}

std::string render_csv(const Eigen::MatrixXd& a) {
  std::string out;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      if (c > 0) out += ',';
      out += format_double(a(r, c));
    }
    out += '\n';
  }
  return out;
}

}  // namespace

FileFormat file_format_from_string(const std::string& name) {
  if (name == "csv") return FileFormat::csv;
  if (name == "json") return FileFormat::json;
  throw ConfigError("unknown format '" + name + "' (expected csv or json)");
}

FileFormat detect_format(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  if (ext == ".csv") return FileFormat::csv;
  if (ext == ".json") return FileFormat::json;
  throw ConfigError("cannot infer format from '" + path.string() +
                    "' (expected a .csv or .json extension)");
}

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw InvalidInputError("number formatting failed");
  return std::string(buffer, ptr);
}

ToaMatrix read_toa(const std::filesystem::path& path, FileFormat format) {
  return format == FileFormat::csv ? read_toa_csv(path) : read_toa_json(path);
}

ToaMatrix read_toa(const std::filesystem::path& path) {
  return read_toa(path, detect_format(path));
}

void write_toa(const ToaMatrix& t, const std::filesystem::path& path,
               FileFormat format) {
  t.validate();
  if (format == FileFormat::csv) {
    Eigen::MatrixXd body = t.t;
    for (int kk = 0; kk < t.k(); ++kk)
      for (int mm = 0; mm < t.m(); ++mm)
        if (!t.mask(mm, kk))
          body(mm, kk) = std::numeric_limits<double>::quiet_NaN();
    write_file(path, render_csv(body));
    if (!t.fully_observed())
      write_file(mask_path_for(path), render_csv(t.mask.cast<double>()));
    return;
  }
  json j;
  json rows = json::array();
  for (int mm = 0; mm < t.m(); ++mm) {
    json row = json::array();
    for (int kk = 0; kk < t.k(); ++kk) {
      if (t.mask(mm, kk))
        row.push_back(t.t(mm, kk));
      else
        row.push_back(nullptr);
    }
    rows.push_back(std::move(row));
  }
  j["toa"] = std::move(rows);
  j["speed"] = t.speed;
  write_file(path, j.dump(2) + "\n");
}

std::filesystem::path mask_path_for(const std::filesystem::path& toa_path) {
  std::filesystem::path p = toa_path;
  p.replace_extension(".mask.csv");
  return p;
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  return parse_rectangular_csv(path, read_file(path));
}

void write_matrix_csv(const Eigen::MatrixXd& a,
                      const std::filesystem::path& path) {
  write_file(path, render_csv(a));
}

Timing read_timing_csv(const std::filesystem::path& path) {
  const std::vector<std::string> lines = split_lines(read_file(path));
  if (lines.size() != 2)
    throw ParseError(path.string() +
                     ": expected two lines (offsets, then emission times)");
  Timing timing;
  for (int r = 0; r < 2; ++r) {
    const std::vector<std::string> cells = split_cells(lines[r]);
    Eigen::VectorXd v(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c)
      v(static_cast<Eigen::Index>(c)) =
          parse_double_cell(path, r, static_cast<int>(c), cells[c]);
    (r == 0 ? timing.sigma : timing.tau) = v;
  }
  return timing;
}

void write_timing_csv(const Timing& timing,
                      const std::filesystem::path& path) {
  std::string out;
  for (int r = 0; r < 2; ++r) {
    const Eigen::VectorXd& v = r == 0 ? timing.sigma : timing.tau;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (i > 0) out += ',';
      out += format_double(v(i));
    }
    out += '\n';
  }
  write_file(path, out);
}

std::filesystem::path write_instance(const Instance& instance,
                                     const std::filesystem::path& dir,
                                     FileFormat format) {
  std::filesystem::create_directories(dir);
  if (format == FileFormat::csv) {
    const std::filesystem::path toa_path = dir / "toa.csv";
    write_toa(instance.toa, toa_path, FileFormat::csv);
    write_matrix_csv(instance.truth.receivers().transpose(),
                     dir / "truth_receivers.csv");
    write_matrix_csv(instance.truth.sources().transpose(),
                     dir / "truth_sources.csv");
    write_timing_csv(instance.timing, dir / "truth_timing.csv");
    return toa_path;
  }
  const std::filesystem::path toa_path = dir / "toa.json";
  write_toa(instance.toa, toa_path, FileFormat::json);
  json truth;
  truth["receivers"] = matrix_rows_json(instance.truth.receivers().transpose());
  truth["sources"] = matrix_rows_json(instance.truth.sources().transpose());
  truth["sigma"] = vector_json(instance.timing.sigma);
  truth["tau"] = vector_json(instance.timing.tau);
  write_file(dir / "truth.json", truth.dump(2) + "\n");
  return toa_path;
}

std::optional<Truth> find_truth_alongside(
    const std::filesystem::path& toa_path) {
  const std::filesystem::path dir = toa_path.parent_path();
  const std::filesystem::path json_path = dir / "truth.json";
  if (std::filesystem::exists(json_path)) {
    const json j = parse_json_file(json_path);
    if (!j.is_object() || !j.contains("receivers") || !j.contains("sources"))
      throw ParseError(json_path.string() +
                       ": expected \"receivers\" and \"sources\"");
    const Eigen::MatrixXd r =
        matrix_from_rows_json(json_path, j["receivers"], "receivers");
    const Eigen::MatrixXd s =
        matrix_from_rows_json(json_path, j["sources"], "sources");
    if (r.cols() != s.cols())
      throw ParseError(json_path.string() +
                       ": receiver and source dimensions differ");
    Truth truth;
    truth.points = PointSet::from_blocks(r.transpose(), s.transpose());
    if (j.contains("sigma") && j.contains("tau")) {
      Timing timing;
      timing.sigma = vector_from_json(json_path, j["sigma"], "sigma");
      timing.tau = vector_from_json(json_path, j["tau"], "tau");
      truth.timing = std::move(timing);
    }
    return truth;
  }

  const std::filesystem::path r_path = dir / "truth_receivers.csv";
  const std::filesystem::path s_path = dir / "truth_sources.csv";
  if (!std::filesystem::exists(r_path) || !std::filesystem::exists(s_path))
    return std::nullopt;
  const Eigen::MatrixXd r = read_matrix_csv(r_path);
  const Eigen::MatrixXd s = read_matrix_csv(s_path);
  if (r.cols() != s.cols())
    throw ParseError(r_path.string() +
                     ": receiver and source dimensions differ");
  Truth truth;
  truth.points = PointSet::from_blocks(r.transpose(), s.transpose());
  const std::filesystem::path t_path = dir / "truth_timing.csv";
  if (std::filesystem::exists(t_path))
    truth.timing = read_timing_csv(t_path);
  return truth;
}

std::vector<DistanceEquality> read_distance_equalities(
    const std::filesystem::path& path) {
  const std::vector<std::string> lines = split_lines(read_file(path));
  std::vector<DistanceEquality> out;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    if (trimmed(lines[r]).empty()) continue;
    const std::vector<std::string> cells = split_cells(lines[r]);
    if (cells.size() != 3)
      throw ParseError(path.string() + ": row " + std::to_string(r + 1) +
                       ": expected i,j,distance");
    DistanceEquality eq;
    eq.i = parse_int_cell(path, static_cast<int>(r), 0, cells[0]);
    eq.j = parse_int_cell(path, static_cast<int>(r), 1, cells[1]);
    eq.value = parse_double_cell(path, static_cast<int>(r), 2, cells[2]);
    out.push_back(eq);
  }
  if (out.empty()) throw ParseError(path.string() + ": file is empty");
  return out;
}

std::vector<DistanceBound> read_distance_bounds(
    const std::filesystem::path& path) {
  const std::vector<std::string> lines = split_lines(read_file(path));
  std::vector<DistanceBound> out;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    if (trimmed(lines[r]).empty()) continue;
    const std::vector<std::string> cells = split_cells(lines[r]);
    if (cells.size() != 4)
      throw ParseError(path.string() + ": row " + std::to_string(r + 1) +
                       ": expected i,j,lower,upper");
    DistanceBound bound;
    bound.i = parse_int_cell(path, static_cast<int>(r), 0, cells[0]);
    bound.j = parse_int_cell(path, static_cast<int>(r), 1, cells[1]);
    bound.lower = parse_double_cell(path, static_cast<int>(r), 2, cells[2]);
    bound.upper = parse_double_cell(path, static_cast<int>(r), 3, cells[3]);
    out.push_back(bound);
  }
  if (out.empty()) throw ParseError(path.string() + ": file is empty");
  return out;
}

Eigen::VectorXd read_vector(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<double> values;
  std::size_t start = 0;
  int token = 0;
  while (start <= text.size()) {
    std::size_t end = text.find_first_of(",\n", start);
    if (end == std::string::npos) end = text.size();
    const std::string cell = trimmed(text.substr(start, end - start));
    if (!cell.empty())
      values.push_back(parse_double_cell(path, 0, token++, cell));
    if (end == text.size()) break;
    start = end + 1;
  }
  if (values.empty()) throw ParseError(path.string() + ": file is empty");
  return Eigen::Map<Eigen::VectorXd>(values.data(),
                                     static_cast<Eigen::Index>(values.size()));
}

namespace {

[[noreturn]] void config_error(const std::filesystem::path& path,
                               const std::string& what) {
  throw ConfigError(path.string() + ": " + what);
}

double config_number(const std::filesystem::path& path, const json& j,
                     const std::string& key) {
  if (!j.is_number()) config_error(path, "\"" + key + "\" must be a number");
  return j.get<double>();
}

int config_int(const std::filesystem::path& path, const json& j,
               const std::string& key) {
  if (!j.is_number_integer())
    config_error(path, "\"" + key + "\" must be an integer");
  return j.get<int>();
}

void apply_lm_config(const std::filesystem::path& path, const json& j,
                     LmConfig& lm) {
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    if (key == "max_iterations")
      lm.max_iterations = config_int(path, item.value(), key);
    else if (key == "initial_damping")
      lm.initial_damping = config_number(path, item.value(), key);
    else if (key == "damping_increase")
      lm.damping_increase = config_number(path, item.value(), key);
    else if (key == "damping_decrease")
      lm.damping_decrease = config_number(path, item.value(), key);
    else if (key == "gradient_tolerance")
      lm.gradient_tolerance = config_number(path, item.value(), key);
    else if (key == "relative_loss_tolerance")
      lm.relative_loss_tolerance = config_number(path, item.value(), key);
    else if (key == "distance_floor")
      lm.distance_floor = config_number(path, item.value(), key);
    else
      config_error(path, "unknown \"lm\" key \"" + key + "\"");
  }
}

void apply_al_config(const std::filesystem::path& path, const json& j,
                     AugLagConfig& al) {
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    if (key == "penalty")
      al.penalty = config_number(path, item.value(), key);
    else if (key == "penalty_growth")
      al.penalty_growth = config_number(path, item.value(), key);
    else if (key == "penalty_cap")
      al.penalty_cap = config_number(path, item.value(), key);
    else if (key == "outer_iterations")
      al.outer_iterations = config_int(path, item.value(), key);
    else if (key == "constraint_tolerance")
      al.constraint_tolerance = config_number(path, item.value(), key);
    else
      config_error(path, "unknown \"al\" key \"" + key + "\"");
  }
}

void apply_solver_config(const std::filesystem::path& path, const json& j,
                         AdmmConfig& solver) {
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    if (key == "max_iterations")
      solver.max_iterations = config_int(path, item.value(), key);
    else if (key == "eps_optimal")
      solver.eps_optimal = config_number(path, item.value(), key);
    else if (key == "eps_near")
      solver.eps_near = config_number(path, item.value(), key);
    else if (key == "over_relaxation")
      solver.over_relaxation = config_number(path, item.value(), key);
    else if (key == "check_interval")
      solver.check_interval = config_int(path, item.value(), key);
    else if (key == "equilibrate") {
      if (!item.value().is_boolean())
        config_error(path, "\"equilibrate\" must be a boolean");
      solver.equilibrate = item.value().get<bool>();
    } else if (key == "ruiz_iterations")
      solver.ruiz_iterations = config_int(path, item.value(), key);
    else
      config_error(path, "unknown \"solver\" key \"" + key + "\"");
  }
}

}  // namespace

LocalizeOptions RunConfig::options() const {
  LocalizeOptions opts;
  opts.d = d;
  opts.mode = mode;
  opts.lm = lm;
  opts.al = al;
  opts.solver = solver;
  opts.equalities = equalities;
  opts.bounds = bounds;
  opts.known_delays = known_delays;
  return opts;
}

RunConfig read_run_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const ParseError&) {
    throw;
  } catch (const json::exception& e) {
    config_error(path, e.what());
  }
  if (!j.is_object()) config_error(path, "config must be a JSON object");

  RunConfig config;
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    const json& value = item.value();
    if (key == "mode") {
      if (!value.is_string()) config_error(path, "\"mode\" must be a string");
      try {
        config.mode = sync_mode_from_string(value.get<std::string>());
      } catch (const Error& e) {
        config_error(path, e.what());
      }
    } else if (key == "d") {
      config.d = config_int(path, value, key);
    } else if (key == "lm") {
      if (!value.is_object()) config_error(path, "\"lm\" must be an object");
      apply_lm_config(path, value, config.lm);
    } else if (key == "al") {
      if (!value.is_object()) config_error(path, "\"al\" must be an object");
      apply_al_config(path, value, config.al);
    } else if (key == "solver") {
      if (!value.is_object())
        config_error(path, "\"solver\" must be an object");
      apply_solver_config(path, value, config.solver);
    } else if (key == "known_distances") {
      if (!value.is_array())
        config_error(path, "\"known_distances\" must be an array");
      for (const json& entry : value) {
        if (!entry.is_array() || entry.size() != 3 ||
            !entry[0].is_number_integer() || !entry[1].is_number_integer() ||
            !entry[2].is_number())
          config_error(path,
                       "\"known_distances\" entries must be [i, j, distance]");
        config.equalities.push_back({entry[0].get<int>(),
                                     entry[1].get<int>(),
                                     entry[2].get<double>()});
      }
    } else if (key == "distance_bounds") {
      if (!value.is_array())
        config_error(path, "\"distance_bounds\" must be an array");
      for (const json& entry : value) {
        if (!entry.is_array() || entry.size() != 4 ||
            !entry[0].is_number_integer() || !entry[1].is_number_integer() ||
            !entry[2].is_number() || !entry[3].is_number())
          config_error(
              path, "\"distance_bounds\" entries must be [i, j, lower, upper]");
        config.bounds.push_back({entry[0].get<int>(), entry[1].get<int>(),
                                 entry[2].get<double>(),
                                 entry[3].get<double>()});
      }
    } else if (key == "constant_offset") {
      if (!value.is_array())
        config_error(path, "\"constant_offset\" must be an array");
      try {
        config.known_delays = vector_from_json(path, value, key);
      } catch (const ParseError& e) {
        config_error(path, e.what());
      }
    } else if (key == "out") {
      if (!value.is_string()) config_error(path, "\"out\" must be a string");
      config.out = value.get<std::string>();
    } else if (key == "seed") {
      if (!value.is_number_unsigned() && !value.is_number_integer())
        config_error(path, "\"seed\" must be an integer");
      config.seed = value.get<std::uint64_t>();
    } else {
      config_error(path, "unknown config key \"" + key + "\"");
    }
  }
  try {
    config.lm.validate();
    config.al.validate();
  } catch (const Error& e) {
    config_error(path, e.what());
  }
  return config;
}

std::string localize_result_json(
    const LocalizeResult& result, const std::optional<AlignedResult>& evaluation,
    bool pretty) {
  json j;
  j["receivers"] = matrix_rows_json(result.points.receivers().transpose());
  j["sources"] = matrix_rows_json(result.points.sources().transpose());
  j["alpha"] = vector_json(result.alpha);
  j["sigma"] = vector_json(result.timing.sigma);
  j["tau"] = vector_json(result.timing.tau);
  j["timing_residual_seconds"] = result.timing.residual_norm;

  j["relaxation"] = {{"status", to_string(result.relaxation_status)},
                     {"objective", result.relaxation_objective},
                     {"spectral_tail", result.spectral_tail}};

  json refine;
  refine["iterations"] = result.refinement.iterations;
  refine["final_loss"] = result.refinement.final_loss;
  refine["gradient_norm"] = result.refinement.gradient_norm;
  refine["converged"] = result.refinement.converged;
  refine["near_coincident_events"] = result.refinement.near_coincident_events;
  if (!result.refinement.constraint_trace.empty())
    refine["constraint_violation"] =
        result.refinement.constraint_trace.back();
  j["refinement"] = std::move(refine);

  json dof;
  dof["measurements"] = result.dof.measurements;
  dof["dof"] = result.dof.dof;
  dof["feasible"] = result.dof.feasible;
  if (result.dof.min_sources)
    dof["min_sources"] = *result.dof.min_sources;
  else
    dof["min_sources"] = nullptr;
  dof["warning"] = result.dof_warning;
  j["dof"] = std::move(dof);

  j["seconds"] = {{"relaxation", result.seconds.relaxation},
                  {"refinement", result.seconds.refinement},
                  {"timing", result.seconds.timing}};

  if (evaluation)
    j["evaluation"] = {{"e_rs", evaluation->e_rs}, {"e_r", evaluation->e_r}};

  return pretty ? j.dump(2) + "\n" : j.dump();
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
  std::string out =
      "size,noise_sigma,trials,failures,e_rs_median,e_rs_q1,e_rs_q3,"
      "e_rs_whisker_lo,e_rs_whisker_hi,e_r_median\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const SweepCell& cell : cells) {
    const bool empty = cell.failures == cell.trials;
    out += std::to_string(cell.size);
    out += ',' + format_double(cell.noise_sigma);
    out += ',' + std::to_string(cell.trials);
    out += ',' + std::to_string(cell.failures);
    out += ',' + format_double(empty ? nan : cell.e_rs.median);
    out += ',' + format_double(empty ? nan : cell.e_rs.q1);
    out += ',' + format_double(empty ? nan : cell.e_rs.q3);
    out += ',' + format_double(empty ? nan : cell.e_rs.whisker_lo);
    out += ',' + format_double(empty ? nan : cell.e_rs.whisker_hi);
    out += ',' + format_double(empty ? nan : cell.e_r.median);
    out += '\n';
  }
  return out;
}

std::string dof_report_json(int m, int k, int d, SyncMode mode) {
  const DofReport report = dof_report(m, k, d, mode);
  json j;
  j["m"] = m;
  j["k"] = k;
  j["d"] = d;
  j["mode"] = to_string(mode);
  j["measurements"] = report.measurements;
  j["dof"] = report.dof;
  j["feasible"] = report.feasible;
  if (report.min_sources)
    j["min_sources"] = *report.min_sources;
  else
    j["min_sources"] = nullptr;
  return j.dump(2) + "\n";
}

}  // namespace arraycalib
