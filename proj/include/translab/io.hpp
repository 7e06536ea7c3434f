#ifndef TRANSLAB_IO_HPP
#define TRANSLAB_IO_HPP

#include <charconv>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "translab/error.hpp"
#include "translab/fields/scalar_field.hpp"
#include "translab/format.hpp"
#include "translab/geometry.hpp"

namespace translab {

/// Minimal CSV writer; every number goes through format_exact so files are
/// reproducible and round-trip to the last bit.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    row(header);
  }

  template <class... Cells>
  void write(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
    out_ << '\n';
  }

 private:
  static std::string cell(double v) { return format_exact(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I v) { return std::to_string(v); }

  std::ofstream out_;
};

inline nlohmann::json grid_to_json(const Grid& g) {
  return {{"x_lo", g.domain().lo().x}, {"y_lo", g.domain().lo().y}, {"x_hi", g.domain().hi().x},
          {"y_hi", g.domain().hi().y}, {"nx", g.nx()},             {"ny", g.ny()}};
}

inline Grid grid_from_json(const nlohmann::json& j) {
  return Grid(Domain({j.at("x_lo").get<double>(), j.at("y_lo").get<double>()},
                     {j.at("x_hi").get<double>(), j.at("y_hi").get<double>()}),
              j.at("nx").get<std::size_t>(), j.at("ny").get<std::size_t>());
}

/// Writes `<stem>.csv` (x, y, value per node) and `<stem>.json` (grid and time).
inline void write_layer(const std::filesystem::path& stem, const Layer& layer, double t, std::size_t index) {
  const Grid& g = layer.grid();
  {
    CsvWriter csv(stem.string() + ".csv", {"x", "y", "value"});
    for (std::size_t k = 0; k < g.num_nodes(); ++k) {
      const Point p = g.node(k);
      csv.write(p.x, p.y, layer[k]);
    }
  }
  std::ofstream js(stem.string() + ".json");
  if (!js) throw Error("cannot open " + stem.string() + ".json for writing");
  const nlohmann::json header = {{"grid", grid_to_json(g)}, {"time", t}, {"index", index}, {"layout", "x,y,value"}};
  js << header.dump(2) << '\n';
}

struct LayerRecord {
  Layer layer;
  double time = 0.0;
  std::size_t index = 0;
};

inline double parse_double(std::string_view s, const std::string& context) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw Error(context + ": cannot parse '" + std::string(s) + "' as a number");
  }
  return v;
}

/// Reads a layer written by write_layer.
inline LayerRecord read_layer(const std::filesystem::path& stem) {
  std::ifstream js(stem.string() + ".json");
  if (!js) throw Error("cannot open " + stem.string() + ".json");
  const nlohmann::json header = nlohmann::json::parse(js);
  const Grid g = grid_from_json(header.at("grid"));
  std::ifstream csv(stem.string() + ".csv");
  if (!csv) throw Error("cannot open " + stem.string() + ".csv");
  std::string line;
  std::getline(csv, line);
  std::vector<double> values;
  values.reserve(g.num_nodes());
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto c = line.rfind(',');
    if (c == std::string::npos) throw Error(stem.string() + ".csv: malformed row");
    values.push_back(parse_double(std::string_view(line).substr(c + 1), stem.string() + ".csv"));
  }
  return {Layer(g, std::move(values)), header.at("time").get<double>(), header.at("index").get<std::size_t>()};
}

}  // namespace translab

#endif  // TRANSLAB_IO_HPP
