#include "tactile/depth_io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace tactile::haptic {

namespace {

void skip_space_and_comments(std::istream& in) {
  while (true) {
    const int ch = in.peek();
    if (ch == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

long read_header_number(std::istream& in, const char* what) {
  skip_space_and_comments(in);
  std::string token;
  while (std::isdigit(in.peek())) token.push_back(static_cast<char>(in.get()));
  long value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
    throw PgmFormatError(std::string("PGM header: bad ") + what);
  }
  return value;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigFormatError("config: '" + key + "' needs an integer, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigFormatError("config: '" + key + "' needs true/false, got '" + value + "'");
}

}  // namespace

DepthFrame read_pgm(std::istream& in) {
  char magic[2] = {};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') {
    throw PgmFormatError("not a binary PGM (missing P5 magic)");
  }
  const long width = read_header_number(in, "width");
  const long height = read_header_number(in, "height");
  const long maxval = read_header_number(in, "maxval");
  if (width <= 0 || height <= 0 || width > 1 << 15 || height > 1 << 15) {
    throw PgmFormatError("PGM header: unsupported dimensions");
  }
  if (maxval <= 0 || maxval > 65535) {
    throw PgmFormatError("PGM header: maxval must be in [1, 65535]");
  }
  // Exactly one whitespace octet separates the header from the raster.
  const int sep = in.get();
  if (sep != ' ' && sep != '\t' && sep != '\n' && sep != '\r') {
    throw PgmFormatError("PGM header: missing raster separator");
  }

  DepthFrame frame;
  frame.width = static_cast<int>(width);
  frame.height = static_cast<int>(height);
  const auto count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  frame.depths.resize(count);
  const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(count * bytes_per_sample);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw PgmFormatError("PGM raster truncated");
  }
  for (std::size_t i = 0; i < count; ++i) {
    frame.depths[i] = bytes_per_sample == 2
                          ? static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1])
                          : raw[i];
  }
  return frame;
}

DepthFrame read_pgm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_pgm(in);
}

void write_pgm(std::ostream& out, const DepthFrame& frame) {
  out << "P5\n" << frame.width << ' ' << frame.height << "\n65535\n";
  std::string raster;
  raster.reserve(frame.depths.size() * 2);
  for (auto d : frame.depths) {
    raster.push_back(static_cast<char>(d >> 8));
    raster.push_back(static_cast<char>(d & 0xFF));
  }
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
}

void write_pgm_file(const std::filesystem::path& path, const DepthFrame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_pgm(out, frame);
  if (!out) throw IoError("write failed for " + path.string());
}

MappingConfig parse_config(std::istream& in) {
  std::map<std::string, std::string> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigFormatError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!entries.emplace(key, value).second) {
      throw ConfigFormatError("config: duplicate key '" + key + "'");
    }
  }

  MappingConfig config;
  if (auto it = entries.find("mode"); it != entries.end()) {
    try {
      config = parse_mode(it->second) == Mode::Indoor ? MappingConfig::indoor()
                                                      : MappingConfig::outdoor();
    } catch (const std::invalid_argument& e) {
      throw ConfigFormatError(std::string("config: ") + e.what());
    }
    entries.erase(it);
  }
  for (const auto& [key, value] : entries) {
    if (key == "near_clip_mm") {
      config.near_clip_mm = parse_integer<std::uint16_t>(key, value);
    } else if (key == "far_clip_mm") {
      config.far_clip_mm = parse_integer<std::uint16_t>(key, value);
    } else if (key == "levels") {
      config.levels = parse_integer<int>(key, value);
    } else if (key == "max_duty") {
      config.max_duty = parse_integer<std::uint16_t>(key, value);
    } else if (key == "nodata_max") {
      config.nodata_max = parse_bool(key, value);
    } else if (key == "aggregation") {
      try {
        config.aggregation = parse_aggregation(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigFormatError(std::string("config: ") + e.what());
      }
    } else {
      throw ConfigFormatError("config: unknown key '" + key + "'");
    }
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigFormatError(e.what());
  }
  return config;
}

MappingConfig read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_config(in);
}

std::string format_config(const MappingConfig& config) {
  std::ostringstream out;
  out << "mode = " << to_string(config.mode) << '\n'
      << "near_clip_mm = " << config.near_clip_mm << '\n'
      << "far_clip_mm = " << config.far_clip_mm << '\n'
      << "levels = " << config.levels << '\n'
      << "aggregation = " << to_string(config.aggregation) << '\n'
      << "max_duty = " << config.max_duty << '\n'
      << "nodata_max = " << (config.nodata_max ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace tactile::haptic
