#include "cortexk/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "binary writers assume a little-endian host");

namespace cortexk {

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return is;
}

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is, const fs::path& path) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw IoError("truncated file " + path.string());
  return v;
}

void expect_eof(std::istream& is, const fs::path& path) {
  is.peek();
  if (!is.eof()) throw IoError("trailing bytes in " + path.string());
}

void check_write(std::ostream& os, const fs::path& path) {
  if (!os) throw IoError("write failed for " + path.string());
}

}  // namespace

void write_kgrid(const fs::path& path, const FeatureGrid& grid,
                 const Eigen::ArrayXd& values) {
  if (values.size() != grid.size())
    throw IoError("kgrid value count does not match the grid");
  if (grid.dim() < 1 || grid.dim() > 255)
    throw IoError("kgrid supports 1..255 axes");
  std::ofstream os = open_out(path);
  os.write("KGRD", 4);
  put<std::uint8_t>(os, 1);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(grid.dim()));
  for (int a = 0; a < grid.dim(); ++a) {
    const Axis& ax = grid.axis(a);
    if (ax.name.empty() || ax.name.size() > 255)
      throw IoError("kgrid axis names need 1..255 bytes");
    put<std::uint8_t>(os, static_cast<std::uint8_t>(ax.name.size()));
    os.write(ax.name.data(), static_cast<std::streamsize>(ax.name.size()));
    put<double>(os, ax.min);
    put<double>(os, ax.step);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(ax.count));
    put<std::uint8_t>(os, ax.periodic ? 1 : 0);
  }
  os.write(reinterpret_cast<const char*>(values.data()),
           static_cast<std::streamsize>(sizeof(double) * values.size()));
  check_write(os, path);
}

KGrid read_kgrid(const fs::path& path) {
  std::ifstream is = open_in(path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "KGRD")
    throw IoError(path.string() + " is not a KGRID file");
  const auto version = get<std::uint8_t>(is, path);
  if (version != 1)
    throw IoError("unsupported KGRID version " + std::to_string(version));
  const auto naxes = get<std::uint8_t>(is, path);
  if (naxes == 0) throw IoError(path.string() + " declares zero axes");
  std::vector<Axis> axes;
  for (int a = 0; a < naxes; ++a) {
    Axis ax;
    const auto len = get<std::uint8_t>(is, path);
    ax.name.resize(len);
    is.read(ax.name.data(), len);
    if (!is) throw IoError("truncated file " + path.string());
    ax.min = get<double>(is, path);
    ax.step = get<double>(is, path);
    const auto count = get<std::uint32_t>(is, path);
    if (count == 0 || count > (1u << 24))
      throw IoError(path.string() + " declares an implausible axis size");
    ax.count = static_cast<int>(count);
    ax.periodic = get<std::uint8_t>(is, path) != 0;
    axes.push_back(std::move(ax));
  }
  KGrid out;
  try {
    out.grid = FeatureGrid(std::move(axes));
  } catch (const ConfigError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  out.values.resize(out.grid.size());
  is.read(reinterpret_cast<char*>(out.values.data()),
          static_cast<std::streamsize>(sizeof(double) * out.values.size()));
  if (!is) throw IoError("truncated file " + path.string());
  expect_eof(is, path);
  return out;
}

void write_fbank(const fs::path& path,
                 const std::vector<Eigen::MatrixXcd>& filters, double delta) {
  if (filters.empty()) throw IoError("refusing to write an empty bank");
  if (!(delta > 0.0)) throw IoError("bank spacing must be positive");
  const Index h = filters.front().rows();
  const Index w = filters.front().cols();
  bool complex_valued = false;
  for (const Eigen::MatrixXcd& f : filters) {
    if (f.rows() != h || f.cols() != w)
      throw IoError("bank filters must share one support size");
    if ((f.imag().array() != 0.0).any()) complex_valued = true;
  }
  std::ofstream os = open_out(path);
  os.write("FBK1", 4);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(filters.size()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(h));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(w));
  put<std::uint8_t>(os, complex_valued ? 1 : 0);
  put<double>(os, delta);
  for (const Eigen::MatrixXcd& f : filters) {
    for (Index r = 0; r < h; ++r) {
      for (Index c = 0; c < w; ++c) {
        put<double>(os, f(r, c).real());
        if (complex_valued) put<double>(os, f(r, c).imag());
      }
    }
  }
  check_write(os, path);
}

RawBank read_fbank(const fs::path& path) {
  std::ifstream is = open_in(path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "FBK1")
    throw IoError(path.string() + " is not an FBANK file");
  const auto count = get<std::uint32_t>(is, path);
  const auto h = get<std::uint32_t>(is, path);
  const auto w = get<std::uint32_t>(is, path);
  if (count == 0 || h == 0 || w == 0 || count > (1u << 20) ||
      h > (1u << 14) || w > (1u << 14))
    throw IoError(path.string() + " declares implausible bank dimensions");
  const bool complex_valued = get<std::uint8_t>(is, path) != 0;
  RawBank bank;
  bank.delta = get<double>(is, path);
  if (!(bank.delta > 0.0))
    throw IoError(path.string() + " has a non-positive spacing");
  bank.filters.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Eigen::MatrixXcd f(h, w);
    for (std::uint32_t r = 0; r < h; ++r) {
      for (std::uint32_t c = 0; c < w; ++c) {
        const double re = get<double>(is, path);
        const double im = complex_valued ? get<double>(is, path) : 0.0;
        f(r, c) = Complex(re, im);
      }
    }
    bank.filters.push_back(std::move(f));
  }
  expect_eof(is, path);
  return bank;
}

namespace {

Eigen::MatrixXcd read_csv_matrix(const fs::path& path) {
  std::ifstream is = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    bool blank = true;
    for (char ch : line)
      if (!std::isspace(static_cast<unsigned char>(ch))) blank = false;
    if (blank) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() &&
               std::isspace(static_cast<unsigned char>(cell[used])))
          ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw IoError(path.string() + ": bad CSV cell '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(path.string() + ": ragged CSV rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty())
    throw IoError(path.string() + ": empty CSV matrix");
  Eigen::MatrixXcd m(rows.size(), rows.front().size());
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return m;
}

}  // namespace

RawBank read_csv_bank(const fs::path& manifest_path) {
  std::ifstream is = open_in(manifest_path);
  RawBank bank;
  bool have_delta = false;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t");
    line = line.substr(first, last - first + 1);
    const size_t eq = line.find('=');
    if (eq != std::string::npos) {
      std::string key = line.substr(0, eq);
      key.erase(key.find_last_not_of(" \t") + 1);
      if (key != "delta")
        throw IoError(manifest_path.string() + ":" + std::to_string(lineno) +
                      ": unknown key '" + key + "'");
      std::string val = line.substr(eq + 1);
      val.erase(0, val.find_first_not_of(" \t"));
      try {
        bank.delta = std::stod(val);
      } catch (const std::exception&) {
        throw IoError(manifest_path.string() + ":" + std::to_string(lineno) +
                      ": bad delta value '" + val + "'");
      }
      have_delta = true;
      continue;
    }
    bank.filters.push_back(read_csv_matrix(manifest_path.parent_path() / line));
  }
  if (!have_delta)
    throw IoError(manifest_path.string() + ": missing 'delta =' line");
  if (!(bank.delta > 0.0))
    throw IoError(manifest_path.string() + ": delta must be positive");
  if (bank.filters.empty())
    throw IoError(manifest_path.string() + ": no filter files listed");
  const Index h = bank.filters.front().rows();
  const Index w = bank.filters.front().cols();
  for (const Eigen::MatrixXcd& f : bank.filters)
    if (f.rows() != h || f.cols() != w)
      throw IoError(manifest_path.string() +
                    ": filters must share one support size");
  return bank;
}

void write_pgm(const fs::path& path, const RasterGray& img) {
  if (img.width < 1 || img.height < 1 ||
      img.pixels.size() != static_cast<size_t>(img.width) * img.height)
    throw IoError("inconsistent raster dimensions");
  std::ofstream os = open_out(path);
  os << "P5\n" << img.width << " " << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.pixels.data()),
           static_cast<std::streamsize>(img.pixels.size()));
  check_write(os, path);
}

namespace {

/// Next whitespace-separated header token, skipping '#' comment lines.
std::string pnm_token(std::istream& is, const fs::path& path) {
  std::string tok;
  int ch = is.get();
  while (is) {
    if (ch == '#') {
      while (is && ch != '\n') ch = is.get();
    } else if (std::isspace(ch)) {
      ch = is.get();
    } else {
      break;
    }
  }
  while (is && !std::isspace(ch) && ch != '#') {
    tok.push_back(static_cast<char>(ch));
    ch = is.get();
  }
  if (ch == '#') is.unget();
  if (tok.empty()) throw IoError(path.string() + ": truncated PNM header");
  return tok;
}

int pnm_int(std::istream& is, const fs::path& path, int lo, int hi,
            const char* what) {
  const std::string tok = pnm_token(is, path);
  int v = 0;
  try {
    size_t used = 0;
    v = std::stoi(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
  } catch (const std::exception&) {
    throw IoError(path.string() + ": bad PNM " + what + " '" + tok + "'");
  }
  if (v < lo || v > hi)
    throw IoError(path.string() + ": PNM " + what + " out of range");
  return v;
}

}  // namespace

RasterGray read_pgm(const fs::path& path) {
  std::ifstream is = open_in(path);
  if (pnm_token(is, path) != "P5")
    throw IoError(path.string() + " is not a binary PGM (P5) file");
  RasterGray img;
  img.width = pnm_int(is, path, 1, 1 << 16, "width");
  img.height = pnm_int(is, path, 1, 1 << 16, "height");
  const int maxval = pnm_int(is, path, 1, 65535, "maxval");
  if (maxval > 255)
    throw IoError(path.string() + ": 16-bit PGM data is not supported");
  // the token scan has already consumed the single whitespace byte that
  // separates the maxval from the payload
  img.pixels.resize(static_cast<size_t>(img.width) * img.height);
  is.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (!is) throw IoError("truncated file " + path.string());
  if (maxval != 255)
    for (std::uint8_t& p : img.pixels)
      p = static_cast<std::uint8_t>(
          std::llround(255.0 * static_cast<double>(p) / maxval));
  return img;
}

void write_ppm(const fs::path& path, const RasterRGB& img) {
  if (img.width < 1 || img.height < 1 ||
      img.pixels.size() != static_cast<size_t>(img.width) * img.height * 3)
    throw IoError("inconsistent raster dimensions");
  std::ofstream os = open_out(path);
  os << "P6\n" << img.width << " " << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.pixels.data()),
           static_cast<std::streamsize>(img.pixels.size()));
  check_write(os, path);
}

RasterGray rasterize(const Projection2D& proj, double lo, double hi) {
  RasterGray img;
  img.width = proj.width();
  img.height = proj.height();
  img.pixels.resize(static_cast<size_t>(img.width) * img.height);
  const double span = hi - lo;
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      double v = span > 0.0 ? (proj.values(r, c) - lo) / span : 0.0;
      v = std::clamp(v, 0.0, 1.0);
      img.pixels[static_cast<size_t>(r) * img.width + c] =
          static_cast<std::uint8_t>(std::llround(255.0 * v));
    }
  }
  return img;
}

RasterGray rasterize(const Projection2D& proj) {
  return rasterize(proj, proj.values.minCoeff(), proj.values.maxCoeff());
}

ImageGray image_from_raster(const RasterGray& img, double spacing) {
  if (!(spacing > 0.0)) throw ConfigError("image spacing must be positive");
  ImageGray out;
  out.spacing = spacing;
  out.values.resize(img.height, img.width);
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c)
      out.values(r, c) =
          img.pixels[static_cast<size_t>(r) * img.width + c] / 255.0;
  return out;
}

void write_csv(const fs::path& path, const Projection2D& proj) {
  std::ofstream os = open_out(path);
  char buf[64];
  for (int r = 0; r < proj.height(); ++r) {
    for (int c = 0; c < proj.width(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", proj.values(r, c));
      if (c) os << ',';
      os << buf;
    }
    os << '\n';
  }
  check_write(os, path);
}

std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t file_hash(const fs::path& path) {
  std::ifstream is = open_in(path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (is) {
    is.read(buf, sizeof buf);
    const std::streamsize got = is.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

void write_manifest(const fs::path& path, const std::string& resolved_config,
                    const std::vector<fs::path>& outputs) {
  std::vector<std::pair<std::string, std::uint64_t>> rows;
  rows.reserve(outputs.size());
  for (const fs::path& p : outputs)
    rows.emplace_back(p.filename().string(), file_hash(p));
  std::sort(rows.begin(), rows.end());
  std::ofstream os = open_out(path);
  os << "[config]\n" << resolved_config;
  if (!resolved_config.empty() && resolved_config.back() != '\n') os << '\n';
  os << "[outputs]\n";
  char hex[32];
  for (const auto& [name, h] : rows) {
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(h));
    os << name << " fnv1a64=" << hex << '\n';
  }
  check_write(os, path);
}

}  // namespace cortexk
