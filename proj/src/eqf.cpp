#include "eqop/eqf.hpp"

#include "eqop/text.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace eqop {

namespace {

constexpr std::size_t kMaxHeader = 4096;

std::uint64_t to_little(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::little) {
    return bits;
  } else {
    std::uint64_t out = 0;
    for (int b = 0; b < 8; ++b) out |= ((bits >> (8 * b)) & 0xffu) << (8 * (7 - b));
    return out;
  }
}

template <typename T>
std::string join_axes(const std::array<T, 3>& xs, int dim) {
  std::string out;
  for (int a = 0; a < dim; ++a) {
    if (a) out += ',';
    if constexpr (std::is_floating_point_v<T>)
      out += format_double(xs[a]);
    else
      out += std::to_string(xs[a]);
  }
  return out;
}

}  // namespace

std::string eqf_header(const Field& f, const std::optional<std::string>& kind) {
  const Grid& g = f.grid();
  std::string h = "EQF1 dim=" + std::to_string(g.dim) + " l=" + std::to_string(f.l()) +
                  " shape=" + join_axes(g.shape, g.dim) +
                  " spacing=" + join_axes(g.spacing, g.dim) +
                  " origin=" + join_axes(g.origin, g.dim) + " boundary=" + to_string(g.boundary);
  if (kind) h += " kind=" + *kind;
  return h + "\n";
}

void write_eqf(std::ostream& out, const Field& f, const std::optional<std::string>& kind) {
  const std::string header = eqf_header(f, kind);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  const auto& data = f.data();  // row-major: component-major order
  std::vector<std::uint64_t> payload(static_cast<std::size_t>(data.size()));
  for (Index i = 0; i < data.size(); ++i)
    payload[static_cast<std::size_t>(i)] = to_little(std::bit_cast<std::uint64_t>(data.data()[i]));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(std::uint64_t)));
  if (!out) throw FormatError("failed to write EQF payload");
}

Grid parse_grid_tokens(const std::string& dim_s, const std::string& shape_s,
                       const std::string& spacing_s, const std::string& origin_s,
                       const std::string& boundary_s) {
  const auto dim = parse_int(dim_s);
  std::vector<Index> shape;
  for (auto n : parse_ints(shape_s)) shape.push_back(static_cast<Index>(n));
  const auto spacing = parse_doubles(spacing_s);
  const auto origin = parse_doubles(origin_s);
  if (static_cast<long long>(shape.size()) != dim || static_cast<long long>(spacing.size()) != dim ||
      static_cast<long long>(origin.size()) != dim)
    throw FormatError("grid tokens disagree with dim=" + dim_s);
  try {
    return Grid::make(shape, spacing, origin, boundary_from_string(boundary_s));
  } catch (const RuleError& e) {
    throw FormatError(std::string("invalid grid: ") + e.what());
  }
}

EqfRecord read_eqf(std::istream& in) {
  std::string header;
  char c = 0;
  while (in.get(c) && c != '\n') {
    header.push_back(c);
    if (header.size() > kMaxHeader) throw FormatError("EQF header too long");
  }
  if (c != '\n') throw FormatError("truncated EQF header");

  const auto tokens = split(header, ' ');
  if (tokens.empty() || tokens[0] != "EQF1") throw FormatError("not an EQF1 file");
  std::map<std::string, std::string> kv;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const auto eq = tokens[i].find('=');
    if (eq == std::string::npos) throw FormatError("bad EQF header token '" + tokens[i] + "'");
    kv[tokens[i].substr(0, eq)] = tokens[i].substr(eq + 1);
  }
  for (const char* key : {"dim", "l", "shape", "spacing", "origin", "boundary"})
    if (!kv.count(key)) throw FormatError(std::string("EQF header missing '") + key + "'");

  const Grid grid =
      parse_grid_tokens(kv["dim"], kv["shape"], kv["spacing"], kv["origin"], kv["boundary"]);
  const auto l = static_cast<int>(parse_int(kv["l"]));
  int comps = 0;
  try {
    comps = components_for(l, grid.dim);
  } catch (const RuleError& e) {
    throw FormatError(e.what());
  }

  const auto count = static_cast<std::size_t>(comps * grid.size());
  std::vector<std::uint64_t> payload(count);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(count * sizeof(std::uint64_t)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(std::uint64_t))
    throw FormatError("truncated EQF payload");

  Field::Data data(comps, grid.size());
  for (std::size_t i = 0; i < count; ++i)
    data.data()[i] = std::bit_cast<double>(to_little(payload[i]));

  EqfRecord rec{Field(grid, l, std::move(data)), std::nullopt};
  if (kv.count("kind")) rec.kind = kv["kind"];
  return rec;
}

void save_eqf(const std::string& path, const Field& f, const std::optional<std::string>& kind) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path + "'");
  write_eqf(out, f, kind);
}

EqfRecord load_eqf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return read_eqf(in);
}

}  // namespace eqop
