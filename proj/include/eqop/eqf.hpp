#pragma once

#include "eqop/tensor_field.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace eqop {

/// One EQF record: an ASCII header line
///
///   EQF1 dim=<d> l=<l> shape=<n1,n2[,n3]> spacing=<s1,...> origin=<o1,...>
///        boundary=<zero|periodic>[ kind=<sampled|stencil>]\n
///
/// (on one line) followed by the components as little-endian float64,
/// component-major and row-major within each component. The `kind` token is
/// present only for kernels.
struct EqfRecord {
  Field field;
  std::optional<std::string> kind;
};

std::string eqf_header(const Field& f, const std::optional<std::string>& kind = std::nullopt);

void write_eqf(std::ostream& out, const Field& f,
               const std::optional<std::string>& kind = std::nullopt);
EqfRecord read_eqf(std::istream& in);

void save_eqf(const std::string& path, const Field& f,
              const std::optional<std::string>& kind = std::nullopt);
EqfRecord load_eqf(const std::string& path);

/// Header grammar shared with manifests: "shape=16,16,16 spacing=1,1,1 ..."
/// tokens parsed into a Grid.
Grid parse_grid_tokens(const std::string& dim, const std::string& shape,
                       const std::string& spacing, const std::string& origin,
                       const std::string& boundary);

}  // namespace eqop
