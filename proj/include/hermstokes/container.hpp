#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hermstokes/operators.hpp"

namespace hermstokes {

/** @brief One named f64 array inside a container file. */
struct ContainerArray {
  std::string name;
  std::vector<long> shape;
  Vec data;  ///< flattened column-major for matrices

  long element_count() const {
    long n = 1;
    for (long s : shape) n *= s;
    return n;
  }
};

struct ContainerFile {
  int n_modes = 0;
  int n_quad = 0;
  std::vector<ContainerArray> arrays;

  const ContainerArray& get(const std::string& name) const {
    for (const ContainerArray& a : arrays)
      if (a.name == name) return a;
    throw io_error("container: missing array '" + name + "'");
  }
};

namespace detail {

inline void append_le_f64(std::string& out, const double* src, long count) {
  static_assert(sizeof(double) == 8);
  const std::size_t base = out.size();
  out.resize(base + static_cast<std::size_t>(count) * 8);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data() + base, src, static_cast<std::size_t>(count) * 8);
  } else {
    for (long i = 0; i < count; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, src + i, 8);
      for (int b = 0; b < 8; ++b)
        out[base + static_cast<std::size_t>(i) * 8 + b] =
            static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
  }
}

inline void read_le_f64(const char* src, double* dst, long count) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(dst, src, static_cast<std::size_t>(count) * 8);
  } else {
    for (long i = 0; i < count; ++i) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b)
        bits |= static_cast<std::uint64_t>(
                    static_cast<unsigned char>(src[i * 8 + b]))
                << (8 * b);
      std::memcpy(dst + i, &bits, 8);
    }
  }
}

}  // namespace detail

/**
 * @brief Write a container file: one UTF-8 JSON header line
 * {basis:{n_modes,n_quad}, dtype:"f64-le", names:[...], shapes:[[...],...]}
 * followed by the raw little-endian binary64 payloads in header order.
 */
inline void write_container(const std::string& path, int n_modes, int n_quad,
                            const std::vector<ContainerArray>& arrays) {
  nlohmann::json header;
  header["basis"] = {{"n_modes", n_modes}, {"n_quad", n_quad}};
  header["dtype"] = "f64-le";
  std::vector<std::string> names;
  std::vector<std::vector<long>> shapes;
  for (const ContainerArray& a : arrays) {
    if (a.data.size() != a.element_count())
      throw validation_error("write_container: shape/data mismatch for '" + a.name + "'");
    names.push_back(a.name);
    shapes.push_back(a.shape);
  }
  header["names"] = names;
  header["shapes"] = shapes;

  std::string blob = header.dump();
  blob.push_back('\n');
  for (const ContainerArray& a : arrays)
    detail::append_le_f64(blob, a.data.data(), a.data.size());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("write_container: cannot open '" + path + "'");
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw io_error("write_container: short write to '" + path + "'");
}

inline ContainerFile read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("read_container: cannot open '" + path + "'");
  std::string header_line;
  if (!std::getline(in, header_line))
    throw io_error("read_container: missing header line in '" + path + "'");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    throw io_error("read_container: bad header in '" + path + "': " + e.what());
  }
  ContainerFile file;
  try {
    if (header.at("dtype").get<std::string>() != "f64-le")
      throw io_error("read_container: unsupported dtype in '" + path + "'");
    file.n_modes = header.at("basis").at("n_modes").get<int>();
    file.n_quad = header.at("basis").at("n_quad").get<int>();
    const auto names = header.at("names").get<std::vector<std::string>>();
    const auto shapes = header.at("shapes").get<std::vector<std::vector<long>>>();
    if (names.size() != shapes.size())
      throw io_error("read_container: names/shapes length mismatch in '" + path + "'");
    for (std::size_t i = 0; i < names.size(); ++i)
      file.arrays.push_back({names[i], shapes[i], Vec()});
  } catch (const nlohmann::json::exception& e) {
    throw io_error("read_container: bad header fields in '" + path + "': " + e.what());
  }

  std::string payload((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  long expected = 0;
  for (const ContainerArray& a : file.arrays) expected += a.element_count();
  if (static_cast<long>(payload.size()) != expected * 8)
    throw io_error("read_container: payload size mismatch in '" + path + "'");

  long offset = 0;
  for (ContainerArray& a : file.arrays) {
    const long n = a.element_count();
    a.data.resize(n);
    detail::read_le_f64(payload.data() + offset * 8, a.data.data(), n);
    offset += n;
  }
  return file;
}

// ------------------------------------------------------------------ checkpoints

struct Checkpoint {
  SpectralField state;
  int step = 0;
  double t = 0.0;
};

inline void save_checkpoint(const std::string& path, const SpectralField& u, int step,
                            double t) {
  const int n = u.basis->n_modes;
  std::vector<ContainerArray> arrays;
  arrays.push_back({"state", {3, n, n, n}, u.coeffs});
  arrays.push_back({"time", {1}, Vec::Constant(1, t)});
  arrays.push_back({"step", {1}, Vec::Constant(1, static_cast<double>(step))});
  write_container(path, n, u.basis->n_quad, arrays);
}

inline Checkpoint load_checkpoint(const std::string& path,
                                  std::shared_ptr<const BasisTable> basis) {
  ContainerFile file = read_container(path);
  if (file.n_modes != basis->n_modes || file.n_quad != basis->n_quad)
    throw validation_error("load_checkpoint: basis dimensions do not match '" + path +
                           "'");
  const ContainerArray& st = file.get("state");
  const int n = basis->n_modes;
  if (st.shape != std::vector<long>{3, n, n, n} ||
      st.data.size() != 3L * n * n * n)
    throw io_error("load_checkpoint: bad state shape in '" + path + "'");
  Checkpoint ck;
  ck.state = SpectralField::zero(basis);
  ck.state.coeffs = st.data;
  ck.state.div_free = check_div_free(ck.state);
  ck.t = file.get("time").data[0];
  ck.step = static_cast<int>(file.get("step").data[0]);
  return ck;
}

// ------------------------------------------------------- operator cache files

/**
 * @brief Persist the dense Galerkin machinery so later runs skip assembly and
 * the eigendecompositions. Records n_modes, n_quad, d_df, lambda1_B, muN_A,
 * and the constant a together with the delta it was computed for.
 */
inline void save_operator_cache(const std::string& path, const OperatorCache& cache,
                                double delta) {
  const double a = constant_a(cache, delta);
  const long d = static_cast<long>(cache.d_df);
  auto mat = [](const char* name, const Mat& M) {
    return ContainerArray{name,
                          {static_cast<long>(M.rows()), static_cast<long>(M.cols())},
                          Eigen::Map<const Vec>(M.data(), M.size())};
  };
  Vec scalars(7);
  scalars << cache.basis->n_modes, cache.basis->n_quad, static_cast<double>(d),
      cache.lambda1_B, cache.muN_A, a, delta;
  std::vector<ContainerArray> arrays;
  arrays.push_back({"scalars", {7}, scalars});
  arrays.push_back(mat("P", cache.P));
  arrays.push_back(mat("A_df", cache.A_df));
  arrays.push_back(mat("B_df", cache.B_df));
  arrays.push_back({"eig_A_values", {d}, cache.eig_A.values});
  arrays.push_back(mat("eig_A_vectors", cache.eig_A.vectors));
  arrays.push_back({"eig_B_values", {d}, cache.eig_B.values});
  arrays.push_back(mat("eig_B_vectors", cache.eig_B.vectors));
  arrays.push_back({"eig_AB_values", {d}, cache.eig_AB_sym.values});
  arrays.push_back(mat("eig_AB_vectors", cache.eig_AB_sym.vectors));
  arrays.push_back(mat("sqrtA", cache.sqrtA));
  arrays.push_back(mat("inv_sqrtA", cache.inv_sqrtA));
  write_container(path, cache.basis->n_modes, cache.basis->n_quad, arrays);
}

namespace detail {

inline Mat container_matrix(const ContainerFile& file, const std::string& name) {
  const ContainerArray& a = file.get(name);
  if (a.shape.size() != 2) throw io_error("container: '" + name + "' is not a matrix");
  return Eigen::Map<const Mat>(a.data.data(), a.shape[0], a.shape[1]);
}

}  // namespace detail

/** @brief Load a cache file written by save_operator_cache; returns (cache, a, delta). */
inline std::tuple<OperatorCache, double, double> load_operator_cache(
    const std::string& path) {
  ContainerFile file = read_container(path);
  const Vec& s = file.get("scalars").data;
  if (s.size() != 7) throw io_error("load_operator_cache: bad scalars in '" + path + "'");
  const int n_modes = static_cast<int>(s[0]);
  const int n_quad = static_cast<int>(s[1]);
  const long d = static_cast<long>(s[2]);
  if (n_modes != file.n_modes || n_quad != file.n_quad)
    throw io_error("load_operator_cache: inconsistent header in '" + path + "'");

  std::shared_ptr<const BasisTable> basis = build_basis(n_modes, n_quad);
  OperatorCache cache{basis,
                      Projector(basis),
                      d,
                      detail::container_matrix(file, "P"),
                      detail::container_matrix(file, "A_df"),
                      detail::container_matrix(file, "B_df"),
                      {file.get("eig_A_values").data,
                       detail::container_matrix(file, "eig_A_vectors")},
                      {file.get("eig_B_values").data,
                       detail::container_matrix(file, "eig_B_vectors")},
                      {file.get("eig_AB_values").data,
                       detail::container_matrix(file, "eig_AB_vectors")},
                      detail::container_matrix(file, "sqrtA"),
                      detail::container_matrix(file, "inv_sqrtA"),
                      s[3],
                      s[4]};
  if (cache.P.cols() != d || cache.A_df.rows() != d || cache.eig_A.values.size() != d)
    throw io_error("load_operator_cache: dimension mismatch in '" + path + "'");
  if (cache.lambda1_B != cache.eig_B.values[0] || cache.muN_A != cache.eig_A.values[0])
    throw io_error("load_operator_cache: scalar/spectrum mismatch in '" + path + "'");
  return {std::move(cache), s[5], s[6]};
}

}  // namespace hermstokes
