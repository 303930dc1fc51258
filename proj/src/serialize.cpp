#include "qml/serialize.hpp"

#include <fstream>

namespace qml {

namespace {
constexpr char kMagic[8] = {'q', 'm', 'l', 'o', 'p', '0', '1', '\n'};
}

void save_operator(const DenseOperator& op, const std::filesystem::path& file) {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw Error("io-error", "cannot open " + file.string());
  f.write(kMagic, sizeof(kMagic));
  std::uint64_t n = op.sites.size();
  f.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (int s : op.sites) {
    std::int64_t v = s;
    f.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  for (int d : op.dims) {
    std::int64_t v = d;
    f.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  std::uint64_t dim = op.mat.rows();
  f.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
  // row-major complex doubles
  for (long i = 0; i < op.mat.rows(); ++i)
    for (long j = 0; j < op.mat.cols(); ++j) {
      double re = op.mat(i, j).real(), im = op.mat(i, j).imag();
      f.write(reinterpret_cast<const char*>(&re), sizeof(re));
      f.write(reinterpret_cast<const char*>(&im), sizeof(im));
    }
}

DenseOperator load_operator(const std::filesystem::path& file) {
  std::ifstream f(file, std::ios::binary);
  if (!f) throw Error("io-error", "cannot open " + file.string());
  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw Error("io-error", "bad operator container header");
  std::uint64_t n;
  f.read(reinterpret_cast<char*>(&n), sizeof(n));
  std::vector<int> sites(n), dims(n);
  for (auto& s : sites) {
    std::int64_t v;
    f.read(reinterpret_cast<char*>(&v), sizeof(v));
    s = static_cast<int>(v);
  }
  for (auto& d : dims) {
    std::int64_t v;
    f.read(reinterpret_cast<char*>(&v), sizeof(v));
    d = static_cast<int>(v);
  }
  std::uint64_t dim;
  f.read(reinterpret_cast<char*>(&dim), sizeof(dim));
  Mat m(dim, dim);
  for (std::uint64_t i = 0; i < dim; ++i)
    for (std::uint64_t j = 0; j < dim; ++j) {
      double re, im;
      f.read(reinterpret_cast<char*>(&re), sizeof(re));
      f.read(reinterpret_cast<char*>(&im), sizeof(im));
      m(i, j) = {re, im};
    }
  if (!f) throw Error("io-error", "truncated operator container");
  return {Region(sites), dims, std::move(m)};
}

Json operator_to_json(const DenseOperator& op) {
  Json j;
  j["sites"] = op.sites.sites();
  j["dims"] = op.dims;
  Json re = Json::array(), im = Json::array();
  for (long i = 0; i < op.mat.rows(); ++i) {
    Json rrow = Json::array(), irow = Json::array();
    for (long k = 0; k < op.mat.cols(); ++k) {
      rrow.push_back(op.mat(i, k).real());
      irow.push_back(op.mat(i, k).imag());
    }
    re.push_back(rrow);
    im.push_back(irow);
  }
  j["re"] = re;
  j["im"] = im;
  return j;
}

DenseOperator operator_from_json(const Json& j) {
  std::vector<int> sites = j.at("sites").get<std::vector<int>>();
  std::vector<int> dims = j.at("dims").get<std::vector<int>>();
  const Json& re = j.at("re");
  long dim = re.size();
  Mat m(dim, dim);
  bool has_im = j.contains("im");
  for (long i = 0; i < dim; ++i)
    for (long k = 0; k < dim; ++k)
      m(i, k) = {re[i][k].get<double>(),
                 has_im ? j["im"][i][k].get<double>() : 0.0};
  return {Region(sites), dims, std::move(m)};
}

std::vector<LocalTerm> terms_from_json(const Json& j) {
  std::vector<LocalTerm> out;
  for (const auto& tj : j) {
    LocalTerm t;
    t.support = Region(tj.at("sites").get<std::vector<int>>());
    const Json& re = tj.at("re");
    long dim = re.size();
    t.block.resize(dim, dim);
    bool has_im = tj.contains("im");
    for (long i = 0; i < dim; ++i)
      for (long k = 0; k < dim; ++k)
        t.block(i, k) = {re[i][k].get<double>(),
                         has_im ? tj["im"][i][k].get<double>() : 0.0};
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace qml
