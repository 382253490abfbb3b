#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "neurograph/binio.hpp"
#include "neurograph/model.hpp"

namespace ng {

namespace {
constexpr char kMagic[4] = {'N', 'G', 'R', 'F'};
constexpr std::uint32_t kVersion = 1;

std::string fmt_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

double parse_double(const std::string& s, const std::string& key) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    fail_io("checkpoint header: bad number for " + key + ": " + s);
  return v;
}

void write_tensor(std::ostream& os, const std::string& name, const Tensor& t) {
  binio::put_u16(os, static_cast<std::uint16_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  binio::put_u8(os, static_cast<std::uint8_t>(t.rank()));
  for (std::size_t d : t.shape())
    binio::put_u32(os, static_cast<std::uint32_t>(d));
  binio::put_f64_array(os, t.data(), t.size());
}

std::pair<std::string, Tensor> read_tensor(std::istream& is) {
  std::uint16_t len = binio::get_u16(is, "tensor name length");
  std::string name(len, '\0');
  if (!is.read(name.data(), len)) binio::truncated("tensor name");
  std::uint8_t rank = binio::get_u8(is, "tensor rank");
  std::vector<std::size_t> shape(rank);
  for (auto& d : shape) d = binio::get_u32(is, "tensor dims");
  Tensor t(shape);
  binio::get_f64_array(is, t.data(), t.size(), "tensor data");
  return {std::move(name), std::move(t)};
}
}  // namespace

void save_checkpoint(const GnnClassifier& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail_io("cannot write checkpoint: " + path);
  os.write(kMagic, 4);
  binio::put_u32(os, kVersion);

  const ArchConfig& a = model.arch();
  std::ostringstream hdr;
  hdr << "fs=" << fmt_double(a.fs) << "\n"
      << "window_seconds=" << fmt_double(a.window_seconds) << "\n"
      << "kernel=" << a.kernel << "\n"
      << "temporal_filters=" << a.temporal_filters << "\n"
      << "cheb_order=" << a.cheb_order << "\n"
      << "cheb_features=" << a.cheb_features << "\n"
      << "pool_window=" << a.pool_window << "\n"
      << "dropout=" << fmt_double(a.dropout) << "\n"
      << "edge_dropout=" << fmt_double(a.edge_dropout) << "\n"
      << "head_radius=" << fmt_double(model.graph().layout.head_radius) << "\n";
  hdr << "channels=";
  const auto& chans = model.graph().layout.channels;
  for (std::size_t i = 0; i < chans.size(); ++i)
    hdr << (i ? "," : "") << chans[i].name;
  hdr << "\n";
  std::string header = hdr.str();
  binio::put_u32(os, static_cast<std::uint32_t>(header.size()));
  os.write(header.data(), static_cast<std::streamsize>(header.size()));

  const std::size_t c = model.node_count();
  Tensor positions({c, 3});
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t d = 0; d < 3; ++d)
      positions.at2(i, d) = chans[i].pos[d];

  auto& m = const_cast<GnnClassifier&>(model);
  std::vector<std::pair<std::string, const Tensor*>> records = {
      {"layout.positions", &positions},
      {"graph.adjacency", &model.graph().adjacency},
      {"batchnorm.running_mean", &model.bn.running_mean},
      {"batchnorm.running_var", &model.bn.running_var},
  };
  auto params = m.params();
  binio::put_u32(os, static_cast<std::uint32_t>(records.size() + params.size()));
  for (auto& [name, t] : records) write_tensor(os, name, *t);
  for (auto& p : params) write_tensor(os, p.name, *p.value);
  if (!os) fail_io("write failed: " + path);
}

GnnClassifier load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail_io("cannot open checkpoint: " + path);
  binio::expect_magic(is, kMagic, path);
  std::uint32_t version = binio::get_u32(is, "version");
  if (version != kVersion)
    fail_io(path + ": unsupported checkpoint version " +
            std::to_string(version));

  std::uint32_t hlen = binio::get_u32(is, "header length");
  std::string header(hlen, '\0');
  if (!is.read(header.data(), hlen)) binio::truncated("header");
  std::map<std::string, std::string> kv;
  std::istringstream hs(header);
  std::string line;
  while (std::getline(hs, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto need = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) fail_io(path + ": checkpoint header missing " + k);
    return it->second;
  };

  ArchConfig arch;
  arch.fs = parse_double(need("fs"), "fs");
  arch.window_seconds = parse_double(need("window_seconds"), "window_seconds");
  arch.kernel = static_cast<std::size_t>(parse_double(need("kernel"), "kernel"));
  arch.temporal_filters = static_cast<std::size_t>(
      parse_double(need("temporal_filters"), "temporal_filters"));
  arch.cheb_order =
      static_cast<std::size_t>(parse_double(need("cheb_order"), "cheb_order"));
  arch.cheb_features = static_cast<std::size_t>(
      parse_double(need("cheb_features"), "cheb_features"));
  arch.pool_window = static_cast<std::size_t>(
      parse_double(need("pool_window"), "pool_window"));
  arch.dropout = parse_double(need("dropout"), "dropout");
  arch.edge_dropout = parse_double(need("edge_dropout"), "edge_dropout");

  std::vector<std::string> names;
  {
    std::istringstream cs(need("channels"));
    std::string tok;
    while (std::getline(cs, tok, ',')) names.push_back(tok);
  }

  std::uint32_t count = binio::get_u32(is, "tensor count");
  std::map<std::string, Tensor> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    auto [name, t] = read_tensor(is);
    tensors.emplace(std::move(name), std::move(t));
  }
  auto take = [&](const std::string& name) -> Tensor {
    auto it = tensors.find(name);
    if (it == tensors.end()) fail_io(path + ": checkpoint missing " + name);
    Tensor t = std::move(it->second);
    tensors.erase(it);
    return t;
  };

  Tensor positions = take("layout.positions");
  if (positions.rank() != 2 || positions.dim(0) != names.size() ||
      positions.dim(1) != 3)
    fail_io(path + ": layout.positions shape mismatch");
  WeightedGraph graph;
  graph.layout.head_radius = parse_double(need("head_radius"), "head_radius");
  for (std::size_t i = 0; i < names.size(); ++i)
    graph.layout.channels.push_back(
        {names[i],
         {positions.at2(i, 0), positions.at2(i, 1), positions.at2(i, 2)}});
  graph.adjacency = take("graph.adjacency");

  GnnClassifier model(std::move(graph), arch, /*init_seed=*/0);
  model.bn.running_mean = take("batchnorm.running_mean");
  model.bn.running_var = take("batchnorm.running_var");
  for (auto& p : model.params()) {
    Tensor t = take(p.name);
    if (!t.same_shape(*p.value))
      fail_io(path + ": shape mismatch for " + p.name);
    *p.value = std::move(t);
  }
  return model;
}

}  // namespace ng
