#include "dipgnn/optim.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace dipgnn {

Tensor ParamStore::add(const std::string& name, Tensor param) {
  if (params_.count(name) != 0) throw DataError("ParamStore: duplicate parameter '" + name + "'");
  if (!param.requires_grad()) throw DataError("ParamStore: parameter must require grad");
  OptState state;
  state.m.assign(param.value().size(), 0.0);
  state.v.assign(param.value().size(), 0.0);
  opt_[name] = std::move(state);
  params_.emplace(name, param);
  return param;
}

Tensor ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw DataError("ParamStore: unknown parameter '" + name + "'");
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& [name, p] : params_) p.zero_grad();
}

std::map<std::string, std::vector<double>> ParamStore::snapshot_values() const {
  std::map<std::string, std::vector<double>> out;
  for (const auto& [name, p] : params_) out[name] = p.value();
  return out;
}

void ParamStore::restore_values(const std::map<std::string, std::vector<double>>& values) {
  for (auto& [name, p] : params_) {
    auto it = values.find(name);
    if (it == values.end()) throw DataError("ParamStore: snapshot missing '" + name + "'");
    if (it->second.size() != p.value().size()) {
      throw DataError("ParamStore: snapshot size mismatch for '" + name + "'");
    }
    p.mutable_value() = it->second;
  }
}

double adamw_step(ParamStore& store, const AdamwConfig& cfg) {
  double sq_norm = 0.0;
  for (const auto& [name, p] : store.params()) {
    for (double g : p.grad()) {
      if (!std::isfinite(g)) {
        throw NumericalError("adamw_step: non-finite gradient in '" + name + "'");
      }
      sq_norm += g * g;
    }
  }
  const double norm = std::sqrt(sq_norm);
  if (cfg.clip_norm > 0.0 && norm > cfg.clip_norm) {
    const double s = cfg.clip_norm / norm;
    for (auto& [name, p] : store.params_mutable()) {
      for (double& gi : p.mutable_grad()) gi *= s;
    }
  }

  store.set_step(store.step() + 1);
  const double t = static_cast<double>(store.step());
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (auto& [name, p] : store.params_mutable()) {
    auto& state = store.opt_state()[name];
    const auto& grad = p.grad();
    auto& value = p.mutable_value();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
      state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = state.m[i] / bc1;
      const double v_hat = state.v[i] / bc2;
      value[i] -= cfg.lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + cfg.weight_decay * value[i]);
    }
  }
  return norm;
}

namespace {

void write_bytes(std::ofstream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void write_u32(std::ofstream& out, std::uint32_t v) { write_bytes(out, &v, sizeof(v)); }
void write_i64(std::ofstream& out, std::int64_t v) { write_bytes(out, &v, sizeof(v)); }
void write_f64(std::ofstream& out, double v) { write_bytes(out, &v, sizeof(v)); }

void write_string(std::ofstream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  write_bytes(out, s.data(), s.size());
}

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
  write_i64(out, static_cast<std::int64_t>(v.size()));
  write_bytes(out, v.data(), v.size() * sizeof(double));
}

void read_bytes(std::ifstream& in, void* data, std::size_t n) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (!in) throw DataError("checkpoint: truncated file");
}

std::uint32_t read_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  read_bytes(in, &v, sizeof(v));
  return v;
}

std::int64_t read_i64(std::ifstream& in) {
  std::int64_t v = 0;
  read_bytes(in, &v, sizeof(v));
  return v;
}

double read_f64(std::ifstream& in) {
  double v = 0;
  read_bytes(in, &v, sizeof(v));
  return v;
}

std::string read_string(std::ifstream& in) {
  const std::uint32_t n = read_u32(in);
  if (n > (1u << 20)) throw DataError("checkpoint: implausible string length");
  std::string s(n, '\0');
  read_bytes(in, s.data(), n);
  return s;
}

std::vector<double> read_doubles(std::ifstream& in) {
  const std::int64_t n = read_i64(in);
  if (n < 0 || n > (std::int64_t{1} << 32)) throw DataError("checkpoint: implausible array length");
  std::vector<double> v(static_cast<std::size_t>(n));
  read_bytes(in, v.data(), v.size() * sizeof(double));
  return v;
}

constexpr char kMagic[8] = {'D', 'I', 'P', 'G', 'N', 'N', 'C', 'K'};

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& store,
                     const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("checkpoint: cannot open '" + path + "' for writing");
  write_bytes(out, kMagic, sizeof(kMagic));
  write_u32(out, meta.version);
  write_string(out, meta.config_digest);
  write_f64(out, meta.lambda);
  write_u32(out, static_cast<std::uint32_t>(meta.layers));
  write_u32(out, static_cast<std::uint32_t>(meta.hidden_dim));
  write_u32(out, static_cast<std::uint32_t>(meta.feature_dim));
  write_string(out, meta.variant);
  write_i64(out, store.step());
  write_u32(out, static_cast<std::uint32_t>(store.count()));
  for (const auto& [name, p] : store.params()) {
    write_string(out, name);
    write_u32(out, static_cast<std::uint32_t>(p.shape().size()));
    for (int d : p.shape()) write_u32(out, static_cast<std::uint32_t>(d));
    write_doubles(out, p.value());
    const auto& state = store.opt_state().at(name);
    write_doubles(out, state.m);
    write_doubles(out, state.v);
  }
  if (!out) throw DataError("checkpoint: write failed for '" + path + "'");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open '" + path + "'");
  char magic[8];
  read_bytes(in, magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("checkpoint: bad magic in '" + path + "'");
  }
  LoadedCheckpoint out;
  out.meta.version = read_u32(in);
  if (out.meta.version != 1) throw DataError("checkpoint: unsupported version");
  out.meta.config_digest = read_string(in);
  out.meta.lambda = read_f64(in);
  out.meta.layers = static_cast<std::int32_t>(read_u32(in));
  out.meta.hidden_dim = static_cast<std::int32_t>(read_u32(in));
  out.meta.feature_dim = static_cast<std::int32_t>(read_u32(in));
  out.meta.variant = read_string(in);
  const std::int64_t step = read_i64(in);
  const std::uint32_t count = read_u32(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = read_string(in);
    const std::uint32_t ndim = read_u32(in);
    std::vector<int> shape;
    for (std::uint32_t d = 0; d < ndim; ++d) shape.push_back(static_cast<int>(read_u32(in)));
    std::vector<double> value = read_doubles(in);
    std::vector<double> m = read_doubles(in);
    std::vector<double> v = read_doubles(in);
    if (m.size() != value.size() || v.size() != value.size()) {
      throw DataError("checkpoint: optimizer state size mismatch for '" + name + "'");
    }
    out.store.add(name, Tensor::param(shape, std::move(value)));
    out.store.opt_state()[name] = ParamStore::OptState{std::move(m), std::move(v)};
  }
  out.store.set_step(step);
  return out;
}

}  // namespace dipgnn
