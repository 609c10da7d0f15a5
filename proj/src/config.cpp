#include "dipgnn/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "dipgnn/errors.hpp"

namespace dipgnn {

// One row per config key; keeps the loader, saver, digest and docs in sync.
#define DIPGNN_CONFIG_FIELDS(X)                                  \
  X(S, "graph.source", graph_source)                             \
  X(S, "graph.edge_list", edge_list)                             \
  X(S, "graph.features", feature_file)                           \
  X(S, "graph.labels", label_file)                               \
  X(I, "graph.sbm.nodes", sbm_nodes)                             \
  X(I, "graph.sbm.blocks", sbm_blocks)                           \
  X(D, "graph.sbm.p_in", sbm_p_in)                               \
  X(D, "graph.sbm.p_out", sbm_p_out)                             \
  X(I, "graph.sbm.feature_dim", sbm_feature_dim)                 \
  X(D, "graph.sbm.noise", sbm_noise)                             \
  X(D, "graph.pretrain_frac", pretrain_frac)                     \
  X(B, "graph.allow_self_loops", allow_self_loops)               \
  X(D, "mask.edge_ratio", mask_edge_ratio)                       \
  X(D, "mask.feature_ratio", mask_feature_ratio)                 \
  X(I, "gen.n_neg", gen_n_neg)                                   \
  X(D, "disc.alpha", disc_alpha)                                 \
  X(D, "disc.feature_beta", disc_feature_beta)                   \
  X(B, "disc.feature_balance", disc_feature_balance)             \
  X(B, "disc.flip_labels", disc_flip_labels)                     \
  X(I, "sampler.depth", sampler_depth)                           \
  X(I, "sampler.width", sampler_width)                           \
  X(I, "sampler.seed_nodes", sampler_seed_nodes)                 \
  X(I, "model.hidden_dim", model_hidden_dim)                     \
  X(I, "model.layers", model_layers)                             \
  X(I, "pretrain.steps", pretrain_steps)                         \
  X(D, "pretrain.lambda", lambda)                                \
  X(D, "pretrain.lr", pretrain_lr)                               \
  X(D, "pretrain.beta1", beta1)                                  \
  X(D, "pretrain.beta2", beta2)                                  \
  X(D, "pretrain.eps", pretrain_eps)                             \
  X(D, "pretrain.weight_decay", weight_decay)                    \
  X(D, "pretrain.dropout", pretrain_dropout)                     \
  X(D, "pretrain.clip_norm", pretrain_clip)                      \
  X(S, "pretrain.variant", variant)                              \
  X(I, "finetune.steps", finetune_steps)                         \
  X(D, "finetune.lr", finetune_lr)                               \
  X(D, "finetune.eps", finetune_eps)                             \
  X(D, "finetune.weight_decay", finetune_weight_decay)           \
  X(D, "finetune.dropout", finetune_dropout)                     \
  X(D, "finetune.clip_norm", finetune_clip)                      \
  X(I, "finetune.eval_every", eval_every)                        \
  X(S, "finetune.backbone", finetune_backbone)                   \
  X(S, "finetune.task", finetune_task)                           \
  X(I, "finetune.link_n_neg", link_n_neg)                        \
  X(I, "finetune.link_batch", link_batch)                        \
  X(D, "finetune.link_holdout", link_holdout)                    \
  X(U, "run.seed", seed)

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw DataError("config: invalid number for '" + key + "': '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw DataError("config: invalid integer for '" + key + "': '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw DataError("config: invalid unsigned integer for '" + key + "': '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw DataError("config: invalid boolean for '" + key + "': '" + value + "'");
}

void apply_value(TrainConfig& cfg, const std::string& key, const std::string& value) {
#define DIPGNN_APPLY_S(K, MEMBER) \
  if (key == K) {                 \
    cfg.MEMBER = value;           \
    return;                       \
  }
#define DIPGNN_APPLY_D(K, MEMBER)          \
  if (key == K) {                          \
    cfg.MEMBER = parse_double(key, value); \
    return;                                \
  }
#define DIPGNN_APPLY_I(K, MEMBER)       \
  if (key == K) {                       \
    cfg.MEMBER = parse_int(key, value); \
    return;                             \
  }
#define DIPGNN_APPLY_B(K, MEMBER)        \
  if (key == K) {                        \
    cfg.MEMBER = parse_bool(key, value); \
    return;                              \
  }
#define DIPGNN_APPLY_U(K, MEMBER)       \
  if (key == K) {                       \
    cfg.MEMBER = parse_u64(key, value); \
    return;                             \
  }
#define X(TYPE, K, MEMBER) DIPGNN_APPLY_##TYPE(K, MEMBER)
  DIPGNN_CONFIG_FIELDS(X)
#undef X
#undef DIPGNN_APPLY_S
#undef DIPGNN_APPLY_D
#undef DIPGNN_APPLY_I
#undef DIPGNN_APPLY_B
#undef DIPGNN_APPLY_U
  throw DataError("config: unknown key '" + key + "'");
}

std::string value_of(const TrainConfig& cfg, const std::string& key) {
#define DIPGNN_GET_S(K, MEMBER) \
  if (key == K) return cfg.MEMBER;
#define DIPGNN_GET_D(K, MEMBER) \
  if (key == K) return format_double(cfg.MEMBER);
#define DIPGNN_GET_I(K, MEMBER) \
  if (key == K) return std::to_string(cfg.MEMBER);
#define DIPGNN_GET_B(K, MEMBER) \
  if (key == K) return cfg.MEMBER ? "true" : "false";
#define DIPGNN_GET_U(K, MEMBER) \
  if (key == K) return std::to_string(cfg.MEMBER);
#define X(TYPE, K, MEMBER) DIPGNN_GET_##TYPE(K, MEMBER)
  DIPGNN_CONFIG_FIELDS(X)
#undef X
#undef DIPGNN_GET_S
#undef DIPGNN_GET_D
#undef DIPGNN_GET_I
#undef DIPGNN_GET_B
#undef DIPGNN_GET_U
  throw DataError("config: unknown key '" + key + "'");
}

std::vector<std::string> all_keys() {
  std::vector<std::string> keys;
#define X(TYPE, K, MEMBER) keys.push_back(K);
  DIPGNN_CONFIG_FIELDS(X)
#undef X
  return keys;
}

std::string env_name_for(const std::string& key) {
  std::string out = "DIPGNN_";
  for (char c : key) {
    if (c == '.' || c == '-') {
      out.push_back('_');
    } else {
      out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

}  // namespace

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("config: cannot open '" + path + "'");
  TrainConfig cfg;
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw DataError(path + ":" + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const std::string full_key = section.empty() ? key : section + "." + key;
    try {
      apply_value(cfg, full_key, value);
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  for (const auto& key : all_keys()) {
    if (const char* env = std::getenv(env_name_for(key).c_str())) {
      apply_value(cfg, key, env);
    }
  }
  return cfg;
}

void save_config(const TrainConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("config: cannot open '" + path + "' for writing");
  std::string section;
  for (const auto& key : all_keys()) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    const std::string rest = key.substr(dot + 1);
    if (sec != section) {
      if (!section.empty()) out << '\n';
      out << '[' << sec << "]\n";
      section = sec;
    }
    out << rest << " = " << value_of(config, key) << '\n';
  }
  if (!out) throw DataError("config: write failed for '" + path + "'");
}

std::string serialize_config(const TrainConfig& config) {
  std::string out;
  for (const auto& key : all_keys()) {
    out += key;
    out += '=';
    out += value_of(config, key);
    out += '\n';
  }
  return out;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_digest(const TrainConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(serialize_config(config))));
  return buf;
}

void validate_config(const TrainConfig& c) {
  auto fail = [](const std::string& msg) { throw DataError("config: " + msg); };
  const std::set<std::string> sources{"sbm", "files"};
  const std::set<std::string> variants{"edges+features", "edges", "features", "random-edges"};
  const std::set<std::string> backbones{"auto", "disc", "gen"};
  const std::set<std::string> tasks{"node-classification", "link-prediction"};
  if (sources.count(c.graph_source) == 0) fail("graph.source must be sbm or files");
  if (c.graph_source == "files" && c.edge_list.empty()) fail("graph.edge_list is required");
  if (c.sbm_nodes < 2) fail("graph.sbm.nodes must be >= 2");
  if (c.sbm_blocks < 1 || c.sbm_blocks > c.sbm_nodes) fail("graph.sbm.blocks out of range");
  if (!(c.sbm_p_out >= 0.0 && c.sbm_p_out <= c.sbm_p_in && c.sbm_p_in <= 1.0)) {
    fail("need 0 <= sbm.p_out <= sbm.p_in <= 1");
  }
  if (c.sbm_feature_dim < 1) fail("graph.sbm.feature_dim must be positive");
  if (c.sbm_noise < 0.0) fail("graph.sbm.noise must be >= 0");
  if (!(c.pretrain_frac > 0.0 && c.pretrain_frac < 1.0)) fail("graph.pretrain_frac not in (0,1)");
  if (!(c.mask_edge_ratio >= 0.0 && c.mask_edge_ratio < 1.0)) fail("mask.edge_ratio not in [0,1)");
  if (!(c.mask_feature_ratio >= 0.0 && c.mask_feature_ratio <= 1.0)) {
    fail("mask.feature_ratio not in [0,1]");
  }
  if (c.gen_n_neg < 0) fail("gen.n_neg must be >= 0");
  if (c.disc_alpha <= 0.0) fail("disc.alpha must be positive");
  if (c.disc_feature_beta < 0.0) fail("disc.feature_beta must be >= 0");
  if (c.sampler_depth < 0) fail("sampler.depth must be >= 0");
  if (c.sampler_width < 1) fail("sampler.width must be >= 1");
  if (c.sampler_seed_nodes < 1) fail("sampler.seed_nodes must be >= 1");
  if (c.model_hidden_dim < 1) fail("model.hidden_dim must be positive");
  if (c.model_layers < 1) fail("model.layers must be >= 1");
  if (c.pretrain_steps < 0) fail("pretrain.steps must be >= 0");
  if (c.lambda < 0.0) fail("pretrain.lambda must be >= 0");
  if (c.pretrain_lr <= 0.0 || c.finetune_lr <= 0.0) fail("learning rates must be positive");
  if (!(c.beta1 > 0.0 && c.beta1 < 1.0 && c.beta2 > 0.0 && c.beta2 < 1.0)) {
    fail("adam betas must be in (0,1)");
  }
  if (c.pretrain_eps <= 0.0 || c.finetune_eps <= 0.0) fail("adam eps must be positive");
  if (c.weight_decay < 0.0 || c.finetune_weight_decay < 0.0) fail("weight decay must be >= 0");
  if (!(c.pretrain_dropout >= 0.0 && c.pretrain_dropout < 1.0)) {
    fail("pretrain.dropout not in [0,1)");
  }
  if (!(c.finetune_dropout >= 0.0 && c.finetune_dropout < 1.0)) {
    fail("finetune.dropout not in [0,1)");
  }
  if (variants.count(c.variant) == 0) fail("unknown pretrain.variant '" + c.variant + "'");
  if (c.finetune_steps < 0) fail("finetune.steps must be >= 0");
  if (c.eval_every < 1) fail("finetune.eval_every must be >= 1");
  if (backbones.count(c.finetune_backbone) == 0) fail("finetune.backbone must be auto|disc|gen");
  if (tasks.count(c.finetune_task) == 0) {
    fail("finetune.task must be node-classification or link-prediction");
  }
  if (c.link_n_neg < 0) fail("finetune.link_n_neg must be >= 0");
  if (c.link_batch < 1) fail("finetune.link_batch must be >= 1");
  if (!(c.link_holdout > 0.0 && c.link_holdout < 1.0)) fail("finetune.link_holdout not in (0,1)");
}

}  // namespace dipgnn
