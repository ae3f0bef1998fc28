#include "cdlrec/checkpoint.hpp"

#include <sstream>

#include "cdlrec/errors.hpp"
#include "cdlrec/io_util.hpp"

namespace cdlrec {

namespace {

constexpr const char* kMagic = "cdlrec-checkpoint v1";

std::string activation_name(Activation a) {
  return a == Activation::relu ? "relu" : "identity";
}

Activation activation_from(const std::string& name, const std::string& where) {
  if (name == "relu") return Activation::relu;
  if (name == "identity") return Activation::identity;
  throw DataError(where + ": unknown activation '" + name + "'");
}

std::string loss_name(const LossKind& kind) {
  return kind.kind == LossKind::Kind::hinge ? "hinge" : "cross_entropy";
}

std::string size_list(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& tok : split(text, ',')) out.push_back(parse_size(tok));
  return out;
}

void emit_encoder(std::string& out, const char* name,
                  const EncoderParams& enc) {
  out += std::string("encoder ") + name +
         " input=" + std::to_string(enc.config.input_dim) +
         " latent=" + std::to_string(enc.config.latent_dim) +
         " dropout=" + format_double(enc.config.dropout_rate) +
         " hidden=" + size_list(enc.config.hidden_dims) + "\n";
  for (std::size_t i = 0; i < enc.layers.size(); ++i) {
    const auto& layer = enc.layers[i];
    out += "layer " + std::to_string(i) +
           " out=" + std::to_string(layer.out_dim()) +
           " in=" + std::to_string(layer.in_dim()) +
           " act=" + activation_name(layer.activation) + "\n";
    out += "W " + join_doubles(layer.weights.data, ' ') + "\n";
    out += "b " + join_doubles(layer.bias, ' ') + "\n";
  }
}

std::string strip_key(const std::string& field, const char* key,
                      const std::string& where) {
  const std::string prefix = std::string(key) + "=";
  if (field.rfind(prefix, 0) != 0) {
    throw DataError(where + ": expected '" + key + "=...', got '" + field + "'");
  }
  return field.substr(prefix.size());
}

class LineReader {
 public:
  LineReader(const std::string& text, std::string path)
      : in_(text), path_(std::move(path)) {}

  std::string next() {
    std::string line;
    if (!std::getline(in_, line)) {
      throw DataError(path_ + ": unexpected end of checkpoint");
    }
    ++line_no_;
    return line;
  }

  std::string where() const { return path_ + ":" + std::to_string(line_no_); }

 private:
  std::istringstream in_;
  std::string path_;
  std::size_t line_no_ = 0;
};

std::vector<double> parse_values(const std::string& line, const char* tag,
                                 const std::string& where) {
  auto fields = split(line, ' ');
  if (fields.empty() || fields[0] != tag) {
    throw DataError(where + ": expected '" + tag + "' line");
  }
  std::vector<double> out;
  out.reserve(fields.size() - 1);
  for (std::size_t i = 1; i < fields.size(); ++i) {
    out.push_back(parse_double(fields[i]));
  }
  return out;
}

EncoderParams read_encoder(LineReader& reader, const char* name) {
  auto fields = split(reader.next(), ' ');
  if (fields.size() != 6 || fields[0] != "encoder" || fields[1] != name) {
    throw DataError(reader.where() + ": expected 'encoder " +
                    std::string(name) + "'");
  }
  EncoderParams enc;
  enc.config.input_dim = parse_size(strip_key(fields[2], "input", reader.where()));
  enc.config.latent_dim = parse_size(strip_key(fields[3], "latent", reader.where()));
  enc.config.dropout_rate =
      parse_double(strip_key(fields[4], "dropout", reader.where()));
  enc.config.hidden_dims =
      parse_size_list(strip_key(fields[5], "hidden", reader.where()));

  const std::size_t n_layers = enc.config.hidden_dims.size() + 1;
  for (std::size_t i = 0; i < n_layers; ++i) {
    auto lf = split(reader.next(), ' ');
    if (lf.size() != 5 || lf[0] != "layer") {
      throw DataError(reader.where() + ": expected 'layer' line");
    }
    const std::size_t out_dim = parse_size(strip_key(lf[2], "out", reader.where()));
    const std::size_t in_dim = parse_size(strip_key(lf[3], "in", reader.where()));
    DenseLayer layer{Matrix(out_dim, in_dim), std::vector<double>(out_dim, 0.0),
                     activation_from(strip_key(lf[4], "act", reader.where()),
                                     reader.where())};
    auto w = parse_values(reader.next(), "W", reader.where());
    if (w.size() != out_dim * in_dim) {
      throw DataError(reader.where() + ": weight arity mismatch");
    }
    layer.weights.data = std::move(w);
    auto b = parse_values(reader.next(), "b", reader.where());
    if (b.size() != out_dim) {
      throw DataError(reader.where() + ": bias arity mismatch");
    }
    layer.bias = std::move(b);
    enc.layers.push_back(std::move(layer));
  }
  return enc;
}

}  // namespace

void save_checkpoint(const TrainState& state, const TrainConfig& cfg,
                     const std::string& path) {
  std::string out = std::string(kMagic) + "\n";
  out += "epoch " + std::to_string(state.epoch) + "\n";
  out += "config lr=" + format_double(cfg.sgd.learning_rate) +
         " momentum=" + format_double(cfg.sgd.momentum) +
         " weight_decay=" + format_double(cfg.sgd.weight_decay) +
         " batch_size=" + std::to_string(cfg.sgd.batch_size) +
         " seed=" + std::to_string(cfg.sgd.seed) +
         " loss=" + loss_name(cfg.loss) +
         " margin=" + format_double(cfg.loss.margin) +
         " epochs=" + std::to_string(cfg.epochs) +
         " dropout_enabled=" + (cfg.dropout_enabled ? "1" : "0") +
         " checkpoint_every=" + std::to_string(cfg.checkpoint_every) +
         " eval_every=" + std::to_string(cfg.eval_every) +
         " lr_decay_factor=" + format_double(cfg.lr_decay_factor) +
         " lr_decay_every=" + std::to_string(cfg.lr_decay_every) +
         " clamp_head=" + (cfg.clamp_head_nonnegative ? "1" : "0") + "\n";
  out += "rng " + state.rng.serialize() + "\n";
  out += "loss_history" +
         (state.loss_history.empty()
              ? std::string()
              : " " + join_doubles(state.loss_history, ' ')) +
         "\n";
  emit_encoder(out, "user", state.model.user_encoder);
  emit_encoder(out, "item", state.model.item_encoder);
  out += "head rate=" + format_double(state.model.head.dropout_rate) + "\n";
  out += "w " + join_doubles(state.model.head.weights, ' ') + "\n";
  out += "offset " + format_double(state.model.twonets_offset) + "\n";

  // Velocity blocks in grad_views order.
  std::vector<std::span<const double>> blocks;
  for (const auto* enc : {&state.velocities.user_encoder,
                          &state.velocities.item_encoder}) {
    for (std::size_t i = 0; i < enc->weights.size(); ++i) {
      blocks.emplace_back(enc->weights[i].data);
      blocks.emplace_back(enc->bias[i]);
    }
  }
  blocks.emplace_back(state.velocities.head);
  blocks.emplace_back(&state.velocities.twonets_offset, 1);
  out += "vel " + std::to_string(blocks.size()) + "\n";
  for (const auto& block : blocks) {
    out += "v";
    for (double x : block) {
      out += ' ';
      out += format_double(x);
    }
    out += "\n";
  }

  out += "checksum " + to_hex(checksum_bytes(out)) + "\n";
  write_file(path, out);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  const std::string content = read_file(path);

  const std::string marker = "checksum ";
  const std::size_t pos = content.rfind("\nchecksum ");
  if (pos == std::string::npos) {
    throw ChecksumError(path + ": missing checksum line");
  }
  const std::string payload = content.substr(0, pos + 1);
  std::string tail = content.substr(pos + 1);
  if (!tail.empty() && tail.back() == '\n') tail.pop_back();
  const std::uint64_t want = from_hex(tail.substr(marker.size()));
  if (checksum_bytes(payload) != want) {
    throw ChecksumError(path + ": checksum mismatch (corrupt or truncated)");
  }

  LineReader reader(payload, path);
  if (reader.next() != kMagic) {
    throw VersionError(path + ": not a " + std::string(kMagic) + " file");
  }

  LoadedCheckpoint loaded;
  TrainState& state = loaded.state;
  TrainConfig& cfg = loaded.config;

  {
    auto fields = split(reader.next(), ' ');
    if (fields.size() != 2 || fields[0] != "epoch") {
      throw DataError(reader.where() + ": expected epoch line");
    }
    state.epoch = parse_size(fields[1]);
  }
  {
    auto fields = split(reader.next(), ' ');
    if (fields.size() != 15 || fields[0] != "config") {
      throw DataError(reader.where() + ": expected config line");
    }
    const auto& w = reader.where();
    cfg.sgd.learning_rate = parse_double(strip_key(fields[1], "lr", w));
    cfg.sgd.momentum = parse_double(strip_key(fields[2], "momentum", w));
    cfg.sgd.weight_decay = parse_double(strip_key(fields[3], "weight_decay", w));
    cfg.sgd.batch_size = parse_size(strip_key(fields[4], "batch_size", w));
    cfg.sgd.seed = parse_u64(strip_key(fields[5], "seed", w));
    const std::string loss = strip_key(fields[6], "loss", w);
    if (loss == "cross_entropy") {
      cfg.loss.kind = LossKind::Kind::cross_entropy;
    } else if (loss == "hinge") {
      cfg.loss.kind = LossKind::Kind::hinge;
    } else {
      throw DataError(w + ": unknown loss '" + loss + "'");
    }
    cfg.loss.margin = parse_double(strip_key(fields[7], "margin", w));
    cfg.epochs = parse_size(strip_key(fields[8], "epochs", w));
    cfg.dropout_enabled = strip_key(fields[9], "dropout_enabled", w) == "1";
    cfg.checkpoint_every = parse_size(strip_key(fields[10], "checkpoint_every", w));
    cfg.eval_every = parse_size(strip_key(fields[11], "eval_every", w));
    cfg.lr_decay_factor = parse_double(strip_key(fields[12], "lr_decay_factor", w));
    cfg.lr_decay_every = parse_size(strip_key(fields[13], "lr_decay_every", w));
    cfg.clamp_head_nonnegative = strip_key(fields[14], "clamp_head", w) == "1";
  }
  {
    const std::string line = reader.next();
    if (line.rfind("rng ", 0) != 0) {
      throw DataError(reader.where() + ": expected rng line");
    }
    state.rng.deserialize(line.substr(4));
  }
  {
    const std::string line = reader.next();
    if (line.rfind("loss_history", 0) != 0) {
      throw DataError(reader.where() + ": expected loss_history line");
    }
    if (line.size() > 12) {
      for (const auto& tok : split(line.substr(13), ' ')) {
        state.loss_history.push_back(parse_double(tok));
      }
    }
  }

  state.model.user_encoder = read_encoder(reader, "user");
  state.model.item_encoder = read_encoder(reader, "item");
  {
    auto fields = split(reader.next(), ' ');
    if (fields.size() != 2 || fields[0] != "head") {
      throw DataError(reader.where() + ": expected head line");
    }
    state.model.head.dropout_rate =
        parse_double(strip_key(fields[1], "rate", reader.where()));
    state.model.head.weights = parse_values(reader.next(), "w", reader.where());
  }
  {
    auto fields = split(reader.next(), ' ');
    if (fields.size() != 2 || fields[0] != "offset") {
      throw DataError(reader.where() + ": expected offset line");
    }
    state.model.twonets_offset = parse_double(fields[1]);
  }

  state.velocities = zero_grads(state.model);
  auto views = grad_views(state.velocities);
  {
    auto fields = split(reader.next(), ' ');
    if (fields.size() != 2 || fields[0] != "vel" ||
        parse_size(fields[1]) != views.size()) {
      throw DataError(reader.where() + ": velocity block count mismatch");
    }
  }
  for (auto& view : views) {
    auto values = parse_values(reader.next(), "v", reader.where());
    if (values.size() != view.values.size()) {
      throw DataError(reader.where() + ": velocity arity mismatch for " +
                      view.name);
    }
    std::copy(values.begin(), values.end(), view.values.begin());
  }
  return loaded;
}

}  // namespace cdlrec
