#include "oilsense/model.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "oilsense/forest.hpp"
#include "oilsense/knn.hpp"
#include "oilsense/logistic.hpp"
#include "oilsense/svm.hpp"
#include "oilsense/version.hpp"

namespace oilsense {

using nlohmann::json;

int argmax_lowest(const double* scores, int count) {
  int best = 0;
  for (int k = 1; k < count; ++k) {
    if (scores[k] > scores[best]) best = k;
  }
  return best;
}

void Model::check_columns(const FeatureMatrix& features) const {
  if (features.cols != manifest_.feature_count) {
    throw SchemaError("model '" + manifest_.kind + "' expects " +
                      std::to_string(manifest_.feature_count) +
                      " feature columns, got " +
                      std::to_string(features.cols));
  }
}

std::vector<int> Model::predict(const FeatureMatrix& features) const {
  std::vector<double> s = score(features);
  std::vector<int> out(features.rows);
  const int k = manifest_.class_count;
  for (std::size_t i = 0; i < features.rows; ++i)
    out[i] = argmax_lowest(s.data() + i * k, k);
  return out;
}

namespace {

void append_u32(std::string& s, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  s.append(b, 4);
}

void append_u64(std::string& s, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  s.append(b, 8);
}

}  // namespace

void BinarySink::put_u32(std::uint32_t v) { append_u32(buffer_, v); }

void BinarySink::put_u64(std::uint64_t v) { append_u64(buffer_, v); }

void BinarySink::put_i32(std::int32_t v) {
  append_u32(buffer_, static_cast<std::uint32_t>(v));
}

void BinarySink::put_f64(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  append_u64(buffer_, bits);
}

void BinarySink::put_f64_array(const std::vector<double>& v) {
  put_u64(v.size());
  buffer_.reserve(buffer_.size() + v.size() * 8);
  for (double x : v) put_f64(x);
}

void BinarySink::put_i32_array(const std::vector<std::int32_t>& v) {
  put_u64(v.size());
  buffer_.reserve(buffer_.size() + v.size() * 4);
  for (std::int32_t x : v) put_i32(x);
}

void BinarySink::put_u32_array(const std::vector<std::uint32_t>& v) {
  put_u64(v.size());
  buffer_.reserve(buffer_.size() + v.size() * 4);
  for (std::uint32_t x : v) put_u32(x);
}

void BinarySource::need(std::size_t n) const {
  if (offset_ + n > buffer_.size())
    throw SchemaError("model payload truncated: needed " + std::to_string(n) +
                      " more bytes at offset " + std::to_string(offset_));
}

std::uint32_t BinarySource::get_u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(
             static_cast<unsigned char>(buffer_[offset_ + i]))
         << (8 * i);
  offset_ += 4;
  return v;
}

std::uint64_t BinarySource::get_u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(
             static_cast<unsigned char>(buffer_[offset_ + i]))
         << (8 * i);
  offset_ += 8;
  return v;
}

std::int32_t BinarySource::get_i32() {
  return static_cast<std::int32_t>(get_u32());
}

double BinarySource::get_f64() {
  std::uint64_t bits = get_u64();
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::vector<double> BinarySource::get_f64_array() {
  std::uint64_t n = get_u64();
  need(n * 8);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = get_f64();
  return v;
}

std::vector<std::int32_t> BinarySource::get_i32_array() {
  std::uint64_t n = get_u64();
  need(n * 4);
  std::vector<std::int32_t> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = get_i32();
  return v;
}

std::vector<std::uint32_t> BinarySource::get_u32_array() {
  std::uint64_t n = get_u64();
  need(n * 4);
  std::vector<std::uint32_t> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = get_u32();
  return v;
}

namespace {

constexpr char kMagic[4] = {'O', 'S', 'M', 'D'};

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

std::uint64_t parse_hex64(const std::string& s, const std::string& ctx) {
  if (s.size() != 16) throw SchemaError(ctx + ": bad config hash field");
  std::uint64_t v = 0;
  for (char c : s) {
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else throw SchemaError(ctx + ": bad config hash field");
    v = (v << 4) | static_cast<std::uint64_t>(d);
  }
  return v;
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
  const ModelManifest& m = model.manifest();
  json header;
  header["kind"] = m.kind;
  header["format"] = model_format_version;
  header["class_count"] = m.class_count;
  header["feature_count"] = m.feature_count;
  header["feature_names"] = m.feature_names;
  header["seed"] = m.seed;
  header["config_hash"] = hex64(m.config_hash);
  header["hyperparameters"] =
      m.hyperparameters_json.empty() ? json::object()
                                     : json::parse(m.hyperparameters_json);
  header["warnings"] = m.warnings;
  std::string header_text = header.dump();

  BinarySink payload;
  model.write_payload(payload);

  std::string out;
  out.reserve(24 + header_text.size() + payload.bytes().size());
  out.append(kMagic, 4);
  append_u32(out, static_cast<std::uint32_t>(model_format_version));
  append_u64(out, header_text.size());
  out += header_text;
  append_u64(out, payload.bytes().size());
  out += payload.bytes();

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("failed writing '" + path + "'");
}

std::unique_ptr<Model> load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open model file '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  if (bytes.size() < 24 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw SchemaError(path + ": not a model file");

  auto read_u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(bytes[off + i]))
           << (8 * i);
    return v;
  };
  auto read_u64 = [&](std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(
               static_cast<unsigned char>(bytes[off + i]))
           << (8 * i);
    return v;
  };

  std::uint32_t format = read_u32(4);
  if (format != static_cast<std::uint32_t>(model_format_version))
    throw SchemaError(path + ": unsupported model format version " +
                      std::to_string(format) + " (this build reads version " +
                      std::to_string(model_format_version) + ")");
  std::uint64_t header_len = read_u64(8);
  std::size_t header_off = 16;
  if (header_off + header_len + 8 > bytes.size())
    throw SchemaError(path + ": truncated model header");
  json header;
  try {
    header = json::parse(bytes.substr(header_off, header_len));
  } catch (const json::exception& e) {
    throw SchemaError(path + ": bad model header: " + std::string(e.what()));
  }

  ModelManifest manifest;
  try {
    manifest.kind = header.at("kind").get<std::string>();
    manifest.class_count = header.at("class_count").get<int>();
    manifest.feature_count = header.at("feature_count").get<std::size_t>();
    manifest.feature_names =
        header.at("feature_names").get<std::vector<std::string>>();
    manifest.seed = header.at("seed").get<std::uint64_t>();
    manifest.config_hash =
        parse_hex64(header.at("config_hash").get<std::string>(), path);
    manifest.hyperparameters_json = header.at("hyperparameters").dump();
    manifest.warnings = header.at("warnings").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw SchemaError(path + ": bad model header: " + std::string(e.what()));
  }
  if (manifest.class_count < 2)
    throw SchemaError(path + ": model header has fewer than two classes");

  std::size_t len_off = header_off + header_len;
  std::uint64_t payload_len = read_u64(len_off);
  if (len_off + 8 + payload_len != bytes.size())
    throw SchemaError(path + ": model payload length mismatch");
  BinarySource payload(bytes.substr(len_off + 8, payload_len));

  std::unique_ptr<Model> model;
  if (manifest.kind == "logistic") {
    model = load_logistic(std::move(manifest), payload);
  } else if (manifest.kind == "knn") {
    model = load_knn(std::move(manifest), payload);
  } else if (manifest.kind == "forest") {
    model = load_forest(std::move(manifest), payload);
  } else if (manifest.kind == "svm") {
    model = load_svm(std::move(manifest), payload);
  } else {
    throw SchemaError(path + ": unknown model kind '" + manifest.kind + "'");
  }
  if (!payload.exhausted())
    throw SchemaError(path + ": trailing bytes after model payload");
  return model;
}

}  // namespace oilsense
