#include "lcmt/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace lcmt::nn {
namespace {

constexpr char kMagic[] = "LCMTCKP1";
constexpr std::size_t kMagicLen = 8;

void write_u64(std::ostream& out, std::uint64_t x) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (unsigned char)(x >> (8 * i));
  out.write((const char*)b, 8);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char b[8];
  in.read((char*)b, 8);
  check(in.good(), "truncated checkpoint");
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= (std::uint64_t)b[i] << (8 * i);
  return x;
}

void write_floats_le(std::ostream& out, const std::vector<float>& values) {
  for (float f : values) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = (unsigned char)(bits >> (8 * i));
    out.write((const char*)b, 4);
  }
}

void read_floats_le(std::istream& in, std::vector<float>& values) {
  for (float& f : values) {
    unsigned char b[4];
    in.read((char*)b, 4);
    check(in.good(), "truncated checkpoint blob");
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= (std::uint32_t)b[i] << (8 * i);
    std::memcpy(&f, &bits, 4);
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  nlohmann::json header;
  header["version"] = 1;
  header["meta"] = ckpt.meta;
  auto& list = header["params"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, entry] : ckpt.params) {
    list.push_back({{"name", name},
                    {"rows", entry.rows},
                    {"cols", entry.cols},
                    {"offset", offset}});
    offset += entry.values.size();
  }
  std::string header_str = header.dump();

  std::ofstream out(path, std::ios::binary);
  check(out.good(), "cannot write checkpoint file ", path);
  out.write(kMagic, kMagicLen);
  write_u64(out, header_str.size());
  out.write(header_str.data(), (std::streamsize)header_str.size());
  for (const auto& [name, entry] : ckpt.params) write_floats_le(out, entry.values);
  check(out.good(), "write failed for checkpoint file ", path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), "cannot open checkpoint file ", path);
  char magic[kMagicLen];
  in.read(magic, kMagicLen);
  check(in.good() && std::memcmp(magic, kMagic, kMagicLen) == 0,
        "file ", path, " is not a checkpoint (bad magic)");
  std::uint64_t header_len = read_u64(in);
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), (std::streamsize)header_len);
  check(in.good(), "truncated checkpoint header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::exception& e) {
    fail("bad checkpoint header: ", e.what());
  }
  check(header.value("version", 0) == 1, "unsupported checkpoint version");

  Checkpoint ckpt;
  ckpt.meta = header.value("meta", nlohmann::json::object());
  for (const auto& item : header.at("params")) {
    Checkpoint::Entry entry;
    entry.rows = item.at("rows").get<int>();
    entry.cols = item.at("cols").get<int>();
    check(entry.rows >= 1 && entry.cols >= 1, "bad parameter shape in checkpoint");
    entry.values.resize((std::size_t)entry.rows * entry.cols);
    read_floats_le(in, entry.values);
    ckpt.params.emplace(item.at("name").get<std::string>(), std::move(entry));
  }
  return ckpt;
}

}  // namespace lcmt::nn
