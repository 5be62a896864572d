#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mbt/tree/block.hpp"
#include "mbt/tree/sha_chain.hpp"

namespace mbt::store {

using tree::BlockIndex;

// Storage backend: an append-only sequence of opaque records.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual void append(ByteView record) = 0;
  virtual std::vector<Bytes> load() const = 0;
};

class MemoryBackend final : public Backend {
 public:
  void append(ByteView record) override { records_.emplace_back(record.begin(), record.end()); }
  std::vector<Bytes> load() const override { return records_; }

 private:
  std::vector<Bytes> records_;
};

// Single-file log:
//   "MBTSTORE" (8 bytes) | version (1 byte, = 1) | { u32 length | record }*
// Each append is flushed before returning. A torn trailing record is ignored
// on load.
class FileBackend final : public Backend {
 public:
  static constexpr std::string_view kMagic = "MBTSTORE";
  static constexpr std::uint8_t kVersion = 1;

  explicit FileBackend(std::filesystem::path path) : path_(std::move(path)) {
    std::error_code ec;
    if (!std::filesystem::exists(path_, ec) || std::filesystem::file_size(path_, ec) == 0) {
      std::ofstream out(path_, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorKind::kIo, "cannot create " + path_.string());
      out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
      out.put(static_cast<char>(kVersion));
    } else {
      check_header();
    }
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw Error(ErrorKind::kIo, "cannot open " + path_.string());
  }

  void append(ByteView record) override {
    auto len = Writer().u32(static_cast<std::uint32_t>(record.size())).bytes();
    out_.write(reinterpret_cast<const char*>(len.data()), static_cast<std::streamsize>(len.size()));
    out_.write(reinterpret_cast<const char*>(record.data()), static_cast<std::streamsize>(record.size()));
    out_.flush();
    if (!out_) throw Error(ErrorKind::kIo, "write failed on " + path_.string());
  }

  std::vector<Bytes> load() const override {
    std::ifstream in(path_, std::ios::binary);
    Bytes all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<Bytes> out;
    std::size_t pos = kMagic.size() + 1;
    while (all.size() - pos >= 4) {
      auto len = Reader(ByteView(all).subspan(pos, 4)).u32();
      if (all.size() - pos - 4 < len) break;
      out.emplace_back(all.begin() + static_cast<std::ptrdiff_t>(pos + 4),
                       all.begin() + static_cast<std::ptrdiff_t>(pos + 4 + len));
      pos += 4 + len;
    }
    return out;
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  void check_header() const {
    std::ifstream in(path_, std::ios::binary);
    std::string magic(kMagic.size(), '\0');
    in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
    int version = in.get();
    if (magic != kMagic) throw Error(ErrorKind::kFormat, path_.string() + " is not a block store");
    if (version != kVersion) throw Error(ErrorKind::kFormat, "unsupported block store version");
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

// Record layout: u32 branch | u32 seq | u32 len | owner key | u32 len | block encoding
struct Record {
  BlockIndex index;
  Bytes owner;
  Bytes payload;
};

/// Append-only block persistence indexed by (branch, seq) and by owner key.
class BlockStore {
 public:
  BlockStore() : BlockStore(std::make_unique<MemoryBackend>()) {}

  explicit BlockStore(std::unique_ptr<Backend> backend) : backend_(std::move(backend)) {
    for (const auto& raw : backend_->load()) {
      Reader r(raw);
      Record rec;
      rec.index.branch = r.u32();
      rec.index.seq = r.u32();
      auto owner = r.prefixed();
      auto payload = r.prefixed();
      rec.owner.assign(owner.begin(), owner.end());
      rec.payload.assign(payload.begin(), payload.end());
      index_record(std::move(rec));
    }
  }

  void put(BlockIndex index, ByteView owner, ByteView payload) {
    if (by_index_.contains(index)) {
      throw Error(ErrorKind::kConflict, "block " + tree::to_string(index) + " already stored");
    }
    backend_->append(
        Writer().u32(index.branch).u32(index.seq).prefixed(owner).prefixed(payload).bytes());
    index_record({index, Bytes(owner.begin(), owner.end()), Bytes(payload.begin(), payload.end())});
    ++writes_;
  }

  std::optional<Bytes> get(BlockIndex index) const {
    auto it = by_index_.find(index);
    if (it == by_index_.end()) return std::nullopt;
    return records_[it->second].payload;
  }

  // Payloads stored under `owner`, in append order.
  std::vector<Bytes> by_owner(ByteView owner) const {
    std::vector<Bytes> out;
    auto it = by_owner_.find(Bytes(owner.begin(), owner.end()));
    if (it == by_owner_.end()) return out;
    for (auto i : it->second) out.push_back(records_[i].payload);
    return out;
  }

  const std::vector<Record>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  // Appends made through this handle (excludes records loaded at open).
  std::size_t write_count() const { return writes_; }

 private:
  void index_record(Record rec) {
    by_index_[rec.index] = records_.size();
    by_owner_[rec.owner].push_back(records_.size());
    records_.push_back(std::move(rec));
  }

  std::unique_ptr<Backend> backend_;
  std::vector<Record> records_;
  std::map<BlockIndex, std::size_t> by_index_;
  std::map<Bytes, std::vector<std::size_t>> by_owner_;
  std::size_t writes_ = 0;
};

template <class BlockT>
void put_block(BlockStore& store, const crypto::GroupParams& params, const BlockT& block) {
  store.put(block.index, params.encode(block.meta.patient_pk), tree::encode(params, block));
}

inline std::optional<tree::Block> get_block(const BlockStore& store, const crypto::GroupParams& params,
                                            BlockIndex index) {
  auto raw = store.get(index);
  if (!raw) return std::nullopt;
  return tree::decode_block(params, *raw);
}

inline std::vector<tree::Block> patient_history(const BlockStore& store, const crypto::GroupParams& params,
                                                const crypto::Element& patient_pk) {
  std::vector<tree::Block> out;
  for (const auto& raw : store.by_owner(params.encode(patient_pk))) {
    out.push_back(tree::decode_block(params, raw));
  }
  return out;
}

}  // namespace mbt::store
