#include <gtest/gtest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "mbt/store/block_store.hpp"

namespace mbt::store {
namespace {

using testing::Cast;

std::filesystem::path temp_path(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("mbt-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove(p);
  return p;
}

TEST(BlockStoreTest, PutThenGet) {
  Cast cast;
  auto t = cast.updated_tree();
  BlockStore store;
  const auto& b = *t.find({1, 3});
  put_block(store, t.params(), b);
  EXPECT_EQ(get_block(store, t.params(), {1, 3}), b);
  EXPECT_FALSE(get_block(store, t.params(), {1, 4}).has_value());
  EXPECT_EQ(store.write_count(), 1u);
}

TEST(BlockStoreTest, DuplicateIndexConflicts) {
  Cast cast;
  auto t = cast.genesis();
  BlockStore store;
  put_block(store, t.params(), t.tip(1));
  try {
    put_block(store, t.params(), t.tip(1));
    FAIL() << "expected conflict";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConflict);
  }
  EXPECT_EQ(store.size(), 1u);
}

TEST(BlockStoreTest, PatientHistoryMatchesScan) {
  Cast cast;
  auto t = cast.updated_tree();
  t.sprout_branch(t.make_collision(cast.patient("Alice"), cast.meta("Alice", "asthma")));
  BlockStore store;
  std::vector<tree::Block> appended;
  for (const auto& [id, br] : t.branches()) {
    for (const auto& b : br.blocks) {
      put_block(store, t.params(), b);
      appended.push_back(b);
    }
  }
  for (const auto& name : {"Alice", "Bob", "Claire", "Daisy"}) {
    const auto& pk = cast.patient(name).pk;
    std::vector<tree::Block> expected;
    for (const auto& b : appended) {
      if (b.meta.patient_pk == pk) expected.push_back(b);
    }
    EXPECT_EQ(patient_history(store, t.params(), pk), expected) << name;
  }
  EXPECT_EQ(patient_history(store, t.params(), cast.patient("Alice").pk).size(), 3u);
}

TEST(BlockStoreTest, FileBackendSequentialRoundTrip) {
  auto path = temp_path("seq");
  auto group = crypto::profiles::test512();
  crypto::Drbg rng(5);
  auto worker = crypto::keygen(*group, rng);
  std::vector<Bytes> written;
  {
    BlockStore store(std::make_unique<FileBackend>(path));
    for (std::uint32_t i = 0; i < 2000; ++i) {
      tree::Block b;
      b.index = {1 + i % 7, i / 7};
      b.pre_hash = crypto::Element{i};
      b.digest = {crypto::Element{i + 1}, crypto::Scalar{i}};
      b.meta = {crypto::Element{1000 + i}, worker.pk, i, "kw" + std::to_string(i), i};
      b.proposer_pk = worker.pk;
      b.vrf = crypto::vrf_prove(*group, worker, Writer().u32(i).bytes());
      put_block(store, *group, b);
      written.push_back(tree::encode(*group, b));
    }
  }
  BlockStore reopened(std::make_unique<FileBackend>(path));
  ASSERT_EQ(reopened.size(), written.size());
  EXPECT_EQ(reopened.write_count(), 0u);
  for (std::size_t i = 0; i < written.size(); ++i) EXPECT_EQ(reopened.records()[i].payload, written[i]);
  EXPECT_TRUE(reopened.get({3, 100}).has_value());
  EXPECT_THROW(put_block(reopened, *group, tree::decode_block(*group, written[0])), Error);
  std::filesystem::remove(path);
}

TEST(BlockStoreTest, FileBackendRejectsForeignFile) {
  auto path = temp_path("foreign");
  {
    std::ofstream out(path);
    out << "definitely not a store";
  }
  EXPECT_THROW(FileBackend{path}, Error);
  std::filesystem::remove(path);
}

TEST(BlockStoreTest, TornTailIgnored) {
  auto path = temp_path("torn");
  {
    BlockStore store(std::make_unique<FileBackend>(path));
    store.put({1, 0}, as_bytes("owner"), as_bytes("payload"));
  }
  {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    out.write("\x00\x00\x01\x00zz", 6);
  }
  BlockStore reopened(std::make_unique<FileBackend>(path));
  EXPECT_EQ(reopened.size(), 1u);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace mbt::store
