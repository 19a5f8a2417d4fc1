#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>

#include "spikevis/manifest.hpp"

using namespace spikevis;
namespace fs = std::filesystem;

namespace {

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& name, const std::string& contents)
      : path(fs::path("manifest_test_" + name)) {
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { fs::remove(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("csv manifests load with free column order and pragmas", "[manifest]") {
  TempFile f("a.csv",
             "# resize_height=300\n"
             "label,path,instance,split,view\n"
             "dog,img/d1.png,1,train,v000\n"
             "dog,img/d2.png,2,test,v045\n"
             "cat,img/c1.png,1,,\n");
  const DatasetManifest m = load_manifest(f.str());
  REQUIRE(m.resize_height == 300);
  REQUIRE(m.records.size() == 3);
  REQUIRE(m.records[0].path == "img/d1.png");
  REQUIRE(m.records[0].label == "dog");
  REQUIRE(m.records[0].instance == "1");
  REQUIRE(m.records[0].split == "train");
  REQUIRE(m.records[1].view == "v045");
  REQUIRE(m.records[2].split.empty());
  REQUIRE(manifest_classes(m) == std::vector<std::string>{"dog", "cat"});
}

TEST_CASE("json-lines manifests load too", "[manifest]") {
  TempFile f("b.jsonl",
             "{\"path\":\"x/a.png\",\"label\":\"ape\",\"instance\":\"7\",\"tilt\":\"t30\"}\n"
             "{\"path\":\"x/b.png\",\"label\":\"ape\",\"instance\":\"8\",\"split\":\"test\"}\n");
  const DatasetManifest m = load_manifest(f.str());
  REQUIRE(m.records.size() == 2);
  REQUIRE(m.records[0].tilt_tag == "t30");
  REQUIRE(m.records[1].split == "test");
}

TEST_CASE("manifest validation rejects broken records", "[manifest]") {
  TempFile dup("dup.csv", "path,label,instance\np.png,a,1\np.png,a,2\n");
  REQUIRE_THROWS_AS(load_manifest(dup.str()), DataError);
  TempFile nolabel("nolabel.csv", "path,label,instance\np.png,,1\n");
  REQUIRE_THROWS_AS(load_manifest(nolabel.str()), DataError);
  TempFile noinst("noinst.csv", "path,label,instance\np.png,a,\n");
  REQUIRE_THROWS_AS(load_manifest(noinst.str()), DataError);
  TempFile badsplit("badsplit.csv", "path,label,instance,split\np.png,a,1,validation\n");
  REQUIRE_THROWS_AS(load_manifest(badsplit.str()), DataError);
  TempFile leak("leak.csv",
                "path,label,instance,split\np.png,a,1,train\nq.png,a,1,test\n");
  REQUIRE_THROWS_AS(load_manifest(leak.str()), DataError);
  TempFile nohdr("nohdr.csv", "path,name\np.png,a\n");
  REQUIRE_THROWS_AS(load_manifest(nohdr.str()), DataError);
  TempFile empty("empty.csv", "# resize_height=0\n");
  REQUIRE_THROWS_AS(load_manifest(empty.str()), DataError);
  REQUIRE_THROWS_AS(load_manifest("does_not_exist.csv"), DataError);
}

TEST_CASE("manifests round-trip through csv", "[manifest]") {
  DatasetManifest m;
  m.resize_height = 120;
  m.records.push_back({"a.png", "dog", "1", "v0", "s100", "t0", "train"});
  m.records.push_back({"b.png", "cat", "2", "", "", "", "test"});
  const std::string path = "manifest_test_roundtrip.csv";
  save_manifest_csv(path, m);
  const DatasetManifest back = load_manifest(path);
  REQUIRE(back == m);
  fs::remove(path);
}

TEST_CASE("filter_split keeps matching records only", "[manifest]") {
  DatasetManifest m;
  m.records.push_back({"a.png", "dog", "1", "", "", "", "train"});
  m.records.push_back({"b.png", "dog", "2", "", "", "", "test"});
  m.records.push_back({"c.png", "cat", "1", "", "", "", "train"});
  const DatasetManifest train = filter_split(m, "train");
  REQUIRE(train.records.size() == 2);
  REQUIRE(train.records[0].path == "a.png");
  REQUIRE(train.records[1].path == "c.png");
  REQUIRE(filter_split(m, "test").records.size() == 1);
  REQUIRE(filter_split(m, "").records.empty());
}

TEST_CASE("instance-level splits keep all views of an instance together", "[manifest]") {
  DatasetManifest m;
  for (int inst = 0; inst < 6; ++inst) {
    for (int view = 0; view < 3; ++view) {
      ManifestRecord r;
      r.path = "c" + std::to_string(inst) + "_v" + std::to_string(view) + ".png";
      r.label = "cup";
      r.instance = std::to_string(inst);
      r.view = "v" + std::to_string(view);
      m.records.push_back(r);
    }
  }
  const auto [train, test] = split_by_instance(m, 2, 7);
  REQUIRE(train.records.size() == 6);  // 2 instances x 3 views
  REQUIRE(test.records.size() == 12);
  std::set<std::string> train_inst, test_inst;
  for (const auto& r : train.records) {
    REQUIRE(r.split == "train");
    train_inst.insert(r.instance);
  }
  for (const auto& r : test.records) {
    REQUIRE(r.split == "test");
    test_inst.insert(r.instance);
  }
  REQUIRE(train_inst.size() == 2);
  REQUIRE(test_inst.size() == 4);
  for (const std::string& i : train_inst) REQUIRE(test_inst.count(i) == 0);

  // Deterministic in the seed, sensitive to it.
  const auto [train2, test2] = split_by_instance(m, 2, 7);
  REQUIRE(train2 == train);

  REQUIRE_THROWS_AS(split_by_instance(m, 6, 7), DataError);
  REQUIRE_THROWS_AS(split_by_instance(m, 0, 7), InvalidInputError);
}
