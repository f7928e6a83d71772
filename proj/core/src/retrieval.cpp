#include "pivotmt/retrieval.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "pivotmt/errors.hpp"
#include "pivotmt/io_util.hpp"

namespace pivotmt {

using nlohmann::json;

namespace {
constexpr const char* kIndexFormat = "pivotmt-index";
constexpr int kIndexVersion = 1;
}  // namespace

const Triplet& Datastore::triplet_by_id(int64_t id) const {
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return triplets[i];
  }
  throw ValidationError("datastore has no triplet with id " +
                        std::to_string(id));
}

Datastore build_index(const Corpus& corpus, EmbeddingProvider& provider,
                      size_t batch_size, int parallelism) {
  Datastore store;
  store.corpus_name = corpus.name;
  store.provider_id = provider.id();

  std::vector<std::string> sources;
  sources.reserve(corpus.train.size());
  for (const auto& t : corpus.train) sources.push_back(t.source);

  if (!sources.empty()) {
    store.vectors = embed_texts(provider, sources, batch_size, parallelism);
    store.dimension = static_cast<int>(store.vectors[0].size());
  } else {
    store.dimension = provider.dimension();
  }
  store.ids.reserve(corpus.train.size());
  for (const auto& t : corpus.train) store.ids.push_back(t.id);
  store.triplets = corpus.train;
  return store;
}

RetrievalResult retrieve_topk(const Datastore& store,
                              const EmbeddingVector& query, size_t k) {
  if (store.size() == 0 || k == 0) return {};
  if (static_cast<int>(query.size()) != store.dimension) {
    throw DimensionMismatchError(
        "query dimension " + std::to_string(query.size()) +
        " does not match datastore dimension " +
        std::to_string(store.dimension));
  }
  k = std::min(k, store.size());

  std::vector<RetrievalHit> hits;
  hits.reserve(store.size());
  for (size_t i = 0; i < store.size(); ++i) {
    const auto& v = store.vectors[i];
    double dot = 0.0;
    for (size_t d = 0; d < v.size(); ++d) {
      dot += static_cast<double>(v[d]) * static_cast<double>(query[d]);
    }
    hits.push_back({store.ids[i], dot});
  }
  const auto better = [](const RetrievalHit& a, const RetrievalHit& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.triplet_id < b.triplet_id;
  };
  std::partial_sort(hits.begin(), hits.begin() + k, hits.end(), better);
  hits.resize(k);
  return {std::move(hits)};
}

void save_index(const Datastore& store, const std::string& path) {
  std::ostringstream buf;
  json header;
  header["format"] = kIndexFormat;
  header["version"] = kIndexVersion;
  header["corpus"] = store.corpus_name;
  header["provider_id"] = store.provider_id;
  header["dimension"] = store.dimension;
  header["entries"] = store.size();
  buf << header.dump() << "\n";
  for (size_t i = 0; i < store.size(); ++i) {
    json rec;
    rec["id"] = store.ids[i];
    rec["v"] = store.vectors[i];
    rec["src"] = store.triplets[i].source;
    rec["piv"] = store.triplets[i].pivot;
    rec["tgt"] = store.triplets[i].target;
    buf << rec.dump() << "\n";
  }
  io::write_file_atomic(path, buf.str());
}

Datastore load_index(const std::string& path,
                     const std::optional<std::string>& expected_provider_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open index file: " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("index file is empty: " + path);
  }
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError("corrupt index header in " + path + ": " + e.what());
  }
  if (header.value("format", "") != kIndexFormat) {
    throw ParseError("not an index file: " + path);
  }
  if (header.value("version", -1) != kIndexVersion) {
    throw ParseError("unsupported index version " +
                     std::to_string(header.value("version", -1)) + " in " +
                     path);
  }

  Datastore store;
  store.corpus_name = header.value("corpus", "");
  store.provider_id = header.value("provider_id", "");
  store.dimension = header.value("dimension", 0);
  const auto expected_entries = header.value("entries", size_t{0});

  if (expected_provider_id.has_value() &&
      *expected_provider_id != store.provider_id) {
    throw ValidationError("index provider mismatch: file has '" +
                          store.provider_id + "', config expects '" +
                          *expected_provider_id + "'");
  }

  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("corrupt index file " + path + ":" +
                       std::to_string(line_no) + ": " + e.what());
    }
    Triplet t;
    t.id = rec.at("id").get<int64_t>();
    t.source = rec.at("src").get<std::string>();
    t.pivot = rec.at("piv").get<std::string>();
    t.target = rec.at("tgt").get<std::string>();
    auto vec = rec.at("v").get<EmbeddingVector>();
    if (static_cast<int>(vec.size()) != store.dimension) {
      throw ParseError("corrupt index file " + path + ":" +
                       std::to_string(line_no) + ": vector dimension " +
                       std::to_string(vec.size()) + " != " +
                       std::to_string(store.dimension));
    }
    store.ids.push_back(t.id);
    store.vectors.push_back(std::move(vec));
    store.triplets.push_back(std::move(t));
  }
  if (store.size() != expected_entries) {
    throw ParseError("corrupt index file " + path + ": header declares " +
                     std::to_string(expected_entries) + " entries, found " +
                     std::to_string(store.size()));
  }
  return store;
}

}  // namespace pivotmt
