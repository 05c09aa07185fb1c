// Binary index snapshots.
//
// Layout: "SPADASIX" | u32 version | u64 payload length | payload | u32 crc32
// Every scalar is written in host byte order (little-endian on all supported
// targets); doubles are stored bit-exact so a reloaded index answers queries
// identically.

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <type_traits>

#include "spadas/io.hpp"

namespace spadas {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'A', 'D', 'A', 'S', 'I', 'X'};

class Writer {
 public:
  template <class T>
  void scalar(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.append(p, sizeof v);
  }
  template <class T>
  void array(const std::vector<T>& v) {
    scalar<std::uint64_t>(v.size());
    const auto* p = reinterpret_cast<const char*>(v.data());
    buf_.append(p, v.size() * sizeof(T));
  }
  void string(const std::string& s) {
    scalar<std::uint64_t>(s.size());
    buf_.append(s);
  }
  std::string& bytes() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <class T>
  T scalar() {
    T v;
    need(sizeof v);
    std::memcpy(&v, data_.data() + pos_, sizeof v);
    pos_ += sizeof v;
    return v;
  }
  template <class T>
  std::vector<T> array() {
    const auto n = scalar<std::uint64_t>();
    if (n > (data_.size() - pos_) / sizeof(T)) throw IndexFormatError("index snapshot is truncated");
    std::vector<T> v(n);
    if (n > 0) std::memcpy(v.data(), data_.data() + pos_, n * sizeof(T));
    pos_ += n * sizeof(T);
    return v;
  }
  std::string string() {
    const auto n = scalar<std::uint64_t>();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (n > data_.size() - pos_) throw IndexFormatError("index snapshot is truncated");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::uint32_t checksum(std::string_view bytes) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

void write_mbr(Writer& w, const Mbr& m) {
  w.array(m.lo);
  w.array(m.hi);
}

Mbr read_mbr(Reader& r) {
  Mbr m;
  m.lo = r.array<double>();
  m.hi = r.array<double>();
  return m;
}

}  // namespace

class IndexSerializer {
 public:
  static void write_tree(Writer& w, const DatasetTree& t) {
    w.scalar<std::uint64_t>(t.dims_);
    w.scalar<std::uint64_t>(t.metric_dims_);
    w.array(t.coords_);
    w.array(t.source_);
    w.array(t.nodes_);
    w.array(t.centroid_);
    w.array(t.radius_);
    w.array(t.lo_);
    w.array(t.hi_);
    w.scalar(t.root_);
  }

  static DatasetTree read_tree(Reader& r) {
    DatasetTree t;
    t.dims_ = r.scalar<std::uint64_t>();
    t.metric_dims_ = r.scalar<std::uint64_t>();
    t.coords_ = r.array<double>();
    t.source_ = r.array<std::uint32_t>();
    t.nodes_ = r.array<TreeNode>();
    t.centroid_ = r.array<double>();
    t.radius_ = r.array<double>();
    t.lo_ = r.array<double>();
    t.hi_ = r.array<double>();
    t.root_ = r.scalar<std::int32_t>();
    const auto n = t.nodes_.size();
    if (t.dims_ < 2 || t.metric_dims_ == 0 || t.metric_dims_ > t.dims_ ||
        t.coords_.size() != t.source_.size() * t.dims_ || t.radius_.size() != n ||
        t.centroid_.size() != n * t.dims_ || t.lo_.size() != n * t.dims_ ||
        t.hi_.size() != n * t.dims_ || t.root_ < 0 || static_cast<std::size_t>(t.root_) >= n) {
      throw IndexFormatError("inconsistent dataset tree in snapshot");
    }
    return t;
  }

  static std::string serialize(const UnifiedIndex& idx) {
    Writer w;
    const auto& p = idx.params_;
    w.scalar<std::uint64_t>(p.leaf_capacity);
    w.scalar<std::int32_t>(p.theta);
    w.scalar<std::uint64_t>(p.metric_dims);
    w.scalar<std::uint8_t>(p.outlier_removal ? 1 : 0);
    w.scalar<std::uint64_t>(idx.dims_);
    w.scalar(idx.r_prime_);
    write_mbr(w, idx.global_mbr_);
    w.array(idx.ledger_);

    w.scalar<std::uint64_t>(idx.datasets_.size());
    for (const auto& d : idx.datasets_) {
      w.scalar(d.id);
      w.string(d.name);
      w.scalar<std::uint64_t>(d.original_count);
      write_tree(w, d.tree);
      w.array(d.signature.ids());
    }
    w.scalar<std::uint64_t>(idx.nodes_.size());
    for (const auto& n : idx.nodes_) {
      w.scalar(n.left);
      w.scalar(n.right);
      w.array(n.datasets);
      w.array(n.centroid);
      w.scalar(n.radius);
      write_mbr(w, n.mbr);
      w.array(n.signature.ids());
    }
    w.scalar(idx.root_);

    const std::string payload = std::move(w.bytes());
    Writer out;
    out.bytes().append(kMagic, sizeof kMagic);
    out.scalar(kIndexFormatVersion);
    out.scalar<std::uint64_t>(payload.size());
    out.bytes().append(payload);
    out.scalar(checksum(payload));
    return std::move(out.bytes());
  }

  static UnifiedIndex deserialize(std::string_view bytes) {
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
      throw IndexFormatError("not an index snapshot");
    }
    Reader header(bytes.substr(sizeof kMagic));
    const auto version = header.scalar<std::uint32_t>();
    if (version != kIndexFormatVersion) {
      throw IndexFormatError("index snapshot version " + std::to_string(version) +
                             " is incompatible with this build (expects " +
                             std::to_string(kIndexFormatVersion) + ")");
    }
    const auto length = header.scalar<std::uint64_t>();
    const std::size_t offset = sizeof kMagic + sizeof(std::uint32_t) + sizeof(std::uint64_t);
    if (bytes.size() < offset || length > bytes.size() - offset ||
        bytes.size() - offset - length != sizeof(std::uint32_t)) {
      throw IndexFormatError("index snapshot is truncated");
    }
    const auto payload = bytes.substr(offset, length);
    std::uint32_t stored;
    std::memcpy(&stored, bytes.data() + offset + length, sizeof stored);
    if (stored != checksum(payload)) throw IndexFormatError("index snapshot checksum mismatch");

    Reader r(payload);
    UnifiedIndex idx;
    idx.params_.leaf_capacity = r.scalar<std::uint64_t>();
    idx.params_.theta = r.scalar<std::int32_t>();
    idx.params_.metric_dims = r.scalar<std::uint64_t>();
    idx.params_.outlier_removal = r.scalar<std::uint8_t>() != 0;
    idx.dims_ = r.scalar<std::uint64_t>();
    idx.r_prime_ = r.scalar<double>();
    idx.global_mbr_ = read_mbr(r);
    idx.ledger_ = r.array<double>();
    idx.grid_ = Grid::over(idx.global_mbr_, idx.params_.theta);

    const auto n_datasets = r.scalar<std::uint64_t>();
    for (std::uint64_t i = 0; i < n_datasets; ++i) {
      IndexedDataset d;
      d.id = r.scalar<DatasetId>();
      d.name = r.string();
      d.original_count = r.scalar<std::uint64_t>();
      d.tree = read_tree(r);
      d.signature = ZSignature(r.array<CellId>());
      idx.datasets_.push_back(std::move(d));
    }
    const auto n_nodes = r.scalar<std::uint64_t>();
    for (std::uint64_t i = 0; i < n_nodes; ++i) {
      RepoNode n;
      n.left = r.scalar<std::int32_t>();
      n.right = r.scalar<std::int32_t>();
      n.datasets = r.array<std::uint32_t>();
      n.centroid = r.array<double>();
      n.radius = r.scalar<double>();
      n.mbr = read_mbr(r);
      n.signature = ZSignature(r.array<CellId>());
      for (auto s : n.datasets) {
        if (s >= idx.datasets_.size()) throw IndexFormatError("dangling dataset slot in snapshot");
      }
      idx.nodes_.push_back(std::move(n));
    }
    idx.root_ = r.scalar<std::int32_t>();
    if (!r.done() || idx.root_ < 0 || static_cast<std::size_t>(idx.root_) >= idx.nodes_.size()) {
      throw IndexFormatError("inconsistent index snapshot");
    }
    idx.rebuild_lookup();
    return idx;
  }
};

std::string serialize_index(const UnifiedIndex& index) { return IndexSerializer::serialize(index); }

UnifiedIndex deserialize_index(const std::string& bytes) { return IndexSerializer::deserialize(bytes); }

void save_index(const std::filesystem::path& path, const UnifiedIndex& index) {
  const auto bytes = serialize_index(index);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

UnifiedIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_index(bytes);
}

}  // namespace spadas
