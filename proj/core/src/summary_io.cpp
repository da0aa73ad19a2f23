#include "driftx/summary_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "driftx/error.hpp"

namespace driftx {
namespace {

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), c, c + n);
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void reals(const double* p, Index n) {
    for (Index i = 0; i < n; ++i) f64(p[i]);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}

  void need(std::size_t n, const char* what) const {
    if (in_.size() - pos_ < n) {
      throw Error(ErrorCode::Truncated, std::string("file ends inside ") + what);
    }
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::int64_t i64(const char* what) { return static_cast<std::int64_t>(u64(what)); }
  double f64(const char* what) {
    const double v = std::bit_cast<double>(u64(what));
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, std::string("non-finite value in ") + what);
    return v;
  }
  Matrix matrix(std::uint64_t rows, std::uint64_t cols, const char* what) {
    // Checked before allocating so a corrupt header cannot request huge buffers.
    if (cols != 0 && rows > (in_.size() - pos_) / 8 / cols) {
      throw Error(ErrorCode::Truncated, std::string("file ends inside ") + what);
    }
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = f64(what);
    return m;
  }
  std::uint8_t byte(const char* what) {
    need(1, what);
    return in_[pos_++];
  }
  bool at_end() const { return pos_ == in_.size(); }

 private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_summary_bank(const ShardedSummaryBank& bank) {
  Writer w;
  w.bytes(kBankMagic, sizeof kBankMagic);
  w.bytes(&kBankVersion, 1);
  w.u64(bank.size());
  w.f64(bank.epsilon());
  for (const auto& shard : bank.shards()) {
    const auto& basis = shard.basis;
    const auto& summary = shard.summary;
    w.u64(static_cast<std::uint64_t>(basis.rank()));
    w.u64(static_cast<std::uint64_t>(basis.dim()));
    w.f64(basis.tau());
    w.f64(basis.lambda());
    w.i64(summary.class_id().value_or(-1));
    w.reals(basis.transform().data(), basis.transform().size());
    w.reals(basis.landmarks().data(), basis.landmarks().size());
    w.reals(summary.a().data(), summary.a().size());
    w.reals(summary.b().data(), summary.b().size());
    w.u64(summary.count());
  }
  return w.take();
}

ShardedSummaryBank decode_summary_bank(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof kBankMagic || std::memcmp(bytes.data(), kBankMagic, sizeof kBankMagic) != 0) {
    throw Error(ErrorCode::MagicMismatch, "not a DXSM summary bank");
  }
  Reader r(bytes);
  for (std::size_t i = 0; i < sizeof kBankMagic; ++i) r.byte("magic");
  const std::uint8_t version = r.byte("version");
  if (version != kBankVersion) {
    throw Error(ErrorCode::VersionMismatch, "unsupported bank version " + std::to_string(version));
  }
  const std::uint64_t count = r.u64("shard count");
  const double epsilon = r.f64("epsilon");
  std::vector<SummaryShard> shards;
  for (std::uint64_t s = 0; s < count; ++s) {
    const std::uint64_t rank = r.u64("shard header");
    const std::uint64_t dim = r.u64("shard header");
    const double tau = r.f64("shard header");
    const double lambda = r.f64("shard header");
    const std::int64_t cls = r.i64("shard header");
    Matrix w = r.matrix(rank, rank, "transform");
    Matrix landmarks = r.matrix(rank, dim, "landmarks");
    Matrix a = r.matrix(rank, dim, "A_p");
    Vector b = r.matrix(rank, 1, "b_p").col(0);
    const std::uint64_t absorbed = r.u64("count");
    NystromBasis basis = NystromBasis::from_parts(std::move(landmarks), std::move(w), tau, lambda);
    const std::optional<int> class_id = cls < 0 ? std::nullopt : std::optional<int>(static_cast<int>(cls));
    AttractiveSummary summary(std::move(a), std::move(b), absorbed, basis.id(), class_id);
    shards.push_back({std::move(basis), std::move(summary)});
  }
  if (!r.at_end()) throw Error(ErrorCode::Parse, "trailing bytes after the last shard");
  return ShardedSummaryBank(std::move(shards), epsilon);
}

void save_summary_bank(const ShardedSummaryBank& bank, const std::filesystem::path& path) {
  const auto bytes = encode_summary_bank(bank);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

ShardedSummaryBank load_summary_bank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_summary_bank(bytes);
}

}  // namespace driftx
