#pragma once
// Two-party session: agreement payloads, the smashed-batch wire format,
// message framing over in-process and TCP transports, the seven-step
// protocol driver, and the leakage scanner used to audit outgoing bytes.

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <openssl/evp.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include "splitlink/common.hpp"
#include "splitlink/core.hpp"
#include "splitlink/datagen.hpp"
#include "splitlink/linkage.hpp"
#include "splitlink/smashing.hpp"
#include "splitlink/svm.hpp"

namespace splitlink {

inline std::array<uint8_t, 32> sha256(const uint8_t* data, size_t len) {
  std::array<uint8_t, 32> out{};
  unsigned int out_len = 0;
  if (EVP_Digest(data, len, out.data(), &out_len, EVP_sha256(), nullptr) != 1 || out_len != 32)
    throw DataError("sha256 digest failed");
  return out;
}

// Canonical reference-set bytes: schema then rows, every string length
// prefixed. Both parties must derive the digest from this exact layout.
inline std::vector<uint8_t> canonical_reference_bytes(const ReferenceSet& rs) {
  std::vector<uint8_t> out;
  append_u32(out, static_cast<uint32_t>(rs.schema.size()));
  auto put = [&out](const std::string& s) {
    append_u16(out, static_cast<uint16_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
  };
  for (const auto& name : rs.schema) put(name);
  append_u32(out, static_cast<uint32_t>(rs.rows.size()));
  for (const auto& row : rs.rows) {
    if (row.size() != rs.schema.size()) throw DataError("reference row arity mismatch");
    for (const auto& v : row) put(v);
  }
  return out;
}

inline std::array<uint8_t, 32> reference_digest(const ReferenceSet& rs) {
  auto bytes = canonical_reference_bytes(rs);
  return sha256(bytes.data(), bytes.size());
}

// ---------------------------------------------------------------------------
// Agreement: everything the two parties must hold identically before any
// smashed data moves. Compared byte-for-byte on its serialized form.

struct ProtocolAgreement {
  static constexpr uint32_t kFormatVersion = 1;

  std::array<uint8_t, 32> reference_set_digest{};
  AttributeMapping mapping;
  std::string distance_spec = "edit+cosine";
  std::vector<std::string> record_schema;
  std::vector<std::string> reference_schema;
  uint32_t format_version = kFormatVersion;

  static ProtocolAgreement build(const ReferenceSet& rs,
                                 const std::vector<std::string>& record_schema,
                                 const AttributeMapping& mapping) {
    ProtocolAgreement a;
    a.reference_set_digest = reference_digest(rs);
    a.mapping = mapping;
    a.record_schema = record_schema;
    a.reference_schema = rs.schema;
    return a;
  }

  std::vector<uint8_t> serialize() const {
    std::vector<uint8_t> out;
    append_u32(out, format_version);
    out.insert(out.end(), reference_set_digest.begin(), reference_set_digest.end());
    auto put = [&out](const std::string& s) {
      append_u16(out, static_cast<uint16_t>(s.size()));
      out.insert(out.end(), s.begin(), s.end());
    };
    put(distance_spec);
    put(mapping.to_string());
    append_u16(out, static_cast<uint16_t>(record_schema.size()));
    for (const auto& s : record_schema) put(s);
    append_u16(out, static_cast<uint16_t>(reference_schema.size()));
    for (const auto& s : reference_schema) put(s);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Smashed-batch wire format. Distinct decode failures get distinct types so
// callers can tell truncation from version skew from hostile length fields.

struct BatchError : DataError {
  using DataError::DataError;
};
struct BatchMagicError : BatchError {
  using BatchError::BatchError;
};
struct BatchVersionError : BatchError {
  using BatchError::BatchError;
};
struct BatchTruncatedError : BatchError {
  using BatchError::BatchError;
};
struct BatchOverflowError : BatchError {
  using BatchError::BatchError;
};
struct BatchStructureError : BatchError {
  using BatchError::BatchError;
};

namespace wire {
constexpr char kBatchMagic[4] = {'S', 'L', 'S', 'D'};
constexpr uint16_t kBatchVersion = 1;
constexpr uint64_t kMaxBatchCells = uint64_t{1} << 32;  // distances per batch
}  // namespace wire

inline std::vector<uint8_t> encode_smashed_batch(const std::vector<SmashedVector>& vs) {
  if (vs.empty()) throw BatchStructureError("cannot encode an empty smashed batch");
  const size_t group_count = vs[0].groups.size();
  const size_t group_len = group_count ? vs[0].groups[0].size() : 0;
  if (group_count == 0 || group_len == 0)
    throw BatchStructureError("smashed batch needs at least one non-empty group");
  for (const auto& v : vs) {
    if (v.groups.size() != group_count)
      throw BatchStructureError("non-uniform group count in batch at record " + v.record_id);
    for (const auto& g : v.groups)
      if (g.size() != group_len)
        throw BatchStructureError("non-uniform group length in batch at record " + v.record_id);
    if (v.record_id.empty() || v.record_id.size() > 0xFFFF)
      throw BatchStructureError("record id length out of range: " + v.record_id);
  }
  std::vector<uint8_t> out;
  out.reserve(18 + vs.size() * (2 + 12 + group_count * group_len * 4));
  out.insert(out.end(), wire::kBatchMagic, wire::kBatchMagic + 4);
  append_u16(out, wire::kBatchVersion);
  append_u32(out, static_cast<uint32_t>(group_count));
  append_u32(out, static_cast<uint32_t>(group_len));
  append_u32(out, static_cast<uint32_t>(vs.size()));
  for (const auto& v : vs) {
    append_u16(out, static_cast<uint16_t>(v.record_id.size()));
    out.insert(out.end(), v.record_id.begin(), v.record_id.end());
    for (const auto& g : v.groups)
      for (uint32_t d : g) append_u32(out, d);
  }
  return out;
}

inline std::vector<SmashedVector> decode_smashed_batch(const std::vector<uint8_t>& bytes) {
  try {
    ByteReader r(bytes.data(), bytes.size());
    if (std::memcmp(r.bytes(4), wire::kBatchMagic, 4) != 0)
      throw BatchMagicError("bad smashed batch magic");
    uint16_t version = r.u16();
    if (version != wire::kBatchVersion)
      throw BatchVersionError("unsupported smashed batch version " + std::to_string(version));
    uint64_t group_count = r.u32();
    uint64_t group_len = r.u32();
    uint64_t record_count = r.u32();
    if (group_count == 0 || group_len == 0 || record_count == 0)
      throw BatchStructureError("smashed batch declares an empty dimension");
    uint64_t cells = group_count * group_len;  // fits: both are u32
    if (cells > wire::kMaxBatchCells || record_count > wire::kMaxBatchCells / cells)
      throw BatchOverflowError("smashed batch declares more cells than permitted");
    // Every record needs at least its id length field plus the distance
    // block; checking before allocating keeps hostile headers cheap.
    if (r.remaining() < record_count * (2 + cells * 4))
      throw BatchOverflowError("smashed batch payload shorter than declared sizes");
    std::vector<SmashedVector> vs(static_cast<size_t>(record_count));
    for (auto& v : vs) {
      uint16_t id_len = r.u16();
      const uint8_t* id = r.bytes(id_len);
      v.record_id.assign(reinterpret_cast<const char*>(id), id_len);
      v.groups.resize(static_cast<size_t>(group_count));
      for (auto& g : v.groups) {
        g.resize(static_cast<size_t>(group_len));
        for (auto& d : g) d = r.u32();
      }
    }
    if (!r.done()) throw BatchStructureError("trailing bytes after smashed batch");
    return vs;
  } catch (const ByteUnderflow&) {
    throw BatchTruncatedError("smashed batch is truncated");
  }
}

// ---------------------------------------------------------------------------
// Messages and transports. A frame on the wire is a u32 big-endian length
// followed by one kind byte and the payload; the in-process channel carries
// the same encoded bytes so both transports are byte-identical.

enum class MsgKind : uint8_t {
  Hello = 1,
  AgreementCheck = 2,
  SmashedBatch = 3,
  MatchResult = 4,
  Done = 5,
  Error = 6,
};

inline const char* msg_kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::Hello: return "Hello";
    case MsgKind::AgreementCheck: return "AgreementCheck";
    case MsgKind::SmashedBatch: return "SmashedBatch";
    case MsgKind::MatchResult: return "MatchResult";
    case MsgKind::Done: return "Done";
    case MsgKind::Error: return "Error";
  }
  return "Unknown";
}

struct ProtocolMessage {
  MsgKind kind = MsgKind::Error;
  std::vector<uint8_t> payload;
};

inline std::vector<uint8_t> encode_message(const ProtocolMessage& msg) {
  std::vector<uint8_t> out;
  out.reserve(1 + msg.payload.size());
  append_u8(out, static_cast<uint8_t>(msg.kind));
  out.insert(out.end(), msg.payload.begin(), msg.payload.end());
  return out;
}

inline ProtocolMessage decode_message(std::vector<uint8_t> bytes) {
  if (bytes.empty())
    throw ProtocolError(AbortKind::ProtocolViolation, "empty protocol frame");
  uint8_t kind = bytes[0];
  if (kind < 1 || kind > 6)
    throw ProtocolError(AbortKind::ProtocolViolation,
                        "unknown message kind " + std::to_string(kind));
  ProtocolMessage msg;
  msg.kind = static_cast<MsgKind>(kind);
  msg.payload.assign(bytes.begin() + 1, bytes.end());
  return msg;
}

class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(const ProtocolMessage& msg) = 0;
  virtual ProtocolMessage receive() = 0;
};

// Wraps a transport and copies every frame to observer callbacks; used to
// audit sessions (leakage checks, traffic captures) without touching the
// protocol driver.
class RecordingTransport : public Transport {
 public:
  RecordingTransport(Transport& inner, std::vector<ProtocolMessage>* sent,
                     std::vector<ProtocolMessage>* received)
      : inner_(inner), sent_(sent), received_(received) {}

  void send(const ProtocolMessage& msg) override {
    if (sent_) sent_->push_back(msg);
    inner_.send(msg);
  }

  ProtocolMessage receive() override {
    ProtocolMessage msg = inner_.receive();
    if (received_) received_->push_back(msg);
    return msg;
  }

 private:
  Transport& inner_;
  std::vector<ProtocolMessage>* sent_;
  std::vector<ProtocolMessage>* received_;
};

namespace detail {

struct ChannelQueue {
  std::mutex mutex;
  std::condition_variable cv;
  std::deque<std::vector<uint8_t>> frames;
  bool closed = false;
};

struct ChannelShared {
  ChannelQueue queues[2];  // queues[i] is read by endpoint i
};

class ChannelEndpoint : public Transport {
 public:
  ChannelEndpoint(std::shared_ptr<ChannelShared> shared, int index)
      : shared_(std::move(shared)), index_(index) {}

  ~ChannelEndpoint() override {
    // close both directions: the peer's read queue (wakes a blocked receive)
    // and our own (a later peer send must fail, not queue into the void)
    for (auto& queue : shared_->queues) {
      std::lock_guard lock(queue.mutex);
      queue.closed = true;
      queue.cv.notify_all();
    }
  }

  void send(const ProtocolMessage& msg) override {
    auto& peer = shared_->queues[1 - index_];
    std::lock_guard lock(peer.mutex);
    if (peer.closed)
      throw ProtocolError(AbortKind::TransportError, "channel peer is closed");
    peer.frames.push_back(encode_message(msg));
    peer.cv.notify_all();
  }

  ProtocolMessage receive() override {
    auto& mine = shared_->queues[index_];
    std::unique_lock lock(mine.mutex);
    mine.cv.wait(lock, [&] { return !mine.frames.empty() || mine.closed; });
    if (mine.frames.empty())
      throw ProtocolError(AbortKind::TransportError, "channel closed while waiting");
    auto bytes = std::move(mine.frames.front());
    mine.frames.pop_front();
    lock.unlock();
    return decode_message(std::move(bytes));
  }

 private:
  std::shared_ptr<ChannelShared> shared_;
  int index_;
};

}  // namespace detail

inline std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_channel_pair() {
  auto shared = std::make_shared<detail::ChannelShared>();
  return {std::make_unique<detail::ChannelEndpoint>(shared, 0),
          std::make_unique<detail::ChannelEndpoint>(shared, 1)};
}

// TCP transport: u32 big-endian length prefix, then the encoded message.
class TcpTransport : public Transport {
 public:
  static constexpr uint32_t kMaxFrame = 1u << 30;

  explicit TcpTransport(int fd) : fd_(fd) {
    int flag = 1;
    setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &flag, sizeof(flag));
  }

  ~TcpTransport() override {
    if (fd_ >= 0) ::close(fd_);
  }

  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  void send(const ProtocolMessage& msg) override {
    auto body = encode_message(msg);
    if (body.size() > kMaxFrame)
      throw ProtocolError(AbortKind::ProtocolViolation, "outgoing frame exceeds size cap");
    std::vector<uint8_t> header;
    append_u32(header, static_cast<uint32_t>(body.size()));
    send_all(header.data(), header.size());
    send_all(body.data(), body.size());
  }

  ProtocolMessage receive() override {
    uint8_t header[4];
    recv_all(header, 4);
    uint32_t len = (uint32_t{header[0]} << 24) | (uint32_t{header[1]} << 16) |
                   (uint32_t{header[2]} << 8) | uint32_t{header[3]};
    if (len == 0 || len > kMaxFrame)
      throw ProtocolError(AbortKind::ProtocolViolation,
                          "incoming frame length " + std::to_string(len) + " out of range");
    std::vector<uint8_t> body(len);
    recv_all(body.data(), len);
    return decode_message(std::move(body));
  }

 private:
  void send_all(const uint8_t* data, size_t len) {
    while (len > 0) {
      ssize_t n = ::send(fd_, data, len, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(AbortKind::TransportError,
                            std::string("send failed: ") + std::strerror(errno));
      }
      data += n;
      len -= static_cast<size_t>(n);
    }
  }

  void recv_all(uint8_t* data, size_t len) {
    while (len > 0) {
      ssize_t n = ::recv(fd_, data, len, 0);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(AbortKind::TransportError,
                            std::string("recv failed: ") + std::strerror(errno));
      }
      if (n == 0)
        throw ProtocolError(AbortKind::TransportError, "connection closed mid-frame");
      data += n;
      len -= static_cast<size_t>(n);
    }
  }

  int fd_;
};

// Binds, accepts exactly one connection, and closes the listener.
inline std::unique_ptr<Transport> tcp_listen_once(uint16_t port) {
  int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0)
    throw ProtocolError(AbortKind::TransportError,
                        std::string("socket failed: ") + std::strerror(errno));
  int reuse = 1;
  setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &reuse, sizeof(reuse));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(port);
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 ||
      ::listen(listener, 1) < 0) {
    int err = errno;
    ::close(listener);
    throw ProtocolError(AbortKind::TransportError,
                        std::string("bind/listen failed: ") + std::strerror(err));
  }
  int fd = ::accept(listener, nullptr, nullptr);
  int err = errno;
  ::close(listener);
  if (fd < 0)
    throw ProtocolError(AbortKind::TransportError,
                        std::string("accept failed: ") + std::strerror(err));
  return std::make_unique<TcpTransport>(fd);
}

// Dials with retries so the connecting party can start before the listener.
inline std::unique_ptr<Transport> tcp_dial(const std::string& host, uint16_t port,
                                           int attempts = 50) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  std::string port_text = std::to_string(port);
  int rc = ::getaddrinfo(host.c_str(), port_text.c_str(), &hints, &result);
  if (rc != 0)
    throw ProtocolError(AbortKind::TransportError,
                        "cannot resolve " + host + ": " + gai_strerror(rc));
  std::string last_error = "no addresses";
  for (int attempt = 0; attempt < attempts; ++attempt) {
    for (addrinfo* ai = result; ai; ai = ai->ai_next) {
      int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
        ::freeaddrinfo(result);
        return std::make_unique<TcpTransport>(fd);
      }
      last_error = std::strerror(errno);
      ::close(fd);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  ::freeaddrinfo(result);
  throw ProtocolError(AbortKind::TransportError,
                      "cannot connect to " + host + ":" + port_text + ": " + last_error);
}

// ---------------------------------------------------------------------------
// Leakage scan: does any quasi-identifier value (length >= 3) appear as a
// contiguous byte substring? Values are printable, so only printable runs of
// the stream need checking; distance payloads break runs with NUL-heavy
// big-endian integers.

inline std::unordered_set<std::string> qi_value_set(const RecordSet& recs) {
  std::unordered_set<std::string> values;
  for (const auto& r : recs.records)
    for (const auto& v : r.values)
      if (v.size() >= 3) values.insert(v);
  return values;
}

inline std::optional<std::string> leakage_scan(const std::vector<uint8_t>& bytes,
                                               const std::unordered_set<std::string>& values) {
  size_t max_len = 0;
  for (const auto& v : values) max_len = std::max(max_len, v.size());
  if (max_len < 3) return std::nullopt;
  auto printable = [](uint8_t b) { return b >= 0x20 && b <= 0x7E; };
  size_t i = 0;
  while (i < bytes.size()) {
    if (!printable(bytes[i])) {
      ++i;
      continue;
    }
    size_t run_begin = i;
    while (i < bytes.size() && printable(bytes[i])) ++i;
    size_t run_len = i - run_begin;
    if (run_len < 3) continue;
    const char* run = reinterpret_cast<const char*>(bytes.data() + run_begin);
    for (size_t s = 0; s + 3 <= run_len; ++s)
      for (size_t l = 3; l <= std::min(max_len, run_len - s); ++l) {
        std::string candidate(run + s, l);
        if (values.count(candidate)) return candidate;
      }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Session driver. Party A initiates every exchange; party B answers. Bulk
// batch exchange is strictly one direction at a time so neither side can
// deadlock on a full socket buffer.

struct SessionResult {
  MatchArray matches;  // record_id_a is always party A's id
  std::vector<std::pair<std::string, std::string>> peer_matches;
  double match_seconds = 0.0;
};

namespace detail {

constexpr size_t kBatchRecords = 1024;
constexpr uint16_t kProtocolVersion = 1;

struct HelloInfo {
  uint16_t version = 0;
  Party party = Party::A;
  uint32_t record_count = 0;
  uint32_t batch_count = 0;
};

inline std::vector<uint8_t> encode_hello(const HelloInfo& h) {
  std::vector<uint8_t> out;
  append_u16(out, h.version);
  append_u8(out, h.party == Party::A ? 0 : 1);
  append_u32(out, h.record_count);
  append_u32(out, h.batch_count);
  return out;
}

inline HelloInfo decode_hello(const std::vector<uint8_t>& payload) {
  try {
    ByteReader r(payload.data(), payload.size());
    HelloInfo h;
    h.version = r.u16();
    h.party = r.u8() == 0 ? Party::A : Party::B;
    h.record_count = r.u32();
    h.batch_count = r.u32();
    if (!r.done()) throw ProtocolError(AbortKind::ProtocolViolation, "oversized Hello payload");
    return h;
  } catch (const ByteUnderflow&) {
    throw ProtocolError(AbortKind::ProtocolViolation, "truncated Hello payload");
  }
}

class Session {
 public:
  Session(Party role, Transport& transport) : role_(role), transport_(transport) {}

  void send(MsgKind kind, std::vector<uint8_t> payload = {}) {
    transport_.send(ProtocolMessage{kind, std::move(payload)});
  }

  // Receives one message and enforces protocol order. A peer Error aborts;
  // any other unexpected kind is answered with an Error before aborting.
  ProtocolMessage expect(MsgKind kind) {
    ProtocolMessage msg = transport_.receive();
    if (msg.kind == MsgKind::Error) {
      std::string reason(msg.payload.begin(), msg.payload.end());
      AbortKind abort = reason.rfind("agreement-mismatch", 0) == 0 ? AbortKind::AgreementMismatch
                                                                   : AbortKind::ProtocolViolation;
      throw ProtocolError(abort, "peer aborted: " + reason);
    }
    if (msg.kind != kind) {
      abort_with("protocol-order: expected " + std::string(msg_kind_name(kind)) + ", got " +
                 msg_kind_name(msg.kind));
    }
    return msg;
  }

  [[noreturn]] void abort_with(const std::string& reason) {
    try {
      send(MsgKind::Error, std::vector<uint8_t>(reason.begin(), reason.end()));
    } catch (...) {
      // The abort reason matters more than a failed courtesy notification.
    }
    AbortKind kind = reason.rfind("agreement-mismatch", 0) == 0 ? AbortKind::AgreementMismatch
                                                                : AbortKind::ProtocolViolation;
    throw ProtocolError(kind, reason);
  }

  // A sends first, B answers; returns the peer's message.
  ProtocolMessage exchange(MsgKind kind, std::vector<uint8_t> payload) {
    if (role_ == Party::A) {
      send(kind, std::move(payload));
      return expect(kind);
    }
    ProtocolMessage peer = expect(kind);
    send(kind, std::move(payload));
    return peer;
  }

  Party role() const { return role_; }

 private:
  Party role_;
  Transport& transport_;
};

}  // namespace detail

inline SessionResult run_party_session(Party role, const RecordSet& recs, const ReferenceSet& rs,
                                       const ExperimentConfig& cfg, Transport& transport) {
  cfg.validate();
  if (recs.records.empty()) throw DataError("party has no records to link");
  if (!validate_disjointness(rs, recs))
    throw DataError("recordset shares values with the reference set");
  AttributeMapping mapping = cfg.resolve_mapping_for(recs.schema, rs.schema);
  ResolvedMapping resolved = resolve_mapping(mapping, recs.schema, rs.schema);

  detail::Session session(role, transport);
  const char* role_tag = role == Party::A ? "A" : "B";

  // Hello carries the batch plan so the stream of SmashedBatch frames is
  // self-delimiting.
  detail::HelloInfo my_hello;
  my_hello.version = detail::kProtocolVersion;
  my_hello.party = role;
  my_hello.record_count = static_cast<uint32_t>(recs.records.size());
  my_hello.batch_count = static_cast<uint32_t>(
      (recs.records.size() + detail::kBatchRecords - 1) / detail::kBatchRecords);
  ProtocolMessage peer_msg =
      session.exchange(MsgKind::Hello, detail::encode_hello(my_hello));
  detail::HelloInfo peer_hello = detail::decode_hello(peer_msg.payload);
  if (peer_hello.version != detail::kProtocolVersion)
    session.abort_with("protocol-version: peer speaks version " +
                       std::to_string(peer_hello.version));
  if (peer_hello.party == role)
    session.abort_with(std::string("protocol-role: both parties claim role ") + role_tag);
  if (peer_hello.record_count == 0 || peer_hello.batch_count == 0)
    session.abort_with("protocol-empty: peer announces no records");

  // Agreement check: serialized agreements must be byte-identical.
  ProtocolAgreement agreement = ProtocolAgreement::build(rs, recs.schema, mapping);
  std::vector<uint8_t> agreement_bytes = agreement.serialize();
  ProtocolMessage peer_agreement = session.exchange(MsgKind::AgreementCheck, agreement_bytes);
  if (peer_agreement.payload != agreement_bytes)
    session.abort_with("agreement-mismatch: reference set, mapping, or schema differ");

  // Local preparation: smash own records, build the synthetic training set
  // from corrupted twins, train the local model. Nothing here touches the
  // transport.
  std::vector<SmashedVector> own_smashed = smash_recordset(recs, rs, resolved);

  size_t train_count = std::min(cfg.training_size, recs.records.size());
  if (train_count < 2) throw DataError("training size leaves fewer than two records");
  RecordSet train_subset;
  train_subset.party = recs.party;
  train_subset.schema = recs.schema;
  train_subset.records.assign(recs.records.begin(),
                              recs.records.begin() + static_cast<ptrdiff_t>(train_count));
  CorruptionSpec corruption{cfg.errors_per_row, 100};
  RecordSet corrupted = corrupt_recordset(
      train_subset, corruption,
      derive_seed(cfg.rng_seed, std::string("protocol-corrupt-") + role_tag));
  std::vector<SmashedVector> corrupted_smashed = smash_recordset(corrupted, rs, resolved);
  std::vector<SmashedVector> train_smashed(own_smashed.begin(),
                                           own_smashed.begin() +
                                               static_cast<ptrdiff_t>(train_count));
  std::vector<LabeledExample> training = build_training_data(
      train_smashed, corrupted_smashed,
      derive_seed(cfg.rng_seed, std::string("protocol-pairs-") + role_tag));
  SvmParams svm_params;
  svm_params.kernel = cfg.kernel;
  svm_params.c = cfg.c;
  svm_params.gamma = cfg.gamma;
  svm_params.seed = derive_seed(cfg.rng_seed, std::string("protocol-svm-") + role_tag);
  SvmModel model = train_svm(training, svm_params);

  // Bulk exchange: A streams all of its batches, then B streams back.
  auto send_batches = [&] {
    for (size_t off = 0; off < own_smashed.size(); off += detail::kBatchRecords) {
      size_t end = std::min(own_smashed.size(), off + detail::kBatchRecords);
      std::vector<SmashedVector> chunk(own_smashed.begin() + static_cast<ptrdiff_t>(off),
                                       own_smashed.begin() + static_cast<ptrdiff_t>(end));
      session.send(MsgKind::SmashedBatch, encode_smashed_batch(chunk));
    }
  };
  auto receive_batches = [&] {
    std::vector<SmashedVector> all;
    all.reserve(peer_hello.record_count);
    for (uint32_t b = 0; b < peer_hello.batch_count; ++b) {
      ProtocolMessage msg = session.expect(MsgKind::SmashedBatch);
      std::vector<SmashedVector> chunk;
      try {
        chunk = decode_smashed_batch(msg.payload);
      } catch (const BatchError& err) {
        session.abort_with(std::string("protocol-batch: ") + err.what());
      }
      std::move(chunk.begin(), chunk.end(), std::back_inserter(all));
    }
    if (all.size() != peer_hello.record_count)
      session.abort_with("protocol-batch: record count disagrees with Hello");
    return all;
  };
  std::vector<SmashedVector> peer_smashed;
  if (role == Party::A) {
    send_batches();
    peer_smashed = receive_batches();
  } else {
    peer_smashed = receive_batches();
    send_batches();
  }

  // Local split matching over (A smashed, B smashed); only this is timed.
  SessionResult result;
  auto t0 = std::chrono::steady_clock::now();
  result.matches = role == Party::A ? split_match(own_smashed, peer_smashed, model)
                                    : split_match(peer_smashed, own_smashed, model);
  auto t1 = std::chrono::steady_clock::now();
  result.match_seconds = std::chrono::duration<double>(t1 - t0).count();

  // Exchange matched id pairs as a CSV payload, then close with Done.
  std::string matches_csv = "record_id_a,record_id_b\r\n";
  for (const auto& e : result.matches.entries)
    if (e.predicted_match) {
      matches_csv += csv::escape(e.record_id_a);
      matches_csv += ',';
      matches_csv += csv::escape(e.record_id_b);
      matches_csv += "\r\n";
    }
  ProtocolMessage peer_matches = session.exchange(
      MsgKind::MatchResult, std::vector<uint8_t>(matches_csv.begin(), matches_csv.end()));
  {
    std::string text(peer_matches.payload.begin(), peer_matches.payload.end());
    std::vector<std::vector<std::string>> rows;
    try {
      rows = csv::parse_string(text);
    } catch (const DataError& err) {
      session.abort_with(std::string("protocol-result: ") + err.what());
    }
    if (rows.empty() || rows[0] != std::vector<std::string>{"record_id_a", "record_id_b"})
      session.abort_with("protocol-result: missing match result header");
    for (size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() != 2)
        session.abort_with("protocol-result: match row arity");
      result.peer_matches.emplace_back(rows[i][0], rows[i][1]);
    }
  }
  session.exchange(MsgKind::Done, {});
  return result;
}

inline MatchArray run_party(Party role, const RecordSet& recs, const ReferenceSet& rs,
                            const ExperimentConfig& cfg, Transport& transport) {
  return run_party_session(role, recs, rs, cfg, transport).matches;
}

// Runs both parties concurrently over caller-supplied transports, B on a
// helper thread. If A fails outside a session exchange, B can block until
// A's transport is torn down, so callers owning the transports should keep
// them in a scope that ends on failure (run_in_process below does).
inline std::pair<SessionResult, SessionResult> run_two_party(
    const RecordSet& recs_a, const RecordSet& recs_b, const ReferenceSet& rs,
    const ExperimentConfig& cfg, Transport& transport_a, Transport& transport_b) {
  // Local failures outside the session's own abort paths (bad config, data
  // errors during training) still notify the peer, so the other thread never
  // blocks on a receive that cannot complete.
  auto run_side = [&rs, &cfg](Party role, const RecordSet& recs,
                              Transport& transport) -> SessionResult {
    try {
      return run_party_session(role, recs, rs, cfg, transport);
    } catch (const ProtocolError&) {
      throw;  // session aborts already notify the peer where possible
    } catch (const std::exception& e) {
      std::string reason = std::string("peer-failure: ") + e.what();
      try {
        transport.send(
            ProtocolMessage{MsgKind::Error, std::vector<uint8_t>(reason.begin(), reason.end())});
      } catch (...) {
      }
      throw;
    }
  };
  SessionResult result_b;
  std::exception_ptr error_b;
  std::thread side_b([&] {
    try {
      result_b = run_side(Party::B, recs_b, transport_b);
    } catch (...) {
      error_b = std::current_exception();
    }
  });
  SessionResult result_a;
  std::exception_ptr error_a;
  try {
    result_a = run_side(Party::A, recs_a, transport_a);
  } catch (...) {
    error_a = std::current_exception();
  }
  side_b.join();
  if (error_a) std::rethrow_exception(error_a);
  if (error_b) std::rethrow_exception(error_b);
  return {std::move(result_a), std::move(result_b)};
}

// Runs both parties over a fresh in-process channel.
inline std::pair<SessionResult, SessionResult> run_in_process(const RecordSet& recs_a,
                                                              const RecordSet& recs_b,
                                                              const ReferenceSet& rs,
                                                              const ExperimentConfig& cfg) {
  auto [end_a, end_b] = make_channel_pair();
  return run_two_party(recs_a, recs_b, rs, cfg, *end_a, *end_b);
}

}  // namespace splitlink
