// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "odns/wire.hpp"

#include <algorithm>
#include <cctype>

#include "odns/errors.hpp"

namespace odns::wire {

namespace {

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

void put_u32(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

class Reader {
public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::size_t offset() const { return offset_; }
  void seek(std::size_t offset) { offset_ = offset; }
  std::size_t remaining() const { return data_.size() - offset_; }

  std::uint8_t u8() {
    need(1);
    return data_[offset_++];
  }

  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>((data_[offset_] << 8) | data_[offset_ + 1]);
    offset_ += 2;
    return v;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = (static_cast<std::uint32_t>(data_[offset_]) << 24) |
                      (static_cast<std::uint32_t>(data_[offset_ + 1]) << 16) |
                      (static_cast<std::uint32_t>(data_[offset_ + 2]) << 8) |
                      static_cast<std::uint32_t>(data_[offset_ + 3]);
    offset_ += 4;
    return v;
  }

  Bytes bytes(std::size_t n) {
    need(n);
    Bytes out(data_.begin() + static_cast<std::ptrdiff_t>(offset_),
              data_.begin() + static_cast<std::ptrdiff_t>(offset_ + n));
    offset_ += n;
    return out;
  }

private:
  void need(std::size_t n) const {
    if (remaining() < n) throw MalformedMessage("truncated at offset " + std::to_string(offset_));
  }

  std::span<const std::uint8_t> data_;
  std::size_t offset_ = 0;
};

void encode_name(const DnsName& name, Bytes& out) {
  if (name.presentation_length() > kMaxNamePresentationLength || name.wire_length() > kMaxNameWireLength) {
    throw OversizeName(name.presentation().substr(0, 64));
  }
  for (const auto& label : name.labels()) {
    if (label.empty() || label.size() > kMaxLabelLength) {
      throw OversizeName("label of " + std::to_string(label.size()) + " bytes");
    }
    out.push_back(static_cast<std::uint8_t>(label.size()));
    out.insert(out.end(), label.begin(), label.end());
  }
  out.push_back(0);
}

DnsName decode_name(Reader& r) {
  std::vector<std::string> labels;
  std::size_t total_wire = 1;
  std::size_t jumps = 0;
  std::optional<std::size_t> resume;

  for (;;) {
    std::size_t here = r.offset();
    std::uint8_t len = r.u8();
    if (len == 0) break;
    if ((len & 0xc0) == 0xc0) {
      std::size_t target = static_cast<std::size_t>(len & 0x3f) << 8 | r.u8();
      // Pointers must reference earlier bytes; anything else can loop.
      if (target >= here) throw MalformedMessage("forward compression pointer");
      if (++jumps > 32) throw MalformedMessage("compression pointer chain too long");
      if (!resume) resume = r.offset();
      r.seek(target);
      continue;
    }
    if ((len & 0xc0) != 0) throw MalformedMessage("reserved label type");
    if (len > kMaxLabelLength) throw MalformedMessage("label overrun");
    Bytes raw = r.bytes(len);
    labels.emplace_back(raw.begin(), raw.end());
    total_wire += 1 + len;
    if (total_wire > kMaxNameWireLength) throw MalformedMessage("name exceeds 255 octets");
  }
  if (resume) r.seek(*resume);
  return DnsName::from_labels(std::move(labels));
}

ResourceRecord decode_rr(Reader& r) {
  ResourceRecord rr;
  rr.name = decode_name(r);
  rr.rtype = r.u16();
  rr.rclass = r.u16();
  rr.ttl = r.u32();
  std::uint16_t rdlen = r.u16();
  rr.rdata = r.bytes(rdlen);
  return rr;
}

std::vector<EdnsOption> parse_options(std::span<const std::uint8_t> rdata) {
  Reader r(rdata);
  std::vector<EdnsOption> opts;
  while (r.remaining() > 0) {
    if (r.remaining() < 4) throw MalformedMessage("truncated edns option");
    EdnsOption opt;
    opt.code = r.u16();
    std::uint16_t len = r.u16();
    opt.payload = r.bytes(len);
    opts.push_back(std::move(opt));
  }
  return opts;
}

Bytes serialize_options(const std::vector<EdnsOption>& opts) {
  Bytes out;
  for (const auto& opt : opts) {
    put_u16(out, opt.code);
    put_u16(out, static_cast<std::uint16_t>(opt.payload.size()));
    out.insert(out.end(), opt.payload.begin(), opt.payload.end());
  }
  return out;
}

}  // namespace

void DnsName::check_label(std::string_view label) {
  if (label.empty()) throw OversizeName("empty label");
  if (label.size() > kMaxLabelLength) {
    throw OversizeName("label of " + std::to_string(label.size()) + " bytes");
  }
}

void DnsName::check_total() const {
  if (presentation_length() > kMaxNamePresentationLength) {
    throw OversizeName("presentation form of " + std::to_string(presentation_length()) + " chars");
  }
  if (wire_length() > kMaxNameWireLength) {
    throw OversizeName("wire form of " + std::to_string(wire_length()) + " octets");
  }
}

DnsName DnsName::from_presentation(std::string_view text) {
  DnsName name;
  // Accept a single trailing dot and the bare root ("." or "").
  if (!text.empty() && text.back() == '.') text.remove_suffix(1);
  if (text.empty()) return name;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t dot = text.find('.', start);
    std::string_view label = text.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
    check_label(label);
    name.labels_.emplace_back(label);
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  name.check_total();
  return name;
}

DnsName DnsName::from_labels(std::vector<std::string> labels) {
  DnsName name;
  for (const auto& label : labels) check_label(label);
  name.labels_ = std::move(labels);
  name.check_total();
  return name;
}

std::string DnsName::presentation() const {
  std::string out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i) out.push_back('.');
    out += labels_[i];
  }
  return out;
}

std::size_t DnsName::presentation_length() const {
  if (labels_.empty()) return 0;
  std::size_t n = labels_.size() - 1;  // dots
  for (const auto& label : labels_) n += label.size();
  return n;
}

std::size_t DnsName::wire_length() const {
  std::size_t n = 1;  // terminal zero byte
  for (const auto& label : labels_) n += 1 + label.size();
  return n;
}

bool DnsName::ends_with(const DnsName& suffix) const {
  if (suffix.labels_.size() > labels_.size()) return false;
  return std::equal(suffix.labels_.rbegin(), suffix.labels_.rend(), labels_.rbegin());
}

DnsName DnsName::without_suffix(const DnsName& suffix) const {
  DnsName out;
  out.labels_.assign(labels_.begin(), labels_.end() - static_cast<std::ptrdiff_t>(suffix.labels_.size()));
  return out;
}

DnsName DnsName::appended(const DnsName& suffix) const {
  DnsName out = *this;
  out.labels_.insert(out.labels_.end(), suffix.labels_.begin(), suffix.labels_.end());
  out.check_total();
  return out;
}

DnsName DnsName::lowered() const {
  DnsName out = *this;
  for (auto& label : out.labels_) {
    std::transform(label.begin(), label.end(), label.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
  return out;
}

Bytes encode_message(const DnsMessage& msg) {
  Bytes out;
  out.reserve(128);
  put_u16(out, msg.id);
  put_u16(out, msg.flags.bits);
  put_u16(out, static_cast<std::uint16_t>(msg.questions.size()));
  put_u16(out, static_cast<std::uint16_t>(msg.answers.size()));
  put_u16(out, static_cast<std::uint16_t>(msg.authorities.size()));
  put_u16(out, static_cast<std::uint16_t>(msg.additionals.size()));
  for (const auto& q : msg.questions) {
    encode_name(q.name, out);
    put_u16(out, q.qtype);
    put_u16(out, q.qclass);
  }
  for (const auto* section : {&msg.answers, &msg.authorities, &msg.additionals}) {
    for (const auto& rr : *section) encode_record(rr, out);
  }
  return out;
}

void encode_record(const ResourceRecord& rr, Bytes& out) {
  encode_name(rr.name, out);
  put_u16(out, rr.rtype);
  put_u16(out, rr.rclass);
  put_u32(out, rr.ttl);
  if (rr.rdata.size() > 0xffff) throw MalformedMessage("rdata exceeds 65535 bytes");
  put_u16(out, static_cast<std::uint16_t>(rr.rdata.size()));
  out.insert(out.end(), rr.rdata.begin(), rr.rdata.end());
}

ResourceRecord decode_record(std::span<const std::uint8_t> data, std::size_t& offset) {
  Reader r(data);
  r.seek(offset);
  ResourceRecord rr = decode_rr(r);
  offset = r.offset();
  return rr;
}

DnsMessage decode_message(std::span<const std::uint8_t> data) {
  Reader r(data);
  if (data.size() < 12) throw MalformedMessage("header shorter than 12 bytes");
  DnsMessage msg;
  msg.id = r.u16();
  msg.flags.bits = r.u16();
  std::uint16_t qd = r.u16();
  std::uint16_t an = r.u16();
  std::uint16_t ns = r.u16();
  std::uint16_t ar = r.u16();
  for (std::uint16_t i = 0; i < qd; ++i) {
    Question q;
    q.name = decode_name(r);
    q.qtype = r.u16();
    q.qclass = r.u16();
    msg.questions.push_back(std::move(q));
  }
  for (std::uint16_t i = 0; i < an; ++i) msg.answers.push_back(decode_rr(r));
  for (std::uint16_t i = 0; i < ns; ++i) msg.authorities.push_back(decode_rr(r));
  for (std::uint16_t i = 0; i < ar; ++i) msg.additionals.push_back(decode_rr(r));
  return msg;
}

DnsMessage with_edns_option(DnsMessage msg, EdnsOption opt) {
  std::vector<EdnsOption> opts;
  std::optional<ResourceRecord> existing;
  // Collapse any existing OPT records into one, preserving option order.
  for (auto it = msg.additionals.begin(); it != msg.additionals.end();) {
    if (it->rtype == kTypeOpt) {
      auto parsed = parse_options(it->rdata);
      opts.insert(opts.end(), parsed.begin(), parsed.end());
      if (!existing) existing = *it;
      it = msg.additionals.erase(it);
    } else {
      ++it;
    }
  }
  bool replaced = false;
  for (auto& o : opts) {
    if (o.code == opt.code) {
      o = opt;
      replaced = true;
      break;
    }
  }
  if (!replaced) opts.push_back(std::move(opt));

  ResourceRecord rr;
  if (existing) rr = *existing;
  rr.name = DnsName();
  rr.rtype = kTypeOpt;
  if (!existing) {
    rr.rclass = kEdnsUdpPayloadSize;
    rr.ttl = 0;
  }
  rr.rdata = serialize_options(opts);
  msg.additionals.push_back(std::move(rr));
  return msg;
}

std::optional<EdnsOption> find_edns_option(const DnsMessage& msg, std::uint16_t code) {
  for (const auto& rr : msg.additionals) {
    if (rr.rtype != kTypeOpt) continue;
    for (auto& opt : parse_options(rr.rdata)) {
      if (opt.code == code) return opt;
    }
  }
  return std::nullopt;
}

DnsMessage without_edns_option(DnsMessage msg, std::uint16_t code) {
  for (auto& rr : msg.additionals) {
    if (rr.rtype != kTypeOpt) continue;
    auto opts = parse_options(rr.rdata);
    std::erase_if(opts, [code](const EdnsOption& o) { return o.code == code; });
    rr.rdata = serialize_options(opts);
  }
  return msg;
}

EdnsOption make_ecs_opt_out() {
  // family 0, source prefix length 0, scope prefix length 0, no address.
  return EdnsOption{kOptionClientSubnet, Bytes{0, 0, 0, 0}};
}

bool is_ecs_opt_out(const EdnsOption& opt) {
  return opt.code == kOptionClientSubnet && opt.payload.size() == 4 && opt.payload[2] == 0;
}

DnsMessage make_query(std::uint16_t id, const DnsName& name, std::uint16_t qtype) {
  DnsMessage msg;
  msg.id = id;
  msg.flags.set_rd(true);
  msg.questions.push_back(Question{name, qtype, kClassIn});
  return msg;
}

DnsMessage make_response(const DnsMessage& query, std::uint8_t rcode) {
  DnsMessage msg;
  msg.id = query.id;
  msg.flags.set_qr(true);
  msg.flags.set_rd(query.flags.rd());
  msg.flags.set_ra(true);
  msg.flags.set_rcode(rcode);
  msg.questions = query.questions;
  return msg;
}

}  // namespace odns::wire
