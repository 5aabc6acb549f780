#include "mqo/fingerprint.hpp"

#include <algorithm>
#include <cstring>

#include <openssl/evp.h>

#include "mqo/error.hpp"

namespace mqo {

std::string OperatorId::to_string() const { return attrs ? label + "{" + *attrs + "}" : label; }

bool is_loose(OpKind kind) { return kind == OpKind::Filter || kind == OpKind::Project || kind == OpKind::Scan; }

OperatorId operator_id(const PlanNode& node) {
  std::string label(mqo::to_string(node.kind()));
  if (node.kind() == OpKind::Scan) return {label + ":" + node.as<ScanOp>().table, std::nullopt};
  if (is_loose(node.kind())) return {label, std::nullopt};
  return {label, canonical_attrs(node)};
}

// Join conditions are canonical (operand order independent of child order),
// so swapping join inputs never changes the condition.
bool is_commutative(const PlanNode& node) {
  switch (node.kind()) {
    case OpKind::Join:
    case OpKind::CartesianProduct:
    case OpKind::Union:
      return true;
    default:
      return false;
  }
}

std::string Fingerprint::hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(32);
  for (uint8_t b : digest) {
    out += digits[b >> 4];
    out += digits[b & 15];
  }
  return out;
}

Fingerprint Fingerprint::from_hex(const std::string& hex) {
  if (hex.size() != 32) throw Error(ErrorCode::InvalidArgument, "fingerprint must be 32 hex chars");
  auto nibble = [&](char c) -> uint8_t {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw Error(ErrorCode::InvalidArgument, "bad fingerprint hex '" + hex + "'");
  };
  Fingerprint f;
  for (size_t i = 0; i < 16; ++i) f.digest[i] = static_cast<uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  return f;
}

size_t FingerprintHash::operator()(const Fingerprint& f) const {
  size_t h;
  std::memcpy(&h, f.digest.data(), sizeof(h));
  return h;
}

namespace {

Fingerprint hash_bytes(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::InvalidArgument, "sha256 failed");
  }
  Fingerprint f;
  std::copy(md, md + 16, f.digest.begin());
  return f;
}

// Length-prefixed so that attribute text can never be confused with the
// separators.
std::string hash_input(const PlanNode& node, std::vector<Fingerprint> children) {
  if (is_commutative(node)) std::sort(children.begin(), children.end());
  std::string id = operator_id(node).to_string();
  std::string out = std::to_string(id.size()) + ":" + id;
  for (const auto& c : children) out += "|" + c.hex();
  return out;
}

const Fingerprint& fingerprint_rec(const PlanPtr& node, FingerprintMap& memo) {
  if (auto it = memo.find(node.get()); it != memo.end()) return it->second;
  std::vector<Fingerprint> children;
  for (const auto& c : node->children()) children.push_back(fingerprint_rec(c, memo));
  return memo.emplace(node.get(), hash_bytes(hash_input(*node, std::move(children)))).first->second;
}

}  // namespace

Fingerprint fingerprint(const PlanPtr& subtree) {
  FingerprintMap memo;
  return fingerprint_rec(subtree, memo);
}

FingerprintMap fingerprint_all(const PlanPtr& root) {
  FingerprintMap memo;
  fingerprint_rec(root, memo);
  return memo;
}

std::string fingerprint_string(const PlanPtr& subtree) {
  std::vector<std::string> children;
  for (const auto& c : subtree->children()) children.push_back(fingerprint_string(c));
  if (is_commutative(*subtree)) std::sort(children.begin(), children.end());
  std::string out = operator_id(*subtree).to_string() + "(";
  for (size_t i = 0; i < children.size(); ++i) out += (i ? "," : "") + children[i];
  return out + ")";
}

}  // namespace mqo
