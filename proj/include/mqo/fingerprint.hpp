#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>

#include "mqo/plan.hpp"

namespace mqo {

/// Identifier of a single operator. Filter, Project and Scan are loose (no
/// attributes; a scan's table is part of its label), everything else is
/// strict and carries its canonical attributes.
struct OperatorId {
  std::string label;
  std::optional<std::string> attrs;

  std::string to_string() const;
  bool operator==(const OperatorId&) const = default;
};

OperatorId operator_id(const PlanNode& node);
bool is_loose(OpKind kind);

/// Binary operators whose children are hashed in sorted order.
bool is_commutative(const PlanNode& node);

struct Fingerprint {
  std::array<uint8_t, 16> digest{};

  std::string hex() const;
  static Fingerprint from_hex(const std::string& hex);
  auto operator<=>(const Fingerprint&) const = default;
};

struct FingerprintHash {
  size_t operator()(const Fingerprint& f) const;
};

Fingerprint fingerprint(const PlanPtr& subtree);

/// Fingerprints of every node of a tree, keyed by node identity.
using FingerprintMap = std::unordered_map<const PlanNode*, Fingerprint>;
FingerprintMap fingerprint_all(const PlanPtr& root);

/// Expanded canonical string the digest stands for: equal strings iff the
/// trees are identical up to loose attributes and commutative child order.
std::string fingerprint_string(const PlanPtr& subtree);

}  // namespace mqo
