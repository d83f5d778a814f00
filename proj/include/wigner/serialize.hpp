#pragma once

// JSON records for kernels, chaos expansions and gradients.
//
//   kernel:   {"order": n, "entries": [{"idx": [..], "re": x, "im": y}, ...]}
//   chaos:    [kernel, ...] sorted by degree
//   gradient: [{"tuple": [..], "blocks": [{"degrees": [..], "kernel": kernel}, ...]}, ...]
//
// Entries are written in lexicographic index order. Doubles are printed
// with round-trip precision, so deserialize(serialize(x)) == x bitwise.

#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <optional>
#include <string>

#include "wigner/malliavin.hpp"

namespace wigner {

using json = nlohmann::json;

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& where, const std::string& what) {
  throw ParseError("at " + (where.empty() ? std::string("/") : where) + ": " + what);
}

inline const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) parse_fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) parse_fail(where, std::string("missing field '") + key + "'");
  return *it;
}

inline std::size_t read_natural(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    parse_fail(where, "expected a non-negative integer");
  return j.get<std::size_t>();
}

inline double read_double(const json& j, const std::string& where) {
  if (!j.is_number()) parse_fail(where, "expected a number");
  return j.get<double>();
}

template <typename T>
std::vector<T> read_naturals(const json& j, const std::string& where) {
  if (!j.is_array()) parse_fail(where, "expected an array of integers");
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::size_t v = read_natural(j[i], where + "/" + std::to_string(i));
    if (v > std::numeric_limits<T>::max()) parse_fail(where + "/" + std::to_string(i), "index out of range");
    out.push_back(static_cast<T>(v));
  }
  return out;
}

inline json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("at byte " + std::to_string(e.byte) + ": malformed JSON");
  }
}

}  // namespace detail

inline json to_json(const Kernel& k) {
  json entries = json::array();
  for (const auto& [w, c] : k.entries())
    entries.push_back({{"idx", w}, {"re", c.real()}, {"im", c.imag()}});
  return {{"order", k.order()}, {"entries", std::move(entries)}};
}

inline json to_json(const ChaosExpansion& f) {
  json out = json::array();
  for (const auto& [n, k] : f.components()) out.push_back(to_json(k));
  return out;
}

inline json to_json(const Gradient& g) {
  json out = json::array();
  for (const auto& [tuple, m] : g.components()) {
    json blocks = json::array();
    for (const auto& [d, k] : m.blocks()) blocks.push_back({{"degrees", d}, {"kernel", to_json(k)}});
    out.push_back({{"tuple", tuple}, {"blocks", std::move(blocks)}});
  }
  return out;
}

inline Kernel kernel_from_json(const json& j, const std::string& where = "") {
  const std::size_t order = detail::read_natural(detail::require(j, "order", where), where + "/order");
  const json& entries = detail::require(j, "entries", where);
  if (!entries.is_array()) detail::parse_fail(where + "/entries", "expected an array");
  Kernel k(order);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string at = where + "/entries/" + std::to_string(i);
    const Word idx = detail::read_naturals<BasisIndex>(detail::require(entries[i], "idx", at), at + "/idx");
    if (idx.size() != order)
      detail::parse_fail(at + "/idx", "index length " + std::to_string(idx.size()) +
                                          " does not match order " + std::to_string(order));
    const double re = detail::read_double(detail::require(entries[i], "re", at), at + "/re");
    const double im = detail::read_double(detail::require(entries[i], "im", at), at + "/im");
    if (k.entries().contains(idx)) detail::parse_fail(at + "/idx", "duplicate index " + to_string(idx));
    k.set(idx, cx(re, im));
  }
  return k;
}

inline ChaosExpansion chaos_from_json(const json& j, const std::string& where = "") {
  if (!j.is_array()) detail::parse_fail(where, "expected an array of kernel records");
  ChaosExpansion f;
  std::optional<std::size_t> previous;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + "/" + std::to_string(i);
    Kernel k = kernel_from_json(j[i], at);
    if (previous && k.order() <= *previous)
      detail::parse_fail(at, "degree " + std::to_string(k.order()) + " is not above the previous record");
    previous = k.order();
    f.add(k, 1.0, 0.0);
  }
  return f;
}

inline Gradient gradient_from_json(const json& j, const std::string& where = "") {
  if (!j.is_array() || j.empty()) detail::parse_fail(where, "expected a non-empty array of components");
  std::size_t order = 0;
  Gradient g(1);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + "/" + std::to_string(i);
    const Word tuple = detail::read_naturals<BasisIndex>(detail::require(j[i], "tuple", at), at + "/tuple");
    if (i == 0) {
      if (tuple.empty()) detail::parse_fail(at + "/tuple", "gradient order must be at least 1");
      order = tuple.size();
      g = Gradient(order);
    } else if (tuple.size() != order) {
      detail::parse_fail(at + "/tuple", "tuple length differs from gradient order " + std::to_string(order));
    }
    const json& blocks = detail::require(j[i], "blocks", at);
    if (!blocks.is_array()) detail::parse_fail(at + "/blocks", "expected an array");
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const std::string bt = at + "/blocks/" + std::to_string(b);
      const Degrees d = detail::read_naturals<std::size_t>(detail::require(blocks[b], "degrees", bt), bt + "/degrees");
      if (d.size() != order + 1) detail::parse_fail(bt + "/degrees", "expected " + std::to_string(order + 1) + " legs");
      const Kernel k = kernel_from_json(detail::require(blocks[b], "kernel", bt), bt + "/kernel");
      if (k.order() != std::accumulate(d.begin(), d.end(), std::size_t{0}))
        detail::parse_fail(bt + "/kernel", "kernel order differs from the sum of leg degrees");
      for (const auto& [w, c] : k.entries()) g.add_entry(tuple, d, w, c);
    }
  }
  return g;
}

inline std::string serialize(const Kernel& k) { return to_json(k).dump(); }
inline std::string serialize(const ChaosExpansion& f) { return to_json(f).dump(); }
inline std::string serialize(const Gradient& g) { return to_json(g).dump(); }

inline Kernel deserialize_kernel(const std::string& text) { return kernel_from_json(detail::parse_text(text)); }
inline ChaosExpansion deserialize_chaos(const std::string& text) {
  return chaos_from_json(detail::parse_text(text));
}
inline Gradient deserialize_gradient(const std::string& text) {
  return gradient_from_json(detail::parse_text(text));
}

}  // namespace wigner
