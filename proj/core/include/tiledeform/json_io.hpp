#pragma once

#include <json.hpp>
#include <stdexcept>
#include <string>

#include "tiledeform/quad.hpp"

namespace tiledeform {

using json = nlohmann::json;

/// Malformed input document. `where` names the offending key path.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(where) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

/// Accepts an integer, a "p/q" string, or {"a": "p/q", "b": "p/q", "D": n}.
Quad quad_from_json(const json& j, const std::string& where);
mpq_class rational_from_json(const json& j, const std::string& where);

/// Exact values serialize as {"D": n, "a": "p/q", "b": "p/q"}.
json quad_to_json(const Quad& q);

const json& require(const json& obj, const std::string& key, const std::string& where);

}  // namespace tiledeform
