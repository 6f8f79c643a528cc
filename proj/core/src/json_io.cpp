#include "tiledeform/json_io.hpp"

namespace tiledeform {

mpq_class rational_from_json(const json& j, const std::string& where) {
  if (j.is_number_integer()) return mpq_class(j.get<long>());
  if (j.is_string()) {
    mpq_class q;
    if (q.set_str(j.get<std::string>(), 10) != 0 || j.get<std::string>().empty())
      throw SchemaError(where, "not a rational literal: '" + j.get<std::string>() + "'");
    q.canonicalize();
    return q;
  }
  throw SchemaError(where, "expected an integer or a \"p/q\" string");
}

Quad quad_from_json(const json& j, const std::string& where) {
  if (j.is_object()) {
    const mpq_class a = j.contains("a") ? rational_from_json(j.at("a"), where + ".a") : mpq_class(0);
    const mpq_class b = j.contains("b") ? rational_from_json(j.at("b"), where + ".b") : mpq_class(0);
    const long d = j.contains("D") ? j.at("D").get<long>() : 1;
    if (!is_square_free(d)) throw SchemaError(where + ".D", "radicand " + std::to_string(d) + " is not square-free");
    return Quad(a, b, d);
  }
  return Quad(rational_from_json(j, where));
}

json quad_to_json(const Quad& q) {
  json j;
  j["a"] = q.rational_part().get_str();
  j["b"] = q.irrational_part().get_str();
  j["D"] = q.radicand();
  return j;
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw SchemaError(where + "." + key, "missing required key");
  return obj.at(key);
}

}  // namespace tiledeform
